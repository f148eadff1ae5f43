"""ARFF and topic-table writers, plus a minimal ARFF reader."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Union

import numpy as np

from .corpus import Corpus
from .inference import TopicModel

PathLike = Union[str, Path]
ArffMode = Literal["doc-topics", "topic-words"]

RELATION = "nstage_lda"
_PLAIN = re.compile(r"^[^\s,{}'\"%]+$")


class ExportError(ValueError):
    pass


def arff_quote(name: str) -> str:
    if _PLAIN.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _write(path: PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def arff_text(model: TopicModel, corpus: Corpus, mode: ArffMode = "doc-topics") -> str:
    """Render the ARFF document for ``mode``.

    ``doc-topics``: one row per document, the document's topic proportions
    followed by its class label. ``topic-words``: one row per topic, the
    topic's weight for every dictionary word, no class attribute.
    """
    if mode == "topic-words":
        lines = [f"@RELATION {RELATION}", ""]
        lines += [f"@ATTRIBUTE {arff_quote(w)} NUMERIC" for w in model.vocabulary.words]
        lines += ["", "@DATA"]
        lines += [",".join(f"{v:.6f}" for v in row) for row in model.phi]
        return "\n".join(lines) + "\n"
    if mode != "doc-topics":
        raise ExportError(f"unknown ARFF mode {mode!r}")
    if not corpus.is_labeled:
        raise ExportError("labels required for ARFF export")
    if len(corpus) != model.theta.shape[0]:
        raise ExportError("corpus does not match model documents")
    labels = sorted(corpus.labels)
    lines = [f"@RELATION {RELATION}", ""]
    lines += [f"@ATTRIBUTE t{k} NUMERIC" for k in range(model.num_topics)]
    lines.append("@ATTRIBUTE class {" + ",".join(arff_quote(lab) for lab in labels) + "}")
    lines += ["", "@DATA"]
    for row, doc in zip(model.theta, corpus.documents):
        lines.append(",".join(f"{v:.6f}" for v in row) + "," + arff_quote(doc.label))
    return "\n".join(lines) + "\n"


def export_arff(model: TopicModel, corpus: Corpus, path: PathLike,
                mode: ArffMode = "doc-topics") -> None:
    _write(path, arff_text(model, corpus, mode))


def top_words(model: TopicModel, k: int, top_m: int) -> list[tuple[str, float]]:
    """The ``top_m`` heaviest words of topic ``k``; equal weights keep word-id order."""
    if top_m < 1:
        raise ExportError("top_m must be >= 1")
    row = model.phi[k]
    order = np.lexsort((np.arange(row.size), -row))[:top_m]
    return [(model.vocabulary.words[i], float(row[i])) for i in order]


def topics_table(model: TopicModel, top_m: int) -> str:
    lines = ["topic\tword\tweight"]
    for k in range(model.num_topics):
        lines += [f"{k}\t{w}\t{p:.6f}" for w, p in top_words(model, k, top_m)]
    return "\n".join(lines) + "\n"


def export_topics(model: TopicModel, top_m: int, path: PathLike) -> None:
    _write(path, topics_table(model, top_m))


@dataclass
class ArffData:
    relation: str
    attributes: list[tuple[str, str]]
    rows: list[list[Union[float, str]]]


def _split_values(line: str) -> list[str]:
    out, buf, quote, esc = [], [], None, False
    for ch in line:
        if esc:
            buf.append(ch)
            esc = False
        elif ch == "\\" and quote:
            esc = True
        elif quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    out.append("".join(buf).strip())
    return out


def _attribute(decl: str) -> tuple[str, str]:
    decl = decl.strip()
    if decl[0] in "'\"":
        q = decl[0]
        i = 1
        name = []
        while decl[i] != q:
            if decl[i] == "\\":
                i += 1
            name.append(decl[i])
            i += 1
        return "".join(name), decl[i + 1 :].strip()
    name, _, kind = decl.partition(" ")
    return name, kind.strip()


def parse_arff(text: str) -> ArffData:
    """Parse dense ARFF text. NUMERIC values become floats, others stay strings."""
    relation, attributes, rows = "", [], []
    in_data = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            values = _split_values(line)
            if len(values) != len(attributes):
                raise ExportError(f"row has {len(values)} values, expected {len(attributes)}")
            rows.append([float(v) if kind.upper() in ("NUMERIC", "REAL") else v
                         for v, (_, kind) in zip(values, attributes)])
            continue
        keyword, _, rest = line.partition(" ")
        keyword = keyword.upper()
        if keyword == "@RELATION":
            relation = rest.strip()
        elif keyword == "@ATTRIBUTE":
            attributes.append(_attribute(rest))
        elif keyword == "@DATA":
            in_data = True
        else:
            raise ExportError(f"unexpected line: {line!r}")
    return ArffData(relation, attributes, rows)


def read_arff(path: PathLike) -> ArffData:
    return parse_arff(Path(path).read_text(encoding="utf-8"))
