"""Text ingestion: tokenization, vocabulary and id-encoded corpora."""

from __future__ import annotations

import logging
import string
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Raised for invalid corpus input or configuration."""


@dataclass(frozen=True)
class Vocabulary:
    """Bidirectional word <-> id map. Ids are dense and 0-based."""

    words: tuple[str, ...] = ()
    index: Mapping[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        words = tuple(self.words)
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise CorpusError("duplicate tokens in vocabulary")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self.index

    def __iter__(self):
        return iter(self.words)

    def encode(self, tokens: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index[t] for t in tokens)

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.words[i] for i in ids]

    @classmethod
    def from_tokens(cls, token_lists: Iterable[Iterable[str]]) -> "Vocabulary":
        """Build a vocabulary assigning ids in first-occurrence order."""
        seen: dict[str, None] = {}
        for tokens in token_lists:
            for t in tokens:
                seen.setdefault(t, None)
        return cls(tuple(seen))


@dataclass(frozen=True)
class Document:
    tokens: tuple[int, ...]
    label: Optional[str] = None
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    vocabulary: Vocabulary
    documents: tuple[Document, ...]
    labels: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        V = len(self.vocabulary)
        for doc in docs:
            if any(not 0 <= t < V for t in doc.tokens):
                raise CorpusError(f"document {doc.source_id!r} has word-id outside vocabulary")
        found = frozenset(d.label for d in docs if d.label is not None)
        object.__setattr__(self, "labels", found or None)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def num_tokens(self) -> int:
        return sum(len(d) for d in self.documents)

    @property
    def is_labeled(self) -> bool:
        """True when every document carries a class label."""
        return bool(self.documents) and all(d.label is not None for d in self.documents)

    @property
    def empty_doc_count(self) -> int:
        return sum(1 for d in self.documents if not d.tokens)

    def decode(self, i: int) -> list[str]:
        return self.vocabulary.decode(self.documents[i].tokens)


@dataclass(frozen=True)
class PipelineConfig:
    """Normalization settings applied by :func:`tokenize`.

    ``stem_prefix`` of ``None`` disables stemming; an integer ``k`` keeps the
    first ``k`` characters of each token.
    """

    lowercase: bool = True
    strip_punctuation: bool = True
    min_token_len: int = 1
    stopwords: frozenset[str] = frozenset()
    stem_prefix: Optional[int] = None
    drop_empty_docs: bool = True

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise CorpusError("min_token_len must be >= 1")
        if self.stem_prefix is not None and self.stem_prefix < 1:
            raise CorpusError("prefix stemmer requires k >= 1")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "strip_punctuation": self.strip_punctuation,
            "min_token_len": self.min_token_len,
            "stopwords": sorted(self.stopwords),
            "stem_prefix": self.stem_prefix,
            "drop_empty_docs": self.drop_empty_docs,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        data = dict(data)
        if "stopwords" in data:
            data["stopwords"] = frozenset(data["stopwords"])
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise CorpusError(f"unknown pipeline options: {sorted(unknown)}")
        return cls(**data)


def prefix_stem(token: str, k: int) -> str:
    """Keep the first ``k`` characters of ``token``.

    Works on code points after NFC normalization so that letters such as
    the Turkish "ğ" count as one character whatever their input encoding.
    """
    if k < 1:
        raise CorpusError("prefix stemmer requires k >= 1")
    return unicodedata.normalize("NFC", token)[:k]


def _is_punct(ch: str) -> bool:
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


def tokenize(raw_text: str, config: PipelineConfig) -> list[str]:
    """Split ``raw_text`` on whitespace and apply the normalization pipeline.

    Order: lowercase, punctuation stripping, length and stopword filters,
    then stemming.
    """
    tokens = []
    for tok in unicodedata.normalize("NFC", raw_text).split():
        if config.lowercase:
            tok = tok.lower()
        if config.strip_punctuation:
            tok = "".join(ch for ch in tok if not _is_punct(ch))
        if len(tok) < config.min_token_len or tok in config.stopwords:
            continue
        if config.stem_prefix is not None:
            tok = prefix_stem(tok, config.stem_prefix)
        tokens.append(tok)
    return tokens


LabeledLine = tuple[Optional[str], str]


def build_corpus(labeled_lines: Sequence[LabeledLine], config: PipelineConfig) -> Corpus:
    """Tokenize ``(label, text)`` pairs and encode them against a fresh vocabulary."""
    if not labeled_lines:
        raise CorpusError("empty corpus: no input lines")
    tokenized = []
    for i, (label, text) in enumerate(labeled_lines):
        tokens = tokenize(text, config)
        if not tokens and config.drop_empty_docs:
            logger.debug("dropping empty document %d", i)
            continue
        tokenized.append((str(i), label, tokens))
    if not any(tokens for _, _, tokens in tokenized):
        raise CorpusError("empty corpus: every document is empty after preprocessing")
    vocab = Vocabulary.from_tokens(t for _, _, t in tokenized)
    docs = [Document(vocab.encode(t), label, sid) for sid, label, t in tokenized]
    return Corpus(vocab, tuple(docs))


def reencode(corpus: Corpus, new_vocab: Vocabulary) -> Corpus:
    """Restrict ``corpus`` to the words of ``new_vocab`` and renumber them.

    Documents left empty are kept so that document indices stay aligned
    across pruning stages.
    """
    old = corpus.vocabulary
    missing = [w for w in new_vocab.words if w not in old]
    if missing:
        raise CorpusError(f"vocabulary not a subset: {missing[:5]}")
    remap = {old.index[w]: i for i, w in enumerate(new_vocab.words)}
    docs = []
    emptied = 0
    for doc in corpus.documents:
        tokens = tuple(remap[t] for t in doc.tokens if t in remap)
        if doc.tokens and not tokens:
            emptied += 1
        docs.append(Document(tokens, doc.label, doc.source_id))
    if emptied:
        logger.warning("%d documents emptied by vocabulary reduction", emptied)
    return Corpus(new_vocab, tuple(docs))


def parse_lines(lines: Iterable[str]) -> list[LabeledLine]:
    """Parse ``label<TAB>text`` or bare ``text`` lines; ``#`` lines are comments."""
    out: list[LabeledLine] = []
    for line in lines:
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            label, text = line.split("\t", 1)
            out.append((label.strip() or None, text))
        else:
            out.append((None, line))
    return out


def read_corpus_file(path: Union[str, Path]) -> list[LabeledLine]:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh)


def load_corpus(path: Union[str, Path], config: Optional[PipelineConfig] = None) -> Corpus:
    return build_corpus(read_corpus_file(path), config or PipelineConfig())
