import os
import sys
from pathlib import Path

import pytest

os.environ["NSTAGE_CHECK_INVARIANTS"] = "1"
sys.path.insert(0, str(Path(__file__).parent))

from nstage_lda import inference, nstage, synthetic  # noqa: E402
from nstage_lda.corpus import PipelineConfig, build_corpus  # noqa: E402

import oracles  # noqa: E402

# Every sweep of every test recounts the Gibbs matrices.
inference.CHECK_INVARIANTS = True

# Every model fitted anywhere in the suite has its pruning checked against the
# exact brute-force threshold oracle.
threshold_audit = {"models": 0, "topics": 0, "mismatches": []}
_real_fit = inference.fit


def _audited_fit(corpus, config):
    model, state = _real_fit(corpus, config)
    expected = oracles.brute_survivor_sets(model, state)
    got = nstage.prune(model, state).survivors
    threshold_audit["models"] += 1
    threshold_audit["topics"] += len(expected)
    if got != expected:
        threshold_audit["mismatches"].append((config, got, expected))
    return model, state


inference.fit = _audited_fit
nstage.fit = _audited_fit

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"gibbs invariant checks: {inference.invariant_stats['checks']}, "
        f"violations: {inference.invariant_stats['violations']}; "
        f"threshold-audited models: {threshold_audit['models']}, "
        f"mismatches: {len(threshold_audit['mismatches'])}"
    )


@pytest.fixture(scope="session")
def clean_synth():
    return synthetic.generate(synthetic.CLEAN)


@pytest.fixture(scope="session")
def clean_corpus(clean_synth):
    return build_corpus(clean_synth.lines, PipelineConfig())


@pytest.fixture(scope="session")
def clean_fit(clean_corpus):
    return inference.fit(clean_corpus, synthetic.SHIPPED_LDA)


@pytest.fixture(scope="session")
def noisy_synth():
    return synthetic.generate(synthetic.NOISY)


@pytest.fixture(scope="session")
def noisy_corpus(noisy_synth):
    return build_corpus(noisy_synth.lines, PipelineConfig())


@pytest.fixture(scope="session")
def noisy_run(noisy_corpus):
    """Shipped 4-stage run on the noisy corpus, with every stage kept."""
    stages = {}

    def keep(i, model, state, corpus):
        stages[i] = (model, state, corpus)

    model, reports = nstage.run_nstage(
        noisy_corpus, nstage.NStageConfig(n=4, lda=synthetic.SHIPPED_LDA), keep
    )
    return model, reports, stages


@pytest.fixture(scope="session")
def tiny_lines():
    from nstage_lda.corpus import read_corpus_file

    return read_corpus_file(synthetic.tiny_corpus_path())


@pytest.fixture(scope="session")
def tiny_corpus(tiny_lines):
    return build_corpus(tiny_lines, PipelineConfig())


def pytest_collection_modifyitems(items):
    # acceptance runs last so suite-wide tallies are complete
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")
