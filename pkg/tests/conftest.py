import json
from pathlib import Path

import pytest

from lotus import corpus, synthetic
from lotus.classifier import _kernels
from lotus.explainer import Explanation

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance: list[tuple[str, str]] = []


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    _kernels.warmup()


@pytest.fixture
def appendix_dataset():
    return corpus.parse_dataset(FIXTURES / "appendix_examples.csv", "test")


@pytest.fixture
def appendix_explanations():
    with open(FIXTURES / "appendix_explanations.jsonl", encoding="utf-8") as f:
        return [Explanation.from_json(json.loads(line)) for line in f]


def write_split_pair(tmp_path, rows, n_train, name):
    train = tmp_path / f"{name}_train.csv"
    test = tmp_path / f"{name}_test.csv"
    corpus.write_dataset(rows[:n_train], train)
    corpus.write_dataset(rows[n_train:], test)
    return train, test


@pytest.fixture
def keyword_splits(tmp_path):
    return write_split_pair(tmp_path, synthetic.keyword_dataset(700, 11, prefix="kw"), 500, "kw")


@pytest.fixture
def latent_splits(tmp_path):
    return write_split_pair(tmp_path, synthetic.latent_cue_dataset(700, 23, prefix="lc"), 500, "lc")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance.append((outcome, report.nodeid.split("::")[-1]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, name in _acceptance:
        terminalreporter.write_line(f"{outcome}  {name}")
