import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asrfix.core import read_corpus  # noqa: E402

SAMPLE_PATH = Path(__file__).parents[1] / "src" / "asrfix" / "data" / "sample_corpus.jsonl"

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sample_corpus():
    return read_corpus(SAMPLE_PATH)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
