from pathlib import Path

import pytest

from kwagent.tools import HashEmbedder

DATA = Path(__file__).resolve().parents[1] / "src" / "kwagent" / "data"
DEMO = DATA / "demo"
ABLATION = DATA / "ablation"

HEADER = "product,keyword,search_volume,clicks,cpc,competitor_score\n"


@pytest.fixture
def embedder():
    return HashEmbedder(256)


@pytest.fixture
def write_csv(tmp_path):
    def _write(body, name="data.csv", header=HEADER):
        path = tmp_path / name
        path.write_text(header + body, encoding="utf-8")
        return path

    return _write


# acceptance verdicts, printed once at the end of the session
VERDICTS = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[number])
