from pathlib import Path

import pytest

from corpusforge.vocab import VocabConfig, count_words, train_bpe

DATA = Path(__file__).parent / "data"
RO_SAMPLE = DATA / "ro_sample.txt"


@pytest.fixture(scope="session")
def ro_lines():
    return RO_SAMPLE.read_text(encoding="utf-8").splitlines()


@pytest.fixture(scope="session")
def ro_vocab(ro_lines):
    config = VocabConfig(vocab_size=600, casing="cased")
    return train_bpe(count_words(ro_lines, config), config)


@pytest.fixture(scope="session")
def ro_vocab_uncased(ro_lines):
    config = VocabConfig(vocab_size=600, casing="uncased")
    return train_bpe(count_words(ro_lines, config), config)


# --- acceptance reporting: one PASS/FAIL line per criterion ---------------------

_CRITERIA: dict[int, tuple[str, str, float, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = ""
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).strip().splitlines()[0][:160] if str(call.excinfo.value).strip() else call.excinfo.typename
    _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", rep.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, duration, detail = _CRITERIA[number]
        line = f"[{status}] criterion {number}: {title} ({duration:.1f}s)"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
