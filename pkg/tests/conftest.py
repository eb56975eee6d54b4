import pytest

from structeval.datagen import CorpusConfig, gen_corpus


@pytest.fixture(scope="session")
def corpus():
    """The default seeded corpus: 8 formats x 6 complexities x 2 samples."""
    return gen_corpus(CorpusConfig(per_category=2, master_seed=0))


@pytest.fixture(scope="session")
def small_corpus():
    """One sample per category with short lists and texts, for repeated runs."""
    cfg = CorpusConfig(per_category=1, list_length=(5, 10), text_length=(40, 80),
                       wide_columns=(6, 8), master_seed=7)
    return gen_corpus(cfg)


# -- acceptance summary ---------------------------------------------------------
# Tests marked ``criterion(n, text)`` get one PASS/FAIL line each at the end
# of the run, whatever the capture settings.

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    number, text = mark.args
    if report.failed or report.when == "call":
        _CRITERIA[number] = (text, "FAIL" if report.failed else "PASS", getattr(item, "criterion_note", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, verdict, note = _CRITERIA[number]
        line = f"{verdict} criterion {number}: {text}"
        terminalreporter.write_line(line + (f" ({note})" if note else ""))
