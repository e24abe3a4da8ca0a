import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

from stylenlg.mr import parse_personage_mr, parse_viggo_mr  # noqa: E402

CANONICAL_RESTAURANT_MR = (
    "name = nameVariable | eattype = pub | food = English | pricerange = high"
    " | area = city centre | familyfriendly = no | near = nearVariable"
)
CANONICAL_VIDEOGAME_MR = (
    "verify_attribute(name [Little Big Adventure], rating [average],"
    " has_multiplayer [no], platforms [PlayStation])"
)


@pytest.fixture
def restaurant_mr():
    return parse_personage_mr(CANONICAL_RESTAURANT_MR)


@pytest.fixture
def videogame_mr():
    return parse_viggo_mr(CANONICAL_VIDEOGAME_MR)


@pytest.fixture
def data_dir():
    return TESTS_DIR / "data"


@pytest.fixture
def corpora_dir():
    return TESTS_DIR.parent / "src" / "stylenlg" / "data"


_ACCEPTANCE_RESULTS: dict[str, str] = {}


def record_acceptance(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    record_acceptance(outcome.get_result())


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, verdict in sorted(_ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{verdict}  {name}")
