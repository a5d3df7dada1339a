from pathlib import Path

import pytest

from agparse.io import load_grammar_file

ROOT = Path(__file__).resolve().parent.parent
GRAMMARS = ROOT / "grammars"
GOLDEN = Path(__file__).resolve().parent / "golden"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.fixture(scope="session")
def grammar_dir():
    return GRAMMARS


@pytest.fixture(scope="session")
def wh_grammar():
    return load_grammar_file(GRAMMARS / "wh.mg")


@pytest.fixture(scope="session")
def binary_pcfg():
    return load_grammar_file(GRAMMARS / "binary.acfg")


@pytest.fixture(scope="session")
def cyclic_pcfg():
    return load_grammar_file(GRAMMARS / "unary_cycle.acfg")


@pytest.fixture(scope="session")
def shared_acfg():
    return load_grammar_file(GRAMMARS / "shared_function.acfg")


@pytest.fixture(scope="session")
def anbncn():
    return load_grammar_file(GRAMMARS / "anbncn.mcfg")


_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria[number] = (title, report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{number}] {title}")
