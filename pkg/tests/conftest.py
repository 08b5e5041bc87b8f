import pytest

from razavy_dw import build_basis, coupled_spectrum, overlap_gamma

ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = marker.args
    detail = ""
    if rep.failed:
        detail = str(call.excinfo.value).strip().splitlines()[0] if call.excinfo else "error"
    ACCEPTANCE[number] = (title, rep.passed, detail)


@pytest.fixture(scope="session")
def basis():
    return build_basis()


@pytest.fixture(scope="session")
def gamma(basis):
    return overlap_gamma(basis)


@pytest.fixture(scope="session")
def spectrum_at(basis, gamma):
    cache = {}

    def make(g):
        if g not in cache:
            cache[g] = coupled_spectrum(basis, g, gamma)
        return cache[g]

    return make


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
