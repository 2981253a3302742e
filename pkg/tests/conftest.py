import pytest

from mabif import make_nonlinearity, trace_branch

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num = marker.args[0]
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _CRITERIA[num] = (status, doc)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, doc = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {doc}")


@pytest.fixture(scope="session")
def gelfand_n2_branch():
    """Convex exponential branch, N=2, profiles kept, through the fold."""
    return trace_branch(make_nonlinearity("gelfand"), 2, 1, 1e-1, 30.0, 40)


@pytest.fixture(scope="session")
def power_decay_n2_branch():
    return trace_branch(make_nonlinearity("power_decay", 2), 2, 1, 1e-2, 20.0, 10)
