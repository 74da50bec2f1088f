import pytest

from petricegar.net import parse_net

NET_A = """\
{ two circles joined at s2: t/t' around s1, u/u' around s3 }
PLACE s1, s2, s3;
MARKING s3: 1;
TRANSITION t  CONSUME s2; PRODUCE s1;
TRANSITION t' CONSUME s1; PRODUCE s2;
TRANSITION u  CONSUME s3; PRODUCE s2;
TRANSITION u' CONSUME s2; PRODUCE s3;
"""

NET_B = """\
PLACE s1, s2, s3, s4;
MARKING s1: 1, s4: 1;
TRANSITION t  CONSUME s1; PRODUCE s2;
TRANSITION t' CONSUME s2, s3; PRODUCE s1, s3;
TRANSITION u  CONSUME s4, s2; PRODUCE s3, s2;
TRANSITION u' CONSUME s3; PRODUCE s4;
"""

NET_C = """\
{ workflow fragment: the loop k1/k2 can never feed a2 after d was chosen }
PLACE i, c1, c2, a1, a2, o;
MARKING i: 1;
TRANSITION u  CONSUME i;  PRODUCE c1, a1;
TRANSITION d  CONSUME i;  PRODUCE a1;
TRANSITION k1 CONSUME c1; PRODUCE c2, a2;
TRANSITION k2 CONSUME c2; PRODUCE c1;
TRANSITION l  CONSUME c2; PRODUCE a2;
TRANSITION x1 CONSUME a1; PRODUCE o;
TRANSITION x2 CONSUME a1, a2; PRODUCE o;
"""


@pytest.fixture
def net_a():
    return parse_net(NET_A)


@pytest.fixture
def net_b():
    return parse_net(NET_B)


@pytest.fixture
def net_c():
    return parse_net(NET_C)


@pytest.fixture
def net_files(tmp_path):
    paths = {}
    for name, text in (("a", NET_A), ("b", NET_B), ("c", NET_C)):
        path = tmp_path / f"{name}.net"
        path.write_text(text)
        paths[name] = str(path)
    return paths


# -- acceptance reporting: one PASS/FAIL line per criterion at the end of the run

_criteria: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(o == "passed" for o in _criteria[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}")
