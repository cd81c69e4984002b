from pathlib import Path

import pytest

from superpose.netlist import parse_netlist

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def vcvs_divider(G1, G2, G3, a, E):
    """Source E, R1 into node 2 (R2 to ground), VCVS a*v[V1] from node 2 to 3,
    R3 from ground to node 3 so that i[R3] = -G3 * e3."""
    return parse_netlist(
        f"V1 1 0 {E!r}\nR1 1 2 {1 / G1!r}\nR2 2 0 {1 / G2!r}\n"
        f"E1 2 3 V1 {a!r}\nR3 0 3 {1 / G3!r}\n")


def vccs_two_sources(g, G1, G2, E1, E2):
    return parse_netlist(
        f"R1 1 2 {1 / G1!r}\nR2 2 3 {1 / G2!r}\nV1 2 0 {E1!r}\nV2 3 0 {E2!r}\nGv 1 0 R2 {g!r}\n")


def thevenin_two_controlled(E0, J0, g, G1, G3, r=2.0):
    return parse_netlist(
        f"V0 0 B {E0!r}\nR1 A 0 {1 / G1!r}\nG1 3 A R3 {g!r}\nR3 3 0 {1 / G3!r}\n"
        f"I0 0 5 {J0!r}\nH1 5 3 R1 {r!r}\n")


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


@pytest.fixture
def load_fixture():
    return lambda name: parse_netlist((FIXTURES / name).read_text())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
