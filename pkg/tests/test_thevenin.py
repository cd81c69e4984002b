import numpy as np
import pytest

from conftest import thevenin_two_controlled
from superpose.errors import SingularSystem, TerminalError
from superpose.netlist import parse_netlist
from superpose.oracle import GeneratorConfig, generate
from superpose.superposition import scale_independent_sources
from superpose.thevenin import (
    equivalent_resistance,
    open_circuit_decomposition,
    open_circuit_voltage,
    resistance_decomposition,
    thevenin,
)

EX3 = dict(E0=5.0, J0=3.0, g=1.0, G1=2.0, G3=1.0)


def v_open_closed_form(E0, J0, g, G1, G3):
    return E0 + (g / G1) / (1 + g / G3) * J0


def test_open_circuit_voltage_example():
    assert v_open_closed_form(**EX3) == 5.75
    g = thevenin_two_controlled(**EX3)
    assert open_circuit_voltage(g, "A", "B") == pytest.approx(5.75, rel=1e-9)


def test_open_circuit_parts_per_source():
    E0, J0, g_, G1, G3 = EX3.values()
    g = thevenin_two_controlled(**EX3)
    cs, probe = open_circuit_decomposition(g, "A", "B")
    v3 = J0 / (1 + g_ / G3)
    expected_port = {"V0": E0, "G1": g_ / G1 * v3, "H1": 0.0, "I0": 0.0}
    expected_v3 = {"V0": 0.0, "G1": -g_ / G3 * v3, "H1": 0.0, "I0": J0 / G3}
    for src in expected_port:
        assert cs.voltage(probe, src) == pytest.approx(expected_port[src], abs=1e-12)
        assert cs.voltage("R3", src) == pytest.approx(expected_v3[src], abs=1e-12)
    assert cs.voltage("R3") == pytest.approx(v3)


def test_equivalent_resistance_example():
    g = thevenin_two_controlled(**EX3)
    cs, driver = resistance_decomposition(g, "A", "B")
    assert cs.voltage(driver) == pytest.approx(1 / EX3["G1"], rel=1e-9)
    assert cs.voltage("R3") == 0.0
    assert cs.voltage(driver, driver) == pytest.approx(0.5)
    assert cs.voltage(driver, "G1") == 0.0
    assert cs.voltage(driver, "H1") == 0.0


@pytest.mark.parametrize("gain", [0.0, 0.5, 3.0])
def test_v_open_tracks_closed_form(gain):
    params = dict(EX3, g=gain)
    g = thevenin_two_controlled(**params)
    assert open_circuit_voltage(g, "A", "B") == pytest.approx(v_open_closed_form(**params), rel=1e-12)


def test_zero_gain_decouples_current_source():
    g = thevenin_two_controlled(**dict(EX3, g=0.0))
    assert open_circuit_voltage(g, "A", "B") == pytest.approx(EX3["E0"])


def test_all_sources_zero():
    g = thevenin_two_controlled(**dict(EX3, E0=0.0, J0=0.0))
    assert open_circuit_voltage(g, "A", "B") == 0.0


def test_full_thevenin_example():
    th = thevenin(thevenin_two_controlled(**EX3), "A", "B")
    assert th.v_open == pytest.approx(5.75, rel=1e-9)
    assert th.r_eq == pytest.approx(0.5, rel=1e-9)
    assert [lc.resistance for lc in th.load_checks] == [1.0, 10.0, 100.0]
    assert all(lc.passed for lc in th.load_checks)
    assert list(th.v_open_parts) == ["V0", "I0", "G1", "H1"]


@pytest.mark.parametrize("text, a, b, v_open, r_eq", [
    ("V1 1 0 7", "1", "0", 7.0, 0.0),
    ("I1 0 1 2\nR1 1 0 4", "1", "0", 8.0, 4.0),
    ("R1 1 0 5", "1", "0", 0.0, 5.0),
    ("R1 1 0 3\nR2 1 0 6", "1", "0", 0.0, 2.0),
])
def test_textbook_cases(text, a, b, v_open, r_eq):
    th = thevenin(parse_netlist(text), a, b)
    assert th.v_open == pytest.approx(v_open, abs=1e-12)
    assert th.r_eq == pytest.approx(r_eq, abs=1e-12)


def test_negative_resistance_is_legal():
    # CCCS feeding 2 * i[R1] back into the node: R_eq = -1 ohm
    g = parse_netlist("R1 1 0 1\nF1 0 1 R1 2")
    assert equivalent_resistance(g, "1", "0") == pytest.approx(-1.0)
    th = thevenin(g, "1", "0", loads=(10.0, 100.0, 1000.0))
    assert th.r_eq == pytest.approx(-1.0)


def test_exchange_symmetry():
    g = thevenin_two_controlled(**EX3)
    ab, ba = thevenin(g, "A", "B"), thevenin(g, "B", "A")
    assert ba.v_open == pytest.approx(-ab.v_open, rel=1e-12)
    assert ba.r_eq == pytest.approx(ab.r_eq, rel=1e-12)


def test_r_eq_ignores_source_values():
    g = thevenin_two_controlled(**EX3)
    doubled = scale_independent_sources(g, 2.0)
    assert equivalent_resistance(doubled, "A", "B") == equivalent_resistance(g, "A", "B")


@pytest.mark.parametrize("a, b", [("A", "A"), ("A", "nowhere")])
def test_bad_terminals(a, b):
    with pytest.raises(TerminalError):
        thevenin(thevenin_two_controlled(**EX3), a, b)


def test_load_line_on_random_circuits():
    rng = np.random.default_rng(99)
    checked = 0
    for k in range(60):
        g = generate(GeneratorConfig(seed=(13, k)))
        a, b = rng.choice(list(g.nodes), size=2, replace=False)
        try:
            th = thevenin(g, str(a), str(b))
        except SingularSystem:
            continue  # port across an ideal voltage-only path, etc.
        checked += 1
        assert all(lc.deviation <= 1e-8 for lc in th.load_checks)
        sym = thevenin(g, str(b), str(a))
        assert sym.v_open == pytest.approx(-th.v_open, rel=1e-9, abs=1e-9)
        assert sym.r_eq == pytest.approx(th.r_eq, rel=1e-9, abs=1e-9)
    assert checked > 30
