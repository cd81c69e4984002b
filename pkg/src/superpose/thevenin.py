"""Thevenin equivalents at a terminal pair, computed by superposition."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SingularL0, TerminalError, VerificationError
from .netlist import CircuitGraph, make_branch
from .superposition import (
    ContributionSet,
    decompose_via_control_system,
    solve_direct,
)
from .tableau import assemble

DEFAULT_LOADS = (1.0, 10.0, 100.0)
LOAD_LINE_RTOL = 1e-8


@dataclass(frozen=True)
class LoadCheck:
    resistance: float
    v: float
    i: float
    deviation: float
    passed: bool


@dataclass(frozen=True)
class TheveninEquivalent:
    """``v = v_open - r_eq * i`` with ``i`` leaving ``terminal_plus``."""

    v_open: float
    r_eq: float
    terminal_plus: str
    terminal_minus: str
    v_open_parts: dict[str, float] = field(default_factory=dict, compare=False)
    r_eq_parts: dict[str, float] = field(default_factory=dict, compare=False)
    load_checks: tuple[LoadCheck, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "terminal_plus": self.terminal_plus,
            "terminal_minus": self.terminal_minus,
            "v_open": self.v_open,
            "r_eq": self.r_eq,
            "v_open_contributions": dict(self.v_open_parts),
            "r_eq_contributions": dict(self.r_eq_parts),
            "load_checks": [vars(lc) for lc in self.load_checks],
        }


def _check_terminals(g: CircuitGraph, a: str, b: str) -> None:
    if a == b:
        raise TerminalError(f"terminals must differ, got {a!r} twice")
    for nd in (a, b):
        if nd not in g.nodes:
            raise TerminalError(f"no node {nd!r} in circuit")


def probe_circuit(g: CircuitGraph, a: str, b: str) -> tuple[CircuitGraph, str]:
    """Circuit with a 0 A current source across (a, b); its branch voltage is
    the open-circuit voltage."""
    _check_terminals(g, a, b)
    name = g.unique_name("Iprobe")
    return g.with_branches([make_branch(name, a, b, 0.0)]), name


def driven_circuit(g: CircuitGraph, a: str, b: str) -> tuple[CircuitGraph, str]:
    """Independent sources zeroed, 1 A driven into terminal ``a`` (out of ``b``).

    The driver runs a -> b with value -1, so its branch voltage is ``e_a - e_b``.
    """
    _check_terminals(g, a, b)
    quiet = g.map_values(lambda br: 0.0 if br.kind.independent else br.value)
    name = g.unique_name("Itest")
    return quiet.with_branches([make_branch(name, a, b, -1.0)]), name


def _decompose(g: CircuitGraph) -> ContributionSet:
    sys = assemble(g)
    try:
        return decompose_via_control_system(sys)
    except SingularL0:
        total = solve_direct(sys)
        return ContributionSet(tuple(br.name for br in g.branches), {}, {}, total, "direct")


def _port_parts(cs: ContributionSet, port: str, skip: str | None = None) -> dict[str, float]:
    return {src: cs.voltage(port, src) for src in cs.parts() if src != skip}


def open_circuit_decomposition(g: CircuitGraph, a: str, b: str) -> tuple[ContributionSet, str]:
    aug, probe = probe_circuit(g, a, b)
    return _decompose(aug), probe


def open_circuit_voltage(g: CircuitGraph, a: str, b: str) -> float:
    cs, probe = open_circuit_decomposition(g, a, b)
    return cs.voltage(probe)


def resistance_decomposition(g: CircuitGraph, a: str, b: str) -> tuple[ContributionSet, str]:
    aug, driver = driven_circuit(g, a, b)
    return _decompose(aug), driver


def equivalent_resistance(g: CircuitGraph, a: str, b: str) -> float:
    """Terminal voltage per ampere of test current, controlled sources active."""
    cs, driver = resistance_decomposition(g, a, b)
    return cs.voltage(driver)


def load_line_check(g: CircuitGraph, a: str, b: str, v_open: float, r_eq: float,
                    resistance: float, rtol: float = LOAD_LINE_RTOL) -> LoadCheck:
    name = g.unique_name("Rload")
    loaded = g.with_branches([make_branch(name, a, b, resistance)])
    sol = solve_direct(assemble(loaded))
    pos = loaded.position(name)
    v, i = float(sol.voltages[pos]), float(sol.currents[pos])
    predicted = v_open - r_eq * i
    dev = abs(v - predicted) / max(1.0, abs(v), abs(predicted))
    return LoadCheck(resistance, v, i, dev, dev <= rtol)


def thevenin(g: CircuitGraph, a: str, b: str, loads=DEFAULT_LOADS,
             rtol: float = LOAD_LINE_RTOL) -> TheveninEquivalent:
    """Open-circuit voltage and equivalent resistance at (a, b).

    The result is checked against full solves of the circuit loaded by each
    resistance in ``loads``; a miss raises :class:`VerificationError`.
    """
    cs_open, probe = open_circuit_decomposition(g, a, b)
    cs_r, driver = resistance_decomposition(g, a, b)
    v_open = cs_open.voltage(probe)
    r_eq = cs_r.voltage(driver)
    checks = tuple(load_line_check(g, a, b, v_open, r_eq, rl, rtol) for rl in loads)
    bad = [lc for lc in checks if not lc.passed]
    if bad:
        raise VerificationError(
            f"load-line check failed for R={bad[0].resistance:g}: deviation {bad[0].deviation:.3e}")
    return TheveninEquivalent(
        v_open, r_eq, a, b,
        _port_parts(cs_open, probe, skip=probe),
        {src: v for src, v in _port_parts(cs_r, driver).items()
         if src == driver or src in cs_r.controlled},
        checks)
