"""Superposition with controlled sources.

Splitting the tableau matrix as ``L = L0 - sum_k y_k Omega_k`` (``Omega_k``
being the single-entry selector at the controlled source's row and its
control column) turns ``L x = U`` into::

    L0 x = U + sum_k y_k Omega_k x

so the solution is the sum of the responses of the L0 circuit to each
independent source and, for every controlled source, to an independent
source of value ``y_k * x[m_k]`` placed in that source's branch.

Two routes compute the parts. :func:`decompose_via_full_solution` needs the
full solution first and reads the control values off it.
:func:`decompose_via_control_system` never solves the full system: it solves
a small M x M system for the control values from the unit responses of L0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularControlSystem, SingularL0
from .netlist import CircuitGraph
from .solver import LuFactorization, factor, relative_residual, solve
from .tableau import TableauSystem, zero_controls

ADDITIVITY_RTOL = 1e-8


@dataclass(frozen=True)
class SolutionVector:
    currents: np.ndarray
    voltages: np.ndarray

    @classmethod
    def from_vector(cls, x) -> SolutionVector:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise ValueError(f"expected a vector of even length, got shape {x.shape}")
        b = x.size // 2
        return cls(x[:b].copy(), x[b:].copy())

    @classmethod
    def zeros(cls, b: int) -> SolutionVector:
        return cls(np.zeros(b), np.zeros(b))

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.currents, self.voltages])

    @property
    def b(self) -> int:
        return self.currents.size

    def __add__(self, other: SolutionVector) -> SolutionVector:
        return SolutionVector(self.currents + other.currents, self.voltages + other.voltages)


@dataclass(frozen=True)
class ContributionSet:
    """Per-source parts of a circuit solution.

    ``independent`` and ``controlled`` are keyed by source branch name in
    branch order. ``control_values`` holds the control variable ``x[m_k]``
    used for each controlled source.
    """

    branch_names: tuple[str, ...]
    independent: dict[str, SolutionVector]
    controlled: dict[str, SolutionVector]
    total: SolutionVector
    strategy: str
    control_values: dict[str, float] = field(default_factory=dict)

    def parts(self) -> dict[str, SolutionVector]:
        return {**self.independent, **self.controlled}

    def sum_of_parts(self) -> SolutionVector:
        acc = SolutionVector.zeros(len(self.branch_names))
        for part in self.parts().values():
            acc = acc + part
        return acc

    def current(self, branch: str, source: str | None = None) -> float:
        vec = self.total if source is None else self.parts()[source]
        return float(vec.currents[self._pos(branch)])

    def voltage(self, branch: str, source: str | None = None) -> float:
        vec = self.total if source is None else self.parts()[source]
        return float(vec.voltages[self._pos(branch)])

    def _pos(self, branch: str) -> int:
        names = [n.lower() for n in self.branch_names]
        return names.index(branch.lower())

    def to_dict(self) -> dict:
        """JSON-ready table: per branch, per source, current and voltage."""
        parts = self.parts()
        rows = []
        for pos, name in enumerate(self.branch_names):
            rows.append({
                "branch": name,
                "current": {"total": float(self.total.currents[pos]),
                            "parts": {src: float(p.currents[pos]) for src, p in parts.items()}},
                "voltage": {"total": float(self.total.voltages[pos]),
                            "parts": {src: float(p.voltages[pos]) for src, p in parts.items()}},
            })
        return {
            "strategy": self.strategy,
            "independent_sources": list(self.independent),
            "controlled_sources": list(self.controlled),
            "control_values": dict(self.control_values),
            "branches": rows,
        }


def _factor_l(sys: TableauSystem) -> LuFactorization:
    return factor(sys.L, "L", labels=sys.col_labels)


def _factor_l0(sys: TableauSystem) -> LuFactorization:
    return factor(zero_controls(sys).L, "L0", SingularL0, labels=sys.col_labels)


def solve_direct(sys: TableauSystem) -> SolutionVector:
    """Solve the full tableau ``L x = U``."""
    return SolutionVector.from_vector(solve(_factor_l(sys), sys.U))


def _independent_parts(sys: TableauSystem, f0: LuFactorization) -> dict[str, SolutionVector]:
    parts = {}
    for pos in sys.independent_sources:
        row = sys.source_rows[pos]
        rhs = np.zeros(sys.dimension)
        rhs[row] = sys.U[row]
        parts[sys.graph.branches[pos].name] = SolutionVector.from_vector(solve(f0, rhs))
    return parts


def decompose_via_full_solution(sys: TableauSystem) -> ContributionSet:
    """Solve the full system, then re-derive it as a sum of L0 responses.

    Each controlled part solves ``L0 x_k = y_k * x[m_k] * e_row`` with the
    control value taken from the full solution.
    """
    x = solve(_factor_l(sys), sys.U)
    f0 = _factor_l0(sys)
    independent = _independent_parts(sys, f0)
    controlled = {}
    values = {}
    for ce in sys.control_coeffs:
        name = sys.graph.branches[ce.branch].name
        rhs = np.zeros(sys.dimension)
        rhs[ce.row] = ce.gain * x[ce.col]
        controlled[name] = SolutionVector.from_vector(solve(f0, rhs))
        values[name] = float(x[ce.col])
    return ContributionSet(
        tuple(br.name for br in sys.graph.branches), independent, controlled,
        SolutionVector.from_vector(x), "full", values)


def decompose_via_control_system(sys: TableauSystem) -> ContributionSet:
    """Decompose without solving the full system.

    With ``w_k = L0^-1 e_{row_k}`` and ``x0 = L0^-1 U`` the control values
    ``c_j = x[m_j]`` satisfy ``(I - G) c = x0[m]`` where
    ``G[j, l] = y_l * w_l[m_j]``. Each controlled part is then
    ``y_k * c_k * w_k``.
    """
    f0 = _factor_l0(sys)
    independent = _independent_parts(sys, f0)
    x0 = solve(f0, sys.U)
    controls = sys.control_coeffs
    M = len(controls)
    units = [solve(f0, np.eye(sys.dimension)[ce.row]) for ce in controls]
    G = np.array([[controls[l].gain * units[l][controls[j].col] for l in range(M)]
                  for j in range(M)]).reshape(M, M)
    c0 = np.array([x0[ce.col] for ce in controls])
    if M:
        labels = [f"control of {sys.graph.branches[ce.branch].name}" for ce in controls]
        fc = factor(np.eye(M) - G, "control", SingularControlSystem, labels=labels)
        c = solve(fc, c0)
    else:
        c = c0
    controlled = {}
    values = {}
    total = x0.copy()
    for k, ce in enumerate(controls):
        name = sys.graph.branches[ce.branch].name
        part = ce.gain * c[k] * units[k]
        controlled[name] = SolutionVector.from_vector(part)
        values[name] = float(c[k])
        total += part
    return ContributionSet(
        tuple(br.name for br in sys.graph.branches), independent, controlled,
        SolutionVector.from_vector(total), "control", values)


@dataclass(frozen=True)
class AdditivityReport:
    passed: bool
    max_deviation: float
    bound: float
    worst_component: str | None
    deviations: np.ndarray = field(repr=False)


def verify_additivity(cs: ContributionSet, rtol: float = ADDITIVITY_RTOL) -> AdditivityReport:
    """Compare the total against the sum of all parts, component by component."""
    dev = np.abs(cs.total.x - cs.sum_of_parts().x)
    scale = max(1.0, float(np.max(np.abs(cs.total.x))) if dev.size else 1.0)
    bound = rtol * scale
    worst = None
    max_dev = float(dev.max()) if dev.size else 0.0
    if dev.size:
        j = int(np.argmax(dev))
        b = len(cs.branch_names)
        worst = f"i[{cs.branch_names[j]}]" if j < b else f"v[{cs.branch_names[j - b]}]"
    return AdditivityReport(max_dev <= bound, max_dev, bound, worst, dev)


def subcircuit_residuals(sys: TableauSystem, cs: ContributionSet) -> dict[str, float]:
    """Relative residual of ``L0 x_k - y_k Omega_k x`` for each controlled part,
    with ``x`` the total solution carried by ``cs``."""
    L0 = zero_controls(sys).L
    x = cs.total.x
    out = {}
    for ce in sys.control_coeffs:
        name = sys.graph.branches[ce.branch].name
        rhs = np.zeros(sys.dimension)
        rhs[ce.row] = ce.gain * x[ce.col]
        out[name] = relative_residual(L0, cs.controlled[name].x, rhs)
    return out


def relative_deviation(a, b) -> float:
    """``|a - b|_inf / max(1, |b|_inf)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def scale_independent_sources(g: CircuitGraph, alpha: float) -> CircuitGraph:
    return g.map_values(lambda br: br.value * alpha if br.kind.independent else br.value)
