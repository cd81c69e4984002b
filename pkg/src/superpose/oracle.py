"""Independent check path: node-voltage analysis and random circuit generation.

The nodal solver shares nothing with the tableau code beyond the circuit
description; it solves with LAPACK (``numpy.linalg``) rather than the
in-repo LU so the two routes do not share a factorization either.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationExhausted, SingularL0, SingularSystem
from .netlist import CircuitGraph, Kind, build_circuit, make_branch
from .solver import factor
from .superposition import SolutionVector
from .tableau import assemble, zero_controls

NODAL_COND_LIMIT = 1e13


@dataclass(frozen=True)
class NodalSystem:
    unknowns: tuple[str, ...]
    matrix: np.ndarray
    rhs: np.ndarray
    node_index: dict[str, int]
    branch_current_index: dict[int, int]  # branch position -> unknown index


class _Forms:
    """Linear forms ``coef @ unknowns + const`` for branch currents and voltages."""

    def __init__(self, g: CircuitGraph, sysinfo: NodalSystem):
        self.g = g
        self.info = sysinfo
        self.size = len(sysinfo.unknowns)

    def node(self, nd):
        coef = np.zeros(self.size)
        if nd in self.info.node_index:
            coef[self.info.node_index[nd]] = 1.0
        return coef, 0.0

    def voltage(self, pos):
        br = self.g.branches[pos]
        cp, _ = self.node(br.node_plus)
        cm, _ = self.node(br.node_minus)
        return cp - cm, 0.0

    def current(self, pos):
        br = self.g.branches[pos]
        if pos in self.info.branch_current_index:
            coef = np.zeros(self.size)
            coef[self.info.branch_current_index[pos]] = 1.0
            return coef, 0.0
        kind = br.kind
        if kind is Kind.RESISTOR:
            coef, _ = self.voltage(pos)
            return coef / br.value, 0.0
        if kind is Kind.CURRENT:
            return np.zeros(self.size), br.value
        ctrl = self.g.control_position(br)
        if kind is Kind.VCCS:
            coef, const = self.voltage(ctrl)
        else:  # CCCS without its own unknown; its control is never another such CCCS
            coef, const = self.current(ctrl)
        return br.value * coef, br.value * const


def _explicit_current_branches(g: CircuitGraph) -> list[int]:
    """Voltage-defined branches, plus any CCCS whose current controls another source."""
    controls_by_current = {g.control_position(br) for br in g.branches if br.kind.current_controlled}
    out = []
    for pos, br in enumerate(g.branches):
        if br.kind.voltage_defined or (br.kind is Kind.CCCS and pos in controls_by_current):
            out.append(pos)
    return out


def build_nodal(g: CircuitGraph) -> NodalSystem:
    """Modified nodal equations: KCL at every non-reference node, then one
    constraint per branch whose current is an explicit unknown."""
    nodes = g.non_reference_nodes
    extra = _explicit_current_branches(g)
    unknowns = tuple(f"e[{nd}]" for nd in nodes) + tuple(f"i[{g.branches[p].name}]" for p in extra)
    size = len(unknowns)
    node_index = {nd: k for k, nd in enumerate(nodes)}
    current_index = {p: len(nodes) + k for k, p in enumerate(extra)}
    A = np.zeros((size, size))
    rhs = np.zeros(size)
    info = NodalSystem(unknowns, A, rhs, node_index, current_index)
    forms = _Forms(g, info)

    # KCL: sum of currents leaving each node is zero
    for pos, br in enumerate(g.branches):
        coef, const = forms.current(pos)
        for nd, sign in ((br.node_plus, 1.0), (br.node_minus, -1.0)):
            if nd in node_index:
                r = node_index[nd]
                A[r] += sign * coef
                rhs[r] -= sign * const

    for pos in extra:
        br = g.branches[pos]
        r = current_index[pos]
        kind = br.kind
        if kind is Kind.VOLTAGE:
            coef, _ = forms.voltage(pos)
            A[r] += coef
            rhs[r] = br.value
            continue
        ctrl = g.control_position(br)
        if kind is Kind.VCVS:
            own, _ = forms.voltage(pos)
            cc, cconst = forms.voltage(ctrl)
        elif kind is Kind.CCVS:
            own, _ = forms.voltage(pos)
            cc, cconst = forms.current(ctrl)
        else:  # CCCS carried as an unknown
            own = np.zeros(size)
            own[r] = 1.0
            cc, cconst = forms.current(ctrl)
        A[r] += own - br.value * cc
        rhs[r] += br.value * cconst
    return info


def solve_nodal(g: CircuitGraph) -> SolutionVector:
    """Solve by node-voltage analysis and map back to branch (i, v)."""
    info = build_nodal(g)
    try:
        if np.linalg.cond(info.matrix) > NODAL_COND_LIMIT:
            raise np.linalg.LinAlgError("ill-conditioned")
        sol = np.linalg.solve(info.matrix, info.rhs)
    except np.linalg.LinAlgError:
        raise SingularSystem(-1, "nodal", "node-voltage system is singular") from None
    forms = _Forms(g, info)
    currents = np.empty(g.b)
    voltages = np.empty(g.b)
    for pos in range(g.b):
        coef, const = forms.current(pos)
        currents[pos] = coef @ sol + const
        coef, _ = forms.voltage(pos)
        voltages[pos] = coef @ sol
    return SolutionVector(currents, voltages)


_DEFAULT_WEIGHTS = {
    Kind.RESISTOR: 6.0,
    Kind.VOLTAGE: 1.5,
    Kind.CURRENT: 1.5,
    Kind.VCVS: 1.0,
    Kind.VCCS: 1.0,
    Kind.CCVS: 1.0,
    Kind.CCCS: 1.0,
}


@dataclass(frozen=True)
class GeneratorConfig:
    node_count: tuple[int, int] = (2, 8)
    extra_chords: tuple[int, int] = (0, 4)
    weights: dict = field(default_factory=lambda: dict(_DEFAULT_WEIGHTS))
    resistance: tuple[float, float] = (1.0, 1e3)
    voltage: float = 10.0
    current: float = 1.0
    gain: tuple[float, float] = (-2.0, 2.0)
    max_controlled: int = 4
    seed: int | tuple[int, ...] = 0
    max_tries: int = 100


def _draw_circuit(rng: np.random.Generator, cfg: GeneratorConfig) -> CircuitGraph:
    n = int(rng.integers(cfg.node_count[0], cfg.node_count[1] + 1))
    chords = int(rng.integers(cfg.extra_chords[0], cfg.extra_chords[1] + 1))
    pairs = [(k, int(rng.integers(0, k))) for k in range(1, n)]
    for _ in range(chords):
        u, v = rng.choice(n, size=2, replace=False)
        pairs.append((int(u), int(v)))

    kinds = [k for k, w in cfg.weights.items() if w > 0]
    weights = np.array([cfg.weights[k] for k in kinds], dtype=float)
    plain = [k for k in kinds if not k.controlled]
    plain_w = np.array([cfg.weights[k] for k in plain], dtype=float)
    if not plain:
        raise ValueError("weights must allow at least one non-controlled element")

    drawn = []
    n_controlled = 0
    for u, v in pairs:
        kind = kinds[rng.choice(len(kinds), p=weights / weights.sum())]
        if kind.controlled and n_controlled >= cfg.max_controlled:
            kind = plain[rng.choice(len(plain), p=plain_w / plain_w.sum())]
        n_controlled += kind.controlled
        if rng.random() < 0.5:
            u, v = v, u
        drawn.append((kind, str(u), str(v)))

    branches = []
    for k, (kind, u, v) in enumerate(drawn, start=1):
        name = f"{kind.value}{k}"
        control = None
        if kind is Kind.RESISTOR:
            lo, hi = np.log10(cfg.resistance[0]), np.log10(cfg.resistance[1])
            value = 10.0 ** rng.uniform(lo, hi)
        elif kind is Kind.VOLTAGE:
            value = rng.uniform(-cfg.voltage, cfg.voltage)
        elif kind is Kind.CURRENT:
            value = rng.uniform(-cfg.current, cfg.current)
        else:
            value = rng.uniform(*cfg.gain)
            others = [j for j in range(1, len(drawn) + 1) if j != k]
            if not others:
                value, kind = 1.0 + rng.random(), Kind.RESISTOR
                name = f"R{k}"
            else:
                j = others[int(rng.integers(0, len(others)))]
                control = f"{drawn[j - 1][0].value}{j}"
        branches.append(make_branch(name, u, v, float(value), control))
    return build_circuit(branches)


def _well_posed(g: CircuitGraph) -> bool:
    sys = assemble(g)
    try:
        factor(sys.L)
        factor(zero_controls(sys).L, "L0", SingularL0)
    except SingularSystem:
        return False
    return True


def generate(cfg: GeneratorConfig = GeneratorConfig()) -> CircuitGraph:
    """Draw a connected circuit whose L and L0 both pass the pivot test.

    Deterministic in ``cfg.seed``. Raises :class:`GenerationExhausted` after
    ``cfg.max_tries`` rejected draws.
    """
    if cfg.node_count[0] < 2 or cfg.node_count[0] > cfg.node_count[1]:
        raise ValueError(f"bad node_count range {cfg.node_count}")
    if cfg.extra_chords[0] < 0 or cfg.extra_chords[0] > cfg.extra_chords[1]:
        raise ValueError(f"bad extra_chords range {cfg.extra_chords}")
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.max_tries):
        g = _draw_circuit(rng, cfg)
        if _well_posed(g):
            return g
    raise GenerationExhausted(f"no well-posed circuit after {cfg.max_tries} draws (seed {cfg.seed})")
