"""Tableau assembly: KCL, KVL and one constitutive row per branch.

Unknowns are ordered ``x = (i_1..i_b, v_1..v_b)``. Row and column indices
in this module are 0-based; branch positions are 0-based as well (branch
``Branch.index`` is the 1-based human-facing number).
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np

from .netlist import CircuitGraph, Kind


@dataclass(frozen=True)
class RowTag:
    kind: str  # "KCL" | "KVL" | "Constitutive"
    ref: str   # node id for KCL, chord name for KVL, branch name otherwise

    def __str__(self):
        return f"{self.kind}({self.ref})"


@dataclass(frozen=True)
class ControlEntry:
    """Coupling of one controlled source: ``L[row, col] == -gain``."""

    row: int
    gain: float
    col: int
    branch: int  # position of the controlled source
    control_branch: int

    def selector(self, dimension: int) -> np.ndarray:
        omega = np.zeros((dimension, dimension))
        omega[self.row, self.col] = 1.0
        return omega


@dataclass(frozen=True)
class SpanningTreeDecomposition:
    tree_branches: frozenset[int]
    chords: tuple[int, ...]
    loop_of_chord: dict[int, tuple[tuple[int, int], ...]]  # chord -> ((branch, sign), ...)
    parent: dict[str, tuple[str, int]]  # node -> (parent node, tree branch)


def build_spanning_tree(g: CircuitGraph) -> SpanningTreeDecomposition:
    """Breadth-first spanning tree from the reference node.

    Branches are scanned in input order, so the result is deterministic.
    Every fundamental loop is oriented along its chord.
    """
    incident: dict[str, list[int]] = {nd: [] for nd in g.nodes}
    for pos, br in enumerate(g.branches):
        incident[br.node_plus].append(pos)
        incident[br.node_minus].append(pos)

    parent: dict[str, tuple[str, int]] = {}
    visited = {g.reference_node}
    tree: set[int] = set()
    queue = deque([g.reference_node])
    while queue:
        nd = queue.popleft()
        for pos in incident[nd]:
            br = g.branches[pos]
            other = br.node_minus if br.node_plus == nd else br.node_plus
            if other not in visited:
                visited.add(other)
                tree.add(pos)
                parent[other] = (nd, pos)
                queue.append(other)

    def to_root(nd):
        path = [nd]
        while nd in parent:
            nd = parent[nd][0]
            path.append(nd)
        return path

    loops = {}
    chords = tuple(pos for pos in range(g.b) if pos not in tree)
    for c in chords:
        chord = g.branches[c]
        # chord runs plus -> minus; close the loop from minus back to plus
        up = to_root(chord.node_minus)
        down = to_root(chord.node_plus)
        common = set(up) & set(down)
        lca = next(nd for nd in up if nd in common)
        loop = [(c, 1)]
        for nd in up[:up.index(lca)]:
            t = parent[nd][1]
            loop.append((t, 1 if g.branches[t].node_plus == nd else -1))
        for nd in reversed(down[:down.index(lca)]):
            t = parent[nd][1]
            loop.append((t, 1 if g.branches[t].node_minus == nd else -1))
        loops[c] = tuple(loop)
    return SpanningTreeDecomposition(frozenset(tree), chords, loops, parent)


@dataclass(frozen=True)
class TableauSystem:
    graph: CircuitGraph
    L: np.ndarray
    U: np.ndarray
    row_map: tuple[RowTag, ...]
    source_rows: dict[int, int]  # branch position -> its constitutive row
    control_coeffs: tuple[ControlEntry, ...]
    tree: SpanningTreeDecomposition

    @property
    def dimension(self) -> int:
        return self.L.shape[0]

    @property
    def b(self) -> int:
        return self.graph.b

    def column_label(self, j: int) -> str:
        b = self.b
        return f"i[{self.graph.branches[j].name}]" if j < b else f"v[{self.graph.branches[j - b].name}]"

    @property
    def col_labels(self) -> tuple[str, ...]:
        return tuple(self.column_label(j) for j in range(self.dimension))

    @property
    def independent_sources(self) -> tuple[int, ...]:
        return tuple(pos for pos, br in enumerate(self.graph.branches) if br.kind.independent)

    def incidence(self) -> np.ndarray:
        """The reduced incidence matrix A."""
        return self.L[: self.graph.n - 1, : self.b]

    def loop_matrix(self) -> np.ndarray:
        """The fundamental loop matrix B."""
        return self.L[self.graph.n - 1: self.b, self.b:]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def assemble(g: CircuitGraph) -> TableauSystem:
    """Build the 2b x 2b tableau ``L x = U`` for a circuit."""
    b = g.b
    L = np.zeros((2 * b, 2 * b))
    U = np.zeros(2 * b)
    rows: list[RowTag] = []

    for r, nd in enumerate(g.non_reference_nodes):
        for pos, br in enumerate(g.branches):
            if br.node_plus == nd:
                L[r, pos] = 1.0
            elif br.node_minus == nd:
                L[r, pos] = -1.0
        rows.append(RowTag("KCL", nd))

    tree = build_spanning_tree(g)
    for chord in tree.chords:
        r = len(rows)
        for pos, sign in tree.loop_of_chord[chord]:
            L[r, b + pos] = sign
        rows.append(RowTag("KVL", g.branches[chord].name))

    source_rows = {}
    controls = []
    for pos, br in enumerate(g.branches):
        r = len(rows)
        i_col, v_col = pos, b + pos
        kind = br.kind
        if kind is Kind.RESISTOR:
            L[r, i_col] = -br.value
            L[r, v_col] = 1.0
        elif kind is Kind.VOLTAGE:
            L[r, v_col] = 1.0
            U[r] = br.value
        elif kind is Kind.CURRENT:
            L[r, i_col] = 1.0
            U[r] = br.value
        else:
            ctrl = g.control_position(br)
            own = v_col if kind.voltage_defined else i_col
            m = ctrl if kind.current_controlled else b + ctrl
            L[r, own] = 1.0
            L[r, m] = -br.value if br.value != 0 else 0.0
            controls.append(ControlEntry(r, br.value, m, pos, ctrl))
        source_rows[pos] = r
        rows.append(RowTag("Constitutive", br.name))

    return TableauSystem(g, _frozen(L), _frozen(U), tuple(rows), source_rows, tuple(controls), tree)


def zero_controls(sys: TableauSystem) -> TableauSystem:
    """The L0 system: every control coupling entry set to zero, U unchanged.

    The control entries are kept on the result so callers still know where
    the couplings were.
    """
    if not sys.control_coeffs:
        return sys
    L0 = sys.L.copy()
    for ce in sys.control_coeffs:
        L0[ce.row, ce.col] = 0.0
    return replace(sys, L=_frozen(L0))


def restore_controls(L0: np.ndarray, controls) -> np.ndarray:
    """``L0 - sum_k y_k * Omega_k``, entry by entry."""
    L = np.array(L0, dtype=float)
    for ce in controls:
        L[ce.row, ce.col] -= ce.gain
    return L


def dump_csv(sys: TableauSystem, out: TextIO) -> None:
    """Write L and U as CSV, one tableau row per line, 17 significant digits."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["row", *sys.col_labels, "U"])
    for r in range(sys.dimension):
        w.writerow([str(sys.row_map[r]), *(f"{v:.17g}" for v in sys.L[r]), f"{sys.U[r]:.17g}"])
