"""Netlist front-end.

Line-oriented format, one element per line::

    # comment
    R1  n+ n-  resistance
    V1  n+ n-  value
    I1  n+ n-  value
    E1  n+ n-  control-branch  gain     (VCVS, v = gain * v[control])
    G1  n+ n-  control-branch  gain     (VCCS, i = gain * v[control])
    H1  n+ n-  control-branch  gain     (CCVS, v = gain * i[control])
    F1  n+ n-  control-branch  gain     (CCCS, i = gain * i[control])

All elements use associated reference directions: ``v = e(n+) - e(n-)`` and
the branch current flows from ``n+`` to ``n-`` through the element. Node
``0`` is the reference node and must be present.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    ArityError,
    DisconnectedGraph,
    DuplicateName,
    InvalidNumber,
    MissingGround,
    NonPositiveResistance,
    SelfLoop,
    UnknownElementPrefix,
    UnresolvedControlRef,
)

REFERENCE_NODE = "0"

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


class Kind(Enum):
    RESISTOR = "R"
    VOLTAGE = "V"
    CURRENT = "I"
    VCVS = "E"
    VCCS = "G"
    CCVS = "H"
    CCCS = "F"

    @property
    def controlled(self) -> bool:
        return self in (Kind.VCVS, Kind.VCCS, Kind.CCVS, Kind.CCCS)

    @property
    def independent(self) -> bool:
        return self in (Kind.VOLTAGE, Kind.CURRENT)

    @property
    def voltage_defined(self) -> bool:
        """Constitutive relation fixes the branch voltage."""
        return self in (Kind.VOLTAGE, Kind.VCVS, Kind.CCVS)

    @property
    def current_defined(self) -> bool:
        """Constitutive relation fixes the branch current."""
        return self in (Kind.CURRENT, Kind.VCCS, Kind.CCCS)

    @property
    def current_controlled(self) -> bool:
        return self in (Kind.CCVS, Kind.CCCS)


@dataclass(frozen=True)
class Branch:
    """One oriented two-terminal element.

    ``value`` is the resistance, the independent source value, or the gain of
    a controlled source. ``index`` is 1-based and assigned by the circuit.
    """

    name: str
    node_plus: str
    node_minus: str
    kind: Kind
    value: float
    control: str | None = None
    index: int = 0
    line: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CircuitGraph:
    nodes: tuple[str, ...]
    branches: tuple[Branch, ...]
    reference_node: str = REFERENCE_NODE
    _lookup: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._lookup.update({br.name.lower(): k for k, br in enumerate(self.branches)})

    @property
    def b(self) -> int:
        return len(self.branches)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def position(self, name: str) -> int:
        """0-based position of the branch called ``name`` (case-insensitive)."""
        return self._lookup[name.lower()]

    def branch(self, name: str) -> Branch:
        return self.branches[self.position(name)]

    def has_branch(self, name: str) -> bool:
        return name.lower() in self._lookup

    def control_position(self, br: Branch) -> int:
        return self.position(br.control)

    @property
    def non_reference_nodes(self) -> tuple[str, ...]:
        return tuple(nd for nd in self.nodes if nd != self.reference_node)

    def with_branches(self, extra: Iterable[Branch]) -> CircuitGraph:
        return build_circuit(list(self.branches) + list(extra))

    def map_values(self, fn) -> CircuitGraph:
        """New circuit with ``value`` replaced by ``fn(branch)`` on every branch."""
        return build_circuit([replace(br, value=float(fn(br))) for br in self.branches])

    def unique_name(self, prefix: str) -> str:
        name, k = prefix, 1
        while self.has_branch(name):
            name = f"{prefix}{k}"
            k += 1
        return name


def make_branch(name: str, node_plus: str, node_minus: str, value: float,
                control: str | None = None, line: int | None = None) -> Branch:
    """Create a branch, inferring the element kind from the name's first letter."""
    if not _NAME_RE.fullmatch(name):
        raise UnknownElementPrefix(f"invalid element name {name!r}", line)
    try:
        kind = Kind(name[0].upper())
    except ValueError:
        raise UnknownElementPrefix(f"unknown element prefix {name[0]!r} in {name!r}", line) from None
    if kind.controlled and control is None:
        raise ArityError(f"{name}: controlled source needs a control branch", line)
    if not kind.controlled and control is not None:
        raise ArityError(f"{name}: only controlled sources take a control branch", line)
    if node_plus == node_minus:
        raise SelfLoop(f"{name}: both terminals on node {node_plus!r}", line)
    if kind is Kind.RESISTOR and not value > 0:
        raise NonPositiveResistance(f"{name}: resistance must be > 0, got {value!r}", line)
    return Branch(name, node_plus, node_minus, kind, float(value), control, 0, line)


def build_circuit(branches: Sequence[Branch]) -> CircuitGraph:
    """Validate a branch list and assemble it into a CircuitGraph."""
    if not branches:
        raise MissingGround("empty circuit: no branches and no reference node '0'", 1)

    seen: dict[str, Branch] = {}
    for br in branches:
        key = br.name.lower()
        if key in seen:
            raise DuplicateName(f"duplicate element name {br.name!r}", br.line)
        seen[key] = br

    resolved = []
    for k, br in enumerate(branches, start=1):
        control = br.control
        if br.kind.controlled:
            target = seen.get(control.lower())
            if target is None:
                raise UnresolvedControlRef(f"{br.name}: no branch named {control!r}", br.line)
            if target.name.lower() == br.name.lower():
                raise UnresolvedControlRef(f"{br.name}: a source cannot control itself", br.line)
            control = target.name
        resolved.append(replace(br, control=control, index=k))

    nodes: list[str] = []
    for br in resolved:
        for nd in (br.node_plus, br.node_minus):
            if nd not in nodes:
                nodes.append(nd)
    if REFERENCE_NODE not in nodes:
        raise MissingGround("reference node '0' does not appear", resolved[0].line)

    adjacency: dict[str, list[str]] = {nd: [] for nd in nodes}
    for br in resolved:
        adjacency[br.node_plus].append(br.node_minus)
        adjacency[br.node_minus].append(br.node_plus)
    reached = {REFERENCE_NODE}
    queue = deque([REFERENCE_NODE])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    if len(reached) != len(nodes):
        stray = next(br for br in resolved
                     if br.node_plus not in reached or br.node_minus not in reached)
        raise DisconnectedGraph(
            f"{stray.name}: node {stray.node_plus if stray.node_plus not in reached else stray.node_minus!r}"
            " is not connected to the reference node", stray.line)

    return CircuitGraph(tuple(nodes), tuple(resolved))


def _parse_number(token: str, line: int) -> float:
    if not _NUMBER_RE.fullmatch(token):
        raise InvalidNumber(f"not a number: {token!r}", line)
    return float(token)


def parse_netlist(text: str) -> CircuitGraph:
    """Parse netlist text into a validated :class:`CircuitGraph`.

    Raises a :class:`~superpose.errors.NetlistError` subclass carrying the
    1-based line number of the offending line.
    """
    branches = []
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = body.split()
        if not tokens:
            continue
        last_line = lineno
        name = tokens[0]
        prefix = name[0].upper()
        if prefix not in {k.value for k in Kind} or not _NAME_RE.fullmatch(name):
            raise UnknownElementPrefix(f"unknown element {name!r}", lineno)
        expected = 5 if Kind(prefix).controlled else 4
        if len(tokens) != expected:
            raise ArityError(f"{name}: expected {expected} fields, got {len(tokens)}", lineno)
        if expected == 5:
            _, npos, nneg, control, value = tokens
            if not _NAME_RE.fullmatch(control):
                raise UnresolvedControlRef(f"{name}: invalid control branch name {control!r}", lineno)
        else:
            _, npos, nneg, value = tokens
            control = None
        branches.append(make_branch(name, npos, nneg, _parse_number(value, lineno), control, lineno))
    if not branches:
        raise MissingGround("empty netlist: no elements and no reference node '0'", last_line)
    return build_circuit(branches)


def serialize(g: CircuitGraph) -> str:
    """Canonical netlist text; ``parse_netlist(serialize(g)) == g``."""
    lines = []
    for br in g.branches:
        fields = [br.name, br.node_plus, br.node_minus]
        if br.control is not None:
            fields.append(br.control)
        fields.append(repr(br.value))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TopologyWarning:
    code: str  # "VoltageLoop" | "CurrentCutset"
    branches: tuple[str, ...]
    message: str


class _DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _forest_path(edges: list[Branch], start: str, goal: str) -> list[str]:
    adjacency: dict[str, list[tuple[str, str]]] = {}
    for br in edges:
        adjacency.setdefault(br.node_plus, []).append((br.node_minus, br.name))
        adjacency.setdefault(br.node_minus, []).append((br.node_plus, br.name))
    prev: dict[str, tuple[str, str] | None] = {start: None}
    queue = deque([start])
    while queue:
        nd = queue.popleft()
        if nd == goal:
            break
        for nxt, name in adjacency.get(nd, []):
            if nxt not in prev:
                prev[nxt] = (nd, name)
                queue.append(nxt)
    path = []
    nd = goal
    while prev.get(nd) is not None:
        nd, name = prev[nd]
        path.append(name)
    return path[::-1]


def validate_topology(g: CircuitGraph) -> list[TopologyWarning]:
    """Screen for loops of voltage-defined branches and cutsets of
    current-defined branches.

    This is a necessary-condition check only; the solver's pivot test has the
    final word on whether the circuit is well posed.
    """
    warnings: list[TopologyWarning] = []

    dsu = _DisjointSet(g.nodes)
    forest: list[Branch] = []
    for br in g.branches:
        if not br.kind.voltage_defined:
            continue
        if dsu.union(br.node_plus, br.node_minus):
            forest.append(br)
        else:
            loop = tuple(_forest_path(forest, br.node_plus, br.node_minus)) + (br.name,)
            warnings.append(TopologyWarning(
                "VoltageLoop", loop,
                f"loop of voltage-defined branches only: {', '.join(loop)}"))

    dsu = _DisjointSet(g.nodes)
    for br in g.branches:
        if not br.kind.current_defined:
            dsu.union(br.node_plus, br.node_minus)
    groups: dict[str, list[str]] = {}
    for nd in g.nodes:
        groups.setdefault(dsu.find(nd), []).append(nd)
    if len(groups) > 1:
        for root, members in groups.items():
            if g.reference_node in members:
                continue
            crossing = tuple(br.name for br in g.branches
                             if (dsu.find(br.node_plus) == root) != (dsu.find(br.node_minus) == root))
            warnings.append(TopologyWarning(
                "CurrentCutset", crossing,
                f"nodes {', '.join(members)} are reached only through current-defined branches "
                f"{', '.join(crossing)}"))
    return warnings
