"""Linear circuit analysis by tableau, with superposition over independent
and controlled sources."""

from .errors import (
    CircuitError,
    NetlistError,
    SingularControlSystem,
    SingularL0,
    SingularSystem,
    VerificationError,
)
from .netlist import Branch, CircuitGraph, Kind, parse_netlist, serialize, validate_topology
from .oracle import GeneratorConfig, generate, solve_nodal
from .superposition import (
    ContributionSet,
    SolutionVector,
    decompose_via_control_system,
    decompose_via_full_solution,
    solve_direct,
    verify_additivity,
)
from .tableau import TableauSystem, assemble, zero_controls
from .thevenin import TheveninEquivalent, equivalent_resistance, open_circuit_voltage, thevenin

__version__ = "0.1.0"
