"""Exception hierarchy shared by the parser, the solvers and the CLI."""

from __future__ import annotations


class CircuitError(Exception):
    """Base class for every error raised by this package."""


class NetlistError(CircuitError):
    """A netlist could not be turned into a valid circuit.

    ``line`` is the 1-based line of the offending input, or ``None`` when the
    circuit was built programmatically.
    """

    def __init__(self, reason: str, line: int | None = None):
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class UnknownElementPrefix(NetlistError):
    pass


class ArityError(NetlistError):
    pass


class InvalidNumber(NetlistError):
    pass


class DuplicateName(NetlistError):
    pass


class UnresolvedControlRef(NetlistError):
    pass


class DisconnectedGraph(NetlistError):
    pass


class SelfLoop(NetlistError):
    pass


class NonPositiveResistance(NetlistError):
    pass


class MissingGround(NetlistError):
    pass


class SingularSystem(CircuitError):
    """No usable pivot was found while factoring a system matrix.

    ``pivot_index`` is the 0-based elimination step (equivalently the column)
    that failed; ``matrix`` names the system ("L", "L0", "control", ...).
    """

    def __init__(self, pivot_index: int, matrix: str = "L", context: str | None = None):
        self.pivot_index = pivot_index
        self.matrix = matrix
        self.context = context
        msg = f"singular {matrix} matrix: no usable pivot at step {pivot_index}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class SingularL0(SingularSystem):
    """L0 (all control coefficients zeroed) is singular."""


class SingularControlSystem(SingularSystem):
    """The M x M control-variable system (I - G) is singular."""


class DimensionMismatch(CircuitError, ValueError):
    pass


class SolverDefect(CircuitError):
    """An accepted solve failed its residual check."""


class VerificationError(CircuitError):
    """Two routes that must agree did not."""


class TerminalError(CircuitError, ValueError):
    pass


class GenerationExhausted(CircuitError):
    pass
