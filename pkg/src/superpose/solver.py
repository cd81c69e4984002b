"""Dense LU factorization with partial pivoting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularSystem, SolverDefect

PIVOT_RTOL = 1e-10
RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class LuFactorization:
    """Packed factors of ``P @ A = L @ U``.

    ``lu`` holds the unit-lower factor below the diagonal and U on and above
    it. ``perm[k]`` is the row of ``A`` that ended up in row ``k``.
    """

    lu: np.ndarray
    perm: np.ndarray
    matrix: np.ndarray
    smallest_pivot_magnitude: float

    @property
    def dimension(self) -> int:
        return self.lu.shape[0]

    def lower(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.dimension)

    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    def permutation_matrix(self) -> np.ndarray:
        return np.eye(self.dimension)[self.perm]


def factor(a, name: str = "L", error=SingularSystem, labels=None) -> LuFactorization:
    """Factor a square matrix.

    Raises ``error`` (a :class:`SingularSystem` subclass) when the best
    available pivot is below ``PIVOT_RTOL * max|a|``. ``labels`` optionally
    names the columns, for a readable diagnostic.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    threshold = PIVOT_RTOL * scale
    lu = a.copy()
    perm = np.arange(n)
    smallest = np.inf
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        pivot = abs(lu[p, k])
        if pivot <= threshold or pivot == 0.0:
            context = f"column {k}" + (f" = {labels[k]}" if labels is not None else "")
            raise error(k, name, context)
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        smallest = min(smallest, pivot)
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    if n == 0:
        smallest = 0.0
    a.setflags(write=False)
    lu.setflags(write=False)
    perm.setflags(write=False)
    return LuFactorization(lu, perm, a, float(smallest))


def solve(f: LuFactorization, rhs, check: bool = True) -> np.ndarray:
    """Solve ``A x = rhs`` with a stored factorization.

    ``rhs`` may be a vector or a matrix of column right-hand sides. When
    ``check`` is set the relative residual
    ``|A x - rhs|_inf / max(1, |rhs|_inf)`` must not exceed ``RESIDUAL_RTOL``.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = f.dimension
    if rhs.shape[0] != n or rhs.ndim not in (1, 2):
        raise DimensionMismatch(f"right-hand side of shape {rhs.shape} for a {n}x{n} system")
    y = rhs[f.perm].copy()
    lu = f.lu
    for k in range(n):
        y[k + 1:] -= np.multiply.outer(lu[k + 1:, k], y[k])
    for k in range(n - 1, -1, -1):
        y[k] -= lu[k, k + 1:] @ y[k + 1:]
        y[k] /= lu[k, k]
    if check:
        r = relative_residual(f.matrix, y, rhs)
        if r > RESIDUAL_RTOL:
            raise SolverDefect(f"relative residual {r:.3e} exceeds {RESIDUAL_RTOL:.0e}")
    return y


def relative_residual(a: np.ndarray, x: np.ndarray, rhs: np.ndarray) -> float:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.size == 0:
        return 0.0
    res = np.max(np.abs(a @ x - rhs))
    return float(res / max(1.0, float(np.max(np.abs(rhs)))))
