"""Randomized differential campaign over generated circuits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CircuitError
from .oracle import GeneratorConfig, generate, solve_nodal
from .superposition import (
    decompose_via_control_system,
    decompose_via_full_solution,
    relative_deviation,
    scale_independent_sources,
    solve_direct,
    subcircuit_residuals,
    verify_additivity,
)
from .tableau import assemble

CHECKS = ("oracle", "additivity", "strategy", "subcircuit", "homogeneity", "zero_response")
HOMOGENEITY_ALPHAS = (0.5, 3.0)


@dataclass
class CheckStats:
    tolerance: float
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    worst_case: int | None = None

    def record(self, case: int, deviation: float) -> bool:
        if deviation > self.worst or self.worst_case is None:
            self.worst, self.worst_case = max(self.worst, deviation), case
        ok = deviation <= self.tolerance
        if ok:
            self.passed += 1
        else:
            self.failed += 1
        return ok


@dataclass
class CampaignSummary:
    count: int
    seed: int
    checks: dict[str, CheckStats] = field(default_factory=dict)
    errors: list[tuple[int, str]] = field(default_factory=list)
    max_branches: int = 0
    max_controlled: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors and all(c.failed == 0 for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "ok": self.ok,
            "max_branches": self.max_branches,
            "max_controlled": self.max_controlled,
            "checks": {name: vars(c) for name, c in self.checks.items()},
            "errors": [{"case": k, "error": msg} for k, msg in self.errors],
        }


def case_config(seed: int, case: int) -> GeneratorConfig:
    return GeneratorConfig(seed=(seed, case))


def run_campaign(count: int = 500, seed: int = 1, tol: float = 1e-8,
                 residual_tol: float = 1e-9, homogeneity_tol: float = 1e-9,
                 zero_tol: float = 1e-12) -> CampaignSummary:
    summary = CampaignSummary(count, seed, {
        "oracle": CheckStats(tol),
        "additivity": CheckStats(tol),
        "strategy": CheckStats(tol),
        "subcircuit": CheckStats(residual_tol),
        "homogeneity": CheckStats(homogeneity_tol),
        "zero_response": CheckStats(zero_tol),
    })
    for case in range(count):
        try:
            _run_case(summary, case)
        except CircuitError as exc:
            summary.errors.append((case, f"{type(exc).__name__}: {exc}"))
    return summary


def _run_case(summary: CampaignSummary, case: int) -> None:
    g = generate(case_config(summary.seed, case))
    sys = assemble(g)
    summary.max_branches = max(summary.max_branches, g.b)
    summary.max_controlled = max(summary.max_controlled, len(sys.control_coeffs))
    checks = summary.checks

    x = solve_direct(sys).x
    checks["oracle"].record(case, relative_deviation(solve_nodal(g).x, x))

    full = decompose_via_full_solution(sys)
    ctrl = decompose_via_control_system(sys)
    scale = max(1.0, float(np.max(np.abs(x))))
    add = max(verify_additivity(full).max_deviation, verify_additivity(ctrl).max_deviation) / scale
    checks["additivity"].record(case, add)
    checks["strategy"].record(case, max(relative_deviation(ctrl.total.x, x),
                                        relative_deviation(full.total.x, x)))
    res = list(subcircuit_residuals(sys, full).values()) + list(subcircuit_residuals(sys, ctrl).values())
    if res:
        checks["subcircuit"].record(case, max(res))

    worst = 0.0
    for alpha in HOMOGENEITY_ALPHAS:
        scaled = assemble(scale_independent_sources(g, alpha))
        worst = max(worst, relative_deviation(solve_direct(scaled).x, alpha * x))
    checks["homogeneity"].record(case, worst)

    # all sources off: every part, controlled ones included, must vanish
    quiet = assemble(scale_independent_sources(g, 0.0))
    parts = decompose_via_control_system(quiet)
    vectors = [p.x for p in parts.parts().values()] + [parts.total.x, solve_direct(quiet).x]
    checks["zero_response"].record(case, max(float(np.max(np.abs(v))) for v in vectors))
