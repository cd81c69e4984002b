"""Command-line front-end.

    superpose analyze CIRCUIT [--json] [--contributions] [--strategy S]
                              [--no-verify] [--thevenin A B] [--tol X]
                              [--dump-system CSV]
    superpose verify [--count N] [--seed S] [--tol X] [--json]

Exit codes: 0 success, 2 parse/usage error, 3 singular system,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .campaign import run_campaign
from .errors import (
    NetlistError,
    SingularL0,
    SingularSystem,
    TerminalError,
    VerificationError,
)
from .netlist import parse_netlist, validate_topology
from .solver import relative_residual
from .superposition import (
    ContributionSet,
    decompose_via_control_system,
    decompose_via_full_solution,
    relative_deviation,
    solve_direct,
    subcircuit_residuals,
    verify_additivity,
)
from .tableau import assemble, dump_csv
from .thevenin import thevenin

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_MISMATCH = 4

SUBCIRCUIT_RTOL = 1e-9


def _err(msg: str) -> None:
    print(f"superpose: {msg}", file=sys.stderr)


def _fmt(v: float) -> str:
    return f"{v + 0.0: .6g}"


def _branch_rows(g, total) -> list[dict]:
    return [{
        "name": br.name,
        "kind": br.kind.value,
        "node_plus": br.node_plus,
        "node_minus": br.node_minus,
        "current": float(total.currents[pos]),
        "voltage": float(total.voltages[pos]),
    } for pos, br in enumerate(g.branches)]


def _text_report(report: dict, cs: ContributionSet | None) -> str:
    out = [f"strategy: {report['strategy']}", ""]
    width = max(len(r["name"]) for r in report["branches"])
    out.append(f"{'branch':<{width}}  {'current [A]':>14}  {'voltage [V]':>14}")
    for r in report["branches"]:
        out.append(f"{r['name']:<{width}}  {_fmt(r['current']):>14}  {_fmt(r['voltage']):>14}")
    if cs is not None:
        sources = list(cs.parts())
        out += ["", "contributions (columns: sources, rows: branch quantities)"]
        head = f"{'':<{width + 4}}" + "".join(f"{s:>13}" for s in sources) + f"{'total':>13}"
        out.append(head)
        parts = cs.parts()
        for pos, name in enumerate(cs.branch_names):
            for q, attr in (("i", "currents"), ("v", "voltages")):
                cells = "".join(f"{_fmt(getattr(parts[s], attr)[pos]):>13}" for s in sources)
                tot = getattr(cs.total, attr)[pos]
                out.append(f"{q}[{name}]".ljust(width + 4) + cells + f"{_fmt(tot):>13}")
    th = report.get("thevenin")
    if th:
        out += ["", f"thevenin at ({th['terminal_plus']}, {th['terminal_minus']}):",
                f"  v_open = {th['v_open']:.12g} V", f"  r_eq   = {th['r_eq']:.12g} ohm"]
        for src, v in th["v_open_contributions"].items():
            out.append(f"    v_open part from {src}: {v:.12g}")
        for lc in th["load_checks"]:
            out.append(f"  load {lc['resistance']:g} ohm: v={lc['v']:.9g} i={lc['i']:.9g} "
                       f"deviation={lc['deviation']:.2e}")
    res = report["residuals"]
    out += ["", "residuals:"]
    for k, v in res.items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                out.append(f"  {k}[{kk}]: {vv:.3e}")
        elif v is not None:
            out.append(f"  {k}: {v:.3e}")
    return "\n".join(out)


def cmd_analyze(args) -> int:
    try:
        with open(args.netlist, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _err(f"cannot read {args.netlist}: {exc}")
        return EXIT_PARSE
    try:
        g = parse_netlist(text)
    except NetlistError as exc:
        _err(f"{args.netlist}:{exc.line}: {type(exc).__name__}: {exc.reason}")
        return EXIT_PARSE
    for w in validate_topology(g):
        _err(f"warning: {w.code}: {w.message}")

    sys_ = assemble(g)
    if args.dump_system:
        with open(args.dump_system, "w", encoding="utf-8", newline="") as fh:
            dump_csv(sys_, fh)

    strategy = args.strategy
    status = EXIT_OK
    residuals: dict = {}
    try:
        cs = None
        if strategy == "control":
            try:
                cs = decompose_via_control_system(sys_)
                total = cs.total
            except SingularL0 as exc:
                _err(f"warning: {exc}; falling back to direct solve")
                strategy = "direct"
                total = solve_direct(sys_)
        elif strategy == "full":
            cs = decompose_via_full_solution(sys_)
            total = cs.total
        else:
            total = solve_direct(sys_)
            if args.contributions:
                try:
                    cs = decompose_via_full_solution(sys_)
                except SingularL0 as exc:
                    _err(f"warning: {exc}; no contribution table")

        residuals["tableau"] = relative_residual(sys_.L, total.x, sys_.U)
        residuals["strategy_deviation"] = None
        if cs is not None:
            add = verify_additivity(cs, args.tol)
            residuals["additivity"] = add.max_deviation
            sub = subcircuit_residuals(sys_, cs)
            residuals["subcircuit"] = sub
            if not add.passed:
                _err(f"verification: additivity deviation {add.max_deviation:.3e} at {add.worst_component}")
                status = EXIT_MISMATCH
            if any(r > SUBCIRCUIT_RTOL for r in sub.values()):
                _err("verification: controlled-source sub-circuit residual too large")
                status = EXIT_MISMATCH
        if strategy != "direct" and not args.no_verify:
            ref = solve_direct(sys_)
            dev = relative_deviation(total.x, ref.x)
            residuals["strategy_deviation"] = dev
            if dev > args.tol:
                _err(f"verification: {strategy} strategy differs from direct solve by {dev:.3e}")
                status = EXIT_MISMATCH

        th = None
        if args.thevenin:
            a, b = args.thevenin
            th = thevenin(g, a, b).to_dict()
    except SingularSystem as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_SINGULAR
    except TerminalError as exc:
        _err(str(exc))
        return EXIT_PARSE
    except VerificationError as exc:
        _err(f"verification: {exc}")
        return EXIT_MISMATCH

    report = {
        "strategy": strategy,
        "branches": _branch_rows(g, total),
        "contributions": cs.to_dict() if (cs is not None and args.contributions) else None,
        "thevenin": th,
        "residuals": residuals,
    }
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(_text_report(report, cs if args.contributions else None))
    return status


def cmd_verify(args) -> int:
    if args.count == 0:
        print("0 cases: nothing to verify (vacuous pass)")
        return EXIT_OK
    summary = run_campaign(args.count, args.seed, args.tol)
    if args.json:
        print(json.dumps(summary.to_dict(), indent=2))
    else:
        print(f"verify: {summary.count} cases, seed {summary.seed}, "
              f"max b = {summary.max_branches}, max controlled = {summary.max_controlled}")
        for name, c in summary.checks.items():
            state = "PASS" if c.failed == 0 else "FAIL"
            print(f"  {name:<14} {state}  passed {c.passed:>4}  failed {c.failed:>4}  "
                  f"worst {c.worst:.3e} (case {c.worst_case}, tol {c.tolerance:.0e})")
        for case, msg in summary.errors:
            print(f"  error in case {case}: {msg}")
        print("ALL PASS" if summary.ok else "FAILURES PRESENT")
    return EXIT_OK if summary.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superpose", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="solve a netlist")
    a.add_argument("netlist")
    a.add_argument("--json", action="store_true", help="emit the JSON report")
    a.add_argument("--contributions", action="store_true", help="add the per-source table")
    a.add_argument("--strategy", choices=("direct", "full", "control"), default="control")
    a.add_argument("--no-verify", action="store_true", help="skip the cross-check against a direct solve")
    a.add_argument("--thevenin", nargs=2, metavar=("A", "B"))
    a.add_argument("--tol", type=float, default=1e-8, help="comparison tolerance (relative)")
    a.add_argument("--dump-system", metavar="CSV", help="write L and U to a CSV file")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the randomized differential campaign")
    v.add_argument("--count", type=int, default=500)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
