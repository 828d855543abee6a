"""Command-line front end.

Exit codes: 0 on success, 1 when a numerical contract fails (POVM
validation, optimality certificate, universality check, Born-rule
sampling), 2 on bad flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from . import phase_covariant as pc
from . import qudit as qd
from . import universal_qubit as um
from .core import Povm, validate_povm
from .engine import verify_extremal
from .montecarlo import FAMILIES, KINDS, SamplingError, Scenario, SimConfig, simulate

PC_CURVE_HEADER = ["a", "eta", "P_I", "P_S", "P_RS"]
PC_TABLE_HEADER = ["N", "P_S_max", "P_I_unamb"]
UM_CURVE_HEADER = ["P_I", "P_S", "P_RS"]

QD_CHECK_TOL = 1e-8


def fmt(x: float | int) -> str:
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".9g")


def write_csv(header: Sequence[str], rows: Sequence[Sequence[float | int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, output: str | None) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", output)


# --------------------------------------------------------------------- commands


def cmd_pc_curve(args: argparse.Namespace) -> int:
    rows = [(p.a, p.eta, p.p_i, p.p_s, p.p_rs) for p in pc.pc_tradeoff_curve(args.n, args.grid)]
    _emit(write_csv(PC_CURVE_HEADER, rows), args.output)
    return 0


def cmd_pc_table(args: argparse.Namespace) -> int:
    if args.n_max < 1:
        raise ValueError("--n-max must be at least 1")
    rows = [(n, pc.ps_max(n), pc.p_i_unambiguous(n)) for n in range(1, args.n_max + 1)]
    _emit(write_csv(PC_TABLE_HEADER, rows), args.output)
    return 0


def cmd_um_curve(args: argparse.Namespace) -> int:
    _emit(write_csv(UM_CURVE_HEADER, um.um_curve(args.grid)), args.output)
    return 0


def cmd_qd_check(args: argparse.Namespace) -> int:
    report = qd.qd_universality_check(args.d, args.samples, args.seed)
    _emit_json(report.to_dict(), args.output)
    ok = report.max_abs_deviation <= QD_CHECK_TOL and report.max_effective_deviation <= QD_CHECK_TOL
    return 0 if ok else 1


def _scenario(args: argparse.Namespace) -> Scenario:
    return Scenario(
        kind=args.scenario,
        family=args.family,
        n=args.n,
        a=args.a,
        eta=args.eta,
        p_i=args.p_i,
        d=args.d,
    )


def _certificate_inputs(scenario: Scenario):
    """Analytic R± and the multiplier at which the scenario's POVM should be extremal."""
    if scenario.kind == "pc":
        r_plus, r_minus, _ = pc.pc_build_r_analytic(scenario.n)
        a = {"deterministic": 0.0, "unambiguous": 1.0}.get(scenario.family, scenario.a)
    else:
        r_plus, r_minus, _ = um.um_build_r_analytic()
        if scenario.family == "interpolated":
            a = um.lagrange_multiplier(scenario.p_i)
        else:
            a = {"deterministic": 0.0, "unambiguous": 1.0}[scenario.family]
    return r_plus, r_minus, a


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    povm, _ = scenario.build()
    if args.povm_file:
        with open(args.povm_file, encoding="utf-8") as fh:
            povm = Povm.from_dict(json.load(fh))
    if args.dump_povm:
        with open(args.dump_povm, "w", encoding="utf-8") as fh:
            json.dump(povm.to_dict(), fh)
    report = validate_povm(povm, args.tol)
    out: dict = {"scenario": scenario.describe(), "validation": report.to_dict(), "certificate": None}
    passed = report.passed
    if scenario.kind != "qd":
        r_plus, r_minus, a = _certificate_inputs(scenario)
        if povm.dim != r_plus.shape[0]:
            raise ValueError(f"POVM dimension {povm.dim} does not match scenario dimension {r_plus.shape[0]}")
        cert = verify_extremal(povm, r_plus, r_minus, a)
        out["certificate"] = cert.to_dict()
        passed = passed and cert.passed
    out["passed"] = passed
    _emit_json(out, args.output)
    return 0 if passed else 1


def cmd_mc(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    report = simulate(SimConfig(args.trials, args.seed, scenario), threads=args.threads)
    if args.format == "table":
        _emit(report.summary_table() + "\n", args.output)
    else:
        _emit_json(report.to_dict(), args.output)
    if scenario.error_free and report.errors:
        return 1
    return 0


# ----------------------------------------------------------------------- parser


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=KINDS, required=True)
    p.add_argument("--family", choices=FAMILIES, default="deterministic")
    p.add_argument("--n", type=int, default=2, help="program copies (pc)")
    p.add_argument("--a", type=float, default=0.0, help="Lagrange multiplier (pc interpolated)")
    p.add_argument("--eta", type=float, default=0.0, help="edge-block weight at a=1/2 (pc interpolated)")
    p.add_argument("--p-i", type=float, default=0.0, help="target inconclusive rate (um interpolated)")
    p.add_argument("--d", type=int, default=3, help="qudit dimension (qd)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeter", description="Programmable quantum multimeter toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pc-curve", help="phase-covariant P_RS vs P_I curve (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=21)
    p.set_defaults(func=cmd_pc_curve)

    p = sub.add_parser("pc-table", help="closed-form phase-covariant rates (CSV)")
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_pc_table)

    p = sub.add_parser("um-curve", help="universal qubit P_S vs P_I law (CSV)")
    p.add_argument("--grid", type=int, default=21)
    p.set_defaults(func=cmd_um_curve)

    p = sub.add_parser("qd-check", help="qudit multimeter universality over Haar programs (JSON)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_qd_check)

    p = sub.add_parser("validate", help="POVM validation and optimality certificate (JSON)")
    _add_scenario_flags(p)
    p.add_argument("--povm-file", help="validate this POVM JSON instead of the built-in construction")
    p.add_argument("--dump-povm", help="write the POVM being validated to this JSON file")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mc", help="Monte Carlo Born-rule simulation (JSON or table)")
    _add_scenario_flags(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $QMETER_THREADS or CPU count)")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_mc)

    for action in sub.choices.values():
        action.add_argument("--output", "-o", help="write to this file instead of stdout")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        parser.error(str(exc))
    except SamplingError as exc:
        print(f"qmeter: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
