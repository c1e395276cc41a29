"""Command-line front end.

Subcommands::

    canodual solve  --x 1 --y 1 --w 2 --alpha 0.7071067811865476 --beta 0.1
    canodual beta   --x 4 --y 1 --w 2 --alpha 0.7071067811865476 --beta 0.1
    canodual cases
    canodual curves --out DIR --x 1 --y 1 --w 2 --alpha 0.7071067811865476 --beta 0.1
    canodual verify [--seed 0] [--sweep 500] [--jobs 4]

Exit codes: 0 success, 1 malformed flags or I/O failure, 2 unsupported
parameter regime, 3 no matching case, 4 case table mismatch, 5 failed check.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dual_gaussian as dg
from .errors import CanodualError, DomainError, RegimeError
from .primal import ProblemParams, eval_P
from .solver import CaseReport, pseudo_analysis, require_regime, solve
from .verification import ALPHA, CASE5, FIG5, THETA1, THETA2, THETA3, THETA4, first_failure, run_suite

log = logging.getLogger("canodual")

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_UNCLASSIFIED, EXIT_CASES, EXIT_VERIFY = 0, 1, 2, 3, 4, 5

# distance from S_a's ends, and relative gap around G roots, for dual curve samples
DUAL_EDGE = 1e-6
DUAL_POLE_GAP = 1e-3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _configure_logging() -> None:
    level = os.environ.get("CANODUAL_LOG", "off").strip().lower()
    levels = {"info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        log.addHandler(logging.NullHandler())
        log.propagate = False
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(levels[level])


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    for name in ("x", "y", "w", "alpha", "beta"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--f", type=float, default=0.0, help="linear term coefficient (default 0)")


def _params(args) -> ProblemParams:
    return ProblemParams(x=args.x, y=args.y, w=args.w, alpha=args.alpha, beta=args.beta, f=args.f)


@dataclass(frozen=True)
class SolveRequest:
    params: ProblemParams
    output_format: str = "json"
    emit_curves: bool = False
    curve_samples: int = 2001

    def __post_init__(self):
        if self.output_format not in ("json", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.curve_samples < 2:
            raise ValueError("curve_samples must be at least 2")


def report_json(report: CaseReport) -> str:
    return json.dumps(report.as_dict(), sort_keys=True, indent=2, allow_nan=False)


def report_text(report: CaseReport) -> str:
    b = report.beta
    lines = [
        f"case: {report.case_id if report.case_id is not None else 'unclassified'}",
        f"critical points: {report.primal_count} primal / {report.dual_count} dual"
        f" (oracle agrees: {report.oracle_agrees})",
        f"x_o = {b.x_o:.10g}, beta_crit = {b.beta_crit if b.beta_crit is None else f'{b.beta_crit:.10g}'},"
        f" sigma_f is {b.sigma_f_kind}",
        f"{'sigma':>22} {'c':>22} {'P':>14} {'Pd':>14}  dual/primal  region",
    ]
    for cp in report.critical_points:
        lines.append(f"{cp.sigma:22.15g} {cp.c:22.15g} {cp.p_value:14.8g} {cp.pd_value:14.8g}"
                     f"  {cp.dual_kind}/{cp.primal_kind or '-'}  {cp.region}")
    rec = report.recommended
    lines.append("recommended: " + ("none" if rec is None else f"c = {rec.c:.15g} (sigma = {rec.sigma:.15g})"))
    if report.advice:
        lines.append(f"advice: {report.advice}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    req = SolveRequest(_params(args), args.format)
    report = solve(req.params)
    print(report_json(report) if req.output_format == "json" else report_text(report))
    return EXIT_OK if report.case_id is not None else EXIT_UNCLASSIFIED


def cmd_beta(args) -> int:
    analysis = pseudo_analysis(_params(args))
    print(json.dumps(analysis.as_dict(), sort_keys=True, indent=2))
    return EXIT_OK


@dataclass(frozen=True)
class CaseRow:
    name: str
    params: ProblemParams
    case_id: int
    primal: int
    dual: int
    note: str = ""


CASE_TABLE = (
    CaseRow("theta1", THETA1, 1, 3, 4),
    CaseRow("theta2", THETA2, 2, 5, 6),
    CaseRow("theta3", THETA3, 3, 3, 4, "all dual criticals in S+"),
    CaseRow("theta4", THETA4, 4, 3, 4, "sigma_f Max"),
    CaseRow("fig5", FIG5, 2, 5, 6, "boundary global min not recommended"),
    CaseRow("case5", CASE5, 5, 1, 2),
)


def _case_row_check(row: CaseRow, report: CaseReport) -> list[str]:
    diffs = []
    got = (report.case_id, report.primal_count, report.dual_count)
    want = (row.case_id, row.primal, row.dual)
    if got != want:
        diffs.append(f"{row.name}: expected case {want[0]} with {want[1]}/{want[2]}, "
                     f"got case {got[0]} with {got[1]}/{got[2]}")
    if row.name == "theta3" and report.region_counts["minus"]:
        diffs.append("theta3: dual criticals found in S-")
    if row.name == "theta4" and report.beta.sigma_f_kind != "Max":
        diffs.append(f"theta4: sigma_f is {report.beta.sigma_f_kind}, expected Max")
    if row.name == "fig5":
        best = min((cp for cp in report.critical_points if not cp.pseudo), key=lambda cp: cp.p_value)
        rec = report.recommended
        if rec is None or rec.region == "Boundary" or not best.p_value < rec.p_value:
            diffs.append("fig5: expected a recommended interior minimum above the boundary global min")
    if not report.oracle_agrees:
        diffs.append(f"{row.name}: dual and oracle critical points disagree")
    return diffs


def cmd_cases(args) -> int:
    del args
    print(f"alpha = {ALPHA!r}")
    print(f"{'name':<8} {'x':>4} {'beta':>6} {'case':>5} {'primal/dual':>12} {'expected':>10}  note")
    diffs = []
    for row in CASE_TABLE:
        report = solve(row.params)
        row_diffs = _case_row_check(row, report)
        diffs.extend(row_diffs)
        print(f"{row.name:<8} {row.params.x:>4g} {row.params.beta:>6g} {str(report.case_id):>5}"
              f" {f'{report.primal_count}/{report.dual_count}':>12}"
              f" {f'{row.primal}/{row.dual}':>10}  {'ok' if not row_diffs else 'MISMATCH'}"
              f"{'; ' + row.note if row.note else ''}")
    if diffs:
        print("\n".join(["", "mismatches:", *(f"  {d}" for d in diffs)]))
        return EXIT_CASES
    return EXIT_OK


def primal_samples(params: ProblemParams, n: int, c_range: tuple[float, float]) -> np.ndarray:
    c = np.linspace(c_range[0], c_range[1], n)
    return np.column_stack([c, eval_P(params, params.kernel, c)])


def dual_segments(params: ProblemParams, n: int) -> list[np.ndarray]:
    """Uniform sigma samples over S_a with G-root neighborhoods dropped, split at each root."""
    p = params
    lo, hi = -p.y + DUAL_EDGE, p.w - p.y - DUAL_EDGE
    sigma = np.linspace(lo, hi, n)
    roots = dg.g_roots(p)
    keep = np.ones(n, dtype=bool)
    gap = DUAL_POLE_GAP * (hi - lo)
    for r in roots:
        keep &= np.abs(sigma - r) > gap
    piece = np.searchsorted(np.asarray(roots), sigma)
    segments = []
    for k in range(len(roots) + 1):
        s = sigma[keep & (piece == k)]
        if s.size:
            segments.append(np.column_stack([s, dg.Pd(p, s)]))
    return segments


def _write_csv(fh, header: str, segments: Sequence[np.ndarray]) -> None:
    fh.write(header + "\n")
    for i, seg in enumerate(segments):
        if i:
            fh.write("\n")
        np.savetxt(fh, seg, fmt="%.17g", delimiter=",")


def write_curves(out: Path, params: ProblemParams, n: int,
                 c_range: Optional[tuple[float, float]] = None) -> list[Path]:
    """Write primal.csv and dual.csv into ``out``; nothing is left behind on failure."""
    if c_range is None:
        c_range = (min(0.0, params.x) - 2.0, max(0.0, params.x) + 3.0)
    files = {
        "primal.csv": ("c,P", [primal_samples(params, n, c_range)]),
        "dual.csv": ("sigma,Pd", dual_segments(params, n)),
    }
    out.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[str, Path]] = []
    try:
        for name, (header, segments) in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            staged.append((tmp, out / name))
            with os.fdopen(fd, "w", newline="") as fh:
                _write_csv(fh, header, segments)
        for tmp, final in staged:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    return [final for _, final in staged]


def cmd_curves(args) -> int:
    if args.samples < 2:
        raise _UsageError("--samples must be at least 2")
    if (args.c_min is None) != (args.c_max is None):
        raise _UsageError("--c-min and --c-max go together")
    c_range = None if args.c_min is None else (args.c_min, args.c_max)
    if c_range is not None and not c_range[0] < c_range[1]:
        raise _UsageError("--c-min must be below --c-max")
    params = require_regime(_params(args))
    try:
        for path in write_curves(Path(args.out), params, args.samples, c_range):
            print(path)
    except OSError as exc:
        print(f"error: cannot write curves: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(seed=args.seed, sweep=args.sweep, jobs=args.jobs,
                        progress=lambda check: print(check.line(), flush=True))
    bad = first_failure(results)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    if bad is not None:
        print(f"first failure: {bad.name}: {bad.detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="canodual", description="Canonical dual analysis of a one-center Gaussian RBF fit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="enumerate and classify critical points, recommend a center")
    _add_param_flags(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("beta", help="x_o, beta_crit and the kind of sigma = -y/2")
    _add_param_flags(p)
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("cases", help="reproduce the reference case table")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("curves", help="write primal.csv and dual.csv samples")
    _add_param_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--c-min", type=float)
    p.add_argument("--c-max", type=float)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--seed", type=int, default=0, help="sweep sampler seed")
    p.add_argument("--sweep", type=int, default=0, help="number of random sweep instances (0 skips it)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the sweep")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.error(str(exc))
    except RegimeError as exc:
        print(f"error: unsupported regime: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CanodualError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY if args.command == "verify" else EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
