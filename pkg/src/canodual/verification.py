"""Reference instances, the random parameter sweep, and the verification suite."""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import dual_gaussian as dg
from .errors import CanodualError, PreconditionError
from .kernel import GaussianKernel
from .oracle import (
    OracleConfig,
    conjugate_roundtrip,
    duality_gap_audit,
    fd_check,
    primal_criticals_bruteforce,
    v_roundtrip,
)
from .primal import ProblemParams, RegimeWarning, eval_P, grad_P, hess_P
from .solver import (
    CaseReport,
    find_dual_criticals,
    map_to_primal,
    order_check,
    pseudo_analysis,
    solve,
    theorem5_structure,
)

log = logging.getLogger(__name__)

ALPHA = 0.7071067811865476  # sqrt(2)/2

THETA1 = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.1)
THETA2 = ProblemParams(x=4.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.1)
THETA3 = ProblemParams(x=4.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.22)
THETA4 = ProblemParams(x=8.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.25)
FIG5 = ProblemParams(x=4.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.12)
CASE5 = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=5.0)

REFERENCE_INSTANCES = {"theta1": THETA1, "theta2": THETA2, "theta3": THETA3, "theta4": THETA4}

SWEEP_RANGES = {
    "y": (0.2, 1.5),
    "w": (1.2, 3.0),
    "x": (0.0, 10.0),
    "beta": (0.01, 0.5),
    "alpha": (0.4, 1.2),
}
GAP_RTOL = 1e-8
RELATION_RTOL = 1e-6
BETA_BAND = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def sample_instances(seed: int, n: int) -> list[ProblemParams]:
    """``n`` instances drawn uniformly from :data:`SWEEP_RANGES`, reproducible by seed."""
    rng = np.random.default_rng(seed)
    out = []
    with warnings.catch_warnings():
        # y > w is drawn on purpose now and then
        warnings.simplefilter("ignore", RegimeWarning)
        for _ in range(n):
            draw = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in SWEEP_RANGES.items()}
            out.append(ProblemParams(**draw))
    return out


def relation_residual(params: ProblemParams, cp) -> float:
    """Relative mismatch of ``Pd'' = -(2 sigma + y) / (G (sigma + y)) P''`` at a pair."""
    g = dg.G(params, cp.sigma, offset=cp.offset)
    rhs = -(2.0 * cp.offset - params.y) / (g * cp.offset) * cp.p_second
    scale = max(abs(rhs), abs(cp.pd_second))
    return abs(rhs - cp.pd_second) / scale if scale > 0 else 0.0


@dataclass
class InstanceResult:
    index: int
    params: ProblemParams
    gap_failures: list[float] = field(default_factory=list)
    relation_failures: list[float] = field(default_factory=list)
    order: Optional[bool] = None
    theorem5: Optional[bool] = None
    beta_agrees: Optional[bool] = None
    oracle_agrees: Optional[bool] = None
    error: Optional[str] = None


def analyse_instance(index: int, params: ProblemParams, with_oracle: bool = True) -> InstanceResult:
    res = InstanceResult(index, params)
    try:
        report = solve(params) if with_oracle else None
    except CanodualError as exc:
        res.error = f"{type(exc).__name__}: {exc}"
        return res
    if report is None:
        points = [map_to_primal(params, r) for r in find_dual_criticals(params)]
        beta = pseudo_analysis(params)
    else:
        points, beta = report.critical_points, report.beta
        res.oracle_agrees = report.oracle_agrees
    for cp in points:
        if cp.pseudo:
            continue
        if abs(cp.p_value - cp.pd_value) > GAP_RTOL * (1.0 + abs(cp.pd_value)):
            res.gap_failures.append(cp.sigma)
        if relation_residual(params, cp) > RELATION_RTOL:
            res.relation_failures.append(cp.sigma)
    try:
        res.order = order_check(points)
    except PreconditionError:
        res.order = None
    t5 = theorem5_structure(params, points, beta.sigma_f_kind)
    res.theorem5 = t5.holds if t5.applicable else None
    near = beta.beta_crit is not None and abs(params.beta - beta.beta_crit) <= BETA_BAND
    if beta.predicted_kind is not None and not near:
        res.beta_agrees = beta.predicted_kind == beta.sigma_f_kind
    return res


def _analyse(args):
    return analyse_instance(*args)


def run_sweep(seed: int = 0, n: int = 500, jobs: int = 1, with_oracle: bool = True) -> list[InstanceResult]:
    instances = sample_instances(seed, n)
    tasks = [(i, p, with_oracle) for i, p in enumerate(instances)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_analyse, tasks, chunksize=16))
    else:
        results = [_analyse(t) for t in tasks]
    return sorted(results, key=lambda r: r.index)


def summarize_sweep(results: list[InstanceResult]) -> list[CheckResult]:
    def _fails(pred):
        return [r.index for r in results if pred(r)]

    checks = [
        ("sweep: solver errors", _fails(lambda r: r.error is not None), None),
        ("sweep: zero duality gap", _fails(lambda r: r.gap_failures), None),
        ("sweep: second-derivative relation", _fails(lambda r: r.relation_failures), None),
        ("sweep: beta threshold agreement", _fails(lambda r: r.beta_agrees is False),
         sum(r.beta_agrees is not None for r in results)),
        ("sweep: sigma_f structure", _fails(lambda r: r.theorem5 is False),
         sum(r.theorem5 is not None for r in results)),
        ("sweep: S+/S- ordering", _fails(lambda r: r.order is False),
         sum(r.order is not None for r in results)),
        ("sweep: oracle agreement", _fails(lambda r: r.oracle_agrees is False),
         sum(r.oracle_agrees is not None for r in results)),
    ]
    out = []
    for name, bad, applicable in checks:
        total = len(results) if applicable is None else applicable
        detail = f"{total - len(bad)}/{total} instances pass"
        if bad:
            detail += f"; failing ids {bad[:10]}{' ...' if len(bad) > 10 else ''}"
        out.append(CheckResult(name, not bad, detail))
    return out


def _gap_check(name, params, cfg) -> CheckResult:
    roots = find_dual_criticals(params)
    primal = primal_criticals_bruteforce(params, params.kernel, cfg)
    audit = duality_gap_audit(params, roots, primal)
    return CheckResult(f"gap audit {name}", audit.ok and not audit.gap_failures, audit.summary())


def fd_checks(name, params) -> list[CheckResult]:
    k = params.kernel
    out = []
    lo, hi = min(0.0, params.x) - 3.0, max(0.0, params.x) + 3.0
    err = fd_check(lambda c: eval_P(params, k, c), lambda c: grad_P(params, k, c), (lo, hi), 200)
    out.append(CheckResult(f"fd P/P' {name}", err <= 1e-6, f"max rel err {err:.2e}"))
    err = fd_check(lambda c: grad_P(params, k, c), lambda c: hess_P(params, k, c), (lo, hi), 200)
    out.append(CheckResult(f"fd P'/P'' {name}", err <= 1e-5, f"max rel err {err:.2e}"))
    worst1 = worst2 = 0.0
    for a, b in pole_free_sample_intervals(params):
        worst1 = max(worst1, fd_check(lambda s: dg.Pd(params, s), lambda s: dg.Pd_prime(params, s), (a, b), 100))
        worst2 = max(worst2, fd_check(lambda s: dg.Pd_prime(params, s), lambda s: dg.Pd_second(params, s), (a, b), 100))
    out.append(CheckResult(f"fd Pd/Pd' {name}", worst1 <= 1e-6, f"max rel err {worst1:.2e}"))
    out.append(CheckResult(f"fd Pd'/Pd'' {name}", worst2 <= 1e-5, f"max rel err {worst2:.2e}"))
    return out


def pole_free_sample_intervals(params: ProblemParams, margin: float = 0.02) -> list[tuple[float, float]]:
    """Pieces of S_a kept ``margin * |S_a|`` away from its ends and from G roots."""
    p = params
    lo, hi = -p.y, p.w - p.y
    pad = margin * (hi - lo)
    edges = [lo, *dg.g_roots(p), hi]
    return [(a + pad, b - pad) for a, b in zip(edges[:-1], edges[1:]) if b - a > 2 * pad]


def _structure_checks(name, report: CaseReport) -> list[CheckResult]:
    p = report.params
    out = []
    t5 = theorem5_structure(p, report.critical_points, report.beta.sigma_f_kind)
    out.append(CheckResult(f"sigma_f structure {name}", t5.holds, t5.detail))
    try:
        ok = order_check(report.critical_points)
        out.append(CheckResult(f"S+/S- ordering {name}", ok, "checked"))
    except PreconditionError as exc:
        out.append(CheckResult(f"S+/S- ordering {name}", True, f"precondition not met ({exc})"))
    return out


def run_suite(seed: int = 0, sweep: int = 500, jobs: int = 1,
              cfg: OracleConfig = OracleConfig(),
              progress: Optional[Callable[[CheckResult], None]] = None) -> list[CheckResult]:
    """Every check, in a fixed order, gap audits first."""
    results: list[CheckResult] = []

    def add(check: CheckResult):
        results.append(check)
        if progress is not None:
            progress(check)

    def guarded(name, fn):
        try:
            out = fn()
        except CanodualError as exc:
            add(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
            return
        for check in out if isinstance(out, list) else [out]:
            add(check)

    for name, params in REFERENCE_INSTANCES.items():
        guarded(f"gap audit {name}", lambda: _gap_check(name, params, cfg))
    for name, params in REFERENCE_INSTANCES.items():
        guarded(f"fd {name}", lambda: fd_checks(name, params))

    gk = GaussianKernel(ALPHA)
    err = conjugate_roundtrip(gk, 2.0, np.linspace(0.0, 6.0, 61))
    add(CheckResult("U** = U (Gaussian, w=2)", err <= 1e-5, f"max abs err {err:.2e}"))
    err = v_roundtrip(1.0, np.linspace(-0.9, 0.9, 37))
    add(CheckResult("V** = V (y=1)", err <= 1e-8, f"max abs err {err:.2e}"))

    for name, params in REFERENCE_INSTANCES.items():
        guarded(f"structure {name}", lambda: _structure_checks(name, solve(params, cfg)))

    if sweep > 0:
        for check in summarize_sweep(run_sweep(seed, sweep, jobs)):
            add(check)
    return results


def first_failure(results: list[CheckResult]) -> Optional[CheckResult]:
    return next((r for r in results if not r.passed), None)
