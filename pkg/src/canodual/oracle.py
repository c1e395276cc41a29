"""Brute-force cross-checks that do not go through the dual.

The primal critical-point enumeration uses only ``grad_P`` on a dense grid
with bisection (no Newton steps, no second derivative), so it stays a
separate code path from the dual root finder it audits.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import canonical, dual_gaussian
from .kernel import RadialKernel
from .primal import ProblemParams, eval_P, grad_P, hess_P

log = logging.getLogger(__name__)

DEDUPE_TOL = 1e-8
MATCH_TOL = 1e-6
GAP_RTOL = 1e-8
PSEUDO_TOL = 1e-8


class OracleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class OracleConfig:
    c_range: Optional[tuple[float, float]] = None
    grid_n: int = 200_001
    refine_tol: float = 1e-12

    def __post_init__(self):
        if self.grid_n < 1001 or self.grid_n % 2 == 0:
            raise ValueError(f"grid_n must be odd and >= 1001, got {self.grid_n}")

    def range_for(self, params: ProblemParams) -> tuple[float, float]:
        if self.c_range is not None:
            lo, hi = self.c_range
            if not (lo <= 0 <= hi and lo <= params.x <= hi):
                raise ValueError(f"c_range {self.c_range} must contain 0 and x={params.x}")
            return float(lo), float(hi)
        return default_c_range(params)


def default_c_range(params: ProblemParams) -> tuple[float, float]:
    """Hull of the data-fit well around x and the regularization well at 0."""
    p = params
    ratio = 2.0 * abs(p.w) / max(abs(p.y), 1e-12)
    width = 8.0 * p.alpha * max(1.0, math.sqrt(2.0 * math.log(ratio)) if ratio > 1.0 else 0.0)
    if p.beta > 0:
        # a nonzero linear term shifts the quadratic well to f/beta
        width = max(width, abs(p.f) / p.beta)
    span = 2.0 * abs(p.x) + 5.0
    return min(p.x - width, -span, -width), max(p.x + width, span, width)


@dataclass(frozen=True)
class PrimalCritical:
    c: float
    p_value: float
    p_second: float
    kind: str


def _classify_second(value: float, ref: float) -> str:
    theta = 1e-7 * (1.0 + abs(ref))
    if value > theta:
        return "Min"
    if value < -theta:
        return "Max"
    return "Degenerate"


def _bisect_all(fn, a, b, tol):
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa = np.sign(fn(a))
    for _ in range(200):
        if a.size == 0 or np.max(b - a) <= tol:
            break
        m = 0.5 * (a + b)
        fm = np.sign(fn(m))
        left = fm == fa
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
    return 0.5 * (a + b)


def _scan(params, kernel, lo, hi, cfg):
    grid = np.linspace(lo, hi, cfg.grid_n)
    g = np.asarray(grad_P(params, kernel, grid))
    exact = grid[g == 0.0]
    flip = np.nonzero(g[:-1] * g[1:] < 0)[0]
    roots = _bisect_all(lambda c: grad_P(params, kernel, c), grid[flip], grid[flip + 1], cfg.refine_tol)
    cells = np.concatenate([flip, np.nonzero(g == 0.0)[0]])
    near_edge = cells.size > 0 and (cells.min() < 2 or cells.max() > cfg.grid_n - 4)
    return np.sort(np.concatenate([roots, exact])), near_edge


def primal_criticals_bruteforce(
    params: ProblemParams, kernel: RadialKernel, cfg: OracleConfig = OracleConfig()
) -> list[PrimalCritical]:
    """All sign changes of grad_P on a uniform grid, bisected to ``cfg.refine_tol``."""
    if not params.beta > 0:
        raise ValueError("the oracle needs beta > 0 for a bounded search range")
    lo, hi = cfg.range_for(params)
    roots, near_edge = _scan(params, kernel, lo, hi, cfg)
    if near_edge:
        warnings.warn(f"critical point near the edge of [{lo}, {hi}]; widening once", OracleWarning, stacklevel=2)
        mid, half = 0.5 * (lo + hi), (hi - lo)
        roots, near_edge = _scan(params, kernel, mid - half, mid + half, cfg)
        if near_edge:
            warnings.warn("critical point still near the edge after widening", OracleWarning, stacklevel=2)
    out: list[PrimalCritical] = []
    for c in roots:
        if out and abs(c - out[-1].c) <= DEDUPE_TOL:
            continue
        p_val = eval_P(params, kernel, c)
        h = hess_P(params, kernel, c)
        out.append(PrimalCritical(float(c), p_val, h, _classify_second(h, p_val)))
    log.debug("oracle found %d primal critical points on [%g, %g]", len(out), lo, hi)
    return out


@dataclass
class GapEntry:
    sigma: float
    offset: float
    c: float
    pd_value: float
    p_value: float
    pseudo: bool
    matched_c: Optional[float]

    @property
    def gap(self) -> float:
        return abs(self.p_value - self.pd_value)

    @property
    def gap_ok(self) -> bool:
        return self.pseudo or self.gap <= GAP_RTOL * (1.0 + abs(self.pd_value))


@dataclass
class GapAudit:
    entries: list[GapEntry] = field(default_factory=list)
    unmatched_primal: list[float] = field(default_factory=list)

    @property
    def gap_failures(self) -> list[GapEntry]:
        return [e for e in self.entries if not e.gap_ok]

    @property
    def unmatched_dual(self) -> list[GapEntry]:
        return [e for e in self.entries if not e.pseudo and e.matched_c is None]

    @property
    def pseudo_matched(self) -> bool:
        return any(e.pseudo and e.matched_c is not None for e in self.entries)

    @property
    def ok(self) -> bool:
        return not self.gap_failures and not self.unmatched_dual and not self.unmatched_primal

    def summary(self) -> str:
        n_match = sum(e.matched_c is not None for e in self.entries)
        return (
            f"{n_match} matched, {len(self.gap_failures)} gap failures, "
            f"{len(self.unmatched_dual)} unmatched dual, {len(self.unmatched_primal)} unmatched primal"
        )


def _sigma_offset(point, y):
    if isinstance(point, (int, float, np.floating)):
        return float(point), float(point) + y
    return point.sigma, point.offset


def duality_gap_audit(
    params: ProblemParams, dual_points: Iterable, primal_points: Sequence[PrimalCritical | float]
) -> GapAudit:
    """Pair each dual critical point with a primal one and compare values.

    ``dual_points`` may hold plain sigma floats or objects with ``sigma`` and
    ``offset`` attributes.  The pseudo point ``-y/2`` is audited for a match
    but never for the value gap.
    """
    kernel = params.kernel
    primal_c = [pc.c if isinstance(pc, PrimalCritical) else float(pc) for pc in primal_points]
    used = [False] * len(primal_c)
    audit = GapAudit()
    for point in dual_points:
        sigma, offset = _sigma_offset(point, params.y)
        pseudo = abs(2.0 * offset - params.y) <= PSEUDO_TOL
        c = dual_gaussian.recover_c(params, sigma, offset=offset)
        entry = GapEntry(
            sigma=sigma,
            offset=offset,
            c=c,
            pd_value=dual_gaussian.Pd(params, sigma, offset=offset),
            p_value=eval_P(params, kernel, c),
            pseudo=pseudo,
            matched_c=None,
        )
        if primal_c:
            j = int(np.argmin([abs(c - pc) for pc in primal_c]))
            if abs(c - primal_c[j]) <= MATCH_TOL * (1.0 + abs(c)):
                entry.matched_c = primal_c[j]
                used[j] = True
        audit.entries.append(entry)
    audit.unmatched_primal = [pc for pc, hit in zip(primal_c, used) if not hit]
    return audit


def fd_check(
    fn: Callable[[float], float],
    dfn: Callable[[float], float],
    interval: tuple[float, float],
    n: int,
    rel_step: float = 1e-6,
) -> float:
    """Max of ``|dfn(t) - central_difference(fn, t)| / (1 + |dfn(t)|)`` over n points."""
    worst = 0.0
    for t in np.linspace(interval[0], interval[1], n):
        h = rel_step * max(1.0, abs(t))
        fd = (fn(t + h) - fn(t - h)) / (2.0 * h)
        d = dfn(t)
        worst = max(worst, abs(d - fd) / (1.0 + abs(d)))
    return worst


def _sup_on_grid(objective, lo, hi, n=4001):
    """sup of a concave 1-D function on [lo, hi]: grid argmax then bounded Brent."""
    grid = np.linspace(lo, hi, n)
    vals = objective(grid)
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
    best = float(vals[k])
    if b > a:
        res = minimize_scalar(lambda t: -float(objective(t)), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, abs(a), abs(b))})
        best = max(best, -float(res.fun))
    return best


def conjugate_roundtrip(kernel: RadialKernel, w: float, grid: Iterable[float]) -> float:
    """Max |U**(eps) - U(eps)| where U** is a numerical sup over the tau domain.

    Only ``w > 0`` is supported: then tau ranges over ``[w phi'_min, 0)``.
    """
    if not w > 0:
        raise ValueError("conjugate_roundtrip needs w > 0")
    d_lo, d_hi = kernel.phi_prime_range()
    tau_lo = w * d_lo
    tau_hi = w * d_hi - 1e-13 * abs(tau_lo)
    worst = 0.0
    for eps in np.atleast_1d(np.asarray(list(grid), dtype=float)):
        def objective(tau, eps=eps):
            return tau * eps - np.asarray(canonical.u_star_tau(kernel, w, tau))
        u_dd = _sup_on_grid(objective, tau_lo, tau_hi)
        worst = max(worst, abs(u_dd - w * kernel.phi(eps)))
    return worst


def v_roundtrip(y: float, sigma_grid: Iterable[float], pad: float = 1.0) -> float:
    """Max |V**(xi) - V(xi)| at ``xi = sigma + y`` for sigma on the grid."""
    sig = np.atleast_1d(np.asarray(list(sigma_grid), dtype=float))
    lo, hi = sig.min() - pad, sig.max() + pad
    worst = 0.0
    for s in sig:
        xi = s + y
        v_dd = _sup_on_grid(lambda t, xi=xi: xi * t - np.asarray(canonical.v_star(t, y)), lo, hi)
        worst = max(worst, abs(v_dd - 0.5 * (xi - y) ** 2))
    return worst
