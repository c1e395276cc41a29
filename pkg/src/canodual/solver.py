"""Dual critical points of the Gaussian problem and what they say about the primal.

The pipeline is::

    sigmas = find_dual_criticals(params)
    points = [map_to_primal(params, s) for s in sigmas]
    report = detect_case(params, points, oracle_points)
    pick = recommend_center(params, report)

or simply ``solve(params)``.  Dual points are carried as :class:`DualRoot`
(sigma plus the offset ``sigma + y``) so that critical points hugging the
lower end of the feasible interval survive double precision.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import dual_gaussian as dg
from .errors import ConsistencyError, PreconditionError, RegimeError
from .oracle import OracleConfig, PrimalCritical, duality_gap_audit, primal_criticals_bruteforce
from .primal import ProblemParams, eval_P, hess_P

log = logging.getLogger(__name__)

SCAN_SAMPLES = 20_000
BISECT_TOL = 1e-13
DEDUPE_TOL = 1e-9
PSEUDO_TOL = 1e-8
BOUNDARY_FRACTION = 1e-3
# smallest offset probed by the log-spaced scan near sigma = -y
MIN_LOG_OFFSET = 1e-300
LOG_SCAN_SAMPLES = 4_000

MIN, MAX, INFLECTION, DEGENERATE = "Min", "Max", "Inflection", "Degenerate"
S_PLUS_SHARP, S_PLUS_FLAT, S_MINUS = "SPlusSharp", "SPlusFlat", "SMinus"
PSEUDO_ONLY, BOUNDARY = "PseudoOnly", "Boundary"


class DualRoot(NamedTuple):
    sigma: float
    offset: float


@dataclass(frozen=True)
class CriticalPoint:
    sigma: float
    offset: float
    c: float
    p_value: float
    pd_value: float
    pd_second: float
    p_second: float
    dual_kind: str
    primal_kind: Optional[str]
    region: str

    @property
    def pseudo(self) -> bool:
        return self.region == PSEUDO_ONLY

    @property
    def in_plus(self) -> bool:
        return self.region in (S_PLUS_SHARP, S_PLUS_FLAT, PSEUDO_ONLY, BOUNDARY)

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "sigma_offset": self.offset,
            "c": self.c,
            "p_value": self.p_value,
            "pd_value": self.pd_value,
            "pd_second": self.pd_second,
            "p_second": self.p_second,
            "dual_kind": self.dual_kind,
            "primal_kind": self.primal_kind,
            "region": self.region,
        }


@dataclass(frozen=True)
class BetaAnalysis:
    x_o: Optional[float]
    beta_crit: Optional[float]
    sigma_f_kind: str
    predicted_kind: Optional[str]
    critf_satisfied: bool

    def as_dict(self) -> dict:
        return {
            "x_o": self.x_o,
            "beta_crit": self.beta_crit,
            "sigma_f_kind": self.sigma_f_kind,
            "predicted_kind": self.predicted_kind,
            "critf_satisfied": self.critf_satisfied,
        }


@dataclass(frozen=True)
class Recommendation:
    point: Optional[CriticalPoint]
    advice: str


@dataclass(frozen=True)
class StructureRecord:
    sigma_f_kind: str
    applicable: bool
    holds: bool
    detail: str


@dataclass
class CaseReport:
    params: ProblemParams
    case_id: Optional[int]
    primal_count: int
    dual_count: int
    critical_points: list[CriticalPoint]
    beta: BetaAnalysis
    oracle_agrees: bool
    oracle_points: list[PrimalCritical] = field(default_factory=list)
    recommended: Optional[CriticalPoint] = None
    advice: str = ""

    @property
    def region_counts(self) -> dict[str, int]:
        plus = sum(p.in_plus for p in self.critical_points)
        return {"plus": plus, "minus": len(self.critical_points) - plus}

    def as_dict(self) -> dict:
        p = self.params
        return {
            "params": {"x": p.x, "y": p.y, "w": p.w, "alpha": p.alpha, "beta": p.beta, "f": p.f},
            "case_id": self.case_id,
            "primal_count": self.primal_count,
            "dual_count": self.dual_count,
            "critical_points": [cp.as_dict() for cp in self.critical_points],
            "beta": self.beta.as_dict(),
            "recommended": None if self.recommended is None else self.recommended.as_dict(),
            "advice": self.advice,
            "oracle_agrees": self.oracle_agrees,
        }


def require_regime(params: ProblemParams) -> ProblemParams:
    p = params.normalized()
    if not p.w > 0:
        raise RegimeError("w must be nonzero")
    if not p.y > 0:
        raise RegimeError(f"need w*y > 0 (got w={params.w}, y={params.y})")
    if not p.beta > 0:
        raise RegimeError("beta must be positive for the primal to be coercive")
    return p


def _h(params, u):
    return dg.critical_factor(params, None, offset=u)


def _h_prime(params, u):
    return dg.critical_factor_prime(params, None, offset=u)


def _bisect(params, a, b, fa):
    for _ in range(400):
        if b - a <= BISECT_TOL * min(1.0, b):
            break
        # geometric midpoint while the bracket spans decades near u = 0
        m = math.sqrt(a * b) if a > 0 and b > 4.0 * a else 0.5 * (a + b)
        fm = float(_h(params, m))
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _polish(params, u, a, b):
    """A few guarded Newton steps; kept only if they stay in [a, b] and shrink |h|."""
    best, best_h = u, abs(float(_h(params, u)))
    for _ in range(3):
        step = float(_h(params, best)) / float(_h_prime(params, best))
        nxt = best - step
        if not a <= nxt <= b:
            break
        h_nxt = abs(float(_h(params, nxt)))
        if h_nxt >= best_h:
            break
        best, best_h = nxt, h_nxt
    return best


def _pole_free_pieces(params) -> list[tuple[float, float]]:
    """Offset intervals covering S_a minus the end margins and the G-root guards.

    The first piece is the one touching ``sigma = -y``.
    """
    p = params
    delta = 1e-10 * (1.0 + abs(p.w))
    pieces, lo = [], delta
    for r in dg.g_roots(p):
        # a little wider than the evaluation guard so no sample is rejected
        rad = 1.5 * dg.POLE_RADIUS * (1.0 + abs(r))
        pieces.append((lo, r + p.y - rad))
        lo = r + p.y + rad
    pieces.append((lo, p.w - delta))
    return [(a, b) for a, b in pieces if b > a]


def find_dual_criticals(params: ProblemParams, samples: int = SCAN_SAMPLES) -> list[DualRoot]:
    """All critical points of Pd in the open feasible interval, ascending.

    ``-y/2`` is always included.  The others are roots of the critical factor,
    bracketed on ``samples`` uniform points per pole-free piece (plus a
    log-spaced sweep of offsets below the first sample of the piece touching
    ``sigma = -y``), bisected and Newton-polished.
    """
    p = require_regime(params)
    found: list[float] = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k, (lo, hi) in enumerate(_pole_free_pieces(p)):
            grid = np.linspace(lo, hi, samples)
            if k == 0:
                tail = np.geomspace(MIN_LOG_OFFSET * p.w, lo, LOG_SCAN_SAMPLES, endpoint=False)
                grid = np.concatenate([tail, grid])
            vals = _h(p, grid)
            ok = np.isfinite(vals)
            grid, vals = grid[ok], vals[ok]
            for i in np.nonzero(vals[:-1] * vals[1:] <= 0)[0]:
                a, b = grid[i], grid[i + 1]
                if vals[i] == 0.0:
                    u = a
                elif vals[i + 1] == 0.0:
                    u = b
                else:
                    u = _polish(p, _bisect(p, a, b, vals[i]), a, b)
                found.append(float(u))
    roots = [DualRoot(-0.5 * p.y, 0.5 * p.y)]
    for u in sorted(found):
        if any(abs(u - r.offset) <= DEDUPE_TOL for r in roots):
            continue
        roots.append(DualRoot(u - p.y, u))
    roots.sort(key=lambda r: r.offset)
    log.debug("found %d dual critical points", len(roots))
    return roots


def _as_root(params, sigma) -> DualRoot:
    if isinstance(sigma, DualRoot):
        return sigma
    return DualRoot(float(sigma), float(sigma) + params.y)


def classify_dual(params: ProblemParams, sigma) -> str:
    r = _as_root(params, sigma)
    second = dg.Pd_second(params, r.sigma, offset=r.offset)
    theta = 1e-7 * (1.0 + abs(dg.Pd(params, r.sigma, offset=r.offset)))
    if second > theta:
        return MIN
    if second < -theta:
        return MAX
    return INFLECTION


def _classify_primal(p_second, p_value) -> str:
    theta = 1e-7 * (1.0 + abs(p_value))
    if p_second > theta:
        return MIN
    if p_second < -theta:
        return MAX
    return DEGENERATE


_FLIP = {MIN: MAX, MAX: MIN}


def region_of(params: ProblemParams, sigma) -> str:
    r = _as_root(params, sigma)
    if abs(2.0 * r.offset - params.y) <= PSEUDO_TOL:
        return PSEUDO_ONLY
    if dg.G(params, r.sigma, offset=r.offset) < 0:
        return S_MINUS
    if r.offset <= BOUNDARY_FRACTION * params.y:
        return BOUNDARY
    return S_PLUS_SHARP if 2.0 * r.offset > params.y else S_PLUS_FLAT


def map_to_primal(params: ProblemParams, sigma) -> CriticalPoint:
    """Pair a dual critical point with its primal center and classify both.

    The primal kind predicted from the dual kind by the sign of
    ``(2 sigma + y) G(sigma)`` is checked against the sign of ``P''``.
    """
    p = require_regime(params)
    r = _as_root(p, sigma)
    kernel = p.kernel
    c = dg.recover_c(p, r.sigma, offset=r.offset)
    p_value = eval_P(p, kernel, c)
    p_second = hess_P(p, kernel, c)
    pd_value = dg.Pd(p, r.sigma, offset=r.offset)
    dual_kind = classify_dual(p, r)
    region = region_of(p, r)
    direct = _classify_primal(p_second, p_value)

    if region == PSEUDO_ONLY:
        analysis = pseudo_analysis(p)
        primal_kind = direct if analysis.critf_satisfied else None
    else:
        primal_kind = direct
        sign = (2.0 * r.offset - p.y) * dg.G(p, r.sigma, offset=r.offset)
        if dual_kind in _FLIP and direct != DEGENERATE:
            predicted = _FLIP[dual_kind] if sign > 0 else dual_kind
            if predicted != direct:
                raise ConsistencyError(
                    f"sigma={r.sigma!r}: dual {dual_kind} predicts primal {predicted}, P''={p_second!r}"
                )
    return CriticalPoint(r.sigma, r.offset, c, p_value, pd_value,
                         dg.Pd_second(p, r.sigma, offset=r.offset), p_second,
                         dual_kind, primal_kind, region)


def beta_crit(params: ProblemParams) -> Optional[float]:
    p = require_regime(params)
    xo = dg.x_o(p)
    ax = abs(p.x)
    if ax <= xo:
        return None
    return p.y**2 * xo / (4.0 * p.alpha**2 * (ax - xo))


def pseudo_analysis(params: ProblemParams) -> BetaAnalysis:
    """Behaviour of the pseudo critical point ``-y/2`` as a function of beta."""
    p = require_regime(params)
    xo = dg.x_o(p)
    bc = beta_crit(p)
    kind = classify_dual(p, DualRoot(-0.5 * p.y, 0.5 * p.y))

    predicted = None
    if p.f == 0:
        if bc is None:
            predicted = MIN if abs(p.x) < xo else None
        elif p.beta < bc:
            predicted = MIN
        elif p.beta > bc:
            predicted = MAX
        else:
            predicted = INFLECTION

    g_f = p.beta + p.y**2 / (4.0 * p.alpha**2)
    scale = 1.0 + abs(p.beta * p.x) + abs(p.f) + g_f * xo
    critf = any(abs(p.beta * p.x - p.f + sgn * g_f * xo) <= 1e-10 * scale for sgn in (1.0, -1.0))
    return BetaAnalysis(xo, bc, kind, predicted, critf)


def order_check(points: Sequence[CriticalPoint]) -> bool:
    """S+ critical values lie strictly below S- ones of the same primal kind."""
    pairs = [
        (a, b)
        for a in points
        for b in points
        if a.in_plus and not a.pseudo and b.region == S_MINUS
        and a.primal_kind in (MIN, MAX) and a.primal_kind == b.primal_kind
    ]
    if not pairs:
        raise PreconditionError("no S+/S- pair of critical points with matching primal kind")
    return all(a.pd_value < b.pd_value for a, b in pairs)


def theorem5_structure(params: ProblemParams, points: Sequence[CriticalPoint],
                       sigma_f_kind: Optional[str] = None) -> StructureRecord:
    """Where the non-pseudo S+ critical points must sit, given the kind of ``-y/2``."""
    p = require_regime(params)
    if sigma_f_kind is None:
        sigma_f_kind = classify_dual(p, DualRoot(-0.5 * p.y, 0.5 * p.y))
    primal_count = sum(1 for cp in points if not cp.pseudo)
    if primal_count > 5:
        warnings.warn(f"{primal_count} primal critical points exceed the five assumed", stacklevel=2)
        return StructureRecord(sigma_f_kind, False, True, "more than five primal critical points")
    sharp = [cp for cp in points if cp.region == S_PLUS_SHARP]
    flat = [cp for cp in points if cp.region in (S_PLUS_FLAT, BOUNDARY)]
    if sigma_f_kind == MIN:
        hits = [cp for cp in sharp if cp.dual_kind == MAX and cp.primal_kind == MIN]
        return StructureRecord(MIN, True, bool(hits),
                              f"{len(hits)} dual max / primal min in S+sharp")
    if sigma_f_kind == MAX:
        holds = not sharp and bool(flat)
        return StructureRecord(MAX, True, holds, f"{len(sharp)} in S+sharp, {len(flat)} in S+flat")
    return StructureRecord(sigma_f_kind, False, True, "sigma_f is degenerate")


def _match_case(primal_count, dual_count, sigma_f_kind, plus, minus) -> Optional[int]:
    if (primal_count, dual_count) == (5, 6):
        return 2
    if (primal_count, dual_count) == (1, 2):
        return 5
    if (primal_count, dual_count) == (3, 4):
        if minus == 0:
            return 3
        if plus == 2 and minus == 2:
            return {MIN: 1, MAX: 4}.get(sigma_f_kind)
    return None


def detect_case(params: ProblemParams, points: Sequence[CriticalPoint],
                oracle_points: Sequence[PrimalCritical]) -> CaseReport:
    p = require_regime(params)
    analysis = pseudo_analysis(p)
    audit = duality_gap_audit(p, points, oracle_points)
    plus = sum(cp.in_plus for cp in points)
    minus = len(points) - plus
    case_id = _match_case(len(oracle_points), len(points), analysis.sigma_f_kind, plus, minus)
    if case_id is None:
        log.info("no reference case matches %d primal / %d dual", len(oracle_points), len(points))
    return CaseReport(p, case_id, len(oracle_points), len(points), list(points), analysis,
                      audit.ok, list(oracle_points))


def _near_boundary(params, cp: CriticalPoint) -> bool:
    return cp.offset <= BOUNDARY_FRACTION * params.y


def recommend_center(params: ProblemParams, report: CaseReport) -> Recommendation:
    """Pick the training solution: the primal minimum closest to zero error in S+sharp.

    The regularization-induced minimum next to ``sigma = -y`` is never picked,
    even when it is the global minimum.
    """
    p = require_regime(params)
    beta = report.beta
    lower = (f"reduce beta below beta_crit={beta.beta_crit:.6g}" if beta.beta_crit is not None
             else "choose a smaller value of beta")
    if report.case_id == 5:
        return Recommendation(None, f"the quadratic term in beta dominates the fit: {lower}")
    mins = [cp for cp in report.critical_points
            if not cp.pseudo and cp.primal_kind == MIN and not _near_boundary(p, cp)]
    sharp = [cp for cp in mins if cp.region == S_PLUS_SHARP]
    if sharp:
        return Recommendation(min(sharp, key=lambda cp: abs(cp.sigma)), "")
    advice = "no primal minimum in S+sharp"
    if beta.sigma_f_kind == MAX:
        advice = f"sigma_f is a local maximum: beta={p.beta:g} exceeds beta_crit; {lower}"
    flat = [cp for cp in mins if cp.region == S_PLUS_FLAT]
    if flat:
        return Recommendation(min(flat, key=lambda cp: abs(cp.sigma)), advice)
    return Recommendation(None, f"{advice}; no admissible minimum away from the boundary")


def solve(params: ProblemParams, cfg: OracleConfig = OracleConfig(),
          samples: int = SCAN_SAMPLES) -> CaseReport:
    """Full analysis of one instance: dual roots, pairing, oracle, case, recommendation."""
    p = require_regime(params)
    roots = find_dual_criticals(p, samples)
    points = [map_to_primal(p, r) for r in roots]
    oracle_points = primal_criticals_bruteforce(p, p.kernel, cfg)
    report = detect_case(p, points, oracle_points)
    rec = recommend_center(p, report)
    report.recommended, report.advice = rec.point, rec.advice
    return report


__all__ = [
    "BetaAnalysis", "CaseReport", "CriticalPoint", "DualRoot", "Recommendation",
    "StructureRecord", "beta_crit", "require_regime", "classify_dual", "detect_case", "find_dual_criticals",
    "map_to_primal", "order_check", "pseudo_analysis", "recommend_center", "region_of", "solve",
    "theorem5_structure",
]
