"""Closed-form canonical dual of the Gaussian problem.

Every function takes ``sigma`` and optionally ``offset = sigma + y``.  The
offset is the accurate coordinate near the lower end of the feasible interval:
the regularization-induced critical point can sit at ``sigma + y ~ 1e-28``,
which rounds to ``sigma == -y`` in double precision.  When ``offset`` is given
it takes precedence and ``sigma`` is recomputed from it.

Shorthand used below, with ``u = sigma + y`` and ``q = sigma * u``::

    G(sigma) = beta - q / alpha**2
    F(sigma) = -x q / alpha**2 + f
    s(sigma) = u / w
    Pd(sigma) = -F**2 / (2 G) - q ln(s) + sigma**2 / 2 - x**2 q / (2 alpha**2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, RegimeError, SingularityError
from .primal import ProblemParams

POLE_RADIUS = 1e-9


class Interval(NamedTuple):
    lo: float
    hi: float

    def __contains__(self, value) -> bool:
        return self.lo < value < self.hi

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi


@dataclass(frozen=True)
class RegionPartition:
    """Sign regions of G over the feasible interval S_a = (-y, w - y).

    ``s_sharp`` and ``s_flat`` split ``s_plus`` at the pseudo critical
    point ``-y/2``.
    """

    s_a: Interval
    g_roots: tuple[float, ...]
    s_plus: tuple[Interval, ...]
    s_minus: tuple[Interval, ...]
    s_sharp: tuple[Interval, ...]
    s_flat: tuple[Interval, ...]

    @staticmethod
    def _member(value, intervals) -> bool:
        return any(value in iv for iv in intervals)

    def in_plus(self, sigma) -> bool:
        return self._member(sigma, self.s_plus)

    def in_minus(self, sigma) -> bool:
        return self._member(sigma, self.s_minus)

    def in_sharp(self, sigma) -> bool:
        return self._member(sigma, self.s_sharp)

    def in_flat(self, sigma) -> bool:
        return self._member(sigma, self.s_flat)


@dataclass(frozen=True)
class DualLandscape:
    params: ProblemParams
    partition: RegionPartition
    sigma_f: float
    x_o: Optional[float]


def _offset(params: ProblemParams, sigma, offset):
    if offset is None:
        return np.asarray(sigma, dtype=float) + params.y
    return np.asarray(offset, dtype=float)


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def _q(params, sigma, offset):
    u = _offset(params, sigma, offset)
    return (u - params.y) * u


def s_of(params: ProblemParams, sigma, *, offset=None):
    """``s = (sigma + y) / w``, the argument of the logarithm."""
    return _out(_offset(params, sigma, offset) / params.w)


def G(params: ProblemParams, sigma, *, offset=None):
    return _out(params.beta - _q(params, sigma, offset) / params.alpha**2)


def F(params: ProblemParams, sigma, *, offset=None):
    return _out(-params.x * _q(params, sigma, offset) / params.alpha**2 + params.f)


def u_star(params: ProblemParams, sigma, *, offset=None):
    """Second-level conjugate expressed in sigma: ``(sigma + y)(ln s - 1)``."""
    u = _check_domain(params, sigma, offset)
    return _out(u * (np.log(u / params.w) - 1.0))


def g_roots(params: ProblemParams) -> tuple[float, ...]:
    """Roots of G inside the open feasible interval, ascending."""
    p = params
    disc = p.y * p.y + 4.0 * p.alpha**2 * p.beta
    sq = math.sqrt(disc)
    # offsets u solve u**2 - y u - alpha**2 beta = 0; pick the root free of
    # cancellation first, get the other from the product of roots
    big = 0.5 * (p.y + math.copysign(sq, p.y))
    small = -p.alpha**2 * p.beta / big if big != 0 else 0.0
    lo, hi = sorted((0.0, p.w))
    return tuple(u - p.y for u in sorted((small, big)) if lo < u < hi)


def _check_domain(params, sigma, offset):
    u = _offset(params, sigma, offset)
    s = u / params.w
    if not np.all((s > 0.0) & (s <= 1.0)):
        raise DomainError(f"sigma outside the feasible interval (s = {s!r})")
    return u


def _check_poles(params, sigma, offset):
    u = _check_domain(params, sigma, offset)
    sig = u - params.y
    for r in g_roots(params):
        if np.any(np.abs(sig - r) <= POLE_RADIUS * (1.0 + abs(r))):
            raise SingularityError(f"sigma within {POLE_RADIUS:g} of the G root {r!r}")
    return u


def recover_c(params: ProblemParams, sigma, *, offset=None):
    """Primal center paired with sigma: ``F / G``."""
    _check_poles(params, sigma, offset)
    return _out(np.asarray(F(params, sigma, offset=offset)) / G(params, sigma, offset=offset))


def Pd(params: ProblemParams, sigma, *, offset=None):
    u = _check_poles(params, sigma, offset)
    p = params
    sig = u - p.y
    q = sig * u
    f_val = np.asarray(F(p, sigma, offset=offset))
    g_val = np.asarray(G(p, sigma, offset=offset))
    out = -0.5 * f_val**2 / g_val - q * np.log(u / p.w) + 0.5 * sig**2 - p.x**2 * q / (2.0 * p.alpha**2)
    return _out(out)


def critical_factor(params: ProblemParams, sigma, *, offset=None):
    """Bracketed factor ``h`` of ``Pd' = -(2 sigma + y) h``.

    ``h = (x - F/G)**2 / (2 alpha**2) + ln s``; every dual critical point
    other than ``-y/2`` is a root of ``h``.
    """
    u = _check_poles(params, sigma, offset)
    c = np.asarray(recover_c(params, sigma, offset=offset))
    return _out((params.x - c) ** 2 / (2.0 * params.alpha**2) + np.log(u / params.w))


def critical_factor_prime(params: ProblemParams, sigma, *, offset=None):
    u = _check_poles(params, sigma, offset)
    p = params
    a2 = p.alpha**2
    c = np.asarray(recover_c(p, sigma, offset=offset))
    g_val = np.asarray(G(p, sigma, offset=offset))
    return _out(1.0 / u + (2.0 * u - p.y) * (p.x - c) ** 2 / (a2 * a2 * g_val))


def Pd_prime(params: ProblemParams, sigma, *, offset=None):
    u = _offset(params, sigma, offset)
    h = np.asarray(critical_factor(params, sigma, offset=offset))
    return _out(-(2.0 * u - params.y) * h)


def Pd_second(params: ProblemParams, sigma, *, offset=None):
    u = _check_poles(params, sigma, offset)
    p = params
    a2 = p.alpha**2
    lin = 2.0 * u - p.y  # 2 sigma + y
    d2 = (p.x - np.asarray(recover_c(p, sigma, offset=offset))) ** 2
    g_val = np.asarray(G(p, sigma, offset=offset))
    out = -(d2 / a2) * (1.0 + lin**2 / (a2 * g_val)) - lin / u - 2.0 * np.log(u / p.w)
    return _out(out)


def x_o(params: ProblemParams) -> float:
    """Threshold abscissa ``sqrt(-2 alpha**2 ln(y / (2 w)))``."""
    ratio = params.y / (2.0 * params.w)
    if not 0.0 < ratio < 1.0:
        raise DomainError(f"x_o undefined: y/(2w) = {ratio!r} is not in (0, 1)")
    return math.sqrt(-2.0 * params.alpha**2 * math.log(ratio))


def partition(params: ProblemParams) -> RegionPartition:
    p = params
    if not (p.w > 0 and p.y > 0):
        raise RegimeError("partition needs w > 0 and y > 0 (normalize first)")
    s_a = Interval(-p.y, p.w - p.y)
    roots = g_roots(p)
    edges = [s_a.lo, *roots, s_a.hi]
    plus, minus = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        (plus if G(p, mid) > 0 else minus).append(Interval(lo, hi))
    sigma_f = -0.5 * p.y
    sharp = tuple(Interval(max(iv.lo, sigma_f), iv.hi) for iv in plus if iv.hi > sigma_f)
    flat = tuple(Interval(iv.lo, min(iv.hi, sigma_f)) for iv in plus if iv.lo < sigma_f)
    return RegionPartition(s_a, roots, tuple(plus), tuple(minus), sharp, flat)


def landscape(params: ProblemParams) -> DualLandscape:
    try:
        xo = x_o(params)
    except DomainError:
        xo = None
    return DualLandscape(params, partition(params), -0.5 * params.y, xo)
