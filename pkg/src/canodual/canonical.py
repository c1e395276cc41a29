"""Sequential canonical dual transformation for an arbitrary radial kernel.

First level:  xi = w phi(eps),  sigma = xi - y,  V*(sigma) = sigma**2/2 + y sigma
Second level: eps = |x - c|**2, tau = w phi'(eps), U*(tau) = tau eps - w phi(eps)

These routines only go through the kernel contract, so for the Gaussian they
form an independent path to the closed forms in :mod:`canodual.dual_gaussian`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .kernel import RadialKernel
from .primal import ProblemParams

G_ZERO = 1e-14


@dataclass(frozen=True)
class FirstLevelPair:
    xi: float
    sigma: float


@dataclass(frozen=True)
class SecondLevelPair:
    eps: float
    tau: float


def first_level(params: ProblemParams, kernel: RadialKernel, c: float) -> FirstLevelPair:
    xi = params.w * kernel.phi((params.x - c) ** 2)
    return FirstLevelPair(xi, xi - params.y)


def second_level(params: ProblemParams, kernel: RadialKernel, c: float) -> SecondLevelPair:
    eps = (params.x - c) ** 2
    return SecondLevelPair(eps, params.w * kernel.phi_prime(eps))


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def v_star(sigma, y):
    sigma = np.asarray(sigma, dtype=float)
    return _out(0.5 * sigma**2 + y * sigma)


def u_star_tau(kernel: RadialKernel, w: float, tau):
    """Legendre conjugate ``U*(tau) = tau eps - w phi(eps)`` with ``tau = w phi'(eps)``."""
    if w == 0:
        raise DomainError("U* is undefined for w == 0")
    tau = np.asarray(tau, dtype=float)
    eps = np.asarray(kernel.phi_prime_inverse(tau / w))
    return _out(tau * eps - w * np.asarray(kernel.phi(eps)))


def tau_of_sigma(kernel: RadialKernel, w: float, y: float, sigma):
    """Second-level dual variable matched to sigma: ``w phi'(phi^-1((sigma + y)/w))``."""
    s = (np.asarray(sigma, dtype=float) + y) / w
    lo, hi = kernel.phi_range()
    if not np.all((s > lo) & (s <= hi)):
        raise DomainError(f"sigma={sigma!r} is outside the feasible interval (s={s!r})")
    return _out(w * np.asarray(kernel.phi_prime(kernel.phi_inverse(s))))


def total_complementarity(params: ProblemParams, kernel: RadialKernel, c, sigma, tau):
    p = params
    ts = tau * sigma
    return (
        0.5 * c * c * (2.0 * ts + p.beta)
        - c * (2.0 * ts * p.x + p.f)
        - u_star_tau(kernel, p.w, tau) * sigma
        - v_star(sigma, p.y)
        + p.x * p.x * ts
    )


def c_stationary(params: ProblemParams, sigma, tau):
    """Unique c with d(Xi)/dc = 0 for fixed (sigma, tau)."""
    den = 2.0 * tau * sigma + params.beta
    if abs(den) < G_ZERO:
        raise SingularityError(f"2 tau sigma + beta = {den!r} vanishes")
    return (2.0 * tau * params.x * sigma + params.f) / den


def dual_general(params: ProblemParams, kernel: RadialKernel, sigma):
    """Canonical dual value: Xi minimized over c at ``tau = tau_of_sigma(sigma)``."""
    tau = tau_of_sigma(kernel, params.w, params.y, sigma)
    c = c_stationary(params, sigma, tau)
    return total_complementarity(params, kernel, c, sigma, tau)
