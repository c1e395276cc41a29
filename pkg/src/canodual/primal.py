"""Primal objective of the single-neuron, single-sample RBF fit.

    P(c) = 1/2 (w phi(|x - c|^2) - y)^2 + 1/2 beta c^2 - f c

All three evaluators accept scalars or numpy arrays for ``c``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .kernel import GaussianKernel, RadialKernel


class RegimeWarning(UserWarning):
    """Parameters outside the regime w*y > 0, |y| < |w|."""


@dataclass(frozen=True)
class ProblemParams:
    """One problem instance.

    Attributes:
        x: sample input.
        y: sample target.
        w: output weight (held fixed).
        alpha: Gaussian standard deviation.
        beta: regularization coefficient on the center.
        f: coefficient of the linear term ``-f c``.
    """

    x: float
    y: float
    w: float
    alpha: float
    beta: float
    f: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "w", "alpha", "beta", "f"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise DomainError(f"beta must be nonnegative, got {self.beta}")
        if self.w == 0:
            warnings.warn("w == 0: the objective is a pure quadratic", RegimeWarning, stacklevel=2)
        elif not self.canonical:
            warnings.warn(
                f"w={self.w}, y={self.y} outside the canonical regime (w*y > 0, |y| < |w|)",
                RegimeWarning,
                stacklevel=2,
            )

    @property
    def canonical(self) -> bool:
        return self.w * self.y > 0 and abs(self.y) < abs(self.w)

    @property
    def kernel(self) -> GaussianKernel:
        return GaussianKernel(self.alpha)

    def normalized(self) -> ProblemParams:
        """Same objective with ``w > 0``; P is invariant under (w, y) -> (-w, -y)."""
        if self.w < 0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RegimeWarning)
                return replace(self, w=-self.w, y=-self.y)
        return self


def _as_out(a):
    return float(a) if np.ndim(a) == 0 else a


def eval_P(params: ProblemParams, kernel: RadialKernel, c):
    c = np.asarray(c, dtype=float)
    resid = params.w * kernel.phi((params.x - c) ** 2) - params.y
    return _as_out(0.5 * resid**2 + 0.5 * params.beta * c**2 - params.f * c)


def grad_P(params: ProblemParams, kernel: RadialKernel, c):
    c = np.asarray(c, dtype=float)
    u = params.x - c
    eps = u * u
    resid = params.w * kernel.phi(eps) - params.y
    return _as_out(-2.0 * params.w * u * kernel.phi_prime(eps) * resid + params.beta * c - params.f)


def hess_P(params: ProblemParams, kernel: RadialKernel, c):
    c = np.asarray(c, dtype=float)
    w = params.w
    u = params.x - c
    eps = u * u
    d1 = kernel.phi_prime(eps)
    d2 = kernel.phi_second(eps)
    resid = w * kernel.phi(eps) - params.y
    out = 2.0 * w * d1 * resid + 4.0 * w * eps * (d2 * resid + w * d1 * d1) + params.beta
    return _as_out(out)
