"""Radial basis kernels.

A kernel is written as a function of the squared distance ``eps = |x - c|**2``
so that the Gaussian becomes ``phi(eps) = exp(-eps / (2 alpha**2))``.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class RadialKernel(abc.ABC):
    """Contract for a radial basis function of the squared distance.

    Implementations must be strictly monotone on ``[0, inf)`` with a strictly
    monotone first derivative, so that both ``phi`` and ``phi'`` are
    invertible there.
    """

    #: closed lower end of the admissible eps-domain [eps_min, inf)
    eps_min: float = 0.0

    @abc.abstractmethod
    def phi(self, eps: float) -> float: ...

    @abc.abstractmethod
    def phi_prime(self, eps: float) -> float: ...

    @abc.abstractmethod
    def phi_second(self, eps: float) -> float: ...

    @abc.abstractmethod
    def phi_inverse(self, v: float) -> float:
        """Squared distance ``eps`` with ``phi(eps) == v``."""

    @abc.abstractmethod
    def phi_prime_inverse(self, v: float) -> float:
        """Squared distance ``eps`` with ``phi_prime(eps) == v``."""

    @abc.abstractmethod
    def phi_range(self) -> tuple[float, float]:
        """(lo, hi) of phi over the eps-domain; lo is excluded, hi included."""

    @abc.abstractmethod
    def phi_prime_range(self) -> tuple[float, float]:
        """(lo, hi) of phi' over the eps-domain, as a closed-open pair."""

    def _check_eps(self, eps) -> None:
        if not np.all(np.asarray(eps) >= self.eps_min):
            raise DomainError(f"eps={eps!r} is outside [{self.eps_min}, inf)")


@dataclass(frozen=True)
class GaussianKernel(RadialKernel):
    """``phi(eps) = exp(-eps / (2 alpha**2))`` with standard deviation ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def two_alpha_sq(self) -> float:
        return 2.0 * self.alpha * self.alpha

    def phi(self, eps):
        self._check_eps(eps)
        return _scalar(np.exp(-eps / self.two_alpha_sq))

    def phi_prime(self, eps):
        self._check_eps(eps)
        return _scalar(-np.exp(-eps / self.two_alpha_sq) / self.two_alpha_sq)

    def phi_second(self, eps):
        self._check_eps(eps)
        k = self.two_alpha_sq
        return _scalar(np.exp(-eps / k) / (k * k))

    def phi_inverse(self, v):
        v = np.asarray(v, dtype=float)
        if not np.all((v > 0.0) & (v <= 1.0)):
            raise DomainError(f"v={v!r} is outside the Gaussian range (0, 1]")
        # + 0.0 turns -0.0 (at v == 1) into 0.0
        return _scalar(-self.two_alpha_sq * np.log(v) + 0.0)

    def phi_prime_inverse(self, v):
        k = self.two_alpha_sq
        v = np.asarray(v, dtype=float)
        # -k * v may round a hair above 1 at the eps = 0 end
        kv = np.minimum(-k * v, 1.0)
        if not np.all((v < 0.0) & (kv > 0.0) & (-k * v <= 1.0 + 4e-16)):
            raise DomainError(f"v={v!r} is outside the range of phi' [{-1.0 / k}, 0)")
        return _scalar(-k * np.log(kv) + 0.0)

    def phi_range(self):
        return 0.0, 1.0

    def phi_prime_range(self):
        return -1.0 / self.two_alpha_sq, 0.0


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def phi(kernel: RadialKernel, eps: float) -> float:
    return kernel.phi(eps)


def phi_prime(kernel: RadialKernel, eps: float) -> float:
    return kernel.phi_prime(eps)


def phi_second(kernel: RadialKernel, eps: float) -> float:
    return kernel.phi_second(eps)


def phi_inverse(kernel: RadialKernel, v: float) -> float:
    return kernel.phi_inverse(v)
