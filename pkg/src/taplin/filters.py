"""Filter coefficient families and their truncation taper.

A filter is the deterministic sequence a_0 = a0, a_i = i**(-beta) for i >= 1.
The decay exponent beta and the value of the full sum decide the dependence
type of the untapered moving average:

    LRD   1/2 < beta < 1          (sum diverges)
    SRD   beta > 1, sum != 0
    ND    1 < beta < 3/2, sum == 0 (a0 = -zeta(beta) makes the filter zero-sum)
    FLAT  beta = 0, every coefficient equal to 1 (finite window only)

The truncation taper keeps coefficients up to lag lam(n) = floor(c * n**gamma1)
and zeroes the rest, which makes the process lam(n)-dependent.  gamma1 < 1 is
strong tapering, gamma1 > 1 weak, gamma1 = 1 moderate; the constant c only
matters in the moderate case and is forced to 1 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "Dependence",
    "FilterTaper",
    "FilterSpec",
    "TaperedFilter",
    "filter_coefficient",
    "tapered_coefficient",
    "nd_zero_sum_constant",
    "zeta_series",
]

ND_ZERO_SUM_TOL = 1e-9


class Dependence(Enum):
    LRD = "lrd"
    SRD = "srd"
    ND = "nd"
    FLAT = "flat"


class FilterTaper(Enum):
    STRONG = "strong"
    WEAK = "weak"
    MODERATE = "moderate"


@lru_cache(maxsize=256)
def zeta_series(beta: float, terms: int = 10**6) -> float:
    """zeta(beta) for beta > 1 by direct summation plus Euler-Maclaurin tail.

    The tail past N = `terms` is int_N^inf x^-beta dx plus boundary
    corrections; with N = 1e6 the truncation error is far below 1e-12 over
    beta in (1, 3).
    """
    if beta <= 1.0:
        raise DomainError(f"zeta series diverges for beta={beta} <= 1")
    i = np.arange(1, terms + 1, dtype=np.float64)
    head = float(np.sum(i**-beta))
    m = float(terms + 1)
    tail = (
        m ** (1.0 - beta) / (beta - 1.0)
        + 0.5 * m**-beta
        + beta * m ** (-beta - 1.0) / 12.0
        - beta * (beta + 1.0) * (beta + 2.0) * m ** (-beta - 3.0) / 720.0
    )
    return head + tail


def nd_zero_sum_constant(beta: float) -> float:
    """a0 = -sum_{i>=1} i**(-beta), the zeroth coefficient that makes the
    filter sum to zero.  Diverges for beta <= 1."""
    if beta <= 1.0:
        raise DomainError(f"zero-sum constant needs beta > 1, got {beta}")
    return -zeta_series(beta)


@dataclass(frozen=True)
class FilterSpec:
    """Untapered coefficient family: a_0 = a0, a_i = i**(-beta) for i >= 1.

    Envelope admissibility is checked here; the tighter Gaussian- or
    stable-case ranges depend on the innovation law and are enforced when a
    full case descriptor is assembled.
    """

    beta: float
    regime: Dependence
    a0: float = 1.0

    def __post_init__(self) -> None:
        b, r = self.beta, self.regime
        if r is Dependence.LRD and not 0.5 < b < 1.0:
            raise DomainError(f"LRD requires 1/2 < beta < 1, got {b}")
        if r is Dependence.SRD:
            if not b > 1.0:
                raise DomainError(f"SRD requires beta > 1, got {b}")
            if self.a0 + zeta_series(b) == 0.0:
                raise DomainError("SRD requires a nonzero filter sum")
        if r is Dependence.ND:
            if not 1.0 < b < 2.0:
                raise DomainError(f"ND requires 1 < beta < 2, got {b}")
            if abs(self.a0 + zeta_series(b)) > ND_ZERO_SUM_TOL:
                raise DomainError(
                    f"ND requires a zero-sum filter: a0={self.a0} but "
                    f"-zeta({b}) = {-zeta_series(b)}"
                )
        if r is Dependence.FLAT and (b != 0.0 or self.a0 != 1.0):
            raise DomainError("FLAT means beta = 0 with a0 = 1")

    @classmethod
    def lrd(cls, beta: float) -> "FilterSpec":
        return cls(beta, Dependence.LRD)

    @classmethod
    def srd(cls, beta: float, a0: float = 1.0) -> "FilterSpec":
        return cls(beta, Dependence.SRD, a0)

    @classmethod
    def nd(cls, beta: float) -> "FilterSpec":
        return cls(beta, Dependence.ND, nd_zero_sum_constant(beta))

    @classmethod
    def flat(cls) -> "FilterSpec":
        return cls(0.0, Dependence.FLAT)

    def coefficient(self, i: int) -> float:
        if i < 0:
            raise DomainError(f"coefficient index must be >= 0, got {i}")
        if i == 0:
            return self.a0
        return float(i) ** (-self.beta)

    def coefficients(self, up_to: int) -> np.ndarray:
        """Array [a_0, ..., a_up_to]."""
        out = np.arange(0, up_to + 1, dtype=np.float64)
        with np.errstate(divide="ignore"):
            out = out**-self.beta
        out[0] = self.a0
        return out

    def infinite_sum(self) -> float:
        """sum_{i>=0} a_i where it converges (SRD and ND only)."""
        if self.regime is Dependence.SRD:
            return self.a0 + zeta_series(self.beta)
        if self.regime is Dependence.ND:
            return 0.0
        raise DomainError(f"filter sum diverges for {self.regime.value}")


def filter_coefficient(spec: FilterSpec, i: int) -> float:
    return spec.coefficient(i)


@dataclass(frozen=True)
class TaperedFilter:
    """Truncation of a FilterSpec at lag lam(n) = floor(c * n**gamma1).

    c is only meaningful for moderate tapering (gamma1 = 1) and is coerced
    to 1 otherwise.  lam(n) is clamped to >= 1 so the window never
    degenerates below the first lag.
    """

    base: FilterSpec
    gamma1: float
    c: float
    n: int

    def __post_init__(self) -> None:
        if not self.gamma1 > 0.0:
            raise DomainError(f"gamma1 must be > 0, got {self.gamma1}")
        if not self.c > 0.0:
            raise DomainError(f"c must be > 0, got {self.c}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.gamma1 != 1.0 and self.c != 1.0:
            object.__setattr__(self, "c", 1.0)

    @property
    def lam(self) -> int:
        return max(1, int(math.floor(self.c * float(self.n) ** self.gamma1)))

    @property
    def taper_regime(self) -> FilterTaper:
        if self.gamma1 < 1.0:
            return FilterTaper.STRONG
        if self.gamma1 > 1.0:
            return FilterTaper.WEAK
        return FilterTaper.MODERATE

    def with_n(self, n: int) -> "TaperedFilter":
        return TaperedFilter(self.base, self.gamma1, self.c, n)

    def coefficient(self, i: int) -> float:
        """abar_i: the base coefficient up to and including lam(n), zero above."""
        if i < 0:
            raise DomainError(f"coefficient index must be >= 0, got {i}")
        if i > self.lam:
            return 0.0
        return self.base.coefficient(i)

    def coefficient_array(self) -> np.ndarray:
        """All nonzero tapered coefficients [abar_0, ..., abar_lam]."""
        return self.base.coefficients(self.lam)

    def prefix_sums(self) -> np.ndarray:
        """P with P[s] = sum_{j=0}^{s-1} abar_j for s = 0..lam+1."""
        p = np.empty(self.lam + 2, dtype=np.float64)
        p[0] = 0.0
        np.cumsum(self.coefficient_array(), out=p[1:])
        return p

    def truncated_sum(self) -> float:
        """sum_{i=0}^{lam} a_i, the effective filter sum at this n."""
        return float(np.sum(self.coefficient_array()))


def tapered_coefficient(tf: TaperedFilter, i: int) -> float:
    return tf.coefficient(i)
