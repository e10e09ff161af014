"""Partial-sum coefficients, exact second moments, normalizers, and paths.

The partial sum of the truncated-filter moving average up to floor(n*t)
collapses, by exchanging the two summation orders, onto one weight per
innovation:

    S_n(t) = sum_i d_{n,i,t} * e_i,
    d_{n,i,t} = sum_{k=1}^{m} abar_{k-i}          for i <= 0,
    d_{n,i,t} = sum_{k=i}^{m} abar_{k-i}          for 1 <= i <= m,   m = floor(n*t)

so d vanishes for i < -lam(n) + 1 and everything second-order about S_n is a
finite quadratic form in the d array.  Case indices j = 1..9 are the three
filter-taper regimes (strong, weak, moderate) crossed with the three
dependence types (LRD, SRD, ND); j = 10..12 are the flat-filter variants of
the same taper regimes.

Normalizer conventions.  For Gaussian-type limits the normalizer is the
exact finite-n standard deviation A_n = sqrt(sum_i d_{n,i,1}^2), optionally
rescaled by the innovation standard deviation for tapered heavy-tailed
innovations (Abar_n = A_n * sqrt(E xi(b_n)^2)).  Closed-form asymptotic
equivalents, K * n^p per case, are available separately for reporting; at
desk-scale n their multiplicative transients are still several percent to
tens of percent, so they are not used to normalize paths.  For stable-type
limits the normalizer is the prescribed n^(1/alpha) * z_n with the per-case
power z_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import oaconvolve

from .errors import DomainError, SizeError, UsageError
from .filters import Dependence, FilterTaper, TaperedFilter
from .streams import make_stream
from .innovations import (
    InnovationKind,
    InnovationSpec,
    TaperRegime,
    gaussian_abs_moment,
    moment_ratio,
    pareto_from_uniform,
    pareto_moment,
    tapered_mean,
    tapered_pareto_from_uniforms,
    tapered_variance,
)

__all__ = [
    "CASE_TAPER",
    "CASE_DEPENDENCE",
    "RegimeSpec",
    "CoefficientProfile",
    "Normalizer",
    "coefficient_profile",
    "exact_variance",
    "exact_covariance",
    "variance_split",
    "normalizer",
    "asymptotic_normalizer",
    "stable_scaling_exponent",
    "make_stream",
    "simulate_partial_sum_path",
    "normalized_process",
    "lyapunov_fraction",
    "coupling_samples",
    "coupling_distance",
]

MAX_PROFILE_LEN = 1 << 26  # d arrays beyond ~6.7e7 entries are refused

CASE_TAPER: dict[int, FilterTaper] = {
    1: FilterTaper.STRONG, 2: FilterTaper.STRONG, 3: FilterTaper.STRONG,
    4: FilterTaper.WEAK, 5: FilterTaper.WEAK, 6: FilterTaper.WEAK,
    7: FilterTaper.MODERATE, 8: FilterTaper.MODERATE, 9: FilterTaper.MODERATE,
    10: FilterTaper.STRONG, 11: FilterTaper.WEAK, 12: FilterTaper.MODERATE,
}

CASE_DEPENDENCE: dict[int, Dependence] = {
    1: Dependence.LRD, 2: Dependence.SRD, 3: Dependence.ND,
    4: Dependence.LRD, 5: Dependence.SRD, 6: Dependence.ND,
    7: Dependence.LRD, 8: Dependence.SRD, 9: Dependence.ND,
    10: Dependence.FLAT, 11: Dependence.FLAT, 12: Dependence.FLAT,
}


def _fsum(x: np.ndarray) -> float:
    """Compensated (exactly rounded) sum of a float64 array."""
    return math.fsum(x.tolist())


@dataclass(frozen=True)
class RegimeSpec:
    """Full case descriptor: index j, tapered filter, innovation law.

    Construction validates that j matches the filter's taper regime and
    dependence type, and that the filter decay is admissible for the limit
    theory the innovation kind invokes (Gaussian-type for unit-variance or
    hard-tapered innovations, stable-type for raw or soft-tapered Pareto).
    """

    case_index: int
    filter: TaperedFilter
    innovation: InnovationSpec

    def __post_init__(self) -> None:
        j = self.case_index
        if j not in CASE_TAPER:
            raise UsageError(f"case index must lie in 1..12, got {j}")
        if self.filter.taper_regime is not CASE_TAPER[j]:
            raise UsageError(
                f"case j={j} needs {CASE_TAPER[j].value} filter tapering, the "
                f"filter has gamma1={self.filter.gamma1}"
            )
        if self.filter.base.regime is not CASE_DEPENDENCE[j]:
            raise UsageError(
                f"case j={j} needs a {CASE_DEPENDENCE[j].value} filter, got "
                f"{self.filter.base.regime.value}"
            )
        self._check_admissibility()

    def _check_admissibility(self) -> None:
        j = self.case_index
        beta = self.filter.base.beta
        dep = self.filter.base.regime
        inn = self.innovation
        if j >= 10:
            if not self.is_gaussian_limit:
                raise UsageError("flat-filter cases j=10..12 are covered for "
                                 "Gaussian-type limits only")
            return
        if self.is_gaussian_limit:
            if dep is Dependence.LRD and not 0.5 < beta < 1.0:
                raise DomainError(f"Gaussian LRD needs 1/2 < beta < 1, got {beta}")
            if dep is Dependence.ND and not 1.0 < beta < 1.5:
                raise DomainError(f"Gaussian ND needs 1 < beta < 3/2, got {beta}")
        else:
            a = inn.alpha.alpha
            if dep is Dependence.LRD and not 1.0 / a < beta < 1.0:
                raise DomainError(
                    f"stable LRD needs 1/alpha < beta < 1, got beta={beta}, alpha={a}"
                )
            if dep is Dependence.ND and not max(1.0, 1.0 / a) < beta < 1.0 + 1.0 / a:
                raise DomainError(
                    f"stable ND needs max(1,1/alpha) < beta < 1+1/alpha, got "
                    f"beta={beta}, alpha={a}"
                )
            # SRD: the envelope beta > 1 already guarantees summability.

    @property
    def n(self) -> int:
        return self.filter.n

    @property
    def is_gaussian_limit(self) -> bool:
        """True when the case is governed by a Gaussian-type limit: unit
        Gaussian innovations, or centered tapered Pareto with hard tapering."""
        inn = self.innovation
        if inn.kind is InnovationKind.GAUSSIAN_UNIT:
            return True
        if inn.kind is InnovationKind.CENTERED_TAPERED_PARETO:
            return inn.taper_regime() is TaperRegime.HARD
        return False

    def with_n(self, n: int) -> "RegimeSpec":
        """Re-instantiate at series size n (taper levels b(n) follow gamma)."""
        if n == self.n:
            return self
        return RegimeSpec(
            self.case_index, self.filter.with_n(n), self.innovation.at(n)
        )


@dataclass(frozen=True)
class CoefficientProfile:
    """The d array of one (n, t): values[k] = d at i = i_min + k.

    i runs from i_min = -lam(n) to m = floor(n*t); d at i = -lam(n) is zero
    by the truncation support, kept so the array bounds are explicit.
    """

    n: int
    t: float
    i_min: int
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.i_min + len(self.values) - 1

    def value_at(self, i: int) -> float:
        if i < self.i_min or i > self.m:
            return 0.0
        return float(self.values[i - self.i_min])


def coefficient_profile(regime: RegimeSpec, n: int, t: float) -> CoefficientProfile:
    """All partial-sum coefficients d_{n,i,t} in O(lam(n) + n*t) time.

    With P(s) = sum_{j=0}^{min(s, lam)} abar_j (and 0 for s < 0):

        d = P(m - i) - P(-i)   for i <= 0,
        d = P(m - i)           for i >= 1.
    """
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    tf = regime.filter.with_n(n)
    m = int(math.floor(n * t))
    lam = tf.lam
    if lam + m + 1 > MAX_PROFILE_LEN:
        raise SizeError(
            f"profile length lam+m+1 = {lam + m + 1} exceeds the cap "
            f"{MAX_PROFILE_LEN}; reduce n, t, or the taper exponent"
        )
    prefix = tf.prefix_sums()  # prefix[s+1] = sum_{j<=s} abar_j

    def cum(s: np.ndarray) -> np.ndarray:
        idx = np.clip(s, -1, lam) + 1
        return prefix[idx]

    i = np.arange(-lam, m + 1)
    d = cum(m - i)
    neg = i <= 0
    d[neg] -= cum(-i[neg])
    return CoefficientProfile(n=n, t=t, i_min=-lam, values=d)


def exact_variance(profile: CoefficientProfile, innovation_var: float = 1.0) -> float:
    """Var S_n(t) = innovation_var * sum_i d^2, compensated summation."""
    return innovation_var * _fsum(np.square(profile.values))


def variance_split(profile: CoefficientProfile) -> tuple[float, float]:
    """(V1, V2): the sum of d^2 over i <= 0 and over i >= 1."""
    k0 = -profile.i_min  # array index of i = 0
    v1 = _fsum(np.square(profile.values[: k0 + 1]))
    v2 = _fsum(np.square(profile.values[k0 + 1 :]))
    return v1, v2


def exact_covariance(
    p1: CoefficientProfile, p2: CoefficientProfile, innovation_var: float = 1.0
) -> float:
    """Cov(S_n(t), S_n(s)) = innovation_var * sum_i d_{n,i,t} d_{n,i,s}."""
    if p1.n != p2.n or p1.i_min != p2.i_min:
        raise UsageError("covariance needs profiles from the same n and filter")
    k = min(len(p1.values), len(p2.values))
    return innovation_var * _fsum(p1.values[:k] * p2.values[:k])


# ---------------------------------------------------------------------------
# normalizers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Normalizer:
    """A_n for one case at one n.

    innovation_scaled marks the Abar_n = A_n * sqrt(E xi(b_n)^2) variant used
    with tapered heavy-tailed innovations in the Gaussian-type regime.
    """

    case_index: int
    n: int
    value: float
    innovation_scaled: bool = False


_STABLE_Z_EXPONENT = {
    1: lambda beta, g1: g1 * (1.0 - beta),
    3: lambda beta, g1: g1 * (1.0 - beta),
    2: lambda beta, g1: 0.0,
    5: lambda beta, g1: 0.0,
    8: lambda beta, g1: 0.0,
    4: lambda beta, g1: 1.0 - beta,
    6: lambda beta, g1: 1.0 - beta,
    7: lambda beta, g1: 1.0 - beta,
    9: lambda beta, g1: 1.0 - beta,
}


def stable_scaling_exponent(j: int, beta: float, gamma1: float) -> float:
    """Exponent p with z_n = n**p, the filter part of the stable normalizer."""
    try:
        return _STABLE_Z_EXPONENT[j](beta, gamma1)
    except KeyError:
        raise UsageError(f"no stable normalizer is defined for case j={j}") from None


def normalizer(regime: RegimeSpec, n: int | None = None) -> Normalizer:
    """The case-correct A_n (see the module docstring for the conventions)."""
    r = regime if n is None else regime.with_n(n)
    j = r.case_index
    inn = r.innovation
    if r.is_gaussian_limit:
        prof = coefficient_profile(r, r.n, 1.0)
        a2 = exact_variance(prof)
        if inn.kind is InnovationKind.GAUSSIAN_UNIT:
            return Normalizer(j, r.n, math.sqrt(a2))
        a2 *= tapered_variance(inn.alpha, inn.taper)
        return Normalizer(j, r.n, math.sqrt(a2), innovation_scaled=True)
    if inn.is_tapered and inn.taper_regime() is TaperRegime.INTERMEDIATE:
        raise UsageError("no limit normalization is available for intermediate "
                         "innovation tapering")
    if inn.kind is InnovationKind.TAPERED_PARETO and inn.taper_regime() is TaperRegime.HARD:
        raise UsageError(
            "hard-tapered innovations must be centered (the Gaussian-regime "
            "variable is zeta - E zeta)"
        )
    alpha = inn.alpha.alpha
    p = 1.0 / alpha + stable_scaling_exponent(j, r.filter.base.beta, r.filter.gamma1)
    return Normalizer(j, r.n, float(r.n) ** p)


def asymptotic_normalizer(regime: RegimeSpec, n: int | None = None) -> tuple[float, float]:
    """(K, p) with A_n^2 ~ K * n**p for the Gaussian-type cases.

    The constants come from the continuum forms of the d profile; they enter
    reports only.  Convergence of the exact sum(d^2) to K * n**p is slow
    (power-law transients), which is why paths are normalized by the exact
    finite-n variance instead.
    """
    from .limit_laws import constant_C  # local import to avoid a cycle

    r = regime if n is None else regime.with_n(n)
    j, beta, c, g1 = r.case_index, r.filter.base.beta, r.filter.c, r.filter.gamma1
    if j in (2, 5, 8):
        s = r.filter.base.infinite_sum()
        return s * s, 1.0
    if j in (1, 3):
        return (1.0 - beta) ** -2, 1.0 + 2.0 * g1 * (1.0 - beta)
    if j in (4, 6):
        return constant_C(0, beta=beta) + constant_C(3, beta=beta), 3.0 - 2.0 * beta
    if j == 7:
        return constant_C(9, t=1.0, beta=beta, c=c), 3.0 - 2.0 * beta
    if j == 9:
        return constant_C(16, t=1.0, beta=beta, c=c), 3.0 - 2.0 * beta
    if j == 10:
        return 1.0, 1.0 + 2.0 * g1
    if j == 11:
        return 1.0, 2.0 + g1
    if j == 12:
        return constant_C(18, c=c), 3.0
    raise UsageError(f"unknown case index {j}")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


# make_stream is re-exported here because replica seeding is part of this
# module's concurrency contract; the implementation lives in streams.py.


def _path_from_innovations(
    tf: TaperedFilter, eta: np.ndarray, n: int, t_grid: np.ndarray
) -> np.ndarray:
    """S_n(t_k) from one innovation array eta indexed i = -lam .. m_max.

    X_k = sum_j abar_j eta_{k-j} is the full convolution of eta with the
    tapered coefficients; the partial sums are its cumulative sums read at
    m_k = floor(n t_k).
    """
    lam = tf.lam
    m_max = len(eta) - lam - 1
    abar = tf.coefficient_array()
    conv = oaconvolve(eta, abar)
    x = conv[lam + 1 : lam + m_max + 1]  # X_k for k = 1..m_max
    cs = np.concatenate(([0.0], np.cumsum(x)))
    m_k = np.minimum(np.floor(n * t_grid).astype(int), m_max)
    return cs[np.maximum(m_k, 0)]


def _validate_t_grid(t_grid) -> np.ndarray:
    tg = np.asarray(t_grid, dtype=np.float64)
    if tg.ndim != 1 or len(tg) == 0:
        raise UsageError("t_grid must be a non-empty 1-d array")
    if np.any(tg < 0.0):
        raise DomainError("t_grid entries must be >= 0")
    if np.any(np.diff(tg) < 0.0):
        raise UsageError("t_grid must be ascending")
    return tg


def simulate_partial_sum_path(
    regime: RegimeSpec,
    n: int,
    t_grid,
    stream_seed: int | np.random.Generator,
    innovations: np.ndarray | None = None,
) -> np.ndarray:
    """One realization of (S_n(t_1), ..., S_n(t_m)) on a single stream.

    All t values share one innovation array of length floor(n*t_max)+lam+1,
    so the grid is internally consistent.  `innovations` substitutes an
    explicit array (deterministic checks); it must have exactly that length.
    """
    r = regime.with_n(n)
    tg = _validate_t_grid(t_grid)
    tf = r.filter
    m_max = int(math.floor(n * tg[-1]))
    size = tf.lam + m_max + 1
    if size > MAX_PROFILE_LEN:
        raise SizeError(f"innovation array of length {size} exceeds the cap")
    if innovations is None:
        rng = (
            stream_seed
            if isinstance(stream_seed, np.random.Generator)
            else make_stream(stream_seed, 0)
        )
        eta = r.innovation.sample_block(rng, size)
    else:
        eta = np.asarray(innovations, dtype=np.float64)
        if len(eta) != size:
            raise UsageError(f"innovations must have length lam+m_max+1 = {size}")
    return _path_from_innovations(tf, eta, n, tg)


def normalized_process(
    regime: RegimeSpec,
    n: int,
    t_grid,
    stream_seed: int | np.random.Generator,
    innovations: np.ndarray | None = None,
) -> np.ndarray:
    """One realization of the normalized process Z_n (or Zbar_n / V_n).

    The path is divided by the case-correct normalizer: the exact Gaussian
    A_n (innovation-scaled for hard-tapered Pareto) or the stable
    n^(1/alpha) z_n, selected by the innovation kind.
    """
    a = normalizer(regime, n)
    s = simulate_partial_sum_path(regime, n, t_grid, stream_seed, innovations)
    return s / a.value


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def _lyapunov_moment_factor(inn: InnovationSpec, delta: float) -> float:
    if inn.kind is InnovationKind.GAUSSIAN_UNIT:
        return gaussian_abs_moment(2.0 + delta)
    if inn.kind is InnovationKind.CENTERED_TAPERED_PARETO:
        # hat-L: the innovation part is E|xi|^(2+d) / (E xi^2)^((2+d)/2)
        return moment_ratio(inn.alpha, inn.taper, delta)
    raise UsageError(
        "the Lyapunov fraction needs innovations with finite 2+delta moments "
        "(unit Gaussian or centered tapered Pareto)"
    )


def lyapunov_fraction(regime: RegimeSpec, n: int, t: float, delta: float) -> float:
    """L(2+delta, n, t): the weighted-sum Lyapunov ratio whose decay gives
    asymptotic normality.

        L = sum_i |d_{n,i,t}|^(2+delta) * M / (sum_i d_{n,i,1}^2)^((2+delta)/2)

    with M the innovation moment factor (E|e|^(2+delta) for unit-variance
    innovations; the scaled ratio for tapered Pareto).  For ND cases delta
    must satisfy delta < min(1, (3-2*beta)/(beta-1)).
    """
    if not 0.0 < delta <= 1.0:
        raise UsageError(f"delta must lie in (0,1], got {delta}")
    r = regime.with_n(n)
    beta = r.filter.base.beta
    if r.filter.base.regime is Dependence.ND:
        cap = min(1.0, (3.0 - 2.0 * beta) / (beta - 1.0))
        if not delta < cap:
            raise UsageError(
                f"ND with beta={beta} needs delta < {cap}, got {delta}"
            )
    num_prof = coefficient_profile(r, n, t)
    den_prof = num_prof if t == 1.0 else coefficient_profile(r, n, 1.0)
    num = _fsum(np.abs(num_prof.values) ** (2.0 + delta))
    den = _fsum(np.square(den_prof.values)) ** ((2.0 + delta) / 2.0)
    return num / den * _lyapunov_moment_factor(r.innovation.at(n), delta)


def coupling_samples(
    regime: RegimeSpec,
    n: int,
    t: float,
    r: float,
    replicas: int,
    master_seed: int,
) -> np.ndarray:
    """Per-replica values |V_n(t) - Z_n(t)|^r under soft tapering.

    V_n uses the tapered innovations, Z_n the raw Pareto innovations, both
    built from identical uniforms and both scaled by the stable normalizer.
    """
    reg = regime.with_n(n)
    inn = reg.innovation
    if not inn.is_tapered:
        raise UsageError("the coupling diagnostic needs tapered Pareto innovations")
    alpha = inn.alpha.alpha
    if not 0.0 < r < alpha:
        raise UsageError(f"r must lie in (0, alpha)=(0,{alpha}), got {r}")
    if alpha > 1.0 and r < 1.0:
        raise UsageError("for alpha > 1 the coupling order r must be >= 1")
    if inn.taper.is_infinite:
        return np.zeros(replicas)
    taper_kind = inn.taper_regime()
    if taper_kind is not TaperRegime.SOFT:
        raise UsageError(
            f"the coupling bound holds for soft tapering (gamma > 1/alpha); "
            f"this innovation is {taper_kind.value if taper_kind else 'fixed-level'}"
        )
    if t == 0.0 or math.floor(n * t) == 0:
        return np.zeros(replicas)

    prof = coefficient_profile(reg, n, t)
    d = prof.values
    a_n = normalizer(reg, n).value
    b = inn.taper.b
    centered = alpha > 1.0
    mean_raw = pareto_moment(inn.alpha, 1.0) if centered else 0.0
    mean_tap = tapered_mean(inn.alpha, inn.taper) if centered else 0.0

    size = len(d)
    if replicas * size > 2 * 10**9:
        raise SizeError("replicas * profile length exceeds the 2e9 draw cap")
    out = np.empty(replicas)
    for rep in range(replicas):
        rng = make_stream(master_seed, rep)
        u1 = 1.0 - rng.random(size)
        u2 = 1.0 - rng.random(size)
        theta = pareto_from_uniform(inn.alpha, u1)
        zeta_v = np.where(theta < b, theta, b - np.log(u2))
        diff = (zeta_v - mean_tap) - (theta - mean_raw)
        out[rep] = abs(float(d @ diff) / a_n) ** r
    return out


def coupling_distance(
    regime: RegimeSpec,
    n: int,
    t: float,
    r: float,
    replicas: int,
    master_seed: int,
) -> float:
    """Monte Carlo estimate of E |V_n(t) - Z_n(t)|^r under soft tapering.

    The estimate decreases along an n-ladder at the predicted rate
    ~ n^((alpha - r)(1/alpha - gamma)).  With the b = inf sentinel the two
    processes coincide pathwise and the distance is exactly zero.
    """
    return float(math.fsum(coupling_samples(regime, n, t, r, replicas, master_seed).tolist()) / replicas)
