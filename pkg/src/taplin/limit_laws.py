"""Limit-law constants, variance functions, stable kernels, and simulators.

Everything here is the analytic side of the theory: the constants C_0..C_20
that build the limiting variance functions W(t) for the twelve cases, the
kernels of the stable limit integrals, the log-characteristic function of
those integrals, the compact-support tapered-kernel Gaussian/stable motions,
and exact simulators for both limit families.

Conventions worth stating once:

* The truncation kernel is clipped: the moving-average part of the kernel is
  min(t - u, c)**(H - 1/alpha), not (t - u)**(H - 1/alpha).  The clip is what
  produces the Brownian-like linear variance growth at large times
  (W ~ c**(2-2*beta) * t); without it the large-t regime would keep the
  fractional exponent.  The small-t regime is unaffected.

* The stable log-CF carries the Pareto tail constant
  c_alpha = Gamma(2 - alpha) * cos(pi*alpha/2) / (1 - alpha) > 0 and positive
  skewness: for weights d and one-sided Pareto innovations,

      log E exp(i*theta*Z) -> c_alpha * (-|theta|^a * I_abs
                                         + i * tan(pi*a/2) * theta^<a> * I_sgn)

  with I_abs = int |K(u)|^a du and I_sgn = int K(u)^<a> du over the kernel K.
  Exactly-stable variates (the CMS sampler below) reproduce the same shape
  with the constant 1 instead of c_alpha, so the scale constant is an
  explicit parameter of the limit descriptor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import DomainError, NumericalError, SizeError, UsageError
from .streams import make_stream

__all__ = [
    "constant_C",
    "limit_variance",
    "limit_variance_prop3",
    "gaussian_covariance",
    "hurst_exponent",
    "CovarianceSource",
    "GaussianLimit",
    "StableLimit",
    "stable_kernel",
    "stable_kernel_integrals",
    "stable_log_cf",
    "pareto_sum_tail_constant",
    "TFKernel",
    "tf3_covariance",
    "tfbm3_matching_sigma",
    "sample_stable_cms",
    "simulate_gaussian_limit",
    "simulate_tfsm3",
]

_EPSREL = 1e-11
_MAX_GRID = 64


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------


def _piece_quad(f, a: float, b: float, p_left: float = 0.0, p_right: float = 0.0) -> float:
    """Integrate f over (a, b) where f may carry integrable power
    singularities (y-a)**p_left and (b-y)**p_right with exponents in (-1, 0).

    A power substitution y = a + w**(1/(1+p)) turns the singular endpoint
    into a bounded one, after which adaptive Gauss-Kronrod does the rest.
    """
    if b <= a:
        return 0.0
    if p_left < 0.0 and p_right < 0.0:
        mid = 0.5 * (a + b)
        return _piece_quad(f, a, mid, p_left=p_left) + _piece_quad(
            f, mid, b, p_right=p_right
        )
    if p_left < 0.0:
        q = 1.0 / (1.0 + p_left)
        w_hi = (b - a) ** (1.0 + p_left)

        def g(w: float) -> float:
            return f(a + w**q) * q * w ** (q - 1.0)

        val, _ = quad(g, 0.0, w_hi, epsabs=0.0, epsrel=_EPSREL, limit=400)
        return val
    if p_right < 0.0:
        return _piece_quad(lambda y: f(a + b - y), a, b, p_left=p_right)
    val, _ = quad(f, a, b, epsabs=0.0, epsrel=_EPSREL, limit=400)
    return val


def _graded_breaks(lo: float, hi: float, anchors: list[float], scales: list[float]) -> list[float]:
    """Breakpoints in (lo, hi): the anchors plus geometric ladders around
    them, resolving features whose width is much smaller than hi - lo."""
    pts = {lo, hi}
    for a in anchors:
        if lo < a < hi:
            pts.add(a)
        for s in scales:
            for k in (0.5, 1.0, 4.0, 32.0, 256.0, 4096.0):
                for x in (a - k * s, a + k * s):
                    if lo < x < hi:
                        pts.add(x)
    return sorted(pts)


def _quad_pieces(f, breaks: list[float], singular: dict[float, float] | None = None) -> float:
    """Sum of _piece_quad over consecutive breakpoints.

    `singular` maps a breakpoint to the power exponent the integrand carries
    there (the most negative one when several terms meet).
    """
    singular = singular or {}
    out = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        out.append(
            _piece_quad(f, a, b, p_left=singular.get(a, 0.0), p_right=singular.get(b, 0.0))
        )
    return math.fsum(out)


# ---------------------------------------------------------------------------
# the constants C_0 .. C_20
# ---------------------------------------------------------------------------


def _check_beta_band(beta: float) -> None:
    if not (0.5 < beta < 1.5) or beta == 1.0:
        raise DomainError(f"beta must lie in (1/2, 3/2) without 1, got {beta}")


def _g_squared_integral(beta: float, lo: float, hi: float) -> float:
    """int_lo^hi g(y)^2 dy with g(y) = ((1+y)^(1-beta) - y^(1-beta)) / (1-beta).

    The integrand behaves like y^(2-2*beta) at zero (singular when beta > 1)
    and like y^(-2*beta) at infinity.
    """
    ob = 1.0 - beta

    def g2(y: float) -> float:
        diff = ((1.0 + y) ** ob - y**ob) / ob
        return diff * diff

    p0 = min(2.0 - 2.0 * beta, 0.0)
    if math.isinf(hi):
        head = _piece_quad(g2, lo, max(1.0, 2.0 * lo), p_left=p0 if lo == 0.0 else 0.0)
        tail, _ = quad(g2, max(1.0, 2.0 * lo), np.inf, epsabs=0.0, epsrel=_EPSREL, limit=400)
        return head + tail
    pieces = _graded_breaks(lo, hi, [lo], [min(1.0, hi - lo)])
    return _quad_pieces(g2, pieces, {lo: p0 if lo == 0.0 else 0.0})


@lru_cache(maxsize=1024)
def _c0(beta: float) -> float:
    _check_beta_band(beta)
    return _g_squared_integral(beta, 0.0, math.inf)


@lru_cache(maxsize=4096)
def _c1(t: float, beta: float, c: float) -> float:
    _check_beta_band(beta)
    z = c / t
    if z < 1.0:
        raise DomainError(f"C_1 needs t <= c, got t={t}, c={c}")
    if z == 1.0:
        return 0.0
    if z - 1.0 > 8.0:
        return _c0(beta) - _g_squared_integral(beta, z - 1.0, math.inf)
    return _g_squared_integral(beta, 0.0, z - 1.0)


def _sq_power_integral(z: float, beta: float, a: float, b: float) -> float:
    """int_a^b ((z^(1-beta) - y^(1-beta)) / (1-beta))^2 dy, closed form."""
    ob = 1.0 - beta

    def anti(y: float) -> float:
        if y == 0.0:
            return 0.0
        return (
            z ** (2.0 * ob) * y
            - 2.0 * z**ob * y ** (2.0 - beta) / (2.0 - beta)
            + y ** (3.0 - 2.0 * beta) / (3.0 - 2.0 * beta)
        )

    return (anti(b) - anti(a)) / (ob * ob)


def _c2(t: float, beta: float, c: float) -> float:
    _check_beta_band(beta)
    z = c / t
    if z < 1.0:
        raise DomainError(f"C_2 needs t <= c, got t={t}, c={c}")
    return _sq_power_integral(z, beta, z - 1.0, z)


def _c3(beta: float) -> float:
    # closed form valid on all of beta < 3/2 except 1, wider than the
    # dependence-admissible band; handy for oracle checks
    if beta >= 1.5 or beta == 1.0:
        raise DomainError(f"C_3 needs beta < 3/2 without 1, got {beta}")
    return 1.0 / ((1.0 - beta) ** 2 * (3.0 - 2.0 * beta))


def _c5(t: float, beta: float, c: float) -> float:
    _check_beta_band(beta)
    z = c / t
    if z > 1.0:
        raise DomainError(f"C_5 needs t >= c, got t={t}, c={c}")
    return (1.0 - z) * (z ** (1.0 - beta) / (1.0 - beta)) ** 2


def _c6(t: float, beta: float, c: float) -> float:
    _check_beta_band(beta)
    z = c / t
    if z > 1.0:
        raise DomainError(f"C_6 needs t >= c, got t={t}, c={c}")
    return z ** (3.0 - 2.0 * beta) / ((1.0 - beta) ** 2 * (3.0 - 2.0 * beta))


def _c7(t: float, beta: float, c: float) -> float:
    _check_beta_band(beta)
    z = c / t
    if z > 1.0:
        raise DomainError(f"C_7 needs t >= c, got t={t}, c={c}")
    return _sq_power_integral(z, beta, 0.0, z)


def _c9(t: float, beta: float, c: float) -> float:
    """Piecewise limit of sum(d^2) / n^(3-2*beta) for the moderate LRD case."""
    if not 0.5 < beta < 1.0:
        raise DomainError(f"C_9 is the LRD constant, needs 1/2 < beta < 1, got {beta}")
    if t <= c:
        return _c1(t, beta, c) + _c2(t, beta, c) + _c3(beta)
    return _c5(t, beta, c) + _c6(t, beta, c) + _c7(t, beta, c)


def _c16(t: float, beta: float, c: float) -> float:
    """ND counterpart of C_9; the same antiderivatives evaluated at beta > 1."""
    if not 1.0 < beta < 1.5:
        raise DomainError(f"C_16 is the ND constant, needs 1 < beta < 3/2, got {beta}")
    if t <= c:
        return _c1(t, beta, c) + _c2(t, beta, c) + _c3(beta)
    return _c7(t, beta, c) + _c6(t, beta, c) + _c5(t, beta, c)


def _c18(c: float) -> float:
    if not c > 0.0:
        raise DomainError(f"C_18 needs c > 0, got {c}")
    if c <= 1.0:
        return c * c - c**3 / 3.0
    return c - 1.0 / 3.0


def _c19(t: float, c: float) -> float:
    if not 0.0 < t <= c:
        raise DomainError(f"C_19 needs 0 < t <= c, got t={t}, c={c}")
    return c * (1.0 - t / (3.0 * c)) / _c18(c)


def _c20(t: float, c: float) -> float:
    if not t >= c:
        raise DomainError(f"C_20 needs t >= c, got t={t}, c={c}")
    return c * c * (1.0 - c / (3.0 * t)) / _c18(c)


def constant_C(cid: int, t: float | None = None, beta: float | None = None,
               c: float | None = None) -> float:
    """Evaluate the limit constant with the given id (0..20).

    t-independent ids ignore t.  Domain violations raise DomainError naming
    the offending parameter.  Closed forms are used wherever the
    antiderivative is elementary; C_0 and C_1 fall back to adaptive
    quadrature of the single non-elementary cross term (relative error
    <= 1e-8).
    """

    def need(**kw):
        for name, v in kw.items():
            if v is None:
                raise UsageError(f"constant C_{cid} needs parameter {name}")

    if cid == 0:
        need(beta=beta)
        return _c0(beta)
    if cid == 1:
        need(t=t, beta=beta, c=c)
        return _c1(t, beta, c)
    if cid == 2:
        need(t=t, beta=beta, c=c)
        return _c2(t, beta, c)
    if cid == 3:
        need(beta=beta)
        return _c3(beta)
    if cid == 4:
        need(t=t, beta=beta, c=c)
        return _c1(t, beta, c) + _c2(t, beta, c) + _c3(beta)
    if cid == 5:
        need(t=t, beta=beta, c=c)
        return _c5(t, beta, c)
    if cid == 6:
        need(t=t, beta=beta, c=c)
        return _c6(t, beta, c)
    if cid == 7:
        need(t=t, beta=beta, c=c)
        return _c7(t, beta, c)
    if cid == 8:
        need(t=t, beta=beta, c=c)
        return _c5(t, beta, c) + _c6(t, beta, c) + _c7(t, beta, c)
    if cid == 9:
        need(t=t, beta=beta, c=c)
        return _c9(t, beta, c)
    if cid == 10:
        need(t=t, beta=beta, c=c)
        return _c9(t, beta, c) / _c9(1.0, beta, c)
    if cid == 11:
        need(t=t, beta=beta, c=c)
        if not t <= c:
            raise DomainError(f"C_11 needs t <= c, got t={t}, c={c}")
        return _c16(t, beta, c)
    if cid == 12:
        need(beta=beta)
        if not 1.0 < beta < 1.5:
            raise DomainError(f"C_12 needs 1 < beta < 3/2, got {beta}")
        return _c3(beta)
    if cid == 13:
        need(t=t, beta=beta, c=c)
        if not t >= c:
            raise DomainError(f"C_13 needs t >= c, got t={t}, c={c}")
        return _c16(t, beta, c)
    if cid == 14:
        need(t=t, beta=beta, c=c)
        if not 1.0 < beta < 1.5:
            raise DomainError(f"C_14 needs 1 < beta < 3/2, got {beta}")
        return _c6(t, beta, c)
    if cid == 15:
        need(t=t, beta=beta, c=c)
        if not 1.0 < beta < 1.5:
            raise DomainError(f"C_15 needs 1 < beta < 3/2, got {beta}")
        return _c5(t, beta, c)
    if cid == 16:
        need(t=t, beta=beta, c=c)
        return _c16(t, beta, c)
    if cid == 17:
        need(t=t, beta=beta, c=c)
        return _c16(t, beta, c) / _c16(1.0, beta, c)
    if cid == 18:
        need(c=c)
        return _c18(c)
    if cid == 19:
        need(t=t, c=c)
        return _c19(t, c)
    if cid == 20:
        need(t=t, c=c)
        return _c20(t, c)
    raise UsageError(f"unknown constant id {cid}, expected 0..20")


# ---------------------------------------------------------------------------
# Gaussian limit variances and covariances
# ---------------------------------------------------------------------------


def hurst_exponent(j: int, beta: float | None = None) -> float | None:
    """Self-similarity exponent of the limit: 1/2 for the Brownian cases,
    3/2 - beta for the fractional ones, 1 for the degenerate weak flat case,
    None when no single exponent exists (j = 12)."""
    if j in (1, 2, 3, 5, 8, 10):
        return 0.5
    if j in (4, 6, 7, 9):
        if beta is None:
            raise UsageError(f"case j={j} needs beta for its Hurst exponent")
        return 1.5 - beta
    if j == 11:
        return 1.0
    if j == 12:
        return None
    raise UsageError(f"unknown case index {j}")


def _check_variance_domain(j: int, beta: float | None) -> None:
    if j in (4, 7) and not (beta is not None and 0.5 < beta < 1.0):
        raise DomainError(f"case j={j} is LRD and needs 1/2 < beta < 1, got beta={beta}")
    if j in (6, 9) and not (beta is not None and 1.0 < beta < 1.5):
        raise DomainError(f"case j={j} is ND and needs 1 < beta < 3/2, got beta={beta}")


def limit_variance(j: int, t: float, beta: float | None = None, c: float | None = None) -> float:
    """W(t) = lim Var Z_n(t) for the power-filter cases j = 1..9."""
    if j not in range(1, 10):
        raise UsageError(f"limit_variance covers j=1..9, got {j} "
                         "(use limit_variance_prop3 for the flat cases)")
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    _check_variance_domain(j, beta)
    if j in (1, 2, 3, 5, 8):
        return t
    if j in (4, 6):
        return t ** (3.0 - 2.0 * beta)
    if c is None:
        raise UsageError(f"case j={j} needs the moderate-taper constant c")
    if j == 7:
        return t ** (3.0 - 2.0 * beta) * _c9(t, beta, c) / _c9(1.0, beta, c)
    return t ** (3.0 - 2.0 * beta) * _c16(t, beta, c) / _c16(1.0, beta, c)


def limit_variance_prop3(j: int, t: float, c: float | None = None) -> float:
    """W(t) for the flat-filter cases j = 10, 11, 12."""
    if j not in (10, 11, 12):
        raise UsageError(f"limit_variance_prop3 covers j=10..12, got {j}")
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    if j == 10:
        return t
    if j == 11:
        return t * t
    if c is None:
        raise UsageError("case j=12 needs the moderate-taper constant c")
    if t <= c:
        return t * t * _c19(t, c)
    return t * _c20(t, c)


class CovarianceSource(Enum):
    STATIONARY_INCREMENTS = "stationary_increments"
    KERNEL_QUADRATURE = "kernel_quadrature"
    DEGENERATE = "degenerate"


_COV_SOURCE = {
    **{j: CovarianceSource.STATIONARY_INCREMENTS for j in (1, 2, 3, 4, 5, 6, 8, 10)},
    **{j: CovarianceSource.KERNEL_QUADRATURE for j in (7, 9, 12)},
    11: CovarianceSource.DEGENERATE,
}


def _flat_kernel(u: np.ndarray | float, t: float, c: float) -> np.ndarray | float:
    """Limit shape of d_{n,[nu],t}/n for the flat moderate case: the overlap
    width min(t - u, t, c, c + u), clipped at zero."""
    return np.maximum(0.0, np.minimum(np.minimum(t - u, t), np.minimum(c, c + u)))


@lru_cache(maxsize=4096)
def _kernel_cov_integral(j: int, t: float, s: float, beta: float | None, c: float) -> float:
    """int K(u, t) K(u, s) du for the kernel-quadrature cases j = 7, 9, 12."""
    t1, t2 = (t, s) if t <= s else (s, t)
    if j == 12:
        f = lambda u: float(_flat_kernel(u, t1, c) * _flat_kernel(u, t2, c))
        anchors = [x for x in (-c, 0.0, t1, t1 - c, t2 - c, (t1 - c) / 2.0, (t2 - c) / 2.0)]
        breaks = _graded_breaks(-c, t1, anchors, [])
        return _quad_pieces(f, breaks)
    h = TFKernel(H=1.5 - beta, alpha=2.0, c=c)
    return tf3_covariance(h.H, c, t1, t2, sigma=1.0) / (1.0 - beta) ** 2


def gaussian_covariance(j: int, t: float, s: float, beta: float | None = None,
                        c: float | None = None) -> float:
    """Cov(U(t), U(s)) of the Gaussian limit, normalized so Var U(1) = 1.

    Stationary-increment cases use (W(t) + W(s) - W(|t-s|)) / 2; the
    kernel cases j = 7, 9, 12 use int K(u,t) K(u,s) du / int K(u,1)^2 du.
    """
    if not (t > 0.0 and s > 0.0):
        raise DomainError(f"t and s must be > 0, got t={t}, s={s}")
    src = _COV_SOURCE.get(j)
    if src is None:
        raise UsageError(f"unknown case index {j}")
    if src is CovarianceSource.DEGENERATE:
        return t * s
    if src is CovarianceSource.KERNEL_QUADRATURE:
        if c is None:
            raise UsageError(f"case j={j} needs c")
        if j != 12:
            _check_variance_domain(j, beta)
        num = _kernel_cov_integral(j, t, s, beta, c)
        den = _kernel_cov_integral(j, 1.0, 1.0, beta, c)
        return num / den

    def w(x: float) -> float:
        if x == 0.0:
            return 0.0
        if j in (10, 11, 12):
            return limit_variance_prop3(j, x, c)
        return limit_variance(j, x, beta, c)

    return 0.5 * (w(t) + w(s) - w(abs(t - s)))


# ---------------------------------------------------------------------------
# stable kernels and the log characteristic function
# ---------------------------------------------------------------------------


def pareto_sum_tail_constant(alpha: float) -> float:
    """c_alpha = Gamma(2-alpha) cos(pi alpha/2) / (1-alpha): the constant in
    1 - E exp(i s eta) = c_alpha |s|^alpha (1 - i tan(pi alpha/2) sign s) (1+o(1))
    for the (centered when alpha > 1) standard Pareto variable."""
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise DomainError(f"alpha must lie in (0,2) without 1, got {alpha}")
    return gamma_fn(2.0 - alpha) * math.cos(math.pi * alpha / 2.0) / (1.0 - alpha)


def _plus_pow(x: float, q: float) -> float:
    """Truncated power (x)_+^q with the convention 0^q = 0 for every q."""
    return x**q if x > 0.0 else 0.0


def stable_kernel(j: int, u: float, t: float, beta: float | None = None,
                  c: float | None = None, filter_sum: float | None = None) -> float:
    """Pointwise limit kernel K_j(u, t) of d_{n,[nu],t} / z_n.

    j = 1, 3:   (1-beta)^(-1) on [0, t)  (negative for the zero-sum case)
    j = 2,5,8:  (sum_k a_k) on [0, t)
    j = 4, 6:   ((t-u)_+^(1-beta) - (-u)_+^(1-beta)) / (1-beta)
    j = 7, 9:   (min(t-u, c)^(1-beta) - (-u)_+^(1-beta)) / (1-beta) on [-c, t]
    """
    if j in (2, 5, 8):
        if filter_sum is None:
            raise UsageError(f"case j={j} needs the filter sum")
        return filter_sum if 0.0 <= u < t else 0.0
    if beta is None:
        raise UsageError(f"case j={j} needs beta")
    ob = 1.0 - beta
    if j in (1, 3):
        return 1.0 / ob if 0.0 <= u < t else 0.0
    if j in (4, 6):
        if u >= t:
            return 0.0
        return (_plus_pow(t - u, ob) - _plus_pow(-u, ob)) / ob
    if j in (7, 9):
        if c is None:
            raise UsageError(f"case j={j} needs c")
        if u < -c or u > t:
            return 0.0
        return (_plus_pow(min(t - u, c), ob) - _plus_pow(-u, ob)) / ob
    raise UsageError(f"no stable kernel is defined for case j={j}")


def _signed_pow(x: np.ndarray | float, a: float):
    return np.sign(x) * np.abs(x) ** a


@lru_cache(maxsize=4096)
def stable_kernel_integrals(
    j: int, t: float, alpha: float, beta: float | None, c: float | None,
    filter_sum: float | None,
) -> tuple[float, float]:
    """(I_abs, I_sgn) = (int |K|^alpha du, int K^<alpha> du) for the case kernel.

    Closed forms for the indicator and pure-power pieces; adaptive quadrature
    with singularity substitutions elsewhere.  Relative error <= 1e-8.
    """
    if j in (1, 2, 3, 5, 8):
        k = 1.0 / (1.0 - beta) if j in (1, 3) else filter_sum
        if k is None:
            raise UsageError(f"case j={j} needs the filter sum")
        return t * abs(k) ** alpha, t * math.copysign(abs(k) ** alpha, k)

    ob = 1.0 - beta
    sing = min((1.0 - beta) * alpha, 0.0)

    def k_val(u: float) -> float:
        return stable_kernel(j, u, t, beta=beta, c=c, filter_sum=filter_sum)

    def f_abs(u: float) -> float:
        return abs(k_val(u)) ** alpha

    def f_sgn(u: float) -> float:
        v = k_val(u)
        return math.copysign(abs(v) ** alpha, v) if v != 0.0 else 0.0

    if j in (4, 6):
        # (0, t): |1-beta|^(-alpha) * (t-u)^((1-beta)*alpha), closed form
        expo = ob * alpha
        main = abs(ob) ** -alpha * t ** (expo + 1.0) / (expo + 1.0)
        sgn_main = math.copysign(main, 1.0 / ob)
        # (-inf, 0): quadrature; integrand ~ |u|^(-beta*alpha) at -inf
        breaks = _graded_breaks(-max(8.0 * t, 8.0), 0.0, [0.0], [t])
        head_abs = _quad_pieces(f_abs, breaks, {0.0: sing})
        head_sgn = _quad_pieces(f_sgn, breaks, {0.0: sing})
        tail_abs, _ = quad(f_abs, -np.inf, breaks[0], epsabs=0.0, epsrel=_EPSREL, limit=400)
        tail_sgn, _ = quad(f_sgn, -np.inf, breaks[0], epsabs=0.0, epsrel=_EPSREL, limit=400)
        return main + head_abs + tail_abs, sgn_main + head_sgn + tail_sgn
    if j in (7, 9):
        if c is None:
            raise UsageError(f"case j={j} needs c")
        anchors = [0.0, t, t - c]
        breaks = _graded_breaks(-c, t, anchors, [min(t, c)])
        singular = {0.0: sing, t: sing}
        return (
            _quad_pieces(f_abs, breaks, singular),
            _quad_pieces(f_sgn, breaks, singular),
        )
    raise UsageError(f"no stable kernel is defined for case j={j}")


@dataclass(frozen=True)
class StableLimit:
    """Descriptor of one alpha-stable limit process.

    skew is the skewness intensity of the driving random measure (+1 for the
    one-sided Pareto input); scale_const multiplies the whole log-CF and
    defaults to the Pareto tail constant c_alpha.  Pass scale_const=1 for
    integrals driven by exactly-stable unit-scale variates.
    """

    case_index: int
    alpha: float
    beta: float | None = None
    c: float | None = None
    filter_sum: float | None = None
    skew: float = 1.0
    scale_const: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 2.0) or self.alpha == 1.0:
            raise DomainError(f"alpha must lie in (0,2) without 1, got {self.alpha}")
        if not -1.0 <= self.skew <= 1.0:
            raise DomainError(f"skew must lie in [-1,1], got {self.skew}")

    @property
    def scale(self) -> float:
        return (
            pareto_sum_tail_constant(self.alpha)
            if self.scale_const is None
            else self.scale_const
        )

    def kernel(self, u: float, t: float) -> float:
        return stable_kernel(self.case_index, u, t, beta=self.beta, c=self.c,
                             filter_sum=self.filter_sum)


def stable_log_cf(limit: StableLimit, theta: float, t: float) -> complex:
    """log E exp(i theta U(t)) for the stable limit process.

        psi(theta) = scale * (-|theta|^a I_abs
                              + i skew tan(pi a/2) theta^<a> I_sgn)

    which is the theta != 0 limit of the partial-sum log-CF once the
    remainder terms vanish.
    """
    a = limit.alpha
    if theta == 0.0:
        return 0.0 + 0.0j
    i_abs, i_sgn = stable_kernel_integrals(
        limit.case_index, t, a, limit.beta, limit.c, limit.filter_sum
    )
    tau = math.tan(math.pi * a / 2.0)
    re = -abs(theta) ** a * i_abs
    im = limit.skew * tau * math.copysign(abs(theta) ** a, theta) * i_sgn
    return limit.scale * complex(re, im)


# ---------------------------------------------------------------------------
# tapered-kernel motions (compact-support kernel h~)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TFKernel:
    """Compact-support tapered kernel h~(t; u) on u in (-c, t):

        h~(t; u) = min(t - u, c)^(H - 1/alpha) * 1(-c < u < t)
                   - (-u)^(H - 1/alpha) * 1(-c < u < 0)

    The moving-average power is clipped at the window width c; H > 0 and any
    alpha in (0, 2] are admissible because the support is finite and the
    only integrability constraint, at u = 0, is (H - 1/alpha) * alpha > -1.
    """

    H: float
    alpha: float
    c: float

    def __post_init__(self) -> None:
        if not self.H > 0.0:
            raise DomainError(f"H must be > 0, got {self.H}")
        if not (0.0 < self.alpha <= 2.0) or self.alpha == 1.0:
            raise DomainError(f"alpha must lie in (0,2] without 1, got {self.alpha}")
        if not self.c > 0.0:
            raise DomainError(f"c must be > 0, got {self.c}")

    @property
    def power(self) -> float:
        return self.H - 1.0 / self.alpha

    def value(self, t: float, u: np.ndarray | float):
        """Vectorized h~(t; u)."""
        u_arr = np.asarray(u, dtype=np.float64)
        p = self.power
        with np.errstate(invalid="ignore", divide="ignore"):
            ma = np.where(
                (u_arr > -self.c) & (u_arr < t),
                np.minimum(np.abs(t - u_arr), self.c) ** p,
                0.0,
            )
            neg = np.where(
                (u_arr > -self.c) & (u_arr < 0.0), np.abs(u_arr) ** p, 0.0
            )
        out = ma - neg
        return float(out) if np.isscalar(u) else out


@lru_cache(maxsize=4096)
def _tf3_cov_cached(H: float, c: float, t: float, s: float) -> float:
    p = H - 0.5
    t1, t2 = (t, s) if t <= s else (s, t)
    if t1 <= -c:
        return 0.0
    k1 = TFKernel(H=H, alpha=2.0, c=c)

    def f(u: float) -> float:
        return float(k1.value(t1, u)) * float(k1.value(t2, u))

    anchors = [0.0, t1, t1 - c, t2 - c]
    scales = [x for x in (abs(t1), abs(t2), c) if x > 0.0]
    breaks = _graded_breaks(-c, t1, anchors, scales)
    singular = {}
    if p < 0.0:
        singular[0.0] = 2.0 * p
        singular[t1] = 2.0 * p if t1 == t2 else p
    return _quad_pieces(f, breaks, singular)


def tf3_covariance(H: float, c: float, t: float, s: float, sigma: float = 1.0) -> float:
    """sigma * int h~(t; u) h~(s; u) du: the covariance of the compact-kernel
    tapered fractional Brownian motion (alpha = 2).

    Grows like t^(2H) for t << c and like c^(2H-1) * t for t >> c.
    """
    if not sigma > 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    return sigma * _tf3_cov_cached(H, c, float(t), float(s))


def tfbm3_matching_sigma(beta: float, c: float) -> float:
    """The sigma that matches the compact-kernel motion's variance to the
    normalized moderate-taper limit variance W(t): sigma = 1 / W~(1).

    Equivalently 1 / ((1-beta)^2 C(t=1)) with the case's variance constant,
    since the two kernels are proportional.
    """
    h = 1.5 - beta
    return 1.0 / tf3_covariance(h, c, 1.0, 1.0, sigma=1.0)


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------


def sample_stable_cms(alpha: float, skew: float, rng: np.random.Generator,
                      size: int) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of the standard stable law whose log-CF is
    -|theta|^alpha (1 - i skew sign(theta) tan(pi alpha/2)), alpha != 1.
    """
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise DomainError(f"the CMS sampler needs alpha in (0,2) without 1, got {alpha}")
    if not -1.0 <= skew <= 1.0:
        raise DomainError(f"skew must lie in [-1,1], got {skew}")
    v = math.pi * (rng.random(size) - 0.5)
    w = -np.log(1.0 - rng.random(size))
    tau = skew * math.tan(math.pi * alpha / 2.0)
    b = math.atan(tau) / alpha
    s = (1.0 + tau * tau) ** (1.0 / (2.0 * alpha))
    return (
        s
        * np.sin(alpha * (v + b))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
    )


@dataclass(frozen=True)
class GaussianLimit:
    """Gaussian limit descriptor for case j, normalized to Var U(1) = 1."""

    case_index: int
    beta: float | None = None
    c: float | None = None

    @property
    def hurst(self) -> float | None:
        return hurst_exponent(self.case_index, self.beta)

    @property
    def source(self) -> CovarianceSource:
        return _COV_SOURCE[self.case_index]

    def variance(self, t: float) -> float:
        if self.case_index in (10, 11, 12):
            return limit_variance_prop3(self.case_index, t, self.c)
        return limit_variance(self.case_index, t, self.beta, self.c)

    def covariance(self, t: float, s: float) -> float:
        return gaussian_covariance(self.case_index, t, s, self.beta, self.c)


_JITTER_LADDER = (0.0, 1e-14, 1e-12, 1e-10)


def simulate_gaussian_limit(law: GaussianLimit, t_grid, replicas: int,
                            seed: int) -> np.ndarray:
    """Exact finite-dimensional replicas of the Gaussian limit on t_grid.

    Covariance factorization is Cholesky with a diagonal jitter budget of at
    most 1e-10; failure past the budget raises NumericalError rather than
    silently regularizing further.  Returns an array (replicas, len(t_grid)).
    """
    tg = np.asarray(t_grid, dtype=np.float64)
    if tg.ndim != 1 or len(tg) == 0:
        raise UsageError("t_grid must be a non-empty 1-d array")
    if len(tg) > _MAX_GRID:
        raise SizeError(f"t_grid is limited to {_MAX_GRID} points, got {len(tg)}")
    k = len(tg)
    cov = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            cov[a, b] = cov[b, a] = law.covariance(float(tg[a]), float(tg[b]))
    chol = None
    for jit in _JITTER_LADDER:
        try:
            chol = np.linalg.cholesky(cov + jit * np.eye(k))
            break
        except np.linalg.LinAlgError:
            continue
    if chol is None:
        raise NumericalError(
            "covariance factorization failed beyond the 1e-10 jitter budget"
        )
    rng = make_stream(seed, 0)
    return rng.standard_normal((replicas, k)) @ chol.T


def simulate_tfsm3(kernel: TFKernel, skew: float, t_grid, step: float | None,
                   replicas: int, seed: int, sigma: float = 1.0) -> np.ndarray:
    """Riemann-sum replicas of the compact-kernel tapered stable motion.

        Z(t) ~= sigma^(1/alpha) * sum_k h~(t; u_k) * step^(1/alpha) * s_k

    with s_k i.i.d. standard stable draws of the given skewness (standard
    normals when alpha = 2, so the sample covariance matches tf3_covariance).
    One u-grid of midpoints spans (-c, t_max) and the same s_k drive every t
    in the grid within a replica.  Returns (replicas, len(t_grid)).
    """
    tg = np.asarray(t_grid, dtype=np.float64)
    if tg.ndim != 1 or len(tg) == 0:
        raise UsageError("t_grid must be a non-empty 1-d array")
    t_max = float(tg[-1])
    if t_max <= -kernel.c:
        return np.zeros((replicas, len(tg)))
    span = kernel.c + t_max
    if step is None:
        step = span / 2.0**16
    if not 0.0 < step <= span:
        raise DomainError(f"step must lie in (0, c + t_max], got {step}")
    k = int(math.ceil(span / step))
    if k * max(replicas, 1) > 2 * 10**9:
        raise SizeError("replicas * kernel grid exceeds the 2e9 draw cap")
    u = -kernel.c + (np.arange(k) + 0.5) * step
    weights = np.stack([kernel.value(float(t), u) for t in tg])  # (T, K)
    amp = sigma ** (1.0 / kernel.alpha) * step ** (1.0 / kernel.alpha)
    out = np.empty((replicas, len(tg)))
    chunk = max(1, min(replicas, (1 << 22) // max(k, 1) + 1))
    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        rows = []
        for rep in range(lo, hi):
            rng = make_stream(seed, rep)
            if kernel.alpha == 2.0:
                rows.append(rng.standard_normal(k))
            else:
                rows.append(sample_stable_cms(kernel.alpha, skew, rng, k))
        out[lo:hi] = (np.stack(rows) * amp) @ weights.T
    return out
