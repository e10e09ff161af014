"""Experiment orchestration: n-ladders, replica ensembles, theory-vs-empirics.

A plan bundles one case descriptor with the ladder, grids, replica count and
master seed; the run_* entry points turn it into a ComparisonReport whose
rows carry (estimate, stderr, theory, z, pass).  Pass means |z| within the
plan threshold (default 3); a report passes family-wise when at least 95% of
its z-bearing cells pass, a deliberate allowance for boundary cells of an
asymptotic statement checked at fixed n.

Reproducibility contract: replica r draws from the Philox stream keyed by
(master_seed, r), bootstrap resampling from a disjoint key range, and all
reductions run in fixed replica order, so a plan yields a bit-identical
report at any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats as sps

from .errors import SizeError, UsageError
from .filters import Dependence, FilterSpec, FilterTaper, TaperedFilter
from .innovations import InnovationSpec
from .limit_laws import (
    StableLimit,
    gaussian_covariance,
    limit_variance,
    limit_variance_prop3,
    stable_log_cf,
)
from .partial_sums import (
    CASE_DEPENDENCE,
    CASE_TAPER,
    RegimeSpec,
    coefficient_profile,
    coupling_samples,
    lyapunov_fraction,
    normalizer,
)
from .streams import make_stream

__all__ = [
    "CheckKind",
    "ExperimentPlan",
    "ReportRow",
    "ComparisonReport",
    "case_defaults",
    "make_case_regime",
    "run_gaussian_check",
    "run_stable_check",
    "run_lyapunov_sweep",
    "run_coupling_check",
]

MAX_TOTAL_DRAWS = 2 * 10**9
_BOOTSTRAP_RESAMPLES = 500
_BOOTSTRAP_KEY_BASE = 1 << 40


class CheckKind(Enum):
    VARIANCE = "variance"
    COVARIANCE = "covariance"
    GAUSSIAN_KS = "gaussian_ks"
    STABLE_CF = "stable_cf"
    LYAPUNOV = "lyapunov"
    COUPLING = "coupling"


_CI_CHECKS = {CheckKind.VARIANCE, CheckKind.COVARIANCE, CheckKind.GAUSSIAN_KS,
              CheckKind.STABLE_CF, CheckKind.COUPLING}


@dataclass(frozen=True)
class ExperimentPlan:
    """One experiment: a case, its ladder and grids, and the run budget."""

    regime: RegimeSpec
    n_ladder: tuple[int, ...]
    t_grid: tuple[float, ...]
    replicas: int
    master_seed: int
    checks: frozenset[CheckKind]
    theta_grid: tuple[float, ...] = ()
    delta: float = 0.5
    coupling_r: float = 1.0
    z_threshold: float = 3.0
    ks_p_floor: float = 0.01
    slope_tolerance: float = 0.15
    threads: int = 1

    def __post_init__(self) -> None:
        if len(self.n_ladder) == 0 or any(n < 2 for n in self.n_ladder):
            raise UsageError("n_ladder must hold integers >= 2")
        if list(self.n_ladder) != sorted(self.n_ladder):
            raise UsageError("n_ladder must be ascending")
        if len(self.t_grid) == 0 or any(t <= 0 for t in self.t_grid):
            raise UsageError("t_grid must hold positive times")
        if self.checks & _CI_CHECKS and self.replicas < 100:
            raise UsageError("CI-bearing checks need at least 100 replicas")
        if CheckKind.STABLE_CF in self.checks:
            pos = sorted(th for th in self.theta_grid if th > 0)
            neg = sorted(-th for th in self.theta_grid if th < 0)
            if pos != neg:
                raise UsageError("theta_grid must be symmetric about 0")
            if not pos:
                raise UsageError("the CF check needs a nonempty theta_grid")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")


@dataclass(frozen=True)
class ReportRow:
    case_j: int
    n: int
    check: str
    t: float | None = None
    s: float | None = None
    theta: float | None = None
    estimate: float = math.nan
    stderr: float = math.nan
    theory: float = math.nan
    z: float = math.nan
    passed: bool | None = None
    wide_ci: bool = False


@dataclass
class ComparisonReport:
    rows: list[ReportRow] = field(default_factory=list)
    family_fraction: float = 0.95

    def add(self, row: ReportRow) -> None:
        self.rows.append(row)

    def extend(self, other: "ComparisonReport") -> None:
        self.rows.extend(other.rows)

    @property
    def family_pass(self) -> bool:
        graded = [r for r in self.rows if r.passed is not None]
        if not graded:
            return True
        frac = sum(1 for r in graded if r.passed) / len(graded)
        return frac >= self.family_fraction

    def failed_rows(self) -> list[ReportRow]:
        return [r for r in self.rows if r.passed is False]


# ---------------------------------------------------------------------------
# case construction helpers
# ---------------------------------------------------------------------------

_DEFAULT_BETA = {
    Dependence.LRD: 0.7,
    Dependence.SRD: 1.2,
    Dependence.ND: 1.25,
    Dependence.FLAT: 0.0,
}
# strong-taper default: 0.5 keeps lam(n) << n so finite-n variance ratios are
# clean; the stable CF checks prefer a slower cut (0.8), where the truncated
# filter sum is closer to its limit at accessible n.  Weak tapering uses 1.3
# for the power filters (taper must not bind below t ~ 2 at desk-scale n)
# and 1.5 for the flat filter, whose variance transient decays like
# n^(1-gamma1).
_DEFAULT_GAMMA1 = {
    "gaussian": {FilterTaper.STRONG: 0.5, FilterTaper.WEAK: 1.3, FilterTaper.MODERATE: 1.0},
    "stable": {FilterTaper.STRONG: 0.8, FilterTaper.WEAK: 1.3, FilterTaper.MODERATE: 1.0},
}


def case_defaults(j: int, flavor: str = "gaussian") -> dict:
    """Per-case default parameters (beta, gamma1, c) used by the CLI."""
    if j not in CASE_TAPER:
        raise UsageError(f"case index must lie in 1..12, got {j}")
    if flavor not in _DEFAULT_GAMMA1:
        raise UsageError(f"flavor must be 'gaussian' or 'stable', got {flavor}")
    gamma1 = _DEFAULT_GAMMA1[flavor][CASE_TAPER[j]]
    if j == 11:
        gamma1 = 1.5
    return {
        "beta": _DEFAULT_BETA[CASE_DEPENDENCE[j]],
        "gamma1": gamma1,
        "c": 1.0,
    }


def make_case_regime(
    j: int,
    n: int,
    innovation: InnovationSpec,
    beta: float | None = None,
    gamma1: float | None = None,
    c: float = 1.0,
    a0: float | None = None,
) -> RegimeSpec:
    """Assemble a validated RegimeSpec for case j, filling gaps with defaults."""
    flavor = "gaussian" if innovation.kind.value == "gaussian_unit" else "stable"
    d = case_defaults(j, flavor)
    beta = d["beta"] if beta is None else beta
    gamma1 = d["gamma1"] if gamma1 is None else gamma1
    dep = CASE_DEPENDENCE[j]
    if dep is Dependence.LRD:
        base = FilterSpec.lrd(beta)
    elif dep is Dependence.SRD:
        base = FilterSpec.srd(beta, a0 if a0 is not None else 1.0)
    elif dep is Dependence.ND:
        base = FilterSpec.nd(beta)
    else:
        base = FilterSpec.flat()
    tf = TaperedFilter(base, gamma1=gamma1, c=c, n=n)
    return RegimeSpec(j, tf, innovation)


# ---------------------------------------------------------------------------
# replica simulation
# ---------------------------------------------------------------------------


def _z_matrix(
    regime: RegimeSpec,
    n: int,
    t_grid: tuple[float, ...],
    replicas: int,
    master_seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Replica matrix Z[r, k] = Z_n(t_k) under the case-correct normalizer.

    Rows are independent Philox streams keyed by (master_seed, r); the
    content is invariant to the batch partition, hence to the thread count.
    """
    r = regime.with_n(n)
    lam = r.filter.lam
    m_max = int(math.floor(n * max(t_grid)))
    length = lam + m_max + 1
    if replicas * length > MAX_TOTAL_DRAWS:
        raise SizeError(
            f"replicas * innovations = {replicas * length:.3g} exceeds the "
            f"{MAX_TOTAL_DRAWS:.0e} draw cap; lower replicas or n"
        )
    weights = np.zeros((len(t_grid), length))
    for k, t in enumerate(t_grid):
        prof = coefficient_profile(r, n, t)
        weights[k, : len(prof.values)] = prof.values
    a_n = normalizer(r, n).value
    weights /= a_n
    inn = r.innovation
    out = np.empty((replicas, len(t_grid)))
    batch = max(1, min(replicas, (8 << 20) // max(length, 1) + 1))
    spans = [(lo, min(lo + batch, replicas)) for lo in range(0, replicas, batch)]

    def fill(span: tuple[int, int]) -> None:
        lo, hi = span
        block = np.empty((hi - lo, length))
        for i, rep in enumerate(range(lo, hi)):
            block[i] = inn.sample_block(make_stream(master_seed, rep), length)
        out[lo:hi] = block @ weights.T

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, spans))
    else:
        for span in spans:
            fill(span)
    return out


def _bootstrap_se(values: np.ndarray, statistic, seed_stream: np.random.Generator) -> float:
    """Bootstrap standard error of `statistic` over replica `values`."""
    n = len(values)
    stats_ = np.empty(_BOOTSTRAP_RESAMPLES)
    for b in range(_BOOTSTRAP_RESAMPLES):
        idx = seed_stream.integers(0, n, size=n)
        stats_[b] = statistic(values[idx])
    return float(np.std(stats_, ddof=1))


def _bootstrap_se_complex(values: np.ndarray, theta: float,
                          seed_stream: np.random.Generator) -> float:
    """Bootstrap scale of the empirical CF at theta: sqrt(Var Re + Var Im)."""
    n = len(values)
    re = np.empty(_BOOTSTRAP_RESAMPLES)
    im = np.empty(_BOOTSTRAP_RESAMPLES)
    phases = np.exp(1j * theta * values)
    for b in range(_BOOTSTRAP_RESAMPLES):
        idx = seed_stream.integers(0, n, size=n)
        m = phases[idx].mean()
        re[b], im[b] = m.real, m.imag
    return float(math.hypot(np.std(re, ddof=1), np.std(im, ddof=1)))


def _theory_variance(regime: RegimeSpec, t: float) -> float:
    j = regime.case_index
    beta = regime.filter.base.beta
    c = regime.filter.c
    if j >= 10:
        return limit_variance_prop3(j, t, c)
    return limit_variance(j, t, beta, c)


# ---------------------------------------------------------------------------
# check runners
# ---------------------------------------------------------------------------


def run_gaussian_check(plan: ExperimentPlan) -> ComparisonReport:
    """Replica variance/covariance of Z_n against the Gaussian limit, plus a
    per-t normality statistic (KS against the fitted normal)."""
    if not plan.regime.is_gaussian_limit:
        raise UsageError(
            "the Gaussian check needs unit-variance or hard-tapered innovations"
        )
    report = ComparisonReport()
    j = plan.regime.case_index
    cell = 0
    for n in plan.n_ladder:
        z = _z_matrix(plan.regime, n, plan.t_grid, plan.replicas, plan.master_seed,
                      plan.threads)
        for k, t in enumerate(plan.t_grid):
            cell += 1
            boot = make_stream(plan.master_seed, _BOOTSTRAP_KEY_BASE + cell)
            col = z[:, k]
            if CheckKind.VARIANCE in plan.checks:
                est = float(np.var(col, ddof=1))
                se = _bootstrap_se(col, lambda v: float(np.var(v, ddof=1)), boot)
                theory = _theory_variance(plan.regime, t)
                zscore = (est - theory) / se if se > 0 else math.inf
                report.add(ReportRow(
                    case_j=j, n=n, check=CheckKind.VARIANCE.value, t=t,
                    estimate=est, stderr=se, theory=theory, z=zscore,
                    passed=abs(zscore) <= plan.z_threshold,
                ))
            if CheckKind.GAUSSIAN_KS in plan.checks:
                sd = float(np.std(col, ddof=1))
                standardized = (col - float(np.mean(col))) / sd
                stat, pval = sps.kstest(standardized, "norm")
                report.add(ReportRow(
                    case_j=j, n=n, check=CheckKind.GAUSSIAN_KS.value, t=t,
                    estimate=float(pval), stderr=float(stat),
                    theory=plan.ks_p_floor,
                    z=math.nan, passed=bool(pval > plan.ks_p_floor),
                ))
        if CheckKind.COVARIANCE in plan.checks and len(plan.t_grid) > 1:
            beta = plan.regime.filter.base.beta
            c = plan.regime.filter.c
            for k in range(len(plan.t_grid) - 1):
                cell += 1
                boot = make_stream(plan.master_seed, _BOOTSTRAP_KEY_BASE + cell)
                t, s = plan.t_grid[k], plan.t_grid[k + 1]
                pair = z[:, k : k + 2]
                est = float(np.cov(pair.T, ddof=1)[0, 1])

                def cov_stat(rows: np.ndarray) -> float:
                    return float(np.cov(rows.T, ddof=1)[0, 1])

                se = _bootstrap_se(pair, cov_stat, boot)
                theory = gaussian_covariance(j, t, s, beta, c)
                zscore = (est - theory) / se if se > 0 else math.inf
                report.add(ReportRow(
                    case_j=j, n=n, check=CheckKind.COVARIANCE.value, t=t, s=s,
                    estimate=est, stderr=se, theory=theory, z=zscore,
                    passed=abs(zscore) <= plan.z_threshold,
                ))
    return report


def _stable_limit_for(regime: RegimeSpec) -> StableLimit:
    base = regime.filter.base
    filter_sum = None
    if regime.case_index in (2, 5, 8):
        filter_sum = base.infinite_sum()
    return StableLimit(
        case_index=regime.case_index,
        alpha=regime.innovation.alpha.alpha,
        beta=base.beta,
        c=regime.filter.c,
        filter_sum=filter_sum,
    )


def run_stable_check(plan: ExperimentPlan) -> ComparisonReport:
    """Empirical CF of Z_n (or V_n) against exp of the stable limit log-CF.

    For a multi-point t_grid an additional joint cell checks the linear
    combination sum_l Z_n(t_l) against the combined kernel, which is how the
    finite-dimensional statement reduces to one dimension.
    """
    inn = plan.regime.innovation
    if inn.kind.value == "gaussian_unit" or plan.regime.is_gaussian_limit:
        raise UsageError("the stable check needs raw Pareto or soft-tapered innovations")
    report = ComparisonReport()
    j = plan.regime.case_index
    limit = _stable_limit_for(plan.regime)
    cell = 10**6
    for n in plan.n_ladder:
        z = _z_matrix(plan.regime, n, plan.t_grid, plan.replicas, plan.master_seed,
                      plan.threads)
        combos: list[tuple[float | None, np.ndarray]] = [
            (t, z[:, k]) for k, t in enumerate(plan.t_grid)
        ]
        if len(plan.t_grid) > 1:
            combos.append((None, z.sum(axis=1)))
        for t, col in combos:
            for theta in plan.theta_grid:
                cell += 1
                boot = make_stream(plan.master_seed, _BOOTSTRAP_KEY_BASE + cell)
                emp = complex(np.exp(1j * theta * col).mean())
                if t is not None:
                    psi = stable_log_cf(limit, theta, t)
                else:
                    psi = _joint_log_cf(limit, theta, plan.t_grid)
                theo = complex(np.exp(psi))
                diff = float(abs(emp - theo))
                se = _bootstrap_se_complex(col, theta, boot)
                zscore = diff / se if se > 0 else math.inf
                report.add(ReportRow(
                    case_j=j, n=n, check=CheckKind.STABLE_CF.value,
                    t=t, theta=theta,
                    estimate=diff, stderr=se, theory=0.0, z=zscore,
                    passed=bool(zscore <= plan.z_threshold),
                ))
    return report


def _joint_log_cf(limit: StableLimit, theta: float, ts: tuple[float, ...]) -> complex:
    """log-CF of sum_l U(t_l): the kernel of the combination is the sum of the
    per-t kernels, integrated on a common u grid by quadrature."""
    from .limit_laws import _graded_breaks, _quad_pieces  # shared machinery

    a = limit.alpha
    tau = math.tan(math.pi * a / 2.0)

    def k_sum(u: float) -> float:
        return sum(limit.kernel(u, t) for t in ts)

    lo = -limit.c if limit.case_index in (7, 9) else min(-8.0 * max(ts), -8.0)
    anchors = [0.0, *ts, *[t - limit.c for t in ts if limit.c is not None]]
    breaks = _graded_breaks(lo, max(ts), [x for x in anchors if x is not None],
                            [min(ts)])
    sing = min((1.0 - limit.beta) * a, 0.0) if limit.beta is not None else 0.0
    singular = {0.0: sing, **{t: sing for t in ts}}
    i_abs = _quad_pieces(lambda u: abs(k_sum(u)) ** a, breaks, singular)
    i_sgn = _quad_pieces(
        lambda u: math.copysign(abs(k_sum(u)) ** a, k_sum(u)) if k_sum(u) else 0.0,
        breaks, singular,
    )
    if limit.case_index in (4, 6):
        tail_abs, _ = _tail_quad(k_sum, a, breaks[0])
        i_abs += tail_abs
        i_sgn += tail_abs * math.copysign(1.0, k_sum(breaks[0] - 1.0))
    re = -abs(theta) ** a * i_abs
    im = limit.skew * tau * math.copysign(abs(theta) ** a, theta) * i_sgn
    return limit.scale * complex(re, im)


def _tail_quad(k_sum, a: float, upper: float) -> tuple[float, float]:
    from scipy.integrate import quad

    val, err = quad(lambda u: abs(k_sum(u)) ** a, -np.inf, upper,
                    epsabs=0.0, epsrel=1e-10, limit=400)
    return val, err


def run_lyapunov_sweep(plan: ExperimentPlan) -> ComparisonReport:
    """Table of L(2+delta, n, t) over the ladder plus a trend verdict: the
    least-squares slope of log L against log n must be negative."""
    if len(plan.n_ladder) < 2:
        raise UsageError("the Lyapunov sweep needs at least two ladder points")
    report = ComparisonReport()
    j = plan.regime.case_index
    for t in plan.t_grid:
        values = []
        for n in plan.n_ladder:
            val = lyapunov_fraction(plan.regime, n, t, plan.delta)
            values.append(val)
            report.add(ReportRow(
                case_j=j, n=n, check=CheckKind.LYAPUNOV.value, t=t,
                estimate=val, theory=0.0,
            ))
        slope = float(np.polyfit(np.log(plan.n_ladder), np.log(values), 1)[0])
        report.add(ReportRow(
            case_j=j, n=plan.n_ladder[-1], check="lyapunov_slope", t=t,
            estimate=slope, theory=0.0, z=math.nan, passed=bool(slope < 0.0),
        ))
    return report


def run_coupling_check(plan: ExperimentPlan, r: float | None = None) -> ComparisonReport:
    """Coupling distance per ladder point with CI, plus the log-log slope
    against the predicted rate exponent (alpha - r)(1/alpha - gamma)."""
    r = plan.coupling_r if r is None else r
    inn = plan.regime.innovation
    report = ComparisonReport()
    j = plan.regime.case_index
    alpha = inn.alpha.alpha
    gamma = inn.taper.gamma if inn.taper is not None else None
    means = []
    cell = 2 * 10**6
    for n in plan.n_ladder:
        samples = coupling_samples(plan.regime, n, plan.t_grid[-1], r,
                                   plan.replicas, plan.master_seed)
        est = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
        means.append(est)
        cell += 1
        report.add(ReportRow(
            case_j=j, n=n, check=CheckKind.COUPLING.value, t=plan.t_grid[-1],
            estimate=est, stderr=se, theory=math.nan,
        ))
    if len(plan.n_ladder) >= 2:
        slope = float(np.polyfit(np.log(plan.n_ladder), np.log(means), 1)[0])
        expected = (alpha - r) * (1.0 / alpha - gamma)
        wide = (alpha - r) < 0.25
        tol = plan.slope_tolerance * (2.0 if wide else 1.0)
        report.add(ReportRow(
            case_j=j, n=plan.n_ladder[-1], check="coupling_slope",
            t=plan.t_grid[-1],
            estimate=slope, theory=expected,
            z=(slope - expected) / tol if tol > 0 else math.nan,
            passed=bool(abs(slope - expected) <= tol),
            wide_ci=wide,
        ))
    return report
