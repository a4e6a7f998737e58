"""Random-schedule ensemble analytics and Monte Carlo for the rodeo algorithm.

Iteration times are drawn independently from the positive half of a normal
distribution; with the scale chosen so the mean time is T, a component with
per-iteration phase count zeta = x * T has

    E[cos^2(pi x T_j)]       = (1 + exp(-pi^3 zeta^2)) / 2
    E[cos^4(pi x T_j)]       = (3/8) (1 + exp(-4 pi^3 zeta^2)/3 + 4 exp(-pi^3 zeta^2)/3)
    E[log cos^2(pi x T_j)]   = quadrature over the half-normal density

from which the arithmetic mean, RMS, geometric mean, and relative spread of
the n-iteration suppression distribution all follow in closed form.  The
spread grows like (3/2)^(n/2): individual runs fluctuate over exponentially
many scales and the distribution of log-suppression approaches a normal.

Optimizing each statistic over a continuous iteration count at fixed total
phase count zeta_tot yields an exponential separatrix exp(-beta zeta_tot)
with the tangency at n = alpha * zeta_tot; no iteration count beats the
separatrix, so -log(S)/beta is a hard lower bound on the total time needed
to push the ensemble statistic below S for every energy above the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.random import Generator, Philox
from scipy.integrate import quad
from scipy.special import erfinv

from .core import NumericError, Schedule

__all__ = [
    "HalfNormalTimeDistribution",
    "EnsembleStatistics",
    "MonteCarloResult",
    "SeparatrixFit",
    "rra_mean_per_iteration",
    "rra_mean_total",
    "rra_geometric_mean",
    "rra_rms",
    "rra_sigma_over_mean",
    "closed_form_statistics",
    "solve_separatrix",
    "separatrix_fit_for",
    "min_time_for_mean_suppression",
    "sample_schedule",
    "monte_carlo_statistics",
]

PI3 = math.pi**3

# half-normal scale for unit mean
SIGMA_UNIT_MEAN = math.sqrt(math.pi / 2.0)

QUADRATURE_RTOL = 1e-8
HALF_NORMAL_TAIL_SIGMAS = 10.0

SEPARATRIX_BRACKET = (3.0, 6.0)
SEPARATRIX_MAX_ITER = 200
SEPARATRIX_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class HalfNormalTimeDistribution:
    """Half-normal iteration-time law parameterized by its mean.

    The underlying scale is sigma = mean_time * sqrt(pi/2), i.e. the RMS time
    is sqrt(pi/2) times the mean.
    """

    mean_time: float = 1.0

    def __post_init__(self):
        m = float(self.mean_time)
        if not math.isfinite(m) or m <= 0:
            raise ValueError(f"mean time must be positive and finite, got {m!r}")
        object.__setattr__(self, "mean_time", m)

    @property
    def sigma(self) -> float:
        return self.mean_time * SIGMA_UNIT_MEAN


@dataclass(frozen=True)
class EnsembleStatistics:
    """The four ensemble statistics of the suppression factor at fixed (zeta, n)."""

    arithmetic_mean: float
    geometric_mean: float
    rms: float
    sigma_over_mean: float
    n: int
    zeta: float


@dataclass(frozen=True)
class MonteCarloResult:
    """Sampled ensemble statistics plus the empirical median and standard errors."""

    stats: EnsembleStatistics
    median: float
    stderr_mean: float
    stderr_rms: float
    stderr_log_geometric: float
    trials: int


@dataclass(frozen=True)
class SeparatrixFit:
    """Exponential separatrix exp(-beta zeta_tot), tangent at n = alpha zeta_tot."""

    alpha: float
    beta: float


def _check_zeta(zeta: float, positive: bool = False) -> float:
    z = float(zeta)
    if not math.isfinite(z) or z < 0 or (positive and z == 0):
        kind = "positive" if positive else "nonnegative"
        raise ValueError(f"zeta must be {kind} and finite, got {zeta!r}")
    return z


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"iteration count must be a positive integer, got {n!r}")
    return int(n)


def rra_mean_per_iteration(zeta: float, n: int) -> float:
    """Ensemble-average suppression after n iterations at per-iteration phase zeta.

    ``(1/2)^n (1 + exp(-pi^3 zeta^2))^n``; tends to 2^-n once zeta exceeds ~1.
    """
    z = _check_zeta(zeta)
    n = _check_n(n)
    return (0.5 * (1.0 + math.exp(-PI3 * z * z))) ** n


def rra_mean_total(zeta_tot: float, n: int) -> float:
    """Ensemble-average suppression at fixed total phase count zeta_tot.

    Same as :func:`rra_mean_per_iteration` with the per-iteration phase
    ``zeta_tot / n``.
    """
    z = _check_zeta(zeta_tot)
    n = _check_n(n)
    return rra_mean_per_iteration(z / n, n)


@lru_cache(maxsize=4096)
def _log_suppression_integral(zeta: float) -> float:
    """E[log cos^2(pi T zeta)] over the unit-mean half-normal time law.

    The integrand has an integrable logarithmic singularity at every zero
    ``T_k = (k + 1/2)/zeta`` of the cosine, so the domain is split there and
    each panel is handled by an adaptive rule with endpoint-singularity
    extrapolation at relative tolerance 1e-8.  The half-normal tail is
    truncated at 10 sigma; deep-tail panels carry weights below 1e-20, so a
    per-panel absolute floor of 1e-13 (total well under 1e-10) keeps the
    adaptive rule from chasing relative precision that cannot matter.
    """
    z = float(zeta)
    t_max = HALF_NORMAL_TAIL_SIGMAS * SIGMA_UNIT_MEAN

    def integrand(t):
        # scalar math avoids numpy dispatch overhead in the quadrature callback;
        # log|cos| instead of log(cos^2) sidesteps squaring underflow near zeros
        c = abs(math.cos(math.pi * t * z)) or 5e-324
        return (4.0 / math.pi) * math.exp(-t * t / math.pi) * math.log(c)

    n_zeros = int(math.ceil(t_max * z - 0.5)) + 1
    points = np.unique(np.concatenate([[0.0], (np.arange(n_zeros) + 0.5) / z, [t_max]]))
    points = points[points <= t_max]
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        value, err = quad(integrand, a, b, epsabs=1e-13, epsrel=QUADRATURE_RTOL, limit=200)
        if not math.isfinite(value):
            raise NumericError(f"log-suppression quadrature diverged on [{a}, {b}]")
        if err > max(QUADRATURE_RTOL * abs(value), 1e-12):
            raise NumericError(
                f"log-suppression quadrature did not converge on [{a}, {b}]: err={err:g}"
            )
        total += value
    return total


def rra_geometric_mean(zeta: float, n: int) -> float:
    """Geometric-mean suppression, ``exp(n E[log cos^2(pi T zeta)])``.

    Approaches 4^-n at large zeta: with the phase effectively uniform the
    mean log of cos^2 is -2 log 2 per iteration.
    """
    z = _check_zeta(zeta, positive=True)
    n = _check_n(n)
    return math.exp(n * _log_suppression_integral(z))


def rra_rms(zeta: float, n: int) -> float:
    """Root-mean-square suppression; approaches (3/8)^(n/2) at large zeta."""
    z = _check_zeta(zeta)
    n = _check_n(n)
    e1 = math.exp(-PI3 * z * z)
    e4 = math.exp(-4.0 * PI3 * z * z)
    return ((3.0 / 8.0) * (1.0 + e4 / 3.0 + 4.0 * e1 / 3.0)) ** (n / 2.0)


def rra_sigma_over_mean(zeta: float, n: int) -> float:
    """Relative spread sigma/mean of the suppression distribution.

    Equals sqrt(rms^2/mean^2 - 1); grows like (3/2)^(n/2) at large zeta, so
    the ensemble mean is dominated by rare, weakly suppressed outliers.  A
    slightly negative radicand from rounding near zeta = 0 clamps to 0.
    """
    z = _check_zeta(zeta, positive=True)
    n = _check_n(n)
    e1 = math.exp(-PI3 * z * z)
    e4 = math.exp(-4.0 * PI3 * z * z)
    ratio = (1.0 + e4 / 3.0 + 4.0 * e1 / 3.0) / (1.0 + e1) ** 2
    radicand = (1.5 * ratio) ** n - 1.0
    if radicand < 0.0:
        return 0.0
    return math.sqrt(radicand)


def closed_form_statistics(zeta: float, n: int) -> EnsembleStatistics:
    """All four closed-form statistics at one (zeta, n) point."""
    return EnsembleStatistics(
        arithmetic_mean=rra_mean_per_iteration(zeta, n),
        geometric_mean=rra_geometric_mean(zeta, n),
        rms=rra_rms(zeta, n),
        sigma_over_mean=rra_sigma_over_mean(zeta, n),
        n=_check_n(n),
        zeta=_check_zeta(zeta),
    )


def _separatrix_residual(alpha: float) -> float:
    """Stationarity condition of the continuous-n arithmetic-mean optimum.

    Writing the mean as exp(n phi(zeta_tot/n)) with
    phi(u) = log((1 + exp(-pi^3 u^2))/2), the minimum over n at fixed
    zeta_tot sits where phi'(u) u = phi(u); with u = 1/alpha that reads

        2 pi^3 e / (alpha^2 (1 + e)) + log((1 + e)/2) = 0,   e = exp(-pi^3/alpha^2).

    The sign convention keeps the exponential term positive and the log term
    negative so the bracketed root is a clean sign change.
    """
    e = math.exp(-PI3 / (alpha * alpha))
    return 2.0 * PI3 * e / (alpha * alpha * (1.0 + e)) + math.log((1.0 + e) / 2.0)


@lru_cache(maxsize=1)
def solve_separatrix() -> SeparatrixFit:
    """Separatrix constants of the ensemble-average suppression.

    Bisection of the stationarity residual on alpha in [3, 6]; then
    beta = -alpha log((1 + exp(-pi^3/alpha^2))/2).  Yields alpha ~ 4.2715 and
    beta ~ 2.2437.
    """
    lo, hi = SEPARATRIX_BRACKET
    f_lo = _separatrix_residual(lo)
    if f_lo * _separatrix_residual(hi) > 0:
        raise NumericError("separatrix residual does not change sign on the bracket")
    for _ in range(SEPARATRIX_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = _separatrix_residual(mid)
        if abs(f_mid) < SEPARATRIX_RESIDUAL_TOL and hi - lo < 1e-10:
            break
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    alpha = 0.5 * (lo + hi)
    beta = -alpha * math.log((1.0 + math.exp(-PI3 / (alpha * alpha))) / 2.0)
    return SeparatrixFit(alpha=alpha, beta=beta)


def _log_statistic_per_iteration(statistic: str):
    """phi(u): log of the per-iteration statistic at per-iteration phase u."""
    if statistic == "arithmetic":
        return lambda u: math.log(0.5 * (1.0 + math.exp(-PI3 * u * u)))
    if statistic == "rms":
        def phi(u):
            e1 = math.exp(-PI3 * u * u)
            e4 = math.exp(-4.0 * PI3 * u * u)
            return 0.5 * math.log((3.0 / 8.0) * (1.0 + e4 / 3.0 + 4.0 * e1 / 3.0))
        return phi
    if statistic == "geometric":
        return _log_suppression_integral
    raise ValueError(f"unknown statistic {statistic!r}; expected geometric, arithmetic, or rms")


_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _golden_min(f, a: float, b: float, tol: float) -> float:
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 > f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


@lru_cache(maxsize=8)
def separatrix_fit_for(statistic: str = "arithmetic") -> SeparatrixFit:
    """Separatrix constants for a chosen ensemble statistic.

    The statistic after n iterations at total phase zeta_tot is
    exp(n phi(zeta_tot/n)); minimizing over continuous n reduces to
    maximizing -phi(u)/u, giving beta = -phi(u*)/u* and alpha = 1/u*.  The
    arithmetic case delegates to :func:`solve_separatrix`; for the geometric
    statistic the continuous-n optimum evaluates to beta ~ 4.395.
    """
    if statistic == "arithmetic":
        return solve_separatrix()
    phi = _log_statistic_per_iteration(statistic)

    def objective(u: float) -> float:
        return phi(u) / u

    # coarse bracket first: the objective is smooth with a single interior dip
    grid = np.linspace(0.02, 2.0, 397)
    values = [objective(u) for u in grid]
    k = int(np.argmin(values))
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    u_star = float(_golden_min(objective, lo, hi, 1e-11))
    return SeparatrixFit(alpha=1.0 / u_star, beta=float(-phi(u_star) / u_star))


def min_time_for_mean_suppression(target: float) -> float:
    """Total time below which no iteration count reaches a mean suppression ``target``.

    ``-log(target) / beta`` with beta from the arithmetic separatrix, about
    0.4456 gap periods per decade of suppression (times log 10).
    """
    t = float(target)
    if not (0.0 < t < 1.0):
        raise ValueError(f"target suppression must lie in (0, 1), got {target!r}")
    return -math.log(t) / solve_separatrix().beta


# ---------------------------------------------------------------------------
# sampling

_BLOCK_WORDS = 4  # Philox emits 4 64-bit words per counter increment


def _normalize_stream(stream) -> tuple[int, int]:
    if isinstance(stream, tuple):
        seed, trial = stream
    else:
        seed, trial = stream, 0
    seed, trial = int(seed), int(trial)
    if seed < 0 or trial < 0:
        raise ValueError("stream ids must be nonnegative")
    return seed, trial


def _halfnormal_block(seed: int, trial_lo: int, trial_hi: int, n: int, sigma: float) -> np.ndarray:
    """Half-normal draws for trials [trial_lo, trial_hi), shape (trials, n).

    Trial i owns counter blocks [i*b, (i+1)*b) of Philox keyed by the seed,
    with b = ceil(n/4) blocks per trial, so the (seed, trial) -> sample map is
    independent of batching and evaluation order.  Draws use one uniform per
    sample through the inverse CDF, which keeps word consumption exact.
    """
    blocks_per_trial = (n + _BLOCK_WORDS - 1) // _BLOCK_WORDS
    bitgen = Philox(key=np.array([seed, 0], dtype=np.uint64))
    bitgen.advance(trial_lo * blocks_per_trial)
    width = blocks_per_trial * _BLOCK_WORDS
    u = Generator(bitgen).random((trial_hi - trial_lo) * width).reshape(-1, width)[:, :n]
    draws = sigma * math.sqrt(2.0) * erfinv(u)
    # u == 0 maps to a zero time; nudge to keep schedule entries positive
    np.maximum(draws, 1e-300, out=draws)
    return draws


def sample_schedule(n: int, dist: HalfNormalTimeDistribution, stream) -> Schedule:
    """Draw an n-iteration schedule from the half-normal time law.

    ``stream`` is either a bare seed or a ``(seed, trial)`` pair; the same
    stream always reproduces the same schedule, and the draws coincide with
    trial ``trial`` of :func:`monte_carlo_statistics` run with the same seed.
    """
    n = _check_n(n)
    seed, trial = _normalize_stream(stream)
    draws = _halfnormal_block(seed, trial, trial + 1, n, dist.sigma)[0]
    return Schedule(tuple(float(t) for t in draws))


def monte_carlo_statistics(
    zeta: float,
    n: int,
    trials: int,
    seed: int = 0,
    mean_time: float = 1.0,
    batch: int = 200_000,
) -> MonteCarloResult:
    """Sample the suppression distribution at fixed per-mean-time phase ``zeta``.

    Draws ``trials`` schedules of n half-normal times (mean ``mean_time``),
    evaluates the log suppression of a component whose phase count per unit
    mean time is ``zeta``, and aggregates the arithmetic mean, geometric mean
    (exp of the mean log), RMS, relative spread, and the median (computed on
    the logs, which are robust against the heavy upper tail).  Standard
    errors for the mean, the RMS, and the mean log are included.

    Trials are independent Philox streams keyed ``(seed, trial)``; results
    depend only on ``(seed, trials)``, not on batch size.
    """
    z = _check_zeta(zeta)
    n = _check_n(n)
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sigma = HalfNormalTimeDistribution(mean_time).sigma

    if z == 0.0:
        stats = EnsembleStatistics(1.0, 1.0, 1.0, 0.0, n, 0.0)
        return MonteCarloResult(stats, median=1.0, stderr_mean=0.0, stderr_rms=0.0,
                                stderr_log_geometric=0.0, trials=trials)

    sum_s = sum_s2 = sum_s4 = 0.0
    sum_log = sum_log2 = 0.0
    logs_parts = []
    for lo in range(0, trials, batch):
        hi = min(lo + batch, trials)
        times = _halfnormal_block(seed, lo, hi, n, sigma)
        log_s = np.sum(np.log(np.cos(np.pi * z * times) ** 2), axis=1)
        s = np.exp(log_s)
        sum_s += float(np.sum(s))
        sum_s2 += float(np.sum(s * s))
        sum_s4 += float(np.sum(s**4))
        sum_log += float(np.sum(log_s))
        sum_log2 += float(np.sum(log_s * log_s))
        logs_parts.append(log_s)

    mean = sum_s / trials
    mean_s2 = sum_s2 / trials
    rms = math.sqrt(mean_s2)
    mean_log = sum_log / trials
    var_s = max(mean_s2 - mean * mean, 0.0)
    var_s2 = max(sum_s4 / trials - mean_s2 * mean_s2, 0.0)
    var_log = max(sum_log2 / trials - mean_log * mean_log, 0.0)
    all_logs = np.concatenate(logs_parts)
    median = float(np.exp(np.median(all_logs)))

    stats = EnsembleStatistics(
        arithmetic_mean=mean,
        geometric_mean=math.exp(mean_log),
        rms=rms,
        sigma_over_mean=math.sqrt(var_s) / mean if mean > 0 else 0.0,
        n=n,
        zeta=z,
    )
    return MonteCarloResult(
        stats=stats,
        median=median,
        stderr_mean=math.sqrt(var_s / trials),
        stderr_rms=math.sqrt(var_s2 / trials) / (2.0 * rms) if rms > 0 else 0.0,
        stderr_log_geometric=math.sqrt(var_log / trials),
        trials=trials,
    )
