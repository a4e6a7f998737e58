"""Whac-a-Mole construction of minimax super-iteration schedules.

Start from a single super iteration whose base time puts suppression zeros at
every integer energy ratio.  Each cycle locates the worst (largest) remaining
suppression peak at or above the gap and appends a super iteration whose
first zero lands exactly on it; the peaks get progressively narrower and
lower.  Finally all times are shrunk by a common factor chosen so the
suppression at the gap rises to exactly the worst peak value, trading none of
the worst-case bound for a shorter schedule.

The working ladder keeps its leading base time at 1 (gap zero pinned) and the
common scale is applied to the reported schedule only, so each cycle's table
row stands on its own no matter how many further cycles run.

All profile evaluations use the infinite-depth closed form; finite-depth
validity is assessed separately via :func:`rodeosched.superiter.max_valid_energy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .core import NumericError, SuppressionProfile
from .superiter import DEFAULT_DEPTH, SuperIteration, SuperSchedule, ideal_profile

__all__ = [
    "WorstPeak",
    "CycleRecord",
    "WamState",
    "find_worst_peak",
    "whack",
    "rescale_to_equalize",
    "wam_optimize",
    "worst_case_bound",
    "wam_table",
]

GRID_POINTS_PER_UNIT = 20_000
REFINE_CANDIDATES = 5
REFINE_XTOL = 1e-11
TIE_REL_TOL = 1e-9

RESCALE_BRACKET = (0.7, 1.0)
RESCALE_TOL = 1e-10

# search domain heuristic: scan up to 4 periods of the slowest factor, then
# certify the remainder with the analytic tail bound
SEARCH_SPAN_FACTOR = 4.0
MAX_SPAN_DOUBLINGS = 8

_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


class WorstPeak(NamedTuple):
    location: float
    value: float


@dataclass(frozen=True)
class CycleRecord:
    """Reported schedule of one cycle: scaled times and the worst peak."""

    times: tuple[float, ...]
    worst: WorstPeak

    @property
    def total_time(self) -> float:
        return float(sum(self.times))


@dataclass(frozen=True)
class WamState:
    """Optimizer state: unscaled ladder bases, report scale, worst peak, history.

    ``bases[0]`` is always 1, so the unscaled profile vanishes at the gap;
    the reported times are ``scale * bases``.  ``worst`` is the global
    maximum of the unscaled profile over energies at or above the gap, which
    by the equalizing rescale is also the maximum of the scaled profile.
    """

    bases: tuple[float, ...]
    scale: float
    worst: WorstPeak
    history: tuple[CycleRecord, ...] = ()

    def __post_init__(self):
        if len(self.bases) == 0:
            raise ValueError("state must hold at least one super iteration")
        if abs(self.bases[0] - 1.0) > 1e-12:
            raise ValueError("the leading unscaled base time must be 1")
        if any(b <= 0 for b in self.bases):
            raise ValueError("base times must be positive")
        if not (0.0 < self.scale <= 1.0):
            raise ValueError(f"scale must lie in (0, 1], got {self.scale!r}")

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self.scale * b for b in self.bases)

    @property
    def total_time(self) -> float:
        return float(sum(self.times))

    def profile(self) -> SuppressionProfile:
        """Closed-form profile of the unscaled ladder."""
        return ideal_profile(self.bases)

    def scaled_profile(self) -> SuppressionProfile:
        return ideal_profile(self.times)

    def to_super_schedule(self, depth: int = DEFAULT_DEPTH) -> SuperSchedule:
        return SuperSchedule(tuple(SuperIteration(t, depth) for t in self.times))


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def find_worst_peak(
    profile: SuppressionProfile,
    x_min: float,
    x_max: float,
    grid_per_unit: int = GRID_POINTS_PER_UNIT,
    candidates: int = REFINE_CANDIDATES,
) -> WorstPeak:
    """Global maximum of a suppression profile on [x_min, x_max].

    Dense grid scan followed by golden-section refinement around the highest
    few local maxima; near-exact ties resolve toward the smaller energy.
    """
    x_min, x_max = float(x_min), float(x_max)
    if not (x_min < x_max):
        raise ValueError("require x_min < x_max")
    n = max(int(math.ceil((x_max - x_min) * grid_per_unit)), 64)
    xs = np.linspace(x_min, x_max, n)
    ss = np.asarray(profile.evaluate(xs), dtype=float)

    interior = np.where((ss[1:-1] >= ss[:-2]) & (ss[1:-1] >= ss[2:]))[0] + 1
    if interior.size:
        order = interior[np.argsort(ss[interior])[::-1][:candidates]]
    else:
        order = np.array([int(np.argmax(ss))])
    # endpoints can carry the max when the profile is monotone into the domain
    order = np.unique(np.concatenate([order, [0, n - 1, int(np.argmax(ss))]]))

    step = xs[1] - xs[0]

    def f(x):
        return float(profile.evaluate(x))

    refined: list[WorstPeak] = []
    for i in order:
        a = max(x_min, xs[i] - step)
        b = min(x_max, xs[i] + step)
        if b - a < REFINE_XTOL:
            refined.append(WorstPeak(float(xs[i]), f(float(xs[i]))))
            continue
        xm, vm = _golden_max(f, a, b, REFINE_XTOL)
        refined.append(WorstPeak(xm, vm))

    best_value = max(p.value for p in refined)
    tied = [p for p in refined if p.value >= best_value * (1.0 - TIE_REL_TOL)]
    winner = min(tied, key=lambda p: p.location)
    return WorstPeak(float(winner.location), float(winner.value))


def _search_span(bases: tuple[float, ...]) -> float:
    return SEARCH_SPAN_FACTOR / min(bases)


def _worst_peak_certified(bases: tuple[float, ...]) -> WorstPeak:
    """Worst peak over all energies >= 1, certified by the analytic tail cap.

    The scan stops at the span heuristic only once the tail bound beyond the
    scanned window sits strictly below the found peak; otherwise the window
    doubles.
    """
    profile = ideal_profile(bases)
    x_max = max(_search_span(bases), 2.0)
    for _ in range(MAX_SPAN_DOUBLINGS):
        peak = find_worst_peak(profile, 1.0, x_max)
        if profile.tail_cap(x_max) < peak.value:
            return peak
        x_max *= 2.0
    raise NumericError("could not certify the worst suppression peak within the search span")


def whack(state: WamState) -> WamState:
    """Append a super iteration whose first zero sits on the current worst peak."""
    x_star = state.worst.location
    if x_star < 1.0:
        raise NumericError(f"worst peak location {x_star!r} lies below the gap")
    new_bases = state.bases + (1.0 / x_star,)
    return WamState(
        bases=new_bases,
        scale=1.0,
        worst=_worst_peak_certified(new_bases),
        history=state.history,
    )


def rescale_to_equalize(state: WamState) -> tuple[float, WamState]:
    """Shrink all times so the suppression at the gap equals the worst peak.

    With the unscaled profile vanishing at the gap and decreasing on the
    interval [scale, 1], the equalizing factor is the root of
    ``s_unscaled(lambda) = worst value`` on [0.7, 1], found by bisection.
    Scaling by any less would push the gap value above the worst peak and
    raise the bound.
    """
    profile = state.profile()
    if float(profile.evaluate(1.0)) > 1e-18:
        raise ValueError("rescale requires the unscaled profile to vanish at the gap")
    target = state.worst.value
    lo, hi = RESCALE_BRACKET

    def g(lam: float) -> float:
        return float(profile.evaluate(lam)) - target

    g_lo, g_hi = g(lo), g(hi)
    if g_lo < 0.0 or g_hi > 0.0:
        raise NumericError("equalizing scale is not bracketed by [0.7, 1]")
    while hi - lo > RESCALE_TOL:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return lam, replace(state, scale=lam)


def wam_optimize(cycles: int, depth: int = DEFAULT_DEPTH) -> WamState:
    """Run the peak-whacking optimizer for the requested number of cycles.

    Cycle 1 is the single unit-base super iteration plus its rescale; each
    later cycle whacks the current worst peak and rescales again.  The
    history records one scaled schedule per cycle.  ``depth`` only affects
    the finite ladders exported via :meth:`WamState.to_super_schedule`.
    """
    if int(cycles) != cycles or cycles < 1:
        raise ValueError(f"cycles must be a positive integer, got {cycles!r}")
    if int(depth) != depth or depth < 1:
        raise ValueError(f"depth must be a positive integer, got {depth!r}")

    bases = (1.0,)
    state = WamState(bases=bases, scale=1.0, worst=_worst_peak_certified(bases))
    _, state = rescale_to_equalize(state)
    state = replace(state, history=(CycleRecord(state.times, state.worst),))
    for _ in range(1, int(cycles)):
        state = whack(state)
        _, state = rescale_to_equalize(state)
        state = replace(state, history=state.history + (CycleRecord(state.times, state.worst),))
    return state


def worst_case_bound(state: WamState) -> float:
    """Largest suppression over all energies at or above the gap.

    This caps the spectrum-averaged excited suppression of any initial state
    whose excited components all sit at or above the gap, with no further
    knowledge of the state required.
    """
    return state.worst.value


def wam_table(cycles: int, depth: int = DEFAULT_DEPTH) -> list[dict]:
    """One row per cycle: count, worst-case bound, total time, scaled times."""
    state = wam_optimize(cycles, depth)
    rows = []
    for k, record in enumerate(state.history, start=1):
        rows.append(
            {
                "n": k,
                "max_suppression": record.worst.value,
                "total_time": record.total_time,
                "times": list(record.times),
            }
        )
    return rows
