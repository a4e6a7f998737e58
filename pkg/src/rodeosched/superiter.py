"""Super iterations: geometric ladders of halving times and their closed forms.

A super iteration of base time ``T`` runs iterations at ``T/2, T/4, ...``;
the infinite ladder's suppression collapses to the squared zeroth spherical
Bessel function ``j0^2(pi * zeta)`` with ``zeta = x * T``, which vanishes at
every positive integer ``zeta`` and decays like ``1/(pi zeta)^2``.  A finite
ladder of depth N reproduces that closed form up to energies of order
``2^N`` and is what actually gets executed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import Schedule, SuppressionProfile

__all__ = [
    "SuperIteration",
    "SuperSchedule",
    "bessel_j0",
    "super_suppression",
    "truncated_super_suppression",
    "max_valid_energy",
    "expand",
    "ideal_profile",
]

DEFAULT_DEPTH = 32

# Width of the series window around zero where sin(z)/z is evaluated by its
# Taylor expansion instead of the ratio.
_SERIES_CUTOFF = 1e-4

# Reference leading-iteration time of the single optimized super iteration;
# the validity formula below is calibrated against it.
REFERENCE_LEADING_TIME = 0.8129

# One half of the first side-lobe offset of j0^2 from the nearest zero, in
# zeta units: the first positive root of tan(t) = t, divided by pi.
FIRST_PEAK_ZETA = 1.4302966531242027


def bessel_j0(z):
    """Zeroth spherical Bessel function ``sin(z)/z`` with a stable small-z series."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < _SERIES_CUTOFF
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(small, 1.0 - z * z / 6.0 + z**4 / 120.0, np.sin(zs) / np.where(small, 1.0, zs))
    if np.ndim(z) == 0:
        return float(ratio)
    return ratio


def super_suppression(zeta_sup) -> float | np.ndarray:
    """Suppression of one infinite super iteration: ``(sin(pi z)/(pi z))^2``.

    Exactly 1 at z = 0 and exactly 0 at every positive integer z.
    """
    z = np.asarray(zeta_sup, dtype=float)
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise ValueError("zeta must be nonnegative and finite")
    out = bessel_j0(np.pi * z) ** 2
    if np.ndim(zeta_sup) == 0:
        return float(out)
    return out


def truncated_super_suppression(zeta_sup: float, depth: int) -> float:
    """Suppression of a depth-N ladder: ``prod_{k=1..N} cos^2(pi z / 2^k)``.

    Evaluated through the ratio identity ``j0^2(pi z) / j0^2(pi z / 2^N)``,
    falling back to the explicit product when the denominator is too close to
    one of its zeros (z near a multiple of 2^N, where the ladder suppression
    genuinely returns to unity).
    """
    depth = _check_depth(depth)
    z = float(zeta_sup)
    if z < 0 or not math.isfinite(z):
        raise ValueError("zeta must be nonnegative and finite")
    if z == 0.0:
        return 1.0
    denom = bessel_j0(math.pi * z / 2.0**depth)
    # the cutoff keeps the denominator's relative rounding below ~1e-13 so the
    # ratio stays within 1e-10 of the explicit product
    if abs(denom) < 1e-3:
        return _ladder_product(z, depth)
    val = (bessel_j0(math.pi * z) / denom) ** 2
    # guard fp overshoot near the unity points
    return min(val, 1.0) if val > 1.0 else val


def _ladder_product(zeta_sup: float, depth: int) -> float:
    acc = 1.0
    for k in range(1, depth + 1):
        acc *= math.cos(math.pi * zeta_sup / 2.0**k) ** 2
    return acc


def max_valid_energy(depth: int, leading_time: float = REFERENCE_LEADING_TIME) -> float:
    """Energy ratio up to which a depth-N ladder tracks the ideal closed form.

    A finite ladder loses suppression where ``zeta_sup`` approaches a multiple
    of 2^N, so the worst-case bound of the optimized single super iteration
    only certifies energies below ``(2^N - 1.430) / leading_time``, the mirror
    image of the first side-lobe peak under the nearest unity point.
    """
    depth = _check_depth(depth)
    lt = float(leading_time)
    if not math.isfinite(lt) or lt <= 0:
        raise ValueError("leading time must be positive and finite")
    return (2.0**depth - 1.430) / lt


def _check_depth(depth: int) -> int:
    if int(depth) != depth or depth < 1:
        raise ValueError(f"depth must be a positive integer, got {depth!r}")
    return int(depth)


@dataclass(frozen=True)
class SuperIteration:
    """One super iteration: nominal base time plus ladder truncation depth.

    ``base_time`` is the nominal total (twice the leading rung); the executed
    rungs are ``base_time/2, ..., base_time/2^depth`` and sum to
    ``base_time * (1 - 2^-depth)``.
    """

    base_time: float
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        bt = float(self.base_time)
        if not math.isfinite(bt) or bt <= 0:
            raise ValueError(f"base time must be positive and finite, got {bt!r}")
        object.__setattr__(self, "base_time", bt)
        object.__setattr__(self, "depth", _check_depth(self.depth))

    @property
    def rung_times(self) -> tuple[float, ...]:
        return tuple(self.base_time / 2.0**k for k in range(1, self.depth + 1))

    @property
    def expanded_total(self) -> float:
        return self.base_time * (1.0 - 2.0 ** (-self.depth))

    def suppression(self, x: float) -> float:
        return truncated_super_suppression(x * self.base_time, self.depth)


@dataclass(frozen=True)
class SuperSchedule:
    """An ordered list of super iterations."""

    supers: tuple[SuperIteration, ...]

    def __post_init__(self):
        if len(self.supers) == 0:
            raise ValueError("super schedule must contain at least one super iteration")
        object.__setattr__(self, "supers", tuple(self.supers))

    @property
    def total(self) -> float:
        return float(sum(s.expanded_total for s in self.supers))

    @property
    def base_times(self) -> tuple[float, ...]:
        return tuple(s.base_time for s in self.supers)

    def suppression(self, x: float) -> float:
        acc = 1.0
        for s in self.supers:
            acc *= s.suppression(x)
        return acc

    def to_dict(self) -> dict:
        return {
            "supers": [{"base_time": s.base_time, "depth": s.depth} for s in self.supers],
            "total": self.total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SuperSchedule":
        supers = tuple(SuperIteration(d["base_time"], d["depth"]) for d in data["supers"])
        sched = cls(supers)
        if "total" in data and abs(float(data["total"]) - sched.total) > 1e-9 * max(1.0, sched.total):
            raise ValueError("super schedule total does not match its expansion")
        return sched

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SuperSchedule":
        return cls.from_dict(json.loads(text))


def expand(super_schedule: SuperSchedule) -> Schedule:
    """Flatten a super schedule into the plain iteration schedule it executes."""
    times = []
    for s in super_schedule.supers:
        times.extend(s.rung_times)
    return Schedule(tuple(times))


def ideal_profile(base_times, zero_limit: float = 100.0) -> SuppressionProfile:
    """Infinite-depth closed-form profile of a set of super-iteration base times.

    ``s(x) = prod_k j0^2(pi x t_k)`` with zeros at every ``m / t_k`` and the
    analytic tail certificate ``s(x) <= prod_k 1/(pi x t_k)^2``.
    """
    taus = tuple(float(t) for t in base_times)
    if len(taus) == 0:
        raise ValueError("at least one super-iteration base time is required")
    if any(not math.isfinite(t) or t <= 0 for t in taus):
        raise ValueError("base times must be positive and finite")
    tau_arr = np.asarray(taus)

    def evaluate(x):
        x_arr = np.asarray(x, dtype=float)
        args = np.pi * np.multiply.outer(x_arr, tau_arr)
        out = np.prod(bessel_j0(args) ** 2, axis=-1)
        if np.ndim(x) == 0:
            return float(out)
        return out

    zeros = set()
    for t in taus:
        m = 1
        while m / t <= zero_limit:
            zeros.add(m / t)
            m += 1
    coef = float(np.prod(1.0 / (np.pi * tau_arr) ** 2))
    return SuppressionProfile(
        evaluate=evaluate,
        zero_set=tuple(sorted(zeros)),
        tail_bound=(coef, 2.0 * len(taus)),
    )
