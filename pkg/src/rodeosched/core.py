"""Dimensionless suppression bookkeeping for rodeo-style ground-state projection.

Conventions used throughout the package: the minimum excitation gap is the
energy unit and its phase period is the time unit, so a component at energy
ratio ``x`` evolved for a time ratio ``tau`` accumulates ``zeta = x * tau``
full phase periods.  One successful interferometric iteration then suppresses
that component's weight (relative to the ground state) by ``cos^2(pi * zeta)``.

All functions here are pure; the container types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "NumericError",
    "DegenerateBranchError",
    "Schedule",
    "DiscreteSpectrum",
    "SuppressionProfile",
    "single_iteration_suppression",
    "schedule_suppression",
    "ground_state_probability",
    "overall_excited_suppression",
    "success_probability",
    "expected_total_time",
]

# Below this running-product value the evaluation demotes to log space.
LOG_SPACE_CUTOFF = 1e-300

WEIGHT_TOL = 1e-12


class NumericError(RuntimeError):
    """A numerical routine failed to converge or left its validity domain."""


class DegenerateBranchError(NumericError):
    """A post-selected branch has zero norm, so conditioning on it is undefined."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Schedule:
    """An ordered list of iteration times, in units of the gap period.

    ``times`` must be nonempty with every entry positive and finite; an empty
    schedule is rejected rather than treated as the identity so that caller
    bugs surface early.
    """

    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) == 0:
            raise ValueError("schedule must contain at least one iteration time")
        for t in times:
            if not math.isfinite(t) or t <= 0.0:
                raise ValueError(f"iteration times must be positive and finite, got {t!r}")
        object.__setattr__(self, "times", times)

    @property
    def total(self) -> float:
        return float(sum(self.times))

    def __len__(self) -> int:
        return len(self.times)

    def concat(self, other: "Schedule") -> "Schedule":
        return Schedule(self.times + other.times)

    def to_dict(self) -> dict:
        return {"times": list(self.times), "total": self.total}

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        sched = cls(tuple(data["times"]))
        if "total" in data and abs(float(data["total"]) - sched.total) > 1e-9 * max(1.0, sched.total):
            raise ValueError("schedule total does not match the sum of its times")
        return sched

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Ground-state weight plus discrete excited components ``(x, weight)``.

    Weights must sum to one (within 1e-12) and every excited energy ratio must
    lie at or above the gap, ``x >= 1``.  Continuous spectral densities are
    supported only through caller-side discretization into this form.
    """

    ground_weight: float
    excited: tuple[tuple[float, float], ...]

    def __post_init__(self):
        g = float(self.ground_weight)
        if not (0.0 <= g <= 1.0):
            raise ValueError(f"ground weight must lie in [0, 1], got {g!r}")
        comps = tuple((float(x), float(w)) for x, w in self.excited)
        for x, w in comps:
            if not math.isfinite(x) or x < 1.0:
                raise ValueError(f"excited energy ratios must satisfy x >= 1, got {x!r}")
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"weights must be nonnegative, got {w!r}")
        total = g + sum(w for _, w in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_TOL}, got {total!r}")
        object.__setattr__(self, "ground_weight", g)
        object.__setattr__(self, "excited", comps)

    @property
    def excited_weight(self) -> float:
        return float(sum(w for _, w in self.excited))

    def to_dict(self) -> dict:
        return {
            "ground_weight": self.ground_weight,
            "excited": [{"x": x, "w": w} for x, w in self.excited],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteSpectrum":
        excited = tuple((c["x"], c["w"]) for c in data.get("excited", []))
        return cls(data["ground_weight"], excited)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteSpectrum":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """CSV form: a ``# ground_weight=`` comment line, a header, one row per component."""
        buf = io.StringIO()
        buf.write(f"# ground_weight={self.ground_weight!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["energy_ratio", "weight"])
        for x, w in self.excited:
            writer.writerow([repr(x), repr(w)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscreteSpectrum":
        ground = None
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("ground_weight"):
                    ground = float(body.split("=", 1)[1])
                continue
            rows.append(line)
        if ground is None:
            raise ValueError("spectrum CSV is missing the '# ground_weight=' comment line")
        reader = csv.reader(rows)
        header = next(reader)
        if [h.strip() for h in header] != ["energy_ratio", "weight"]:
            raise ValueError(f"unexpected spectrum CSV header: {header!r}")
        excited = tuple((float(x), float(w)) for x, w in reader)
        return cls(ground, excited)


@dataclass(frozen=True)
class SuppressionProfile:
    """A suppression factor as a function of energy ratio, with its known zeros.

    ``evaluate`` maps energy ratios (scalar or ndarray) to values in [0, 1].
    ``zero_set`` lists energy ratios where the profile vanishes exactly; for
    profiles with infinitely many zeros the stored list is truncated to the
    range the builder deemed relevant.  ``tail_bound`` optionally gives
    ``(coef, power)`` certifying ``s(x) <= coef / x**power`` for all x > 0,
    which lets consumers cap searches over unbounded domains.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    zero_set: tuple[float, ...] = ()
    tail_bound: tuple[float, float] | None = None

    def __call__(self, x):
        return self.evaluate(x)

    def tail_cap(self, x: float) -> float:
        """Evaluate the analytic tail certificate at ``x``; inf when absent."""
        if self.tail_bound is None:
            return math.inf
        coef, power = self.tail_bound
        return coef / float(x) ** power

    @classmethod
    def from_schedule(cls, schedule: Schedule, zero_limit: float = 100.0) -> "SuppressionProfile":
        """Profile of a concrete iteration schedule, ``prod_j cos^2(pi x t_j)``.

        Zeros at ``x = (k + 1/2) / t_j`` are enumerated up to ``zero_limit``.
        The cosine product does not decay, so no tail certificate is attached.
        """
        times = np.asarray(schedule.times)

        def evaluate(x):
            return _cos_product(times, x)

        zeros = set()
        for t in schedule.times:
            k = 0
            while True:
                z = (k + 0.5) / t
                if z > zero_limit:
                    break
                zeros.add(z)
                k += 1
        return cls(evaluate=evaluate, zero_set=tuple(sorted(zeros)))


def _cos_product(times: np.ndarray, x) -> np.ndarray | float:
    x_arr = np.asarray(x, dtype=float)
    phases = np.pi * np.multiply.outer(x_arr, times)
    out = np.prod(np.cos(phases) ** 2, axis=-1)
    if np.ndim(x) == 0:
        return float(out)
    return out


def single_iteration_suppression(x: float, tau: float) -> float:
    """Suppression of one successful iteration: ``cos^2(pi * x * tau)``.

    The ground state (x = 0) is never suppressed, so the result is exactly 1
    there for any time.
    """
    x = _require_finite("energy ratio", x)
    tau = _require_finite("time ratio", tau)
    if x < 0.0:
        raise ValueError(f"energy ratio must be nonnegative, got {x!r}")
    if tau <= 0.0:
        raise ValueError(f"time ratio must be positive, got {tau!r}")
    if x == 0.0:
        return 1.0
    return math.cos(math.pi * x * tau) ** 2

def schedule_suppression(schedule: Schedule, x: float, log_space: bool | None = None) -> float:
    """Net suppression of a component at energy ratio ``x`` over a full schedule.

    The product over per-iteration factors is accumulated directly while it
    stays above ``LOG_SPACE_CUTOFF`` and in log space below that, so schedules
    with hundreds of iterations (where the product reaches the 4^-n regime)
    do not underflow.  ``log_space`` forces one mode, mainly for testing:
    both agree to better than 1e-10 relative wherever the direct product is
    representable.
    """
    if not isinstance(schedule, Schedule):
        raise ValueError("schedule_suppression expects a Schedule instance")
    x = _require_finite("energy ratio", x)
    if x < 0.0:
        raise ValueError(f"energy ratio must be nonnegative, got {x!r}")
    if x == 0.0:
        return 1.0

    factors = [math.cos(math.pi * x * t) ** 2 for t in schedule.times]
    if any(f == 0.0 for f in factors):
        return 0.0
    if log_space is None:
        product = 1.0
        for f in factors:
            product *= f
            if product < LOG_SPACE_CUTOFF:
                log_space = True
                break
        else:
            return product
    if log_space:
        return math.exp(math.fsum(math.log(f) for f in factors))
    product = 1.0
    for f in factors:
        product *= f
    return product


def ground_state_probability(p_g_initial: float, overall_suppression: float) -> float:
    """Ground-state probability after consecutive successful iterations.

    Given the initial ground weight ``p`` and the spectrum-averaged excited
    suppression ``S``, the post-selected ground probability is
    ``p / (p + (1 - p) * S)``.  A zero initial weight makes projection
    impossible and is rejected.
    """
    p = _require_finite("initial ground probability", p_g_initial)
    s = _require_finite("overall suppression", overall_suppression)
    if not (0.0 < p <= 1.0):
        raise ValueError(f"initial ground probability must lie in (0, 1], got {p!r}")
    if s < 0.0:
        raise ValueError(f"suppression must be nonnegative, got {s!r}")
    return p / (p + (1.0 - p) * s)


def overall_excited_suppression(spectrum: DiscreteSpectrum, profile: SuppressionProfile) -> float:
    """Spectral-weight-averaged suppression over the excited components only."""
    if not spectrum.excited:
        raise ValueError("spectrum has no excited components")
    total = spectrum.excited_weight
    if total <= 0.0:
        raise ValueError("total excited weight is zero")
    xs = np.array([x for x, _ in spectrum.excited])
    ws = np.array([w for _, w in spectrum.excited])
    return float(np.dot(ws, np.asarray(profile.evaluate(xs), dtype=float)) / total)


def success_probability(spectrum: DiscreteSpectrum, schedule: Schedule) -> float:
    """Probability that every iteration of the schedule measures the ancilla up.

    Equals the ground weight plus the suppressed excited weights; it is
    therefore bounded below by the ground weight and approaches it as the
    schedule suppresses everything else.
    """
    acc = spectrum.ground_weight
    for x, w in spectrum.excited:
        if w > 0.0:
            acc += w * schedule_suppression(schedule, x)
    return min(float(acc), 1.0)


def expected_total_time(schedule: Schedule, ground_weight: float) -> float:
    """Expected net time to get one fully successful run, restarts included.

    Each failed iteration forces a restart from a fresh initial state, so the
    expected cost is the schedule total divided by the all-success
    probability; with the excited contribution suppressed to a negligible
    level that probability is just the ground weight.
    """
    g = _require_finite("ground weight", ground_weight)
    if not (0.0 < g <= 1.0):
        raise ValueError(f"ground weight must lie in (0, 1], got {g!r}")
    return schedule.total / g
