"""Exact statevector oracle for single ancilla-controlled projection iterations.

One iteration acts on the physical register joined to one ancilla qubit:
Hadamard on the ancilla, evolution of the physical system conditioned on the
ancilla being up, Hadamard again, then a z-basis ancilla measurement.  The
Hamiltonian is diagonal in the working basis (energies enter as ratios to the
gap), so the controlled evolution is exact phase multiplication: a component
at energy ratio x evolved for time ratio tau acquires exp(-i 2 pi x tau) on
the ancilla-up branch.  Measuring the ancilla up keeps, per component, the
amplitude weight (1 + exp(-i 2 pi x tau))/2, whose squared magnitude is the
cos^2 suppression law the closed-form modules assume; this module exists so
those closed forms can be validated against direct circuit arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.random import Generator, Philox

from .core import DegenerateBranchError, Schedule

__all__ = [
    "PhysicalState",
    "CompositeState",
    "IterationOutcome",
    "DensityCheck",
    "TrajectoryResult",
    "apply_iteration",
    "verify_reduced_density",
    "run_trajectory",
    "suppression_via_simulation",
]

NORM_TOL = 1e-12
FAILURE_BRANCH_CUTOFF = 1e-14
# branch weights at or below the squared rounding scale of a unit vector are
# numerically indistinguishable from an exact zero
DEGENERATE_BRANCH_CUTOFF = 1e-28
DENSITY_DIM_CAP = 64
STATEVECTOR_DIM_CAP = 2**14


@dataclass(frozen=True)
class PhysicalState:
    """Pure state over an energy eigenbasis; the first entry is the ground state.

    ``energies`` are energy ratios sorted ascending with ``energies[0] == 0``;
    ``amplitudes`` is a unit-norm complex vector of matching length.
    """

    energies: tuple[float, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        energies = tuple(float(e) for e in self.energies)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or len(energies) != amps.size:
            raise ValueError("energies and amplitudes must be matching 1-d sequences")
        if amps.size > STATEVECTOR_DIM_CAP:
            raise ValueError(f"dimension {amps.size} exceeds the statevector cap")
        if energies[0] != 0.0:
            raise ValueError("the first basis state must be the ground state at energy ratio 0")
        if any(b < a for a, b in zip(energies, energies[1:])):
            raise ValueError("energies must be sorted ascending")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def ground_probability(self) -> float:
        return float(abs(self.amplitudes[0]) ** 2)

    @classmethod
    def normalized(cls, energies, amplitudes) -> "PhysicalState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(tuple(energies), amps / norm)

    def to_dict(self) -> dict:
        return {
            "energies": list(self.energies),
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicalState":
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(tuple(data["energies"]), amps)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PhysicalState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CompositeState:
    """Ancilla-joined register: first block ancilla up, second block ancilla down."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size % 2 != 0:
            raise ValueError("composite amplitudes must be a 1-d vector of even length")
        if abs(float(np.linalg.norm(amps)) - 1.0) > NORM_TOL:
            raise ValueError("composite state must be unit-norm")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size // 2

    @property
    def up(self) -> np.ndarray:
        return self.amplitudes[: self.dim]

    @property
    def down(self) -> np.ndarray:
        return self.amplitudes[self.dim :]


class IterationOutcome(NamedTuple):
    success_probability: float
    post_success: PhysicalState | None
    post_failure: PhysicalState | None


class DensityCheck(NamedTuple):
    decomposition_residual: float
    ground_probability_drift: float


class TrajectoryResult(NamedTuple):
    success: bool
    state: PhysicalState
    record: tuple[bool, ...]


def _evolve_composite(state: PhysicalState, tau: float) -> CompositeState:
    """Hadamard / controlled-phase / Hadamard on the ancilla-joined register."""
    tau = float(tau)
    if not math.isfinite(tau) or tau <= 0:
        raise ValueError(f"time ratio must be positive and finite, got {tau!r}")
    dim = state.dim
    up = state.amplitudes.astype(complex)
    down = np.zeros(dim, dtype=complex)

    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    up, down = (up + down) * inv_sqrt2, (up - down) * inv_sqrt2
    phases = np.exp(-2j * np.pi * np.asarray(state.energies) * tau)
    up = up * phases
    up, down = (up + down) * inv_sqrt2, (up - down) * inv_sqrt2
    return CompositeState(np.concatenate([up, down]))


def apply_iteration(state: PhysicalState, tau: float) -> IterationOutcome:
    """One full iteration, returning both measurement branches.

    The success probability is the squared norm of the ancilla-up block; the
    post-measurement states are the renormalized blocks.  A branch is omitted
    (``None``) when its weight is numerically indistinguishable from zero:
    the failure branch below 1e-14 (a pure ground state never populates it),
    the success branch below the squared rounding scale of a unit vector.
    """
    composite = _evolve_composite(state, tau)
    up, down = composite.up, composite.down
    p_success = float(np.vdot(up, up).real)
    p_failure = float(np.vdot(down, down).real)

    post_success = None
    if p_success > DEGENERATE_BRANCH_CUTOFF:
        post_success = PhysicalState(state.energies, up / math.sqrt(p_success))
    post_failure = None
    if p_failure >= FAILURE_BRANCH_CUTOFF:
        post_failure = PhysicalState(state.energies, down / math.sqrt(p_failure))
    return IterationOutcome(p_success, post_success, post_failure)


def verify_reduced_density(state: PhysicalState, tau: float) -> DensityCheck:
    """Check the post-iteration reduced density matrix against its branch mixture.

    Builds the full density matrix of the evolved composite state, traces out
    the ancilla, and compares (Frobenius norm) against
    ``P_s rho_s + P_u rho_u`` assembled from the measurement branches.  Also
    reports how far the reduced ground-state diagonal entry drifted from the
    pre-iteration ground probability, which the un-post-selected iteration
    must conserve.
    """
    if state.dim > DENSITY_DIM_CAP:
        raise ValueError(f"density-matrix check is capped at dimension {DENSITY_DIM_CAP}")
    composite = _evolve_composite(state, tau)
    vec = composite.amplitudes
    dim = state.dim
    rho_total = np.outer(vec, vec.conj())
    reduced = rho_total[:dim, :dim] + rho_total[dim:, dim:]

    outcome = apply_iteration(state, tau)
    mixture = np.zeros_like(reduced)
    if outcome.post_success is not None:
        mixture = mixture + outcome.success_probability * np.outer(
            outcome.post_success.amplitudes, outcome.post_success.amplitudes.conj()
        )
    if outcome.post_failure is not None:
        p_failure = 1.0 - outcome.success_probability
        mixture = mixture + p_failure * np.outer(
            outcome.post_failure.amplitudes, outcome.post_failure.amplitudes.conj()
        )
    residual = float(np.linalg.norm(reduced - mixture))
    drift = float(abs(reduced[0, 0].real - state.ground_probability))
    return DensityCheck(decomposition_residual=residual, ground_probability_drift=drift)


def _stream_generator(stream) -> Generator:
    if isinstance(stream, tuple):
        seed, sub = int(stream[0]), int(stream[1])
    else:
        seed, sub = int(stream), 0
    if seed < 0 or sub < 0:
        raise ValueError("stream ids must be nonnegative")
    return Generator(Philox(key=np.array([seed, sub], dtype=np.uint64)))


def run_trajectory(state: PhysicalState, schedule: Schedule, stream) -> TrajectoryResult:
    """Run a schedule with sampled ancilla measurements, stopping at the first failure.

    Deterministic for a given stream id; the record holds one boolean per
    executed iteration.  Unlike :func:`apply_iteration` this never rejects a
    vanishing branch: a branch of (near-)zero weight is simply never the
    sampled measurement outcome.
    """
    rng = _stream_generator(stream)
    current = state
    record: list[bool] = []
    for tau in schedule.times:
        composite = _evolve_composite(current, tau)
        p_success = float(np.vdot(composite.up, composite.up).real)
        success = bool(rng.random() < p_success)
        record.append(success)
        branch = composite.up if success else composite.down
        weight = float(np.vdot(branch, branch).real)
        current = PhysicalState(current.energies, branch / math.sqrt(weight))
        if not success:
            return TrajectoryResult(False, current, tuple(record))
    return TrajectoryResult(True, current, tuple(record))


def suppression_via_simulation(state: PhysicalState, schedule: Schedule, component: int) -> float:
    """Suppression of one excited component measured off the simulated circuit.

    Post-selects success through the whole schedule and reads off the change
    of the component's weight relative to the ground state,
    ``(|a_c'| / |a_g'|)^2 / (|a_c| / |a_g|)^2``.  Requires a nonzero ground
    amplitude and a nonzero all-success branch.
    """
    component = int(component)
    if component <= 0 or component >= state.dim:
        raise ValueError(f"component index must name an excited basis state, got {component!r}")
    a_g0 = abs(state.amplitudes[0])
    a_c0 = abs(state.amplitudes[component])
    if a_g0 == 0.0:
        raise ValueError("initial ground amplitude must be nonzero")
    if a_c0 == 0.0:
        raise ValueError(f"component {component} has zero initial amplitude")

    current = state
    for tau in schedule.times:
        survivor = apply_iteration(current, tau).post_success
        if survivor is None:
            raise DegenerateBranchError(
                "all-success branch vanished; the schedule fully suppresses the state"
            )
        current = survivor
    a_g1 = abs(current.amplitudes[0])
    a_c1 = abs(current.amplitudes[component])
    return float((a_c1 / a_g1) ** 2 / (a_c0 / a_g0) ** 2)
