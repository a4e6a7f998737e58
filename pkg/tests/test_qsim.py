import math

import numpy as np
import pytest

from rodeosched.core import (
    DegenerateBranchError,
    DiscreteSpectrum,
    Schedule,
    schedule_suppression,
    success_probability,
)
from rodeosched.qsim import (
    PhysicalState,
    apply_iteration,
    run_trajectory,
    suppression_via_simulation,
    verify_reduced_density,
)
from rodeosched.superiter import SuperIteration, SuperSchedule, expand, truncated_super_suppression


def random_state(rng, dim, gapped=True):
    low = 1.0 if gapped else 0.1
    energies = (0.0, *np.sort(rng.uniform(low, 9.0, dim - 1)))
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PhysicalState.normalized(energies, amps)


def spectrum_of(state):
    return DiscreteSpectrum(
        ground_weight=state.ground_probability,
        excited=tuple(
            (x, float(abs(a) ** 2)) for x, a in zip(state.energies[1:], state.amplitudes[1:])
        ),
    )


def projector_exponential_iteration(state, tau):
    """Independent construction of the iteration unitary: exponential of the
    x-basis up-projector tensored with the diagonal Hamiltonian, applied to
    the ancilla-up composite vector without any Hadamard decomposition."""
    dim = state.dim
    vec = np.concatenate([state.amplitudes, np.zeros(dim, dtype=complex)])
    out = np.zeros_like(vec)
    for c in range(dim):
        theta = 2.0 * math.pi * state.energies[c] * tau
        # exp(-i P theta) = 1 + P (e^{-i theta} - 1) for the projector
        # P = [[1, 1], [1, 1]] / 2 acting on the (up_c, down_c) pair
        w = 0.5 * (np.exp(-1j * theta) - 1.0)
        up, down = vec[c], vec[dim + c]
        out[c] = up + w * (up + down)
        out[dim + c] = down + w * (up + down)
    return out


class TestApplyIteration:
    def test_pure_ground_state_untouched(self):
        state = PhysicalState((0.0,), np.array([1.0 + 0j]))
        outcome = apply_iteration(state, 1.234)
        assert outcome.success_probability == pytest.approx(1.0, abs=1e-15)
        assert abs(np.vdot(outcome.post_success.amplitudes, state.amplitudes)) == pytest.approx(
            1.0, abs=1e-15
        )
        assert outcome.post_failure is None

    def test_half_period_excited_never_succeeds(self):
        state = PhysicalState((0.0, 0.5), np.array([0.0, 1.0 + 0j]))
        outcome = apply_iteration(state, 1.0)
        assert outcome.success_probability == pytest.approx(0.0, abs=1e-30)

    def test_success_probability_and_amplitudes(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            state = random_state(rng, 8)
            tau = float(rng.uniform(0.05, 2.5))
            outcome = apply_iteration(state, tau)

            weights = np.array(
                [abs(a) ** 2 * math.cos(math.pi * x * tau) ** 2
                 for x, a in zip(state.energies, state.amplitudes)]
            )
            assert outcome.success_probability == pytest.approx(float(weights.sum()), abs=1e-14)

            # per-component weighting of the surviving branch, then renormalize
            expected = np.array(
                [0.5 * (1.0 + np.exp(-2j * math.pi * x * tau)) * a
                 for x, a in zip(state.energies, state.amplitudes)]
            )
            expected /= np.linalg.norm(expected)
            overlap = abs(np.vdot(expected, outcome.post_success.amplitudes))
            assert overlap == pytest.approx(1.0, abs=1e-13)
            # componentwise up to the global phase
            phase = np.vdot(outcome.post_success.amplitudes, expected)
            phase /= abs(phase)
            assert np.max(
                np.abs(expected - phase * outcome.post_success.amplitudes)
            ) <= 1e-12

    def test_success_increases_ground_probability(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            state = random_state(rng, 6)
            tau = float(rng.uniform(0.05, 2.5))
            outcome = apply_iteration(state, tau)
            assert outcome.post_success.ground_probability >= state.ground_probability - 1e-14

    def test_unitarity_of_composite_evolution(self):
        from rodeosched.qsim import _evolve_composite

        rng = np.random.default_rng(9)
        for _ in range(25):
            state = random_state(rng, 8)
            composite = _evolve_composite(state, float(rng.uniform(0.01, 3.0)))
            assert abs(np.linalg.norm(composite.amplitudes) - 1.0) <= 1e-13

    def test_matches_projector_exponential_form(self):
        rng = np.random.default_rng(31)
        from rodeosched.qsim import _evolve_composite

        for _ in range(40):
            state = random_state(rng, 7, gapped=False)
            tau = float(rng.uniform(0.05, 2.5))
            direct = projector_exponential_iteration(state, tau)
            sandwich = _evolve_composite(state, tau).amplitudes
            assert np.max(np.abs(direct - sandwich)) <= 1e-12


class TestReducedDensity:
    def test_decomposition_identity(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            state = random_state(rng, int(rng.integers(2, 9)), gapped=False)
            check = verify_reduced_density(state, float(rng.uniform(0.05, 2.0)))
            assert check.decomposition_residual <= 1e-12
            assert check.ground_probability_drift <= 1e-12

    def test_ground_only_state(self):
        state = PhysicalState((0.0,), np.array([1.0 + 0j]))
        check = verify_reduced_density(state, 0.81)
        assert check.decomposition_residual <= 1e-14
        assert check.ground_probability_drift <= 1e-14

    def test_specific_four_dim_state(self):
        rng = np.random.default_rng(4)
        state = random_state(rng, 4)
        check = verify_reduced_density(state, 0.81)
        assert check.ground_probability_drift <= 1e-12

    def test_dimension_cap(self):
        rng = np.random.default_rng(1)
        state = random_state(rng, 128)
        with pytest.raises(ValueError):
            verify_reduced_density(state, 0.5)


class TestRunTrajectory:
    def test_ground_state_always_succeeds(self):
        state = PhysicalState((0.0,), np.array([1.0 + 0j]))
        sched = Schedule((0.3, 1.7, 0.9))
        result = run_trajectory(state, sched, stream=(0, 0))
        assert result.success
        assert result.record == (True, True, True)

    def test_deterministic_given_stream(self):
        rng = np.random.default_rng(2)
        state = random_state(rng, 4)
        sched = Schedule((0.4, 0.8, 1.1))
        a = run_trajectory(state, sched, stream=(5, 9))
        b = run_trajectory(state, sched, stream=(5, 9))
        assert a.success == b.success and a.record == b.record
        assert np.array_equal(a.state.amplitudes, b.state.amplitudes)

    def test_empirical_success_rate_matches_closed_form(self):
        rng = np.random.default_rng(23)
        state = random_state(rng, 4)
        sched = Schedule((0.61, 1.13, 0.37))
        closed = success_probability(spectrum_of(state), sched)
        trials = 100_000
        successes = sum(
            run_trajectory(state, sched, stream=(77, k)).success for k in range(trials)
        )
        rate = successes / trials
        stderr = math.sqrt(closed * (1.0 - closed) / trials)
        assert abs(rate - closed) <= 3.0 * stderr

    def test_zero_ground_weight_component_on_zero(self):
        # single excited component parked on a suppression zero: never succeeds
        state = PhysicalState((0.0, 1.5), np.array([0.0, 1.0 + 0j]))
        for k in range(50):
            result = run_trajectory(state, Schedule((1.0,)), stream=(3, k))
            assert not result.success
            assert result.record == (False,)


class TestSuppressionViaSimulation:
    def test_zero_at_constructed_zero(self):
        rng = np.random.default_rng(8)
        state = random_state(rng, 4)
        x1 = state.energies[1]
        sched = Schedule((0.5 / x1,))
        assert suppression_via_simulation(state, sched, 1) == pytest.approx(0.0, abs=1e-25)

    def test_third_period(self):
        state = PhysicalState.normalized((0.0, 1.0 / 3.0), np.array([1.0, 1.0]))
        assert suppression_via_simulation(state, Schedule((1.0,)), 1) == pytest.approx(
            0.25, abs=1e-13
        )

    def test_matches_schedule_suppression(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            state = random_state(rng, 8, gapped=False)
            sched = Schedule(tuple(rng.uniform(0.1, 2.0, int(rng.integers(1, 7)))))
            for c in (1, 4, 7):
                simulated = suppression_via_simulation(state, sched, c)
                closed = schedule_suppression(sched, state.energies[c])
                assert simulated == pytest.approx(closed, rel=1e-10, abs=1e-12)

    def test_matches_truncated_super_ladder(self):
        rng = np.random.default_rng(19)
        state = random_state(rng, 8, gapped=False)
        energies = list(state.energies)
        component = 3
        energies[component] = 1.7
        state = PhysicalState.normalized(sorted(energies), state.amplitudes)
        component = state.energies.index(1.7)

        supers = SuperSchedule((SuperIteration(0.9361, 20), SuperIteration(0.6545, 20)))
        flat = expand(supers)
        expected = math.prod(
            truncated_super_suppression(1.7 * s.base_time, s.depth) for s in supers.supers
        )
        assert suppression_via_simulation(state, flat, component) == pytest.approx(
            expected, abs=1e-9
        )

    def test_requires_ground_amplitude(self):
        state = PhysicalState((0.0, 1.5), np.array([0.0, 1.0 + 0j]))
        with pytest.raises(ValueError):
            suppression_via_simulation(state, Schedule((0.7,)), 1)

    def test_degenerate_all_success_branch(self):
        # ground weight at the rounding floor plus an excited component parked
        # on a zero: the all-success branch carries no numerically meaningful
        # weight and post-selection on it must be refused
        amps = np.array([1e-15, math.sqrt(1.0 - 1e-30)], dtype=complex)
        state = PhysicalState((0.0, 1.5), amps)
        with pytest.raises(DegenerateBranchError):
            suppression_via_simulation(state, Schedule((1.0,)), 1)

    def test_degenerate_branch(self):
        # the only populated component sits on a suppression zero: the success
        # branch weight collapses to rounding noise and is reported absent
        state = PhysicalState((0.0, 1.5), np.array([0.0, 1.0 + 0j]))
        outcome = apply_iteration(state, 1.0)
        assert outcome.success_probability == pytest.approx(0.0, abs=1e-30)
        assert outcome.post_success is None
        assert outcome.post_failure is not None


class TestPhysicalStateType:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            PhysicalState((0.0, 1.0), np.array([1.0, 1.0], dtype=complex))

    def test_ground_energy_must_be_zero(self):
        with pytest.raises(ValueError):
            PhysicalState((0.5, 1.0), np.array([1.0, 0.0], dtype=complex))

    def test_sorted_energies_enforced(self):
        with pytest.raises(ValueError):
            PhysicalState((0.0, 2.0, 1.0), np.array([1.0, 0.0, 0.0], dtype=complex))

    def test_json_round_trip(self):
        rng = np.random.default_rng(3)
        state = random_state(rng, 5)
        again = PhysicalState.from_json(state.to_json())
        assert again.energies == state.energies
        assert np.allclose(again.amplitudes, state.amplitudes, rtol=0, atol=0)
