import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rodeosched.core import Schedule, schedule_suppression
from rodeosched.superiter import (
    FIRST_PEAK_ZETA,
    SuperIteration,
    SuperSchedule,
    bessel_j0,
    expand,
    ideal_profile,
    max_valid_energy,
    super_suppression,
    truncated_super_suppression,
)


def brute_force_ladder(zeta, depth):
    acc = 1.0
    for k in range(1, depth + 1):
        acc *= math.cos(math.pi * zeta / 2.0**k) ** 2
    return acc


class TestSuperSuppression:
    def test_unit_at_zero(self):
        assert super_suppression(0.0) == 1.0

    def test_zero_at_integers(self):
        for z in (1.0, 2.0, 7.0):
            assert super_suppression(z) == pytest.approx(0.0, abs=1e-30)

    def test_first_side_lobe(self):
        # the first maximum beyond the gap sits where tan(theta) = theta
        assert super_suppression(1.43029) == pytest.approx(0.04719, abs=1e-4)
        theta = math.pi * FIRST_PEAK_ZETA
        assert super_suppression(FIRST_PEAK_ZETA) == pytest.approx(
            1.0 / (1.0 + theta * theta), rel=1e-10
        )

    def test_envelope_bound(self):
        zs = np.linspace(0.05, 40.0, 4001)
        s = super_suppression(zs)
        assert np.all(s <= 1.0 / (np.pi * zs) ** 2 + 1e-15)

    def test_unit_base_worst_case_below_five_percent(self):
        # one gap period of ladder time suppresses every component above the
        # gap by better than a factor of twenty
        xs = np.linspace(1.0, 200.0, 400_001)
        assert float(np.max(super_suppression(xs))) < 0.05

    def test_small_argument_series_is_smooth(self):
        for z in (0.0, 1e-9, 1e-6, 2e-5, 1e-3):
            assert super_suppression(z) == pytest.approx(1.0, abs=1e-5)
        # the series branch agrees with the exact ratio at the crossover
        for arg in (0.3e-4, 0.99e-4):
            assert bessel_j0(arg) == pytest.approx(math.sin(arg) / arg, abs=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            super_suppression(-0.3)


class TestTruncatedSuppression:
    def test_depth_one_zero(self):
        assert truncated_super_suppression(1.0, 1) == pytest.approx(0.0, abs=1e-30)

    def test_unity_at_multiples_of_two_to_depth(self):
        for depth in (1, 3, 6):
            for m in (1, 2, 5):
                zeta = m * 2.0**depth
                assert truncated_super_suppression(zeta, depth) == pytest.approx(1.0, rel=1e-12)

    def test_matches_brute_force_product(self):
        assert truncated_super_suppression(3.7, 20) == pytest.approx(
            brute_force_ladder(3.7, 20), abs=1e-12
        )
        assert truncated_super_suppression(3.7, 20) == pytest.approx(
            super_suppression(3.7), abs=1e-9
        )

    @given(
        zeta=st.floats(min_value=0.0, max_value=1e3, allow_nan=False),
        depth=st.integers(min_value=1, max_value=40),
    )
    @settings(max_examples=300, deadline=None)
    def test_ratio_form_equals_product(self, zeta, depth):
        assert truncated_super_suppression(zeta, depth) == pytest.approx(
            brute_force_ladder(zeta, depth), abs=1e-10
        )

    def test_matches_ideal_within_validity(self):
        # deep ladders reproduce the closed form while zeta stays below 2^(N-4)
        for depth, zeta in ((10, 2.0**6), (20, 1000.0), (30, 5.5)):
            assert truncated_super_suppression(zeta, depth) == pytest.approx(
                super_suppression(zeta), abs=1e-10
            )

    def test_zero_set_is_integers_not_divisible_by_two_to_depth(self):
        depth = 3
        for z in range(1, 33):
            value = truncated_super_suppression(float(z), depth)
            if z % 2**depth == 0:
                assert value == pytest.approx(1.0, rel=1e-12)
            else:
                assert value == pytest.approx(0.0, abs=1e-28)
        # no other zeros: sample between integers
        zs = np.arange(0.5, 32.0, 1.0)
        for z in zs:
            assert truncated_super_suppression(float(z), depth) > 1e-12


class TestMaxValidEnergy:
    def test_reference_depth_fifteen(self):
        assert 40308.0 <= max_valid_energy(15) <= 40309.0

    def test_depth_one_unit_time(self):
        assert max_valid_energy(1, leading_time=1.0) == pytest.approx(0.570, abs=1e-12)

    def test_depth_ten(self):
        assert max_valid_energy(10) == pytest.approx((1024.0 - 1.430) / 0.8129, rel=1e-12)
        assert max_valid_energy(10) == pytest.approx(1257.9, abs=0.1)

    def test_rejects_bad_depth(self):
        with pytest.raises(ValueError):
            max_valid_energy(0)


class TestSuperScheduleExpansion:
    def test_simple_ladder(self):
        sched = SuperSchedule((SuperIteration(1.0, 3),))
        flat = expand(sched)
        assert flat.times == (0.5, 0.25, 0.125)
        assert flat.total == pytest.approx(0.875, rel=1e-15)
        assert sched.total == pytest.approx(0.875, rel=1e-15)

    def test_deep_ladder_matches_closed_form(self):
        sched = SuperSchedule((SuperIteration(0.8129, 30),))
        flat = expand(sched)
        x = 1.5
        expected = super_suppression(x * 0.8129)
        assert expected == pytest.approx(0.02755191637144021, rel=1e-10)
        assert schedule_suppression(flat, x) == pytest.approx(expected, abs=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SuperSchedule(())

    def test_expansion_consistent_with_truncated_product(self):
        sched = SuperSchedule((SuperIteration(0.9361, 12), SuperIteration(0.6545, 12)))
        flat = expand(sched)
        for x in (1.0, 1.37, 2.9, 8.4):
            product = math.prod(
                truncated_super_suppression(x * s.base_time, s.depth) for s in sched.supers
            )
            assert schedule_suppression(flat, x) == pytest.approx(product, rel=1e-12, abs=1e-280)
            assert sched.suppression(x) == pytest.approx(product, rel=1e-12, abs=1e-280)

    def test_json_round_trip(self):
        sched = SuperSchedule((SuperIteration(0.9361, 32), SuperIteration(0.6545, 32)))
        again = SuperSchedule.from_json(sched.to_json())
        assert again == sched

    def test_rung_times_sum(self):
        sup = SuperIteration(0.8, 16)
        assert sum(sup.rung_times) == pytest.approx(sup.expanded_total, rel=1e-14)
        assert sup.expanded_total == pytest.approx(0.8 * (1 - 2.0**-16), rel=1e-15)


class TestIdealProfile:
    def test_single_base_matches_super_suppression(self):
        profile = ideal_profile([1.0])
        for x in (0.0, 0.4, 1.43029, 7.7):
            assert profile.evaluate(x) == pytest.approx(super_suppression(x), rel=1e-13)

    def test_zero_set(self):
        profile = ideal_profile([1.0, 0.5], zero_limit=10.0)
        assert 1.0 in profile.zero_set
        assert 2.0 in profile.zero_set
        values = profile.evaluate(np.array(profile.zero_set))
        assert np.all(values <= 1e-14)

    def test_tail_certificate_dominates(self):
        profile = ideal_profile([1.0, 0.7])
        xs = np.linspace(0.5, 60.0, 3000)
        values = profile.evaluate(xs)
        caps = np.array([profile.tail_cap(x) for x in xs])
        assert np.all(values <= caps + 1e-15)
