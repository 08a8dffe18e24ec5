import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from timebin_cavity import (
    CavityConfig,
    DarkCountModel,
    MismatchModel,
    accepted_event_probability,
    compensating_reflectivity,
    cutoff_tradeoff_scan,
    effective_round_trip,
    observed_error_with_dark_counts,
    theta_for_outcome,
    total_error,
    total_error_closed_form,
    total_error_with_mismatch,
)


def symmetric_config(d, r_sq, n_prime):
    return CavityConfig(
        dim=d, r1_sq=r_sq, r2_sq=r_sq, theta=theta_for_outcome(d, 0), n_prime=n_prime
    )


class TestModels:
    @pytest.mark.parametrize("eta", [-0.1, 1.0001])
    def test_mismatch_bounds(self, eta):
        with pytest.raises(ValueError, match="overlap"):
            MismatchModel(eta)

    @pytest.mark.parametrize("p_dc", [-1e-9, 1.0])
    def test_dark_count_bounds(self, p_dc):
        with pytest.raises(ValueError, match="dark-count"):
            DarkCountModel(p_dc)


class TestEffectiveRoundTrip:
    def test_perfect_overlap_is_identity(self):
        assert effective_round_trip(0.9, MismatchModel(1.0)) == 0.9

    def test_total_mismatch_kills_interference(self):
        r_eff = effective_round_trip(0.9, MismatchModel(0.0))
        assert r_eff == 0.0
        assert total_error_closed_form(r_eff, 8) == pytest.approx(7.0 / 8.0)

    def test_small_mismatch_increases_error(self):
        r_eff = effective_round_trip(0.9, MismatchModel(0.99))
        assert r_eff == pytest.approx(0.891)
        assert total_error_closed_form(r_eff, 16) > total_error_closed_form(0.9, 16)

    def test_domain_check(self):
        with pytest.raises(ValueError, match=r"\[0, 1\)"):
            effective_round_trip(1.0, MismatchModel(0.9))


class TestCompensatingReflectivity:
    def test_perfect_overlap(self):
        assert compensating_reflectivity(0.9, MismatchModel(1.0)) == 0.9

    def test_inverse_of_effective_round_trip(self):
        assert compensating_reflectivity(0.891, MismatchModel(0.99)) == pytest.approx(0.9)

    def test_unreachable_target(self):
        with pytest.raises(ValueError, match="unreachable"):
            compensating_reflectivity(0.99, MismatchModel(0.98))

    @given(
        r=st.floats(0.0, 0.95, allow_nan=False),
        eta=st.floats(0.2, 1.0, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_round_trip_identity(self, r, eta):
        mismatch = MismatchModel(eta)
        r_eff = effective_round_trip(r, mismatch)
        if r_eff >= eta:
            return
        assert abs(compensating_reflectivity(r_eff, mismatch) - r) <= 1e-14


class TestMismatchWiring:
    def test_error_evaluates_at_reduced_factor(self):
        mismatch = MismatchModel(0.97)
        for r, d in [(0.5, 2), (0.9, 16), (0.99, 64)]:
            assert total_error_with_mismatch(r, d, mismatch) == pytest.approx(
                total_error_closed_form(r * 0.97, d), abs=1e-12
            )


class TestObservedErrorWithDarkCounts:
    def test_clean_detectors_reduce_to_total_error(self):
        cfg = symmetric_config(4, 0.7, n_prime=12)
        observed = observed_error_with_dark_counts(cfg, DarkCountModel(0.0))
        assert observed == pytest.approx(total_error(cfg), abs=1e-15)

    def test_frozen_value(self):
        cfg = symmetric_config(16, 0.99, n_prime=16 + 49)
        observed = observed_error_with_dark_counts(cfg, DarkCountModel(1e-5))
        assert observed == pytest.approx(0.14596605621654632, abs=1e-12)
        assert observed == pytest.approx(
            reference.observed_error(16, 0.99, 16 + 49, 1e-5), abs=1e-13
        )

    def test_dark_dominated_outcomes_are_uniform(self):
        # reflectivities close enough to one that almost no signal survives
        cfg = symmetric_config(4, 1.0 - 1e-6, n_prime=20)
        observed = observed_error_with_dark_counts(cfg, DarkCountModel(0.01))
        assert observed == pytest.approx(3.0 / 4.0, abs=1e-4)

    def test_monotone_in_dark_rate(self):
        cfg = symmetric_config(8, 0.9, n_prime=24)
        values = [
            observed_error_with_dark_counts(cfg, DarkCountModel(p))
            for p in (0.0, 1e-6, 1e-4, 1e-3, 1e-2)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_monotone_in_window_at_fixed_high_signal(self):
        values = [
            observed_error_with_dark_counts(
                symmetric_config(8, 0.95, n_prime=n), DarkCountModel(1e-4)
            )
            for n in (8, 16, 40, 80)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestCutoffTradeoffScan:
    def test_clean_detectors_give_constant_error(self):
        cfg = symmetric_config(8, 0.9, n_prime=48)
        points = cutoff_tradeoff_scan(cfg, DarkCountModel(0.0), [8, 16, 32, 48])
        errors = [p.observed_error for p in points]
        assert max(errors) - min(errors) < 1e-12

    def test_shorter_window_cuts_dark_errors(self):
        cfg = symmetric_config(16, 0.99, n_prime=66)
        points = cutoff_tradeoff_scan(cfg, DarkCountModel(1e-5), [21, 36, 66])
        errors = [p.observed_error for p in points]
        assert errors[0] < errors[1] < errors[2]

    def test_accepted_probability_grows_with_window(self):
        cfg = symmetric_config(8, 0.8, n_prime=48)
        for p_dc in (0.0, 1e-4):
            points = cutoff_tradeoff_scan(cfg, DarkCountModel(p_dc), [8, 12, 24, 48])
            accepted = [p.accepted_probability for p in points]
            assert all(b > a for a, b in zip(accepted, accepted[1:]))

    def test_window_violation(self):
        cfg = symmetric_config(8, 0.8, n_prime=16)
        with pytest.raises(ValueError, match="window"):
            cutoff_tradeoff_scan(cfg, DarkCountModel(0.0), [7])

    def test_accepted_probability_definition(self):
        cfg = symmetric_config(4, 0.6, n_prime=10)
        dark = DarkCountModel(2e-4)
        (point,) = cutoff_tradeoff_scan(cfg, dark, [10])
        expected = accepted_event_probability(cfg, dark)
        assert point.accepted_probability == pytest.approx(expected, abs=1e-15)
        clean = accepted_event_probability(cfg, DarkCountModel(0.0))
        assert point.accepted_probability == pytest.approx(
            clean + (10 - 4 + 1) * 2e-4, abs=1e-15
        )
