import math

import numpy as np
import pytest

from qmachine.analytic import epsilon_probabilities
from qmachine.geometry import Direction, ElasticSpec, Outcome, SphereState, axis_coordinate
from qmachine.sampler import (
    FrequencyTable,
    RandomStream,
    hidden_outcome,
    measure,
    run_recorded,
    run_trials,
    sample_break_point,
)

Z = Direction(0.0, 0.0, 1.0)


def direction_at(t):
    return Direction(math.sqrt(max(0.0, 1.0 - t * t)), 0.0, t)


class TestRandomStream:
    def test_reproducible(self):
        a = RandomStream(123).random(100)
        b = RandomStream(123).random(100)
        assert np.array_equal(a, b)

    def test_substreams_reproducible_and_distinct(self):
        a = RandomStream(123).substream(4).random(100)
        b = RandomStream(123).substream(4).random(100)
        c = RandomStream(123).substream(5).random(100)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_nested_substreams(self):
        a = RandomStream(9).substream(1).substream(2).random(10)
        b = RandomStream(9, spawn_key=(1, 2)).random(10)
        assert np.array_equal(a, b)

    def test_large_seed(self):
        RandomStream(2**64 - 1).random()

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            RandomStream(-1)

    def test_uniformity(self):
        # 20-bin chi-square on 1e6 doubles; df = 19, 43.8 is the 99.9% point
        draws = RandomStream(55).random(1_000_000)
        counts, _ = np.histogram(draws, bins=20, range=(0.0, 1.0))
        expected = len(draws) / 20
        stat = ((counts - expected) ** 2 / expected).sum()
        assert stat < 43.8


class TestSampleBreakPoint:
    def test_rigid_band_is_deterministic(self):
        rng = RandomStream(1)
        band = ElasticSpec(0.0, 0.3)
        assert all(sample_break_point(band, rng) == 0.3 for _ in range(10))

    def test_support_bounds(self):
        rng = RandomStream(2)
        band = ElasticSpec(0.25, 0.5)
        draws = rng.uniform(band.break_lower, band.break_upper, 100_000)
        assert draws.min() >= 0.25 and draws.max() <= 0.75

    def test_uniform_band_moments(self):
        rng = RandomStream(3)
        band = ElasticSpec(1.0, 0.0)
        draws = np.array([sample_break_point(band, rng) for _ in range(200_000)])
        assert abs(draws.mean()) <= 0.005
        assert draws.min() < -0.9999 and draws.max() > 0.9999


class TestHiddenOutcome:
    def test_break_below_pulls_up(self):
        v = direction_at(0.5)
        outcome, post = hidden_outcome(v, Z, 0.2, RandomStream(4))
        assert outcome is Outcome.O1
        assert post.same_point(SphereState(Z))

    def test_break_above_pulls_down(self):
        v = direction_at(0.5)
        outcome, post = hidden_outcome(v, Z, 0.8, RandomStream(4))
        assert outcome is Outcome.O2
        assert post.same_point(SphereState(-Z))

    def test_particle_at_top(self):
        for lam in (-1.0, -0.5, 0.0, 0.999):
            outcome, _ = hidden_outcome(Z, Z, lam, RandomStream(4))
            assert outcome is Outcome.O1

    def test_tie_uses_fair_coin(self):
        v = Direction(1.0, 0.0, 0.0)  # axis coordinate exactly 0
        outcomes = {
            hidden_outcome(v, Z, 0.0, RandomStream(6).substream(k))[0] for k in range(64)
        }
        assert outcomes == {Outcome.O1, Outcome.O2}

    def test_post_state_matches_outcome(self):
        rng = RandomStream(7)
        v = direction_at(0.1)
        for _ in range(100):
            outcome, post, _ = measure(v, Z, ElasticSpec(1.0, 0.0), rng)
            expected = SphereState(Z) if outcome is Outcome.O1 else SphereState(-Z)
            assert post.same_point(expected)

    def test_rejects_out_of_band_break_point(self):
        with pytest.raises(ValueError):
            hidden_outcome(Z, Z, 1.5, RandomStream(8))


class TestFrequencyTable:
    def test_counts_sum(self):
        table = FrequencyTable(3, 7)
        assert table.total == 10
        assert table.counts == {Outcome.O1: 3, Outcome.O2: 7}
        assert table.frequency(Outcome.O1) == 0.3

    def test_merge(self):
        assert FrequencyTable(1, 2) + FrequencyTable(3, 4) == FrequencyTable(4, 6)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            FrequencyTable(-1, 2)
        with pytest.raises(ValueError):
            FrequencyTable(0, 0)


class TestRunTrials:
    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            run_trials(Z, Z, ElasticSpec(1.0, 0.0), 0, 1)

    def test_worker_count_does_not_change_counts(self):
        v = direction_at(0.3)
        band = ElasticSpec(0.7, 0.1)
        serial = run_trials(v, Z, band, 300_000, 99, workers=1)
        threaded = run_trials(v, Z, band, 300_000, 99, workers=8)
        assert serial == threaded

    def test_quantum_band_60_degrees(self):
        v = Direction.from_spherical(math.pi / 3)
        table = run_trials(v, Z, ElasticSpec(1.0, 0.0), 1_000_000, 17)
        assert abs(table.frequency(Outcome.O1) - 0.75) <= 0.002

    def test_quantum_band_orthogonal(self):
        v = direction_at(0.0)
        table = run_trials(v, Z, ElasticSpec(1.0, 0.0), 1_000_000, 18)
        assert abs(table.frequency(Outcome.O1) - 0.5) <= 0.002

    def test_middle_branch_hand_value(self):
        v = direction_at(0.45)
        table = run_trials(v, Z, ElasticSpec(0.5, 0.2), 1_000_000, 19)
        assert abs(table.frequency(Outcome.O1) - 0.75) <= 0.002

    def test_deterministic_regime_above(self):
        v = direction_at(0.8)
        table = run_trials(v, Z, ElasticSpec(0.5, 0.2), 10_000, 20)
        assert table.frequency(Outcome.O1) == 1.0

    def test_rigid_band_below_snap_point(self):
        v = direction_at(-0.1)
        table = run_trials(v, Z, ElasticSpec(0.0, 0.0), 10_000, 21)
        assert table.frequency(Outcome.O2) == 1.0

    def test_oracle_agreement_grid(self):
        # |MC - analytic| <= 4 sqrt(p1 p2 / n) across (theta, eps, d)
        n = 100_000
        root = RandomStream(22)
        index = 0
        for t in (-0.9, -0.4, 0.0, 0.35, 0.8):
            v = direction_at(t)
            for band in (
                ElasticSpec(1.0, 0.0),
                ElasticSpec(0.6, 0.2),
                ElasticSpec(0.3, -0.4),
                ElasticSpec(0.0, 0.0),
            ):
                p1 = epsilon_probabilities(v, Z, band).p1
                freq = run_trials(v, Z, band, n, root.substream(index)).frequency(Outcome.O1)
                index += 1
                bound = 4.0 * math.sqrt(p1 * (1.0 - p1) / n)
                assert abs(freq - p1) <= bound, (t, band)


class TestRunRecorded:
    def test_bit_identical_reruns(self):
        v = direction_at(0.2)
        band = ElasticSpec(0.8, 0.1)
        a = run_recorded(v, Z, band, 5_000, 31)
        b = run_recorded(v, Z, band, 5_000, 31)
        assert a == b

    def test_matches_run_trials_counts(self):
        v = direction_at(0.2)
        band = ElasticSpec(0.8, 0.1)
        records = run_recorded(v, Z, band, 70_000, 32)
        table = run_trials(v, Z, band, 70_000, 32)
        assert sum(r.outcome is Outcome.O1 for r in records) == table.n_o1

    def test_indices_and_break_points_in_band(self):
        v = direction_at(0.2)
        band = ElasticSpec(0.4, -0.2)
        records = run_recorded(v, Z, band, 3_000, 33)
        assert [r.index for r in records] == list(range(3_000))
        assert all(band.break_lower <= r.break_point <= band.break_upper for r in records)

    def test_conditional_decomposition(self):
        # within any snap-point bin fully on one side of t, the outcome is
        # the deterministic threshold rule
        v = direction_at(0.3)
        t = axis_coordinate(v, Z)
        records = run_recorded(v, Z, ElasticSpec(1.0, 0.0), 50_000, 34)
        for r in records:
            if r.break_point < t:
                assert r.outcome is Outcome.O1
            elif r.break_point > t:
                assert r.outcome is Outcome.O2

    def test_repeatability_of_post_states(self):
        # a post-measurement state at +/-u is in a deterministic regime of
        # every valid band, so remeasuring reproduces the outcome surely
        rng = RandomStream(35)
        for band in (ElasticSpec(1.0, 0.0), ElasticSpec(0.5, 0.3), ElasticSpec(0.0, 0.0)):
            outcome, post, _ = measure(direction_at(0.6), Z, band, rng)
            for again in (ElasticSpec(1.0, 0.0), ElasticSpec(0.4, -0.1), ElasticSpec(0.0, 0.0)):
                table = run_trials(post.position, Z, again, 2_000, 36)
                assert table.frequency(outcome) == 1.0
