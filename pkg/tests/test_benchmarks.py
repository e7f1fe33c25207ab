import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbdopt.benchmarks import (
    TmaConfig,
    ackley,
    benchmark_problem,
    chebyshev_durations,
    collapse_symmetric,
    expand_symmetric,
    levy,
    schwefel,
    tma_cost,
    tma_directivity_trace,
    tma_instantaneous_directivity,
    tma_problem,
)


def brute_force_on_count(t, t_on, durations):
    """Element-by-element on-state evaluation, independent of the library path."""
    count = 0
    for start, tau in zip(t_on, durations):
        if tau >= 1.0:
            count += 1
        elif tau <= 0.0:
            continue
        else:
            end = start + tau
            if end > 1.0:
                count += 1 if (t >= start or t < end - 1.0) else 0
            else:
                count += 1 if (start <= t < end) else 0
    return count


class TestBenchmarkFunctions:
    def test_levy_minimum_at_ones(self):
        assert levy(np.ones(6)) == pytest.approx(0.0, abs=1e-12)
        assert levy(np.ones(1)) == pytest.approx(0.0, abs=1e-12)

    def test_schwefel_near_zero_at_reported_optimum(self):
        for k in (1, 4, 6):
            assert schwefel(np.full(k, 420.9687)) <= 1e-3 * k

    def test_schwefel_at_origin(self):
        assert schwefel(np.zeros(4)) == pytest.approx(418.9829 * 4)

    def test_ackley_minimum_at_origin(self):
        assert ackley(np.zeros(6)) == pytest.approx(0.0, abs=1e-12)

    def test_optima_minimal_over_random_probes(self):
        rng = np.random.default_rng(0)
        probes = 10**5
        cases = [
            (levy, np.ones(3), -10.0, 10.0),
            (schwefel, np.full(3, 420.9687), -500.0, 500.0),
            (ackley, np.zeros(3), -5.0, 5.0),
        ]
        for fn, optimum, lo, hi in cases:
            x = rng.uniform(lo, hi, size=(probes, 3))
            assert fn(optimum) <= np.min(fn(x)) + 1e-12

    def test_problem_factory_uses_canonical_domains(self):
        p = benchmark_problem("schwefel", 2)
        assert np.all(p.space.lower == -500.0) and np.all(p.space.upper == 500.0)
        with pytest.raises(ValueError):
            benchmark_problem("rosenbrock", 2)


class TestChebyshevDurations:
    def test_two_elements_degenerate_to_uniform(self):
        assert np.array_equal(chebyshev_durations(2, -30.0), [1.0, 1.0])

    def test_symmetric_and_max_normalized(self):
        tau = chebyshev_durations(16, -30.0)
        assert tau.max() == 1.0
        assert np.array_equal(tau, tau[::-1])
        assert np.all(tau > 0.0)

    def test_sidelobes_sit_at_the_design_level(self):
        # Oracle: evaluate the array factor numerically on a dense pattern
        # grid and inspect every local maximum outside the main lobe.
        tau = chebyshev_durations(16, -30.0)
        u = np.linspace(-1.0, 1.0, 2048)
        n = np.arange(16)
        af = np.abs(np.exp(1j * 2.0 * np.pi * 0.5 * np.outer(u, n)) @ tau)
        af_db = 20.0 * np.log10(af / af.max())
        interior = (af_db[1:-1] >= af_db[:-2]) & (af_db[1:-1] >= af_db[2:])
        peaks = af_db[1:-1][interior]
        sidelobes = peaks[peaks < -1.0]
        assert sidelobes.size >= 10
        assert np.all(np.abs(sidelobes - (-30.0)) <= 0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            chebyshev_durations(1, -30.0)
        with pytest.raises(ValueError):
            chebyshev_durations(8, 30.0)


class TestSymmetry:
    def test_expand_then_collapse_round_trips(self):
        omega = np.array([0.1, 0.4, 0.7, 0.2])
        full = expand_symmetric(omega)
        assert full.shape == (8,)
        assert np.array_equal(full[:4], omega)
        assert np.array_equal(collapse_symmetric(full), omega)

    def test_collapse_rejects_asymmetric_vectors(self):
        with pytest.raises(ValueError):
            collapse_symmetric(np.array([0.1, 0.2, 0.3, 0.4]))


class TestInstantaneousDirectivity:
    def test_all_on_counts_every_element(self):
        config = TmaConfig(n_elements=16, durations=np.ones(16))
        for t in (0.0, 0.3, 0.99):
            assert tma_instantaneous_directivity(config, np.zeros(16), t) == 16.0

    def test_single_element_on(self):
        durations = np.zeros(16)
        durations[3] = 0.5
        config = TmaConfig(n_elements=16, durations=durations)
        assert tma_instantaneous_directivity(config, np.zeros(16), 0.25) == 1.0
        assert tma_instantaneous_directivity(config, np.zeros(16), 0.75) == 0.0

    def test_matches_brute_force_indicator(self):
        rng = np.random.default_rng(5)
        durations = rng.random(8)
        config = TmaConfig(n_elements=8, durations=durations)
        t_on = rng.random(8)
        for t in rng.random(50):
            expected = brute_force_on_count(float(t), t_on, durations)
            assert tma_instantaneous_directivity(config, t_on, float(t)) == expected

    def test_wrapping_pulses(self):
        durations = np.full(2, 0.5)
        config = TmaConfig(n_elements=2, durations=durations)
        t_on = np.array([0.8, 0.8])
        assert tma_instantaneous_directivity(config, t_on, 0.9) == 2.0
        assert tma_instantaneous_directivity(config, t_on, 0.1) == 2.0
        assert tma_instantaneous_directivity(config, t_on, 0.5) == 0.0

    def test_input_validation(self):
        config = TmaConfig(n_elements=2, durations=np.ones(2))
        with pytest.raises(ValueError):
            tma_instantaneous_directivity(config, np.array([0.0, 1.5]), 0.5)
        with pytest.raises(ValueError):
            tma_instantaneous_directivity(config, np.zeros(2), 1.0)


class TestTmaCost:
    def test_always_on_aperture_has_zero_ripple(self):
        config = TmaConfig(n_elements=16, durations=np.ones(16))
        omega = np.random.default_rng(2).random(8)
        assert tma_cost(config, omega) == 0.0

    def test_never_on_aperture_rejected(self):
        config = TmaConfig(n_elements=4, durations=np.zeros(4))
        with pytest.raises(ValueError):
            tma_cost(config, np.zeros(2))

    def test_matches_dense_riemann_oracle(self):
        # Switch instants and durations are snapped to the oracle grid so the
        # dense midpoint sum is exact; the comparison then certifies the
        # breakpoint quadrature to full precision.
        rng = np.random.default_rng(9)
        cells = 10**5
        t_mid = (np.arange(cells) + 0.5) / cells
        for _ in range(3):
            durations = np.round(rng.random(8) * cells) / cells
            omega = np.round(rng.random(4) * (cells - 1)) / cells
            config = TmaConfig(n_elements=8, durations=durations)
            t_on = expand_symmetric(omega)
            counts = np.zeros(cells)
            for n in range(8):
                start, tau = t_on[n], durations[n]
                end = start + tau
                if tau >= 1.0:
                    on = np.ones(cells, dtype=bool)
                elif tau <= 0.0:
                    on = np.zeros(cells, dtype=bool)
                elif end > 1.0:
                    on = (t_mid >= start) | (t_mid < end - 1.0)
                else:
                    on = (t_mid >= start) & (t_mid < end)
                counts += on
            mean = counts.mean()
            if mean == 0.0:
                continue
            oracle = np.abs(mean - counts).mean() / mean
            assert tma_cost(config, omega) == pytest.approx(oracle, rel=1e-6)

    def test_unsnapped_instants_agree_loosely_with_plain_riemann(self):
        rng = np.random.default_rng(10)
        tau = chebyshev_durations(16, -30.0)
        config = TmaConfig(n_elements=16, durations=tau)
        omega = rng.random(8) * 0.999
        t_on = expand_symmetric(omega)
        grid = (np.arange(10**5) + 0.5) / 10**5
        counts = np.zeros(10**5)
        for n in range(16):
            start, end = t_on[n], t_on[n] + tau[n]
            if tau[n] >= 1.0:
                counts += 1.0
            elif end > 1.0:
                counts += (grid >= start) | (grid < end - 1.0)
            else:
                counts += (grid >= start) & (grid < end)
        mean = counts.mean()
        oracle = np.abs(mean - counts).mean() / mean
        assert tma_cost(config, omega) == pytest.approx(oracle, rel=1e-3)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25)
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        config = TmaConfig(n_elements=8, durations=0.2 + 0.8 * rng.random(8))
        assert tma_cost(config, rng.random(4) * 0.999) >= 0.0

    @given(st.integers(0, 10_000), st.floats(0.0, 0.999))
    @settings(max_examples=25)
    def test_invariant_under_global_time_shift(self, seed, shift):
        rng = np.random.default_rng(seed)
        tau = chebyshev_durations(16, -30.0)
        config = TmaConfig(n_elements=16, durations=tau)
        omega = rng.random(8) * 0.999
        shifted = (omega + shift) % 1.0
        assert tma_cost(config, shifted) == pytest.approx(
            tma_cost(config, omega), abs=1e-9)

    def test_directivity_trace_shape(self):
        config = TmaConfig(n_elements=4, durations=np.full(4, 0.5))
        t, d = tma_directivity_trace(config, np.zeros(4), n_points=256)
        assert t.shape == d.shape == (256,)
        assert d[0] == 4.0

    def test_problem_factory_space_stays_below_one(self):
        config = TmaConfig(n_elements=8, durations=np.full(8, 0.5))
        problem = tma_problem(config)
        assert problem.space.dims == 4
        assert np.all(problem.space.upper < 1.0)
        cost = problem.evaluate(problem.space.upper)
        assert np.isfinite(cost)


class TestTmaConfigValidation:
    def test_rejects_odd_or_tiny_arrays(self):
        with pytest.raises(ValueError):
            TmaConfig(n_elements=3, durations=np.ones(3))

    def test_rejects_out_of_range_durations(self):
        with pytest.raises(ValueError):
            TmaConfig(n_elements=2, durations=np.array([0.5, 1.5]))

    def test_rejects_coarse_time_grid(self):
        with pytest.raises(ValueError):
            TmaConfig(n_elements=2, durations=np.ones(2), time_grid=100)
