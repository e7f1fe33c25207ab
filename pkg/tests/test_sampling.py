import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbdopt import SearchSpace, TrainingSet, full_factorial, lhs, osf_expand
from sbdopt.benchmarks import ackley, benchmark_problem


def box(k, lo=0.0, hi=1.0):
    return SearchSpace(np.full(k, lo), np.full(k, hi))


class TestLhs:
    def test_single_point_inside_the_box(self):
        plan = lhs(box(3, -2.0, 4.0), 1, seed=5)
        assert plan.points.shape == (1, 3)
        assert np.all(plan.points >= -2.0) and np.all(plan.points <= 4.0)

    def test_one_point_per_unit_stratum(self):
        plan = lhs(SearchSpace(np.array([0.0]), np.array([10.0])), 10, seed=2)
        strata = np.floor(plan.points.ravel()).astype(int)
        assert sorted(strata) == list(range(10))

    def test_deterministic_for_fixed_seed(self):
        space = box(4, -1.0, 1.0)
        a = lhs(space, 17, seed=42)
        b = lhs(space, 17, seed=42)
        assert np.array_equal(a.points, b.points)

    @given(st.integers(1, 40), st.integers(1, 4), st.integers(0, 999))
    @settings(max_examples=40)
    def test_stratification_every_dimension(self, n, k, seed):
        space = box(k, -3.0, 5.0)
        plan = lhs(space, n, seed=seed)
        unit = (plan.points - space.lower) / (space.upper - space.lower)
        strata = np.floor(unit * n).astype(int)
        for dim in range(k):
            assert sorted(strata[:, dim]) == list(range(n))

    def test_rejects_nonpositive_count(self):
        with pytest.raises(ValueError):
            lhs(box(1), 0)

    def test_csv_has_input_columns_only(self):
        plan = lhs(box(2), 3, seed=0)
        text = plan.to_csv_text()
        assert text.splitlines()[0] == "x1,x2"
        assert len(text.splitlines()) == 4


class TestFullFactorial:
    def test_grid_size_blows_up_exponentially(self):
        plan = full_factorial(box(5), 10)
        assert len(plan) == 10**5

    def test_two_levels_are_the_bounds(self):
        plan = full_factorial(SearchSpace(np.array([-1.0]), np.array([3.0])), 2)
        assert np.array_equal(np.sort(plan.points.ravel()), [-1.0, 3.0])

    def test_three_by_three_grid(self):
        plan = full_factorial(box(2), 3)
        assert len(plan) == 9
        expected = {0.0, 0.5, 1.0}
        assert set(np.unique(plan.points)) == expected

    def test_cap_rejected_with_growth_note(self):
        with pytest.raises(ValueError, match="exponentially"):
            full_factorial(box(8), 10)

    def test_q_below_two_rejected(self):
        with pytest.raises(ValueError):
            full_factorial(box(1), 1)


class TestOsfExpand:
    def test_target_equal_to_start_is_a_no_op(self):
        problem = benchmark_problem("ackley", 1)
        d0 = TrainingSet([[0.0], [1.0]], [1.0, 2.0])
        out = osf_expand(problem, d0, 2, c=10, phi_th=6.0, seed=0)
        assert len(out) == 2
        assert problem.eval_count == 0
        assert np.array_equal(out.inputs, d0.inputs)

    def test_ledger_exactness_and_prefix_preservation(self):
        problem = benchmark_problem("ackley", 1)
        plan = lhs(problem.space, 5, seed=3)
        d0 = TrainingSet(plan.points, [problem.evaluate(p) for p in plan.points])
        before = problem.eval_count
        out = osf_expand(problem, d0, 17, c=50, phi_th=6.0, seed=3)
        assert len(out) == 17
        assert problem.eval_count - before == 12
        assert np.array_equal(out.inputs[:5], d0.inputs)
        assert np.array_equal(out.targets[:5], d0.targets)

    def test_infinite_threshold_never_rejects(self):
        problem = benchmark_problem("ackley", 1)
        plan = lhs(problem.space, 4, seed=9)
        d0 = TrainingSet(plan.points, [problem.evaluate(p) for p in plan.points])
        trace = []
        osf_expand(problem, d0, 10, c=25, phi_th=np.inf, seed=9, trace=trace)
        assert all(t["feasible_candidates"] == 25 for t in trace)
        assert not any(t["fallback"] for t in trace)

    def test_single_candidate_is_always_chosen(self):
        problem = benchmark_problem("ackley", 1)
        plan = lhs(problem.space, 3, seed=1)
        d0 = TrainingSet(plan.points, [problem.evaluate(p) for p in plan.points])
        trace = []
        out = osf_expand(problem, d0, 6, c=1, phi_th=np.inf, seed=1, trace=trace)
        assert len(out) == 6
        assert all(t["feasible_candidates"] == 1 for t in trace)

    def test_shrinking_target_rejected(self):
        problem = benchmark_problem("ackley", 1)
        d0 = TrainingSet([[0.0], [1.0], [2.0]], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            osf_expand(problem, d0, 2, c=5, phi_th=6.0, seed=0)

    def test_sublevel_exploration_on_ackley(self):
        # Derived by running this configuration: every addition is predicted
        # inside the threshold at selection time, and most land where the true
        # cost is inside too (seed 1 gives 33/45; the 20-seed median is 0.69
        # against an LHS baseline of 0.24).
        problem = benchmark_problem("ackley", 1)
        plan = lhs(problem.space, 5,
                   seed=np.random.default_rng(np.random.SeedSequence([1, 0])))
        d0 = TrainingSet(plan.points, [problem.evaluate(p) for p in plan.points])
        trace = []
        out = osf_expand(problem, d0, 50, c=200, phi_th=6.0, seed=1, trace=trace)
        assert len(out) == 50
        assert all(t["predicted"] <= 6.0 for t in trace if not t["fallback"])
        assert not any(t["fallback"] for t in trace)
        inside = np.mean([float(ackley(t["point"])) < 6.0 for t in trace])
        assert inside >= 0.7
