import math
import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sbdopt import (
    Budget,
    Problem,
    SearchSpace,
    budget_from_saving,
    clamp,
    functional_cut,
    parallel_time_saving,
    time_saving,
    timing_estimates,
)


def make_problem(k=1, lo=-10.0, hi=10.0, objective=None):
    space = SearchSpace(np.full(k, lo), np.full(k, hi))
    return Problem(space, objective or (lambda x: float(np.sum(x**2))))


class TestSearchSpace:
    def test_bounds_must_be_ordered(self):
        with pytest.raises(ValueError):
            SearchSpace(np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    def test_needs_a_dimension(self):
        with pytest.raises(ValueError):
            SearchSpace(np.array([]), np.array([]))


class TestClamp:
    def test_in_bounds_identity(self):
        space = SearchSpace(np.array([-10.0]), np.array([10.0]))
        assert clamp(space, [3.0])[0] == 3.0

    def test_projection(self):
        space = SearchSpace(np.array([-10.0]), np.array([10.0]))
        assert clamp(space, [12.0])[0] == 10.0

    def test_componentwise(self):
        space = SearchSpace(np.zeros(2), np.ones(2))
        assert np.array_equal(clamp(space, [-0.5, 0.5]), [0.0, 0.5])

    def test_dimension_mismatch(self):
        space = SearchSpace(np.zeros(2), np.ones(2))
        with pytest.raises(ValueError):
            clamp(space, [0.5])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=5))
    def test_idempotent_and_in_bounds(self, values):
        space = SearchSpace(np.full(len(values), -7.0), np.full(len(values), 3.0))
        once = clamp(space, values)
        assert space.contains(once)
        assert np.array_equal(clamp(space, once), once)


class TestEvaluationLedger:
    def test_counter_and_ledger(self):
        p = make_problem()
        p.evaluate([2.0])
        p.evaluate([3.0])
        assert p.eval_count == 2
        assert p.ledger == [((2.0,), 4.0), ((3.0,), 9.0)]

    def test_counter_is_thread_safe(self):
        p = make_problem()

        def hammer():
            for _ in range(200):
                p.evaluate([1.0])

        threads = [threading.Thread(target=hammer) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert p.eval_count == 1600
        assert len(p.ledger) == 1600

    def test_ledger_cost_lookup(self):
        p = make_problem()
        p.evaluate([2.0])
        assert p.ledger_cost([2.0]) == 4.0
        assert p.ledger_cost([5.0]) is None


class TestFunctionalCut:
    def test_endpoints_reproduce_anchor_costs_bitwise(self):
        p = make_problem(k=3, objective=lambda x: float(np.sum(np.sin(x) * x)))
        a = np.array([0.3, -2.0, 5.5])
        b = np.array([-1.1, 4.0, 0.25])
        cut = functional_cut(p, a, b, [0.0, 1.0])
        assert cut[0].cost == p.objective(a)
        assert cut[1].cost == p.objective(b)
        assert not cut[0].clamped and not cut[1].clamped

    def test_linear_objective_midpoint(self):
        p = make_problem(k=1, objective=lambda x: float(x[0]))
        cut = functional_cut(p, np.array([0.0]), np.array([1.0]), [0.5])
        assert cut[0].cost == pytest.approx(0.5)

    def test_out_of_bounds_clamped_and_flagged(self):
        p = make_problem(k=1, lo=0.0, hi=1.0, objective=lambda x: float(x[0]))
        cut = functional_cut(p, np.array([0.0]), np.array([1.0]), [-0.5, 0.5, 1.5])
        assert cut[0].clamped and cut[0].cost == 0.0
        assert not cut[1].clamped
        assert cut[2].clamped and cut[2].cost == 1.0

    def test_dimension_mismatch(self):
        p = make_problem(k=2)
        with pytest.raises(ValueError):
            functional_cut(p, np.zeros(1), np.zeros(2), [0.0])


class TestTimeSaving:
    def test_paper_budget_values(self):
        assert time_saving(10, 200, 100) == 95.0
        assert time_saving(4, 50, 40) == 80.0

    def test_zero_when_budget_equals_full_run(self):
        assert time_saving(7, 13, 7 * 13) == 0.0

    def test_negative_when_not_profitable(self):
        assert time_saving(2, 10, 30) < 0.0

    def test_zero_agents_or_iterations_rejected(self):
        with pytest.raises(ValueError):
            time_saving(0, 10, 1)
        with pytest.raises(ValueError):
            time_saving(10, 0, 1)


class TestBudgetFromSaving:
    def test_paper_run_budgets(self):
        assert budget_from_saving(10, 200, 95.0) == 100
        assert budget_from_saving(4, 50, 80.0) == 40

    def test_zero_saving_gives_full_budget(self):
        assert budget_from_saving(6, 11, 0.0) == 6 * 11

    def test_saving_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            budget_from_saving(10, 10, -1.0)
        with pytest.raises(ValueError):
            budget_from_saving(10, 10, 100.5)

    @given(st.integers(1, 40), st.integers(1, 300), st.integers(0, 100))
    def test_round_trip_loses_at_most_one_evaluation_share(self, p, i, saving):
        s = budget_from_saving(p, i, float(saving))
        achieved = time_saving(p, i, s)
        assert achieved >= saving - 100.0 / (p * i) - 1e-9
        assert 0 <= s <= p * i


class TestParallelTimeSaving:
    def test_zero_when_budget_equals_parallel_capacity(self):
        assert parallel_time_saving(10 * 20, 10, 20) == 0.0

    def test_reduces_once_processors_cover_the_training(self):
        assert parallel_time_saving(5, 10, 200) == 99.5

    def test_direct_substitution(self):
        assert parallel_time_saving(100, 10, 200) == 95.0

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            parallel_time_saving(10, 0, 5)


class TestTimingEstimates:
    def test_standard_run_cost(self):
        report = timing_estimates(Budget(10, 200, 100), eval_seconds=13.0)
        assert report.standard_seconds == 10 * 200 * 13.0
        assert report.standard_seconds / 3600.0 == pytest.approx(7.2, rel=0.01)

    def test_zero_budget_zero_training(self):
        report = timing_estimates(Budget(10, 10, 0), eval_seconds=13.0)
        assert report.surrogate_seconds == 0.0

    def test_parallel_standard_divides_by_agents(self):
        report = timing_estimates(Budget(10, 200, 100, processors=10),
                                  eval_seconds=13.0)
        assert report.parallel_standard_seconds == report.standard_seconds / 10

    def test_parallel_training_divides_by_processors(self):
        report = timing_estimates(Budget(10, 200, 100, processors=4),
                                  eval_seconds=2.0, train_seconds=8.0,
                                  test_seconds=0.5)
        assert report.parallel_surrogate_seconds == pytest.approx(
            (100 * 2.0 + 8.0) / 4 + 200 * 0.5)

    def test_negative_times_rejected(self):
        with pytest.raises(ValueError):
            timing_estimates(Budget(2, 2, 2), eval_seconds=-1.0)


class TestBudget:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Budget(0, 10, 5)
        with pytest.raises(ValueError):
            Budget(10, 10, 101)
        with pytest.raises(ValueError):
            Budget(10, 10, 5, processors=0)
