import math

import numpy as np
import pytest

from proofpfd.analytic import pfd_average, pfd_average_no_partial
from proofpfd.model import TestPolicy, TestSchedule, ValidationError, periodic_schedule, validate_system
from proofpfd.optimize import evaluate_candidate, optimize_policy, optimize_schedule

from conftest import CASE_E, CASE_TAU, HOURS_PER_MONTH


@pytest.fixture(scope="module")
def case_result():
    return optimize_schedule(validate_system(2, 6, 6.1e-5), CASE_E, 4, CASE_TAU)


class TestEvaluateCandidate:
    def test_periodic(self, case_system, basic_policy):
        assert evaluate_candidate(case_system, CASE_E, basic_policy.schedule) == pytest.approx(
            2.06e-3, rel=0.01)

    def test_known_optimum(self, case_system, optimized_policy):
        assert evaluate_candidate(case_system, CASE_E, optimized_policy.schedule) == pytest.approx(
            1.87e-3, rel=0.01)

    def test_single_test(self, case_system):
        assert evaluate_candidate(case_system, CASE_E, TestSchedule([CASE_TAU])) == \
            pfd_average_no_partial(case_system, CASE_TAU)

    def test_agrees_with_pfd_average(self, case_system, optimized_policy):
        assert evaluate_candidate(case_system, CASE_E, optimized_policy.schedule) == \
            pfd_average(case_system, optimized_policy).pfd_avg


class TestCaseStudy:
    def test_instants(self, case_result):
        months = [t / HOURS_PER_MONTH for t in case_result.schedule.test_times]
        assert months[:3] == pytest.approx([4.8, 7.8, 10.1], abs=0.1)
        assert months[3] == 12.0

    def test_value_and_improvement(self, case_result):
        assert case_result.pfd_avg_star == pytest.approx(1.87e-3, rel=0.01)
        assert case_result.reference_pfd_avg == pytest.approx(2.06e-3, rel=0.01)
        assert 0.085 <= case_result.improvement_fraction <= 0.105

    def test_intervals_shrink(self, case_result):
        gaps = case_result.intervals
        assert gaps[0] > gaps[1] > gaps[2] > gaps[3]

    def test_never_worse_than_reference(self, case_result):
        assert case_result.pfd_avg_star <= case_result.reference_pfd_avg + 1e-12
        assert not case_result.flat_objective
        assert case_result.starts == 1 + 2 ** 3

    def test_first_order_stationarity(self, case_system, case_result):
        times = np.array(case_result.schedule.test_times)
        best = case_result.pfd_avg_star
        for i in range(3):
            for delta in (-0.01 * CASE_TAU, 0.01 * CASE_TAU):
                trial = times.copy()
                trial[i] += delta
                if not (trial[i - 1] if i else 0.0) < trial[i] < trial[i + 1]:
                    continue
                value = evaluate_candidate(case_system, CASE_E, TestSchedule(trial))
                assert value >= best * (1 - 1e-9)

    def test_u_max_fields(self, case_result, case_system):
        from proofpfd.analytic import max_unavailability
        u, _ = max_unavailability(case_system, TestPolicy(case_result.schedule, CASE_E))
        assert case_result.u_max_star == u
        assert case_result.u_max_star < case_result.u_max_reference


def test_symmetric_two_tests_1oo1():
    # objective lam (t1^2 + (tau - t1)^2) / (2 tau) to first order; exact form is symmetric too
    system = validate_system(1, 1, 1e-5)
    result = optimize_schedule(system, 1.0, 2, 1000.0)
    assert result.schedule.test_times[0] == pytest.approx(500.0, rel=1e-6)


def test_flat_objective_without_effective_partial_tests(case_system):
    reference = TestSchedule([1000.0, 1500.0, 7000.0, CASE_TAU])
    result = optimize_schedule(case_system, 0.0, 4, CASE_TAU, reference)
    assert result.flat_objective
    assert result.schedule == reference
    rng = np.random.default_rng(5)
    values = []
    for _ in range(100):
        inner = np.sort(rng.uniform(1.0, CASE_TAU - 1.0, 3))
        values.append(evaluate_candidate(case_system, 0.0, TestSchedule(list(inner) + [CASE_TAU])))
    assert max(values) - min(values) <= 1e-12 * max(values)


def test_single_test_returns_reference(case_system):
    result = optimize_schedule(case_system, CASE_E, 1, CASE_TAU)
    assert result.schedule.test_times == (CASE_TAU,)
    assert result.improvement_fraction == 0.0


def test_incompatible_reference(case_system):
    with pytest.raises(ValidationError):
        optimize_schedule(case_system, CASE_E, 4, CASE_TAU, periodic_schedule(3, CASE_TAU))
    with pytest.raises(ValidationError):
        optimize_schedule(case_system, CASE_E, 4, CASE_TAU, periodic_schedule(4, 8000.0))


def test_reference_is_kept_when_already_optimal(case_system, case_result):
    again = optimize_schedule(case_system, CASE_E, 4, CASE_TAU, case_result.schedule)
    assert again.pfd_avg_star <= case_result.pfd_avg_star + 1e-12
    assert again.improvement_fraction >= 0.0


def test_minimum_gap_repair():
    # a near-zero optimal gap would otherwise collapse two instants
    system = validate_system(1, 3, 1e-4)
    result = optimize_schedule(system, 0.9, 5, 5000.0)
    assert min(result.intervals) >= 1e-6 * 5000.0 * (1 - 1e-9)


def test_optimize_policy_wrapper(case_system, basic_policy, case_result):
    assert optimize_policy(case_system, basic_policy).schedule == case_result.schedule


@pytest.mark.parametrize("workers", [2, 4])
def test_deterministic_across_threads(case_system, case_result, workers):
    result = optimize_schedule(case_system, CASE_E, 4, CASE_TAU, workers=workers)
    assert result.schedule.test_times == case_result.schedule.test_times
    assert result.pfd_avg_star == case_result.pfd_avg_star
