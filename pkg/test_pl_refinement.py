"""
Tests for coverage construction and the set-cover solvers
"""

import itertools

import numpy as np
import pytest

from src.flowlaw.core.errors import ConfigError, Infeasible, TooLarge
from src.flowlaw.core.measures import ModelFreeMeasure
from src.flowlaw.core.pl_learning import PLFamily
from src.flowlaw.core.pl_refinement import (
    CoverageProblem,
    RefinementParams,
    build_coverage,
    coefficient_of_variation,
    exact_set_cover,
    greedy_set_cover,
    heuristic_refine,
    refine_family,
)


def column(covered, m=12):
    col = np.zeros(m, dtype=bool)
    col[list(covered)] = True
    return col


def free(*probs):
    return ModelFreeMeasure(probs=np.array(probs, dtype=float), support_count=10)


def random_problem(rng):
    m, n = int(rng.integers(1, 13)), int(rng.integers(1, 16))
    a = rng.random((m, n)) < 0.3
    for i in np.flatnonzero(~a.any(axis=1)):
        a[i, rng.integers(n)] = True
    return CoverageProblem.from_matrix(a, c_v=rng.random(n) * 2, lam=0.5)


def brute_force_cost(problem, gamma):
    """Minimum cost by enumerating subsets in order of size"""
    best = np.inf
    for r in range(1, problem.n_pls + 1):
        for subset in itertools.combinations(range(problem.n_pls), r):
            if problem.a[:, list(subset)].any(axis=1).all():
                best = min(best, r + gamma * problem.c_v[list(subset)].sum())
    return best


def harmonic(m):
    return sum(1.0 / k for k in range(1, m + 1))


# --- coefficient of variation ---

def test_cv_of_regular_coverage_is_zero():
    assert coefficient_of_variation(column({0, 2, 4, 6})) == 0.0


def test_cv_of_irregular_coverage():
    assert coefficient_of_variation(column({0, 1, 9})) == pytest.approx(1.0999, abs=1e-4)
    assert coefficient_of_variation(column({0, 1, 9})) == pytest.approx(np.std([1, 8], ddof=1) / 4.5)


@pytest.mark.parametrize('covered', [set(), {5}, {3, 7}])
def test_cv_needs_two_gaps(covered):
    assert coefficient_of_variation(column(covered)) == 0.0


# --- coverage ---

def test_window_covered_by_its_own_measure():
    m = free(0.3, 0.7)
    problem = build_coverage([m], PLFamily('free', (m,)), lam=0.1)
    assert problem.a.tolist() == [[True]]
    assert problem.d[0, 0] == 0.0


def test_coverage_thresholding():
    family = PLFamily('free', (free(0.9, 0.1), free(0.1, 0.9)))
    problem = build_coverage([free(1.0, 0.0), free(0.0, 1.0)], family, lam=0.5)
    assert problem.a.tolist() == [[True, False], [False, True]]
    assert problem.d[0, 0] == pytest.approx(np.log(1 / 0.9), abs=1e-9)


def test_coverage_needs_positive_lambda():
    m = free(1.0)
    with pytest.raises(ConfigError):
        build_coverage([m], PLFamily('free', (m,)), lam=0.0)


# --- greedy ---

def test_greedy_takes_dominant_column():
    sel = greedy_set_cover(CoverageProblem.from_matrix([[1, 1], [1, 0]], c_v=[0, 0]), gamma=1.0)
    assert sel.chosen.tolist() == [True, False]
    assert sel.primary_cost == 1


def test_greedy_forced_columns():
    sel = greedy_set_cover(CoverageProblem.from_matrix([[1, 0], [0, 1]], c_v=[0, 0]), gamma=1.0)
    assert sel.indices == [0, 1]


def test_greedy_prefers_regular_pl_when_gamma_is_large():
    problem = CoverageProblem.from_matrix([[1, 1], [1, 1]], c_v=[2.0, 0.0])
    assert greedy_set_cover(problem, gamma=1.0).indices == [1]
    assert greedy_set_cover(problem, gamma=0.0).indices == [0]


def test_uncoverable_window_is_reported():
    problem = CoverageProblem.from_matrix([[1, 0], [0, 0], [0, 1], [0, 0]], c_v=[0, 0])
    with pytest.raises(Infeasible) as info:
        greedy_set_cover(problem, gamma=1.0)
    assert info.value.windows == [1, 3]
    assert 'lambda' in str(info.value)


def test_cv_scaling_is_inert_at_zero_gamma():
    rng = np.random.default_rng(0)
    for _ in range(50):
        problem = random_problem(rng)
        scaled = CoverageProblem(a=problem.a, c_v=problem.c_v * 7.5, lam=problem.lam)
        assert greedy_set_cover(problem, 0.0).indices == greedy_set_cover(scaled, 0.0).indices


# --- exact ---

def test_exact_singleton_cover():
    problem = CoverageProblem.from_matrix([[1, 1, 0], [0, 1, 1], [1, 1, 1]], c_v=[0, 0, 0])
    assert exact_set_cover(problem, gamma=1.0).indices == [1]


def test_exact_weighs_regularity():
    problem = CoverageProblem.from_matrix([[1, 1, 0], [0, 1, 1]], c_v=[0.0, 0.5, 0.0])
    sel = exact_set_cover(problem, gamma=1.0)
    assert sel.chosen.tolist() == [False, True, False]
    assert sel.cost(1.0) == pytest.approx(1.5)


def test_exact_ties_go_to_lexicographically_smallest():
    problem = CoverageProblem.from_matrix([[1, 1]], c_v=[0.0, 0.0])
    assert exact_set_cover(problem, gamma=0.0).chosen.tolist() == [False, True]


def test_exact_guard():
    problem = CoverageProblem.from_matrix(np.ones((2, 21), dtype=bool), c_v=np.zeros(21))
    with pytest.raises(TooLarge):
        exact_set_cover(problem, gamma=1.0)


def test_exact_infeasible():
    with pytest.raises(Infeasible):
        exact_set_cover(CoverageProblem.from_matrix([[0, 0]], c_v=[0, 0]), gamma=1.0)


# --- heuristic sweep ---

def test_default_sweep():
    assert RefinementParams().gammas() == pytest.approx(
        [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.01])


@pytest.mark.parametrize('kwargs', [{'r': 1.0}, {'r': 0.0}, {'gamma_th': 0.0}, {'gamma_th': 2.0}])
def test_invalid_params(kwargs):
    with pytest.raises(ConfigError):
        RefinementParams(**kwargs)


def test_single_candidate_is_chosen():
    problem = CoverageProblem.from_matrix([[1], [1], [1]])
    assert heuristic_refine(problem).indices == [0]


def test_random_instances_against_exact_oracle():
    """Test greedy, exact and heuristic solvers on 200 seeded instances"""
    rng = np.random.default_rng(42)
    params = RefinementParams()
    for _ in range(200):
        problem = random_problem(rng)
        optimum = exact_set_cover(problem, gamma=0.0)
        greedy = greedy_set_cover(problem, gamma=0.0)
        assert problem.a[:, greedy.chosen].any(axis=1).all()
        assert greedy.primary_cost <= harmonic(problem.n_windows) * optimum.primary_cost + 1e-9
        assert optimum.primary_cost <= greedy.primary_cost

        weighted = exact_set_cover(problem, gamma=params.gamma_th)
        assert weighted.cost(params.gamma_th) == pytest.approx(brute_force_cost(problem, params.gamma_th))

        refined = heuristic_refine(problem, params)
        assert problem.a[:, refined.chosen].any(axis=1).all()
        reference = greedy_set_cover(problem, params.gamma_th).cost(params.gamma_th)
        assert refined.cost(params.gamma_th) <= reference + 1e-12
        assert weighted.cost(params.gamma_th) <= refined.cost(params.gamma_th) + 1e-12


# --- end to end ---

def test_refine_family_keeps_selected_pls():
    day, night = free(0.8, 0.1, 0.1), free(0.1, 0.1, 0.8)
    windows = [day, day, night, day, night, night]
    family = PLFamily('free', (free(0.5, 0.3, 0.2), day, night, free(1 / 3, 1 / 3, 1 / 3)))
    result = refine_family(windows, family, lam=0.05)
    assert result.selection.indices == [1, 2]
    assert len(result.family) == 2
    assert result.family.c_v == tuple(result.problem.c_v[[1, 2]])


def test_refine_family_infeasible():
    family = PLFamily('free', (free(0.5, 0.5),))
    with pytest.raises(Infeasible):
        refine_family([free(1.0, 0.0)], family, lam=0.1)
