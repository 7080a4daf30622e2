import numpy as np
import pytest

from causalprod.bounds import jury_main_bound
from causalprod.linalg import derive_seed, leading_minors, rng
from causalprod.products import jury
from causalprod.search import (
    SearchProblem,
    diagonal_gap,
    factor_from_params,
    minimize_gap,
    objective,
    pair_from_params,
    replay_gap,
)


def test_diagonal_gap_examples():
    assert diagonal_gap(2, [1, 1], [1, 1]) == pytest.approx(0, abs=1e-15)
    assert diagonal_gap(3, [1, 1, 1], [1, 1, 1]) == pytest.approx(4)
    with pytest.raises(ValueError):
        diagonal_gap(2, [1, 0], [1, 1])


def test_diagonal_jury_is_diagonal_convolution():
    gen = rng(1)
    for _ in range(50):
        a, b = gen.uniform(0.1, 3, 5), gen.uniform(0.1, 3, 5)
        j = jury(np.diag(a), np.diag(b))
        np.testing.assert_allclose(j, np.diag(np.convolve(a, b)[:5]), atol=1e-14)


def test_diagonal_gap_matches_bound():
    gen = rng(2)
    for i in range(500):
        n = 2 + i % 7
        a, b = gen.uniform(0.05, 4, n), gen.uniform(0.05, 4, n)
        ref = jury_main_bound(np.diag(a), np.diag(b)).gap
        assert diagonal_gap(n, a, b) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_diagonal_gap_positive_n3():
    gen = rng(3)
    gaps = [diagonal_gap(3, gen.uniform(1e-3, 5, 3), gen.uniform(1e-3, 5, 3)) for _ in range(1000)]
    assert min(gaps) > 0


def test_parametrization_is_definite():
    p = SearchProblem(n=4)
    gen = rng(4)
    for _ in range(100):
        a, b = pair_from_params(p, gen.uniform(-2, 2, 2 * p.params_per_matrix))
        assert leading_minors(a).min() > 0 and leading_minors(b).min() > 0
        assert np.trace(a).real == pytest.approx(4)


def test_det_one_normalization():
    p = SearchProblem(n=3, normalization="det_one")
    a, b = pair_from_params(p, rng(5).uniform(-1, 1, 2 * p.params_per_matrix))
    assert np.linalg.det(a).real == pytest.approx(1)


def test_factor_layout():
    L = factor_from_params(np.array([0.0, np.log(2), 3.0, 4.0]), 2)
    np.testing.assert_allclose(L, [[1, 0], [3 + 4j, 2]])


def test_calibration_n2():
    p = SearchProblem(n=2, restarts=1, budget=2000, seed=0)
    r = minimize_gap(p)
    assert abs(r.best_gap) <= 1e-9


def test_diagonal_search_positive():
    p = SearchProblem(n=3, restarts=2, budget=1500, seed=1, diagonal_only=True)
    r = minimize_gap(p)
    assert r.best_gap > 0


def test_replay_and_determinism():
    p = SearchProblem(n=3, restarts=2, budget=800, seed=2)
    r1, r2 = minimize_gap(p), minimize_gap(p)
    assert abs(replay_gap(p, r1.params_a, r1.params_b) - r1.best_gap) <= 1e-12
    assert r1.best_gap == r2.best_gap
    assert r1.params_a.tobytes() == r2.params_a.tobytes()
    assert len(r1.trajectory) == 2 and r1.evaluations <= 1600


def test_objective_penalizes_boundary():
    p = SearchProblem(n=3, diagonal_only=True)
    theta = np.array([0.0, -40.0, 0.0, 0.0, 0.0, 0.0])
    assert objective(p, theta) >= 1e6


def test_problem_validation():
    with pytest.raises(ValueError):
        SearchProblem(n=1).validate()
    with pytest.raises(ValueError):
        SearchProblem(n=3, bound="causal_bound").validate()
