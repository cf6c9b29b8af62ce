import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrac.errors import NumericError, ValidationError
from qrac.linalg import haar_random_pure_states, random_unitary
from qrac.rac import (
    RacSetting,
    Strategy,
    all_tuples,
    best_response_value,
    decoding_sums,
    ensemble_operators,
    evaluate_asp,
    tuple_rank,
    tuple_unrank,
    validate_strategy,
)
from qrac.strategies import basis_projectors, cube_strategy_322, n2_optimal_strategy, optimal_states_for_measurements

from conftest import random_psd


def random_povm(d, D, rng):
    """Random full-rank POVM: A_b normalised by S^{-1/2} with S = sum_b A_b."""
    A = np.stack([random_psd(D, rng) for _ in range(d)])
    w, v = np.linalg.eigh(A.sum(axis=0))
    s = (v / np.sqrt(w)) @ v.conj().T
    M = s @ A @ s
    return 0.5 * (M + M.conj().transpose(0, 2, 1))


def random_strategy(setting, rng):
    n, d, D = setting.as_tuple()
    states = haar_random_pure_states(d**n, D, rng)
    meas = np.stack([random_povm(d, D, rng) for _ in range(n)])
    return Strategy(setting, states, meas)


@pytest.mark.parametrize("bad", [(0, 2, 2), (2, 1, 2), (2, 2, 1), (2.0, 2, 2), (True, 2, 2), (64, 2, 2)])
def test_invalid_settings_rejected(bad):
    with pytest.raises(ValidationError):
        RacSetting(*bad)


def test_rank_examples():
    assert tuple_rank((0, 0, 0), RacSetting(3, 2, 2)) == 0
    assert tuple_rank((1, 0), RacSetting(2, 3, 3)) == 1
    s = RacSetting(3, 4, 2)
    assert tuple_unrank(0, s) == (0, 0, 0)
    assert tuple_unrank(63, s) == (3, 3, 3)


@pytest.mark.parametrize("n, d", [(n, d) for n in range(1, 5) for d in range(2, 5)])
def test_rank_roundtrip(n, d):
    s = RacSetting(n, d, 2)
    seen = set()
    for k in range(d**n):
        x = tuple_unrank(k, s)
        assert tuple_rank(x, s) == k
        seen.add(x)
    assert seen == set(itertools.product(range(d), repeat=n))
    np.testing.assert_array_equal(all_tuples(s), [tuple_unrank(k, s) for k in range(d**n)])


def test_rank_errors():
    s = RacSetting(2, 3, 3)
    with pytest.raises(ValidationError):
        tuple_rank((0, 3), s)
    with pytest.raises(ValidationError):
        tuple_rank((0,), s)
    with pytest.raises(ValidationError):
        tuple_unrank(9, s)


def test_strategy_shape_mismatch():
    s = RacSetting(2, 2, 2)
    with pytest.raises(ValidationError):
        Strategy(s, np.zeros((4, 3, 3)), np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValidationError):
        Strategy(s, np.zeros((4, 2, 2)), np.zeros((3, 2, 2, 2)))


def test_validate_cube_is_clean():
    assert validate_strategy(cube_strategy_322()) == []


def test_validate_scaled_povm():
    cube = cube_strategy_322()
    meas = np.array(cube.measurements)
    meas[1] *= 0.5
    report = validate_strategy(Strategy(cube.setting, cube.states, meas))
    assert [(v.kind, v.location) for v in report] == [("completeness", "measurements[1]")]
    assert report[0].residual == pytest.approx(0.5 * np.sqrt(2), abs=1e-12)


def test_validate_trace_and_positivity():
    cube = cube_strategy_322()
    states = np.array(cube.states)
    states[5] *= 2
    meas = np.array(cube.measurements)
    meas[2, 0] = np.diag([1.0, -0.5])
    meas[2, 1] = np.eye(2) - meas[2, 0]
    report = validate_strategy(Strategy(cube.setting, states, meas))
    kinds = {(v.kind, v.location) for v in report}
    assert ("trace", "states[5]") in kinds
    assert ("positivity", "measurements[2][0]") in kinds


def test_evaluate_known_strategies():
    assert evaluate_asp(cube_strategy_322()) == pytest.approx(0.5 * (1 + 1 / np.sqrt(3)), abs=1e-10)
    assert evaluate_asp(n2_optimal_strategy(2)) == pytest.approx(0.5 * (1 + 1 / np.sqrt(2)), abs=1e-10)


@pytest.mark.parametrize("n, d, D", [(2, 2, 2), (3, 3, 2), (2, 4, 5)])
def test_maximally_mixed_states_give_random_guessing(rng, n, d, D):
    s = RacSetting(n, d, D)
    strategy = random_strategy(s, rng)
    mixed = np.broadcast_to(np.eye(D) / D, (d**n, D, D))
    assert evaluate_asp(Strategy(s, mixed, strategy.measurements)) == pytest.approx(1 / d, abs=1e-12)


def test_imaginary_residue_is_numeric_error():
    s = RacSetting(1, 2, 2)
    states = np.array([[[0.5, 0.5j], [0.5j, 0.5]]] * 2)  # non-Hermitian
    meas = np.array([[np.diag([1.0, 0.0]) + np.array([[0, 1], [0, 0]]), np.diag([0.0, 1.0])]])
    with pytest.raises(NumericError):
        evaluate_asp(Strategy(s, states, meas))


def test_best_response_examples():
    d = 2
    F = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    meas = np.stack([basis_projectors(np.eye(d)), basis_projectors(F)])
    assert best_response_value(meas) == pytest.approx(0.5 * (1 + 1 / np.sqrt(2)), abs=1e-12)
    assert best_response_value(cube_strategy_322().measurements) == pytest.approx(0.5 * (1 + 1 / np.sqrt(3)), abs=1e-12)


def test_identical_measurements():
    comp = basis_projectors(np.eye(3))
    meas = np.stack([comp] * 4)
    s = RacSetting(4, 3, 3)
    top = np.linalg.eigvalsh(decoding_sums(meas, s))[:, -1]
    # constant tuples are always decodable: the decoding sum reaches n
    for b in range(3):
        assert top[tuple_rank((b,) * 4, s)] == pytest.approx(4.0, abs=1e-12)
    # in general the best response recovers the majority symbol
    counts = [max(Counter(x).values()) for x in all_tuples(s).tolist()]
    assert best_response_value(meas) == pytest.approx(sum(counts) / (4 * 81), abs=1e-12)
    assert best_response_value(comp[None]) == pytest.approx(1.0, abs=1e-12)


def test_ensemble_and_decoding_sums_match_loops(rng):
    s = RacSetting(3, 3, 2)
    strat = random_strategy(s, rng)
    R = ensemble_operators(strat.states, s)
    O = decoding_sums(strat.measurements, s)
    for k in range(s.num_inputs):
        x = tuple_unrank(k, s)
        np.testing.assert_allclose(O[k], sum(strat.measurements[y, x[y]] for y in range(3)), atol=1e-14)
    for y in range(3):
        for b in range(3):
            brute = sum(strat.states[k] for k in range(s.num_inputs) if tuple_unrank(k, s)[y] == b)
            np.testing.assert_allclose(R[y, b], brute, atol=1e-14)


settings_grid = st.sampled_from([(1, 2, 2), (2, 2, 2), (2, 3, 3), (3, 2, 2), (3, 2, 3), (2, 3, 4)])


@settings(max_examples=30, deadline=None)
@given(settings_grid, st.integers(0, 2**32 - 1))
def test_asp_unitary_invariance(triple, seed):
    gen = np.random.default_rng(seed)
    s = RacSetting(*triple)
    strat = random_strategy(s, gen)
    U = random_unitary(s.D, gen)
    rotate = lambda a: U @ a @ U.conj().T  # noqa: E731
    rotated = Strategy(s, rotate(strat.states), rotate(strat.measurements))
    assert abs(evaluate_asp(rotated) - evaluate_asp(strat)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(settings_grid, st.integers(0, 2**32 - 1))
def test_best_response_dominates_any_states(triple, seed):
    gen = np.random.default_rng(seed)
    s = RacSetting(*triple)
    strat = random_strategy(s, gen)
    best = best_response_value(strat.measurements)
    assert evaluate_asp(strat) <= best + 1e-10
    opt = Strategy(s, optimal_states_for_measurements(strat.measurements), strat.measurements)
    assert abs(evaluate_asp(opt) - best) < 1e-10


@pytest.mark.parametrize("n, d", [(n, d) for n in range(1, 4) for d in range(2, 4)])
def test_majority_vote_matches_combinatorial_count(n, d):
    s = RacSetting(n, d, d)
    tuples = all_tuples(s)
    majority = [min(Counter(x).items(), key=lambda kv: (-kv[1], kv[0]))[0] for x in tuples.tolist()]
    comp = basis_projectors(np.eye(d))
    states = comp[majority]
    meas = np.stack([comp] * n)
    # brute force: fraction of (x, y) pairs with x_y equal to the majority symbol
    hits = sum(int(x[y] == m) for x, m in zip(tuples.tolist(), majority) for y in range(n))
    assert evaluate_asp(Strategy(s, states, meas)) == pytest.approx(hits / (n * d**n), abs=1e-14)
