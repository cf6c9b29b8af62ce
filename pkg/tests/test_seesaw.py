import numpy as np
import pytest

from qrac import seesaw as seesaw_mod
from qrac.bounds import bound_report
from qrac.errors import NumericError, ValidationError
from qrac.linalg import haar_random_pure_states
from qrac.rac import RacSetting, Strategy, ensemble_operators, evaluate_asp, validate_strategy
from qrac.seesaw import (
    SeesawConfig,
    discrimination_povm,
    initial_states,
    measurement_step,
    restart_rng,
    run_restart,
    seesaw_run,
    state_step,
    uniform_povms,
)
from qrac.strategies import basis_projectors, cube_strategy_322

from conftest import random_psd


def helstrom(rho0, rho1, p0=0.5):
    """Optimal two-state success probability ``(1 + |p0 rho0 - p1 rho1|_1)/2``."""
    return 0.5 * (1 + np.abs(np.linalg.eigvalsh(p0 * rho0 - (1 - p0) * rho1)).sum())


def _objective(R, M):
    return np.einsum("bij,bji->", R, M).real


def test_state_step_cube():
    cube = cube_strategy_322()
    states = state_step(cube.measurements)
    assert evaluate_asp(Strategy(cube.setting, states, cube.measurements)) == pytest.approx(0.788675, abs=1e-6)


def test_state_step_single_measurement():
    meas = basis_projectors(np.eye(2))[None]
    s = RacSetting(1, 2, 2)
    assert evaluate_asp(Strategy(s, state_step(meas), meas)) == pytest.approx(1.0, abs=1e-12)


def test_state_step_monotone(rng):
    for _ in range(20):
        s = RacSetting(3, 3, 3)
        states = haar_random_pure_states(27, 3, rng)
        meas = measurement_step(states, s, max_iters=50)
        before = evaluate_asp(Strategy(s, states, meas))
        after = evaluate_asp(Strategy(s, state_step(meas), meas))
        assert after >= before - 1e-12


def test_measurement_step_helstrom(rng):
    s = RacSetting(1, 2, 2)
    for _ in range(20):
        states = haar_random_pure_states(2, 2, rng)
        M = measurement_step(states, s)
        # n = 1 objective is the sum of both success terms, i.e. 2 * P_succ
        got = _objective(states, M[0]) / 2
        assert abs(got - helstrom(states[0], states[1])) < 1e-6


def test_discrimination_unequal_priors(rng):
    for _ in range(20):
        rho = haar_random_pure_states(2, 2, rng)
        p0 = rng.uniform(0.05, 0.95)
        R = np.stack([p0 * rho[0], (1 - p0) * rho[1]])
        M, _ = discrimination_povm(R)
        assert abs(_objective(R, M) - helstrom(rho[0], rho[1], p0)) < 1e-6


def test_measurement_step_on_basis_projectors():
    s = RacSetting(2, 3, 3)
    comp = basis_projectors(np.eye(3))
    # every input encodes its first symbol; both queries see the basis states
    states = np.stack([comp[k % 3] for k in range(9)])
    M = measurement_step(states, s)
    np.testing.assert_allclose(M[0], comp, atol=1e-8)
    R = ensemble_operators(states, s)
    # every one of the 9 inputs is decoded with certainty
    assert _objective(R[0], M[0]) / 9 == pytest.approx(1.0, abs=1e-9)


def test_measurement_step_diagonal_argmax(rng):
    for d, D in [(2, 2), (3, 3), (4, 3), (3, 5)]:
        diag = rng.uniform(0, 1, size=(d, D))
        R = np.stack([np.diag(row) for row in diag]).astype(complex)
        M, _ = discrimination_povm(R)
        # brute force: each basis vector goes to the outcome with the largest weight
        assert abs(_objective(R, M) - diag.max(axis=0).sum()) < 1e-9
        winners = diag.argmax(axis=0)
        for b in range(d):
            np.testing.assert_allclose(np.diag(M[b]).real, (winners == b).astype(float), atol=1e-6)


def test_measurement_step_matches_sdp(rng):
    cp = pytest.importorskip("cvxpy")
    for d, D in [(3, 3), (2, 4), (4, 3)]:
        R = np.stack([random_psd(D, rng, rank=2) for _ in range(d)])
        R /= np.trace(R.sum(axis=0)).real
        M, _ = discrimination_povm(R)
        X = [cp.Variable((D, D), hermitian=True) for _ in range(d)]
        cons = [x >> 0 for x in X] + [sum(X) == np.eye(D)]
        prob = cp.Problem(cp.Maximize(cp.real(sum(cp.trace(r @ x) for r, x in zip(R, X)))), cons)
        prob.solve(solver=cp.CLARABEL)
        assert _objective(R, M) == pytest.approx(prob.value, abs=1e-6)


def test_measurement_step_respects_previous(rng):
    s = RacSetting(3, 2, 2)
    cube = cube_strategy_322()
    M = measurement_step(cube.states, s, cube.measurements, max_iters=1)
    R = ensemble_operators(cube.states, s)
    for y in range(3):
        assert _objective(R[y], M[y]) >= _objective(R[y], cube.measurements[y]) - 1e-15


def test_initial_states(rng):
    s = RacSetting(2, 3, 4)
    a = initial_states(s, restart_rng(5, 2))
    b = initial_states(s, restart_rng(5, 2))
    assert np.array_equal(a, b)
    assert a.shape == (9, 4, 4)
    strat = Strategy(s, a, uniform_povms(s))
    assert validate_strategy(strat) == []
    np.testing.assert_array_equal(haar_random_pure_states(4, 1, rng), np.ones((4, 1, 1)))


def test_config_validation():
    with pytest.raises(ValidationError):
        SeesawConfig(restarts=0)
    with pytest.raises(ValidationError):
        SeesawConfig(inner_tol=0)
    with pytest.raises(ValidationError):
        SeesawConfig(master_seed=-1)


@pytest.mark.parametrize("triple", [(2, 2, 2), (3, 2, 3), (3, 3, 2), (2, 3, 4), (3, 3, 3), (4, 2, 2)])
def test_traces_monotone_valid_and_bounded(triple):
    s = RacSetting(*triple)
    result = seesaw_run(s, SeesawConfig(restarts=5, master_seed=11))
    ceiling = bound_report(s).best_upper
    for t in result.traces:
        assert not t.failed
        assert np.all(np.diff(t.half_steps) >= -1e-10)
        assert np.all(np.diff(t.asp_per_iteration) >= -1e-10)
        assert t.final_asp <= ceiling + 1e-7
    assert result.best_asp == max(t.final_asp for t in result.traces)
    assert validate_strategy(result.best_strategy) == []
    assert evaluate_asp(result.best_strategy) == result.best_asp


def test_known_optima_recovered():
    r222 = seesaw_run(RacSetting(2, 2, 2), SeesawConfig(restarts=20, master_seed=1))
    assert abs(r222.best_asp - 0.5 * (1 + 1 / np.sqrt(2))) < 1e-6
    r322 = seesaw_run(RacSetting(3, 2, 2), SeesawConfig(restarts=20, master_seed=1))
    assert abs(r322.best_asp - 0.5 * (1 + 1 / np.sqrt(3))) < 1e-5


def test_reproducible_and_order_independent():
    s = RacSetting(3, 3, 2)
    cfg = SeesawConfig(restarts=6, master_seed=42)
    a = seesaw_run(s, cfg)
    b = seesaw_run(s, cfg, workers=3)
    assert a.best_asp == b.best_asp
    assert np.array_equal(a.best_strategy.states, b.best_strategy.states)
    assert [t.asp_per_iteration for t in a.traces] == [t.asp_per_iteration for t in b.traces]
    # a restart's outcome does not depend on which restarts ran before it
    alone, _ = run_restart(s, cfg, 4)
    assert alone.asp_per_iteration == a.traces[4].asp_per_iteration


def test_failed_restart_is_recorded_and_excluded(monkeypatch):
    real_step = seesaw_mod.state_step
    calls = {"n": 0}

    def failing_step(meas):
        calls["n"] += 1
        if calls["n"] == 3:
            raise NumericError("injected")
        return real_step(meas)

    monkeypatch.setattr(seesaw_mod, "state_step", failing_step)
    result = seesaw_run(RacSetting(2, 2, 2), SeesawConfig(restarts=3, master_seed=1))
    assert result.failures == 1
    failed = [t for t in result.traces if t.failed]
    assert "injected" in failed[0].error
    assert result.best_asp == max(t.final_asp for t in result.traces if not t.failed)


def test_all_restarts_failing_raises(monkeypatch):
    def broken(meas):
        raise NumericError("broken")

    monkeypatch.setattr(seesaw_mod, "state_step", broken)
    with pytest.raises(NumericError):
        seesaw_run(RacSetting(2, 2, 2), SeesawConfig(restarts=2))


def test_histogram():
    result = seesaw_run(RacSetting(3, 3, 3), SeesawConfig(restarts=10, master_seed=1))
    hist = result.histogram()
    assert sum(hist.values()) == 10
    assert list(hist) == sorted(hist, reverse=True)
    assert max(hist) == round(result.best_asp, 5)


def test_discrimination_near_tie_reaches_vertex():
    # ratio 0.9999 would need ~10^5 plain fixed-point steps
    w = np.array([[1.0, 0.2, 0.5], [0.9999, 0.3, 0.4999]])
    R = np.stack([np.diag(r) for r in w]).astype(complex)
    M, _ = discrimination_povm(R, max_iters=50)
    assert abs(_objective(R, M) - w.max(axis=0).sum()) < 1e-12
    assert np.all(np.linalg.eigvalsh(M) > -1e-12)
    np.testing.assert_allclose(M.sum(axis=0), np.eye(3), atol=1e-12)
