"""Multi-restart seesaw optimisation for lower bounds on the quantum ASP.

Each restart draws Haar-random pure encodings and then alternates

1. a measurement step: for every query ``y`` independently, optimal
   minimum-error discrimination of the ensemble ``R[y, b] = sum_{x_y=b} rho_x``
   via a fixed-point iteration warm-started from the current POVM;
2. a state step: best-response encodings (top eigenvectors), exact.

Neither half-step can lower the ASP, so every trace is non-decreasing.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bounds import bound_report
from .errors import NumericError, QracError, ValidationError
from .linalg import haar_random_pure_states
from .rac import RacSetting, Strategy, ensemble_operators, evaluate_asp
from .strategies import optimal_states_for_measurements

log = logging.getLogger(__name__)

UPPER_SLACK = 1e-7


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 100
    max_outer_iters: int = 500
    outer_tol: float = 1e-9
    inner_max_iters: int = 2000
    inner_tol: float = 1e-11
    master_seed: int = 0

    def __post_init__(self):
        for name in ("restarts", "max_outer_iters", "inner_max_iters"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("outer_tol", "inner_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 <= self.master_seed < 2**64:
            raise ValidationError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")


@dataclass
class SeesawTrace:
    restart_index: int
    asp_per_iteration: list[float] = field(default_factory=list)
    half_steps: list[float] = field(default_factory=list)
    converged: bool = False
    final_asp: float = math.nan
    inner_unconverged: int = 0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> dict:
        return {
            "restart_index": self.restart_index,
            "iterations": len(self.asp_per_iteration),
            "converged": self.converged,
            "final_asp": None if self.failed else self.final_asp,
            "inner_unconverged": self.inner_unconverged,
            "error": self.error,
        }


@dataclass
class SeesawResult:
    setting: RacSetting
    config: SeesawConfig
    best_asp: float
    best_strategy: Strategy | None
    traces: list[SeesawTrace]

    def histogram(self, decimals: int = 5) -> dict[float, int]:
        """Counts of final ASP values rounded to ``decimals``, highest first."""
        counts = Counter(round(t.final_asp, decimals) for t in self.traces if not t.failed)
        return dict(sorted(counts.items(), reverse=True))

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.traces)


def restart_rng(master_seed: int, restart: int) -> np.random.Generator:
    """Independent stream for one restart, fixed by ``(master_seed, restart)`` alone."""
    return np.random.default_rng([int(master_seed), int(restart)])


def initial_states(setting: RacSetting, rng: np.random.Generator) -> np.ndarray:
    return haar_random_pure_states(setting.num_inputs, setting.D, rng)


def state_step(measurements: np.ndarray) -> np.ndarray:
    return optimal_states_for_measurements(measurements)


def _objectives(R: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Per-query discrimination objective ``sum_b Tr(R[y,b] M[y,b])``."""
    return np.einsum("ybij,ybji->y", R, M).real


def uniform_povms(setting: RacSetting) -> np.ndarray:
    n, d, D = setting.as_tuple()
    return np.broadcast_to(np.eye(D, dtype=np.complex128) / d, (n, d, D, D)).copy()


def discrimination_povm(R: np.ndarray, start: np.ndarray | None = None,
                        max_iters: int = 2000, tol: float = 1e-11) -> tuple[np.ndarray, bool]:
    """Maximise ``sum_b Tr(R_b M_b)`` over POVMs ``M`` for PSD operators ``R_b``.

    Returns the POVM and whether the fixed point converged within
    ``max_iters``. The result never scores below ``start``.
    """
    R = np.asarray(R, dtype=np.complex128)
    d, D, _ = R.shape
    if start is None:
        start = np.broadcast_to(np.eye(D) / d, (d, D, D))
    M, iters, residual = _kernels.fixed_point(R, start, max_iters, tol)
    if not np.all(np.isfinite(M)):
        raise NumericError("discrimination iteration produced non-finite entries", residual)
    # near-ties make the fixed point crawl; the projective rounding lands on the vertex directly
    P = _projective_rounding(M)
    if _score(R, P) > _score(R, M):
        M = P
    return M, bool(residual < tol)


def _score(R, M) -> float:
    return float(np.einsum("bij,bji->", R, M).real)


def _projective_rounding(M: np.ndarray) -> np.ndarray:
    """Projective POVM built from the eigenvectors of each effect with eigenvalue above 1/2."""
    d, D, _ = M.shape
    w, v = np.linalg.eigh(0.5 * (M + M.conj().transpose(0, 2, 1)))
    keep = (w > 0.5).astype(float)
    Q = np.einsum("bik,bk,bjk->bij", v, keep, v.conj())
    s, u = np.linalg.eigh(Q.sum(axis=0))
    live = s > 1e-12 * max(s.max(), 1.0)
    inv_sqrt = np.where(live, 1 / np.sqrt(np.where(live, s, 1.0)), 0.0)
    W = (u * inv_sqrt) @ u.conj().T
    rest = (u * ~live) @ u.conj().T
    return W @ Q @ W + rest / d


def measurement_step(states: np.ndarray, setting: RacSetting, previous: np.ndarray | None = None,
                     *, max_iters: int = 2000, tol: float = 1e-11) -> np.ndarray:
    """Optimal POVM for every query given fixed encodings.

    ``previous`` (default: all effects ``I/d``) seeds the iteration, and no
    query's POVM is replaced by one that discriminates worse.
    """
    R = ensemble_operators(states, setting)
    prev = uniform_povms(setting) if previous is None else np.asarray(previous, dtype=np.complex128)
    return _measurement_step(R, prev, max_iters, tol)[0]


def _measurement_step(R, prev, max_iters, tol):
    out = np.empty_like(prev)
    unconverged = 0
    for y in range(R.shape[0]):
        out[y], ok = discrimination_povm(R[y], prev[y], max_iters, tol)
        unconverged += not ok
    # the kernel already keeps the best iterate including the start; this guards round-off
    worse = _objectives(R, out) < _objectives(R, prev)
    out[worse] = prev[worse]
    return out, unconverged


def _asp_from_objectives(R, M, setting) -> float:
    return float(_objectives(R, M).sum() / (setting.n * setting.num_inputs))


def run_restart(setting: RacSetting, config: SeesawConfig, restart: int):
    """One seesaw descent. Returns ``(trace, strategy)``; ``strategy`` is ``None`` on failure."""
    trace = SeesawTrace(restart)
    rng = restart_rng(config.master_seed, restart)
    states = initial_states(setting, rng)
    meas = uniform_povms(setting)
    try:
        R = ensemble_operators(states, setting)
        current = _asp_from_objectives(R, meas, setting)
        trace.half_steps.append(current)
        for _ in range(config.max_outer_iters):
            meas, bad = _measurement_step(R, meas, config.inner_max_iters, config.inner_tol)
            trace.inner_unconverged += bad
            trace.half_steps.append(_asp_from_objectives(R, meas, setting))

            states = state_step(meas)
            R = ensemble_operators(states, setting)
            value = _asp_from_objectives(R, meas, setting)
            trace.half_steps.append(value)
            trace.asp_per_iteration.append(value)

            if value - current < config.outer_tol:
                trace.converged = True
                current = max(current, value)
                break
            current = value
        strategy = Strategy(setting, states, meas)
        trace.final_asp = evaluate_asp(strategy)
        if not abs(trace.final_asp - current) <= 1e-9:
            raise NumericError("final ASP disagrees with the tracked objective",
                               abs(trace.final_asp - current))
        return trace, strategy
    except (QracError, np.linalg.LinAlgError, FloatingPointError) as exc:
        trace.error = f"{type(exc).__name__}: {exc}"
        log.warning("restart %d failed: %s", restart, trace.error)
        return trace, None


def seesaw_run(setting: RacSetting, config: SeesawConfig | None = None, workers: int = 1) -> SeesawResult:
    """Run every restart and keep the best strategy.

    The outcome depends only on ``setting`` and ``config``: each restart
    seeds its own generator, and ties go to the lowest restart index.
    """
    config = config or SeesawConfig()
    indices = range(config.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda r: run_restart(setting, config, r), indices))
    else:
        outcomes = [run_restart(setting, config, r) for r in indices]

    traces = [t for t, _ in outcomes]
    best_asp, best_strategy = -math.inf, None
    for trace, strategy in outcomes:
        if strategy is not None and trace.final_asp > best_asp:
            best_asp, best_strategy = trace.final_asp, strategy
    if best_strategy is None:
        raise NumericError(f"all {config.restarts} seesaw restarts failed")

    ceiling = bound_report(setting).best_upper
    if best_asp > ceiling + UPPER_SLACK:
        raise NumericError(f"seesaw value {best_asp:.10f} exceeds the analytic bound {ceiling:.10f}",
                           best_asp - ceiling)
    return SeesawResult(setting, config, best_asp, best_strategy, traces)
