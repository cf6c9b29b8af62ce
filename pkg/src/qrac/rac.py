"""RAC settings, input-tuple indexing, strategies and exact ASP evaluation.

Layout conventions used everywhere in the package:

* symbols are 0-based, ``x_i in {0, ..., d-1}``;
* an input tuple ``x`` is stored at rank ``sum_i x[i] * d**i`` (little-endian,
  ``x[0]`` is the least significant digit);
* ``states`` has shape ``(d**n, D, D)``;
* ``measurements`` has shape ``(n, d, D, D)``: effect ``b`` of setting ``y``
  is ``measurements[y, b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericError, ValidationError
from .linalg import hermitian_eig

PSD_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
TRACE_TOL = 1e-9
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class RacSetting:
    """The triple ``(n, d, D)``: number of symbols, alphabet size, message dimension."""

    n: int
    d: int
    D: int

    def __post_init__(self):
        for name in ("n", "d", "D"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.d < 2:
            raise ValidationError(f"d must be >= 2, got {self.d}")
        if self.D < 2:
            raise ValidationError(f"D must be >= 2, got {self.D}")
        if self.d ** self.n > np.iinfo(np.intp).max:
            raise ValidationError(f"d**n = {self.d}**{self.n} exceeds the index range")

    @property
    def num_inputs(self) -> int:
        return self.d**self.n

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n, self.d, self.D)

    def __str__(self):
        return f"({self.n},{self.d},{self.D})"


def tuple_rank(symbols: Sequence[int], setting: RacSetting) -> int:
    if len(symbols) != setting.n:
        raise ValidationError(f"tuple has length {len(symbols)}, expected {setting.n}")
    rank = 0
    for i, s in enumerate(symbols):
        if not 0 <= s < setting.d:
            raise ValidationError(f"symbol {s} at position {i} outside [0, {setting.d})")
        rank += int(s) * setting.d**i
    return rank


def tuple_unrank(rank: int, setting: RacSetting) -> tuple[int, ...]:
    if not 0 <= rank < setting.num_inputs:
        raise ValidationError(f"rank {rank} outside [0, {setting.num_inputs})")
    out = []
    for _ in range(setting.n):
        rank, s = divmod(rank, setting.d)
        out.append(s)
    return tuple(out)


def all_tuples(setting: RacSetting) -> np.ndarray:
    """Integer array of shape ``(d**n, n)``; row ``k`` is ``tuple_unrank(k)``."""
    k = np.arange(setting.num_inputs)
    powers = setting.d ** np.arange(setting.n)
    return (k[:, None] // powers[None, :]) % setting.d


@dataclass(frozen=True)
class Strategy:
    """Encoding states for every input tuple plus one ``d``-outcome POVM per query."""

    setting: RacSetting
    states: np.ndarray
    measurements: np.ndarray

    def __post_init__(self):
        n, d, D = self.setting.as_tuple()
        states = np.asarray(self.states, dtype=np.complex128)
        meas = np.asarray(self.measurements, dtype=np.complex128)
        if states.shape != (d**n, D, D):
            raise ValidationError(f"states have shape {states.shape}, expected {(d**n, D, D)}")
        if meas.shape != (n, d, D, D):
            raise ValidationError(f"measurements have shape {meas.shape}, expected {(n, d, D, D)}")
        if not (np.all(np.isfinite(states)) and np.all(np.isfinite(meas))):
            raise ValidationError("strategy has non-finite entries")
        states.setflags(write=False)
        meas.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "measurements", meas)


@dataclass(frozen=True)
class Violation:
    """One failed invariant: what, where, and by how much."""

    kind: str
    location: str
    residual: float
    message: str = field(default="", compare=False)

    def __str__(self):
        return f"{self.location}: {self.kind} (residual {self.residual:.3e}) {self.message}".rstrip()


def _psd_violations(ops: np.ndarray, label, tol: float) -> list[Violation]:
    out = []
    herm = np.abs(ops - np.swapaxes(ops, -1, -2).conj()).max(axis=(-1, -2))
    for idx in zip(*np.nonzero(herm > tol)):
        out.append(Violation("hermiticity", label(idx), float(herm[idx])))
    w = np.linalg.eigvalsh(0.5 * (ops + np.swapaxes(ops, -1, -2).conj()))
    lowest = w[..., 0]
    for idx in zip(*np.nonzero(lowest < -tol)):
        out.append(Violation("positivity", label(idx), float(-lowest[idx]),
                             f"min eigenvalue {lowest[idx]:.3e}"))
    return out


def validate_strategy(strategy: Strategy, psd_tol: float = PSD_TOL) -> list[Violation]:
    """Every violated invariant of ``strategy``; an empty list means it is valid."""
    states, meas = strategy.states, strategy.measurements
    D = strategy.setting.D
    report = _psd_violations(states, lambda i: f"states[{i[0]}]", psd_tol)

    traces = np.trace(states, axis1=-2, axis2=-1)
    dev = np.abs(traces - 1.0)
    for k in np.nonzero(dev > TRACE_TOL)[0]:
        report.append(Violation("trace", f"states[{k}]", float(dev[k]),
                                f"trace {traces[k].real:.6g}"))

    report += _psd_violations(meas, lambda i: f"measurements[{i[0]}][{i[1]}]", psd_tol)
    gap = meas.sum(axis=1) - np.eye(D)
    comp = np.sqrt((np.abs(gap) ** 2).sum(axis=(-1, -2)))
    for y in np.nonzero(comp > COMPLETENESS_TOL)[0]:
        report.append(Violation("completeness", f"measurements[{y}]", float(comp[y]),
                                "effects do not sum to identity"))
    return report


def _finish(total: complex, norm: int) -> float:
    if abs(total.imag) / norm >= IMAG_TOL:
        raise NumericError(f"ASP has imaginary residue {total.imag / norm:.3e}", abs(total.imag) / norm)
    value = total.real / norm
    if value < -1e-9 or value > 1 + 1e-9:
        raise NumericError(f"ASP {value:.12g} outside [0, 1]", value)
    return float(min(max(value, 0.0), 1.0))


def decoding_sums(measurements: np.ndarray, setting: RacSetting | None = None) -> np.ndarray:
    """``sum_y M[y, x_y]`` for every input tuple, shape ``(d**n, D, D)``."""
    meas = np.asarray(measurements, dtype=np.complex128)
    setting = setting or setting_from_measurements(meas)
    x = all_tuples(setting)
    return sum(meas[y][x[:, y]] for y in range(setting.n))


def ensemble_operators(states: np.ndarray, setting: RacSetting) -> np.ndarray:
    """``R[y, b] = sum_{x : x_y = b} rho_x``, shape ``(n, d, D, D)``."""
    n, d, D = setting.as_tuple()
    # C-order reshape puts x[n-1] on axis 0 and x[0] on axis n-1
    grid = np.asarray(states, dtype=np.complex128).reshape((d,) * n + (D, D))
    R = np.empty((n, d, D, D), dtype=np.complex128)
    for y in range(n):
        axis = n - 1 - y
        R[y] = grid.sum(axis=tuple(a for a in range(n) if a != axis))
    return R


def setting_from_measurements(measurements: np.ndarray) -> RacSetting:
    meas = np.asarray(measurements)
    if meas.ndim != 4 or meas.shape[-1] != meas.shape[-2]:
        raise ValidationError(f"measurements must have shape (n, d, D, D), got {meas.shape}")
    n, d, D, _ = meas.shape
    return RacSetting(int(n), int(d), int(D))


def evaluate_asp(strategy: Strategy) -> float:
    """``(1/(n d^n)) sum_x sum_y Tr(rho_x M[y, x_y])``."""
    s = strategy.setting
    O = decoding_sums(strategy.measurements, s)
    total = np.einsum("kij,kji->", strategy.states, O)
    return _finish(complex(total), s.n * s.num_inputs)


def best_response_value(measurements: np.ndarray) -> float:
    """ASP with every state chosen as a top eigenvector of ``sum_y M[y, x_y]``."""
    setting = setting_from_measurements(measurements)
    top = hermitian_eig(decoding_sums(measurements, setting)).eigenvalues[:, 0]
    return _finish(complex(top.sum()), setting.n * setting.num_inputs)
