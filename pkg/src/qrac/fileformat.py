"""JSON strategy documents.

Schema::

    {"n": int, "d": int, "D": int,
     "states": [matrix] * d**n,            # index k <-> tuple_unrank(k)
     "measurements": [[matrix] * d] * n}

A matrix is a list of rows; each entry is a ``[re, im]`` pair. Floats are
written with ``repr`` precision, so a round trip is exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import StrategyFormatError, ValidationError
from .rac import RacSetting, Strategy


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def strategy_to_dict(strategy: Strategy) -> dict:
    n, d, D = strategy.setting.as_tuple()
    return {
        "n": n,
        "d": d,
        "D": D,
        "states": [_encode_matrix(rho) for rho in strategy.states],
        "measurements": [[_encode_matrix(e) for e in povm] for povm in strategy.measurements],
    }


def _decode_matrix(obj, D: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != D:
        got = len(obj) if isinstance(obj, list) else type(obj).__name__
        raise StrategyFormatError(f"expected {D} rows, got {got}", where)
    out = np.empty((D, D), dtype=np.complex128)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != D:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise StrategyFormatError(f"expected {D} entries, got {got}", f"{where}[{i}]")
        for j, entry in enumerate(row):
            at = f"{where}[{i}][{j}]"
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
                raise StrategyFormatError("entry must be a [re, im] pair of numbers", at)
            if not all(math.isfinite(v) for v in entry):
                raise StrategyFormatError("entry is not finite", at)
            out[i, j] = complex(entry[0], entry[1])
    return out


def _decode_list(obj, length: int, where: str) -> list:
    if not isinstance(obj, list):
        raise StrategyFormatError(f"expected a list, got {type(obj).__name__}", where)
    if len(obj) != length:
        raise StrategyFormatError(f"expected {length} items, got {len(obj)}", where)
    return obj


def strategy_from_dict(doc) -> Strategy:
    if not isinstance(doc, dict):
        raise StrategyFormatError("document must be a JSON object")
    for key in ("n", "d", "D", "states", "measurements"):
        if key not in doc:
            raise StrategyFormatError("missing field", key)
    for key in ("n", "d", "D"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise StrategyFormatError("must be an integer", key)
    try:
        setting = RacSetting(doc["n"], doc["d"], doc["D"])
    except ValidationError as exc:
        raise StrategyFormatError(str(exc), "setting") from exc
    n, d, D = setting.as_tuple()

    raw_states = _decode_list(doc["states"], d**n, "states")
    states = np.stack([_decode_matrix(m, D, f"states[{k}]") for k, m in enumerate(raw_states)])
    raw_meas = _decode_list(doc["measurements"], n, "measurements")
    meas = np.stack([
        np.stack([_decode_matrix(m, D, f"measurements[{y}][{b}]")
                  for b, m in enumerate(_decode_list(povm, d, f"measurements[{y}]"))])
        for y, povm in enumerate(raw_meas)
    ])
    return Strategy(setting, states, meas)


def dumps_strategy(strategy: Strategy) -> str:
    return json.dumps(strategy_to_dict(strategy))


def loads_strategy(text: str) -> Strategy:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StrategyFormatError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    return strategy_from_dict(doc)


def save_strategy(strategy: Strategy, path) -> None:
    Path(path).write_text(dumps_strategy(strategy) + "\n")


def load_strategy(path) -> Strategy:
    return loads_strategy(Path(path).read_text())
