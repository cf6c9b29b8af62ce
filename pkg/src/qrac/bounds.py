"""Closed-form upper bounds and known exact values of the quantum ASP."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .rac import RacSetting


def result1_bound(s: RacSetting) -> float:
    """``1/d + (D-1)/sqrt(n d D)``; not clamped, may exceed 1."""
    return 1.0 / s.d + (s.D - 1) / math.sqrt(s.n * s.d * s.D)


def result2_bound(s: RacSetting) -> float:
    """``(1/n) (1 + (n-1) sqrt(D)/d)``."""
    return (1.0 + (s.n - 1) * math.sqrt(s.D) / s.d) / s.n


def corollary_bound(s: RacSetting) -> float:
    return min(result1_bound(s), result2_bound(s))


def vicente_bound(s: RacSetting) -> float:
    """The earlier general bound ``1/d + (sqrt(dD) - 1)/(d sqrt(n))``."""
    return 1.0 / s.d + (math.sqrt(s.d * s.D) - 1) / (s.d * math.sqrt(s.n))


def known_exact_value(s: RacSetting) -> float | None:
    """Proven optimum for ``n = 2, D = d`` and for ``(3, 2, 2)``; ``None`` elsewhere."""
    if s.n == 2 and s.d == s.D:
        return 0.5 * (1.0 + 1.0 / math.sqrt(s.d))
    if s.as_tuple() == (3, 2, 2):
        return 0.5 * (1.0 + 1.0 / math.sqrt(3.0))
    return None


@dataclass(frozen=True)
class BoundReport:
    setting: RacSetting
    result1: float
    result2: float
    corollary: float
    vicente: float
    exact: float | None
    best_upper: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["setting"] = {"n": self.setting.n, "d": self.setting.d, "D": self.setting.D}
        return out


def bound_report(s: RacSetting) -> BoundReport:
    r1, r2, v = result1_bound(s), result2_bound(s), vicente_bound(s)
    return BoundReport(
        setting=s,
        result1=r1,
        result2=r2,
        corollary=min(r1, r2),
        vicente=v,
        exact=known_exact_value(s),
        best_upper=min(r1, r2, v, 1.0),
    )
