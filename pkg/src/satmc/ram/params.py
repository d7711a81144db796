"""Reliability/availability/maintainability parameters and rate derivations."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

HOURS_PER_YEAR = 8640  # 360-day years; 15 years = 129600 h
MISSION_HOURS = 129600.0

# Interruption durations are not given with the other inputs; these come from
# ``calibrate_interruptions`` (see satmc.ram.models) and are frozen here.
CALIBRATED_UNPLANNED_DURATION = 1.03209
CALIBRATED_PLANNED_DURATION = 1.70220


def derive_rates(r: float, mtbf: float, mttr: float) -> tuple[float, float]:
    """Failure and repair rates per hour: ``-ln(r) / MTBF`` and ``1 / MTTR``."""
    if not 0 < r < 1:
        raise ValueError(f"reliability must lie in (0, 1), got {r!r}")
    if mtbf <= 0 or mttr <= 0:
        raise ValueError("MTBF and MTTR must be positive")
    return -math.log(r) / mtbf, 1.0 / mttr


def reliability_curve(lam: float, t: float) -> float:
    """Survival probability ``exp(-lam t)`` of an exponential lifetime."""
    if lam < 0 or t < 0:
        raise ValueError("rate and time must be nonnegative")
    return math.exp(-lam * t)


@dataclass(frozen=True)
class RamParams:
    """Satellite and constellation parameters; times in hours.

    Defaults reproduce the single-satellite table (r = 0.80, MTBF = 15
    years, MTTR = 24 h, ...). :meth:`constellation` gives the
    constellation table (MTTR = 5 months, 24 slots, 3 spares).
    ``t_e`` is carried for completeness but no model uses it.
    """

    r: float = 0.80
    MTBF: float = 15 * HOURS_PER_YEAR
    MTTR: float = 24.0
    t_u: float = 4320.0
    t_p: float = 4320.0
    d_u: float = CALIBRATED_UNPLANNED_DURATION
    d_p: float = CALIBRATED_PLANNED_DURATION
    p_b: float = 0.80
    t_r: float = 24.0
    t_d: float = 1440.0
    t_e: float = 4320.0
    p_y: float = 0.90
    t_k: float = 24.0
    n: int = 24
    m: int = 3
    T: float = MISSION_HOURS

    def __post_init__(self) -> None:
        for name in ("r", "p_b", "p_y"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        for name in ("MTBF", "MTTR", "t_u", "t_p", "d_u", "d_p", "t_r", "t_d", "t_e", "t_k"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if self.T < 0:
            raise ValueError("T must be nonnegative")

    @classmethod
    def constellation(cls, **overrides) -> "RamParams":
        values = {"MTTR": 5 * 30 * 24.0}
        values.update(overrides)
        return cls(**values)

    @property
    def lam(self) -> float:
        return derive_rates(self.r, self.MTBF, self.MTTR)[0]

    @property
    def mu(self) -> float:
        return derive_rates(self.r, self.MTBF, self.MTTR)[1]

    @property
    def o(self) -> float:
        """Planned-interruption duration under its sweep name."""
        return self.d_p

    def replace(self, **changes) -> "RamParams":
        if "o" in changes:
            changes["d_p"] = changes.pop("o")
        for key in ("n", "m"):
            if key in changes:
                changes[key] = int(changes[key])
        return dataclasses.replace(self, **changes)
