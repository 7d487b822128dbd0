"""Power-flow bookkeeping: battery banks, motor current, driver limits.

The battery model is ideal nameplate data (no sag, no rate correction):
runtime is capacity over average draw.  The motor torque constant defaults
to the rated point of the drive motor, torque over current at rated power
and bus voltage, and can be overridden when a measured value exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BatteryBank",
    "PowerConfig",
    "DriverReport",
    "motor_current",
    "check_driver",
    "runtime_estimate",
]


@dataclass(frozen=True)
class BatteryBank:
    """Identical cells in series; identical strings in parallel."""

    cell_voltage: float
    cells_series: int
    capacity_ah: float   # per string
    count: int = 1       # parallel strings

    def __post_init__(self):
        if self.cell_voltage <= 0 or self.capacity_ah <= 0:
            raise ValueError("cell voltage and capacity must be positive")
        if self.cells_series < 1 or self.count < 1:
            raise ValueError("cells_series and count must be >= 1")

    @property
    def voltage(self) -> float:
        return self.cell_voltage * self.cells_series

    @property
    def total_capacity_ah(self) -> float:
        return self.capacity_ah * self.count


# rated point of the drive motor: 22 N*m at 320 W on the 24 V bus
_RATED_KT = 22.0 * 24.0 / 320.0


@dataclass(frozen=True)
class PowerConfig:
    drive_bank: BatteryBank = field(
        default_factory=lambda: BatteryBank(12.0, 2, 26.0)
    )
    actuator_bank: BatteryBank = field(
        default_factory=lambda: BatteryBank(3.7, 3, 2.7, count=2)
    )
    logic_voltage: float = 5.0
    avg_current_limit: float = 40.0   # A, 1-s sliding mean
    peak_current_limit: float = 80.0  # A, instantaneous
    k_t: float = _RATED_KT            # N*m/A at the motor shaft

    def __post_init__(self):
        if self.logic_voltage <= 0 or self.k_t <= 0:
            raise ValueError("logic_voltage and k_t must be positive")
        if not 0 < self.avg_current_limit <= self.peak_current_limit:
            raise ValueError("need 0 < avg limit <= peak limit")


def motor_current(torque: float, cfg: PowerConfig | None = None) -> float:
    """Current drawn for a shaft torque, I = torque / k_t."""
    if cfg is None:
        cfg = PowerConfig()
    if torque < 0:
        raise ValueError(f"torque must be >= 0 (got {torque})")
    return torque / cfg.k_t


@dataclass(frozen=True)
class DriverReport:
    passed: bool
    max_window_avg: float  # worst 1-s sliding-window mean, A
    peak: float            # worst instantaneous sample, A
    window_s: float = 1.0


def check_driver(
    times, currents, cfg: PowerConfig | None = None, window_s: float = 1.0
) -> DriverReport:
    """Check a current profile against the driver's average and peak limits.

    The average limit applies to every sample window spanning at most
    window_s seconds (on a profile shorter than the window, to the whole
    profile).  Timestamps must be strictly increasing.
    """
    if cfg is None:
        cfg = PowerConfig()
    t = np.asarray(times, dtype=float)
    i = np.asarray(currents, dtype=float)
    if t.ndim != 1 or t.shape != i.shape or t.size == 0:
        raise ValueError("times and currents must be equal-length nonempty 1-D arrays")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")

    peak = float(i.max())
    prefix = np.concatenate([[0.0], np.cumsum(i)])
    max_avg = 0.0
    lo = 0
    for hi in range(t.size):
        while t[hi] - t[lo] > window_s:
            lo += 1
        avg = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo)
        if avg > max_avg:
            max_avg = float(avg)
    tol = 1e-12
    passed = (
        max_avg <= cfg.avg_current_limit * (1.0 + tol)
        and peak <= cfg.peak_current_limit * (1.0 + tol)
    )
    return DriverReport(passed, max_avg, peak, window_s)


def runtime_estimate(avg_current: float, cfg: PowerConfig | None = None, bank: str = "drive") -> float:
    """Hours of operation at a constant average draw, ideal battery."""
    if cfg is None:
        cfg = PowerConfig()
    if avg_current <= 0:
        raise ValueError(f"avg_current must be > 0 (got {avg_current})")
    banks = {"drive": cfg.drive_bank, "actuator": cfg.actuator_bank}
    if bank not in banks:
        raise ValueError(f"bank must be one of {sorted(banks)} (got {bank!r})")
    return banks[bank].total_capacity_ah / avg_current
