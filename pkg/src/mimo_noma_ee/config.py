"""System parameters and decibel/linear unit conversions.

Everything inside the package runs in linear units (W, W/Hz, Hz). Decibel
quantities only show up when a config is read or a result is rendered.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """Raised for invalid configuration values or unknown unit pairs."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        return -math.inf
    return 10.0 * math.log10(watt) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


_CONVERSIONS = {
    ("dBm", "W"): dbm_to_watt,
    ("W", "dBm"): watt_to_dbm,
    ("dBm/Hz", "W/Hz"): dbm_to_watt,
    ("W/Hz", "dBm/Hz"): watt_to_dbm,
    ("dB", "linear"): db_to_linear,
    ("linear", "dB"): linear_to_db,
    ("mW", "W"): lambda x: x * 1e-3,
    ("W", "mW"): lambda x: x * 1e3,
    ("kHz", "Hz"): lambda x: x * 1e3,
    ("Hz", "kHz"): lambda x: x * 1e-3,
}


def convert_units(value: float, from_unit: str, to_unit: str) -> float:
    """Convert ``value`` between decibel and linear units.

    Supported pairs: dBm<->W, dBm/Hz<->W/Hz, dB<->linear, mW<->W, kHz<->Hz.
    Identical units return the value unchanged.
    """
    if from_unit == to_unit:
        return float(value)
    try:
        fn = _CONVERSIONS[(from_unit, to_unit)]
    except KeyError:
        raise ConfigError(f"unknown unit conversion {from_unit!r} -> {to_unit!r}") from None
    return float(fn(float(value)))


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one single-cell downlink scenario plus solver controls.

    Powers are in W, the noise density in W/Hz, ``R_T`` in bit/s/Hz.
    Defaults reproduce the simulation table of the reference scenario; the
    path-loss exponent, minimum distance, circuit power and solver controls
    are not given there and carry our own defaults.
    """

    M: int = 128
    K: int = 3
    B: float = 120e3
    D: float = 500.0
    N0: float = 1e-20
    P_T: float = 1.0
    P_c: float = dbm_to_watt(2.0)
    R_T: float = 3.0
    epsilon: float = 4.0
    phi: float = 1.0
    sigma2_dB: float = 10.0
    tau: float = 1e-5
    theta1: float = 1e-2
    theta2: float = 1e-2
    max_iters: int = 10_000
    d_min: float = 35.0
    seed: int = 0

    def __post_init__(self):
        checks = [
            (self.M >= 1, "M must be >= 1"),
            (self.K >= 1, "K must be >= 1"),
            (self.B > 0, "B must be > 0"),
            (self.D > 0, "D must be > 0"),
            (self.N0 > 0, "N0 must be > 0"),
            (self.P_T > 0, "P_T must be > 0"),
            (self.P_c >= 0, "P_c must be >= 0"),
            (self.R_T >= 0, "R_T must be >= 0"),
            (2.0 <= self.epsilon <= 6.0, "epsilon must lie in [2, 6]"),
            (self.phi > 0, "phi must be > 0"),
            (self.sigma2_dB >= 0, "sigma2_dB must be >= 0"),
            (self.tau > 0, "tau must be > 0"),
            (self.theta1 > 0 and self.theta2 > 0, "step sizes must be > 0"),
            (self.max_iters >= 1, "max_iters must be >= 1"),
            (0 < self.d_min < self.D / 2, "d_min must satisfy 0 < d_min < D/2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        if int(self.M) != self.M or int(self.K) != self.K or int(self.max_iters) != self.max_iters:
            raise ConfigError("M, K and max_iters must be integers")

    @property
    def noise_power(self) -> float:
        """Receiver noise power B*N0 in W."""
        return self.B * self.N0

    @property
    def circuit_power(self) -> float:
        """Total circuit power M*P_c in W."""
        return self.M * self.P_c

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# keys whose values are integers in the config file
INT_FIELDS = frozenset({"M", "K", "max_iters", "seed"})
FIELD_NAMES = tuple(f.name for f in dataclasses.fields(SystemConfig))
