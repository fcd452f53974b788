"""SINR, achievable rates, large-antenna rate bounds and energy efficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig

RATE_KINDS = ("exact", "bound", "bound-high-sinr")

# converged bound SINR below this is flagged: the log2(x) approximation of
# log2(1 + x) is no longer tight
HIGH_SINR_FLOOR = 10.0


class RateDomainError(ValueError):
    pass


@dataclass(frozen=True)
class RateVector:
    rates: np.ndarray  # bit/s
    kind: str

    def __post_init__(self):
        if self.kind not in RATE_KINDS:
            raise ValueError(f"unknown rate kind {self.kind!r}")

    @property
    def total(self) -> float:
        return float(np.sum(self.rates))


@dataclass(frozen=True)
class EEReport:
    ee: float  # bit/J
    sum_rate: float  # bit/s
    total_power: float  # W, transmit + circuit


def gain_matrix(channel: ChannelRealization) -> np.ndarray:
    """A[k, j] = |g_k^H v_j|^2."""
    return np.abs(channel.G.conj().T @ channel.V) ** 2


def sinr_exact_all(p, channel: ChannelRealization, config: SystemConfig) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    A = gain_matrix(channel)
    signal = np.diag(A) * p
    interference = A @ p - signal
    return signal / (interference + config.noise_power)


def sinr_exact(k: int, p, channel: ChannelRealization, config: SystemConfig) -> float:
    """SINR of user k with MRT precoding on a given channel draw."""
    return float(sinr_exact_all(p, channel, config)[k])


def rate_from_sinr(sinr, B: float):
    return B * np.log2(1.0 + np.asarray(sinr, dtype=float))


def bound_sinr_all(p, betas, config: SystemConfig) -> np.ndarray:
    """Large-antenna SINR M*beta_k*p_k / (beta_k * sum_{j!=k} p_j + B*N0)."""
    p = np.asarray(p, dtype=float)
    betas = np.asarray(betas, dtype=float)
    interference = np.sum(p) - p
    return config.M * betas * p / (betas * interference + config.noise_power)


def rate_bound_all(p, betas, config: SystemConfig) -> np.ndarray:
    return config.B * np.log2(1.0 + bound_sinr_all(p, betas, config))


def rate_bound_high_sinr_all(p, betas, config: SystemConfig) -> np.ndarray:
    """High-SINR bound B*log2(x); negative when x < 1."""
    x = bound_sinr_all(p, betas, config)
    if np.any(x <= 0):
        raise RateDomainError("high-SINR rate bound needs strictly positive powers")
    return config.B * np.log2(x)


def rate_bound(k: int, p, betas, config: SystemConfig) -> float:
    return float(rate_bound_all(p, betas, config)[k])


def rate_bound_high_sinr(k: int, p, betas, config: SystemConfig) -> float:
    x = bound_sinr_all(p, betas, config)[k]
    if x <= 0:
        raise RateDomainError(f"user {k}: log of non-positive SINR argument")
    return float(config.B * np.log2(x))


def energy_efficiency(rates, p, config: SystemConfig) -> EEReport:
    """Sum rate over transmit-plus-circuit power, in bit/J."""
    r = rates.rates if isinstance(rates, RateVector) else np.asarray(rates, dtype=float)
    sum_rate = float(np.sum(r))
    total_power = float(np.sum(p)) + config.circuit_power
    if total_power <= 0:
        raise ZeroDivisionError("total consumed power is zero")
    return EEReport(ee=sum_rate / total_power, sum_rate=sum_rate, total_power=total_power)


def subtractive_objective(rates, p, q: float, config: SystemConfig) -> float:
    """Dinkelbach objective sum(r) - q * (sum(p) + M*P_c); zero when q is the EE."""
    r = rates.rates if isinstance(rates, RateVector) else np.asarray(rates, dtype=float)
    return float(np.sum(r)) - q * (float(np.sum(p)) + config.circuit_power)
