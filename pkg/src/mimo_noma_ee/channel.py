"""Cell geometry, large-scale gains and Rayleigh/MRT channel draws."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


class DegenerateChannelError(ValueError):
    pass


def large_scale_gain(distance, shadow_db, phi: float, epsilon: float) -> np.ndarray:
    """beta = phi * theta / d**epsilon with theta = 10**(shadow_db/10)."""
    theta = 10.0 ** (np.asarray(shadow_db, dtype=float) / 10.0)
    return phi * theta / np.asarray(distance, dtype=float) ** epsilon


@dataclass(frozen=True)
class UserGeometry:
    distances: np.ndarray
    shadow_dB: np.ndarray
    betas: np.ndarray

    @classmethod
    def from_distances(cls, distances, config: SystemConfig, shadow_dB=None) -> "UserGeometry":
        """Build a geometry from explicit distances (shadowing defaults to 0 dB)."""
        d = np.asarray(distances, dtype=float)
        s = np.zeros_like(d) if shadow_dB is None else np.asarray(shadow_dB, dtype=float)
        return cls(d, s, large_scale_gain(d, s, config.phi, config.epsilon))

    @property
    def K(self) -> int:
        return len(self.distances)

    def permuted(self, order) -> "UserGeometry":
        order = np.asarray(order)
        return UserGeometry(self.distances[order], self.shadow_dB[order], self.betas[order])

    def digest(self) -> str:
        """Stable hash of the user positions and gains, used for matched-seed checks."""
        h = hashlib.sha256()
        for arr in (self.distances, self.shadow_dB, self.betas):
            h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray  # (M, K) small-scale fading
    G: np.ndarray  # (M, K) composite channel H diag(sqrt(beta))
    V: np.ndarray  # (M, K) unit-norm MRT precoders


def generate_user_geometry(config: SystemConfig, rng: np.random.Generator) -> UserGeometry:
    """Drop K users uniformly (in area) over the annulus d_min <= d <= D.

    Shadowing is log-normal with ``sigma2_dB`` as the variance of the dB value,
    drawn once per user.
    """
    u = rng.uniform(size=config.K)
    d = np.sqrt(config.d_min**2 + u * (config.D**2 - config.d_min**2))
    shadow = rng.normal(0.0, np.sqrt(config.sigma2_dB), size=config.K)
    return UserGeometry(d, shadow, large_scale_gain(d, shadow, config.phi, config.epsilon))


def mrt_precoder(g) -> np.ndarray:
    g = np.asarray(g)
    norm = np.linalg.norm(g)
    if norm == 0.0:
        raise DegenerateChannelError("cannot build an MRT precoder for a zero channel vector")
    return g / norm


def compose_channel(H, betas) -> ChannelRealization:
    """Scale column k of H by sqrt(beta_k) and attach MRT precoders."""
    H = np.asarray(H, dtype=complex)
    G = H * np.sqrt(np.asarray(betas, dtype=float))[np.newaxis, :]
    norms = np.linalg.norm(G, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateChannelError("zero channel column")
    return ChannelRealization(H=H, G=G, V=G / norms)


def draw_channel(config: SystemConfig, geometry: UserGeometry, rng: np.random.Generator) -> ChannelRealization:
    """Draw i.i.d. CN(0, 1) small-scale fading and compose it with the geometry."""
    shape = (config.M, geometry.K)
    H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return compose_channel(H, geometry.betas)
