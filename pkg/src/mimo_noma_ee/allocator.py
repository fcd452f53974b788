"""Energy-efficient power allocation with a two-zone (near/far) power split.

The solver alternates a closed-form KKT power update, projected subgradient
steps on the zone and rate multipliers, and a Dinkelbach update of the
energy-efficiency parameter ``q``. The same loop with a single zone is the
cell-wide baseline.

Unit conventions inside the loop:

* rates enter the rate-constraint residual as spectral efficiency (bit/s/Hz),
* zone residuals are divided by ``P_T`` before the step,
* ``q`` is stored in bit/J but enters the power map as ``q / B``, which is
  the stationarity condition of ``sum(r) - q * P`` when ``r`` carries the
  factor ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import UserGeometry
from .config import SystemConfig
from .metrics import (
    HIGH_SINR_FLOOR,
    RateVector,
    bound_sinr_all,
    energy_efficiency,
    rate_bound_all,
)

LN2 = np.log(2.0)

# tolerances used both for the stopping rule and for the acceptance checks
RATE_TOL = 1e-4  # bit/s/Hz
CAP_TOL = 1e-9  # W
SLACKNESS_TOL = 1e-3  # fraction of P_T


class DivergenceError(ArithmeticError):
    """The power map hit a non-positive denominator (step sizes too large)."""


@dataclass(frozen=True)
class ZonePartition:
    near: np.ndarray
    far: np.ndarray
    alpha: float

    @property
    def zones(self) -> tuple:
        return (self.near, self.far)

    def caps(self, P_T: float) -> np.ndarray:
        return np.array([self.alpha * P_T, (1.0 - self.alpha) * P_T])

    def zone_index(self, K: int) -> np.ndarray:
        """Zone number (0 near, 1 far) of every user."""
        z = np.ones(K, dtype=int)
        z[self.near] = 0
        return z


@dataclass
class OptimizerState:
    p: np.ndarray
    omega: np.ndarray  # one multiplier per zone (omega1, omega2 for the two-zone split)
    rho: np.ndarray
    q: float
    n: int = 0
    trace: list = field(default_factory=list)  # (q, normalized objective, zone sums)

    @property
    def omega1(self) -> float:
        return float(self.omega[0])

    @property
    def omega2(self) -> float:
        return float(self.omega[1]) if len(self.omega) > 1 else float("nan")


@dataclass(frozen=True)
class AllocationResult:
    p: np.ndarray
    partition: ZonePartition | None
    ee: float  # final q, bit/J, from the high-SINR rates
    ee_bound: float  # EE from the log2(1 + x) bound rates, bit/J
    rates_bound: RateVector
    rates_high_sinr: RateVector
    iterations: int
    converged: bool
    feasible: bool
    zone_slack: np.ndarray  # cap - zone sum, W
    rate_slack: np.ndarray  # bound SE - R_T, bit/s/Hz
    omega: np.ndarray
    rho: np.ndarray
    low_sinr_users: tuple = ()
    diverged: bool = False
    q_monotone: bool = True  # q never dropped after the first iteration
    trace: tuple = ()  # (q, normalized objective, zone sums) per iteration

    @property
    def total_power(self) -> float:
        return float(np.sum(self.p))

    @property
    def q_trace(self) -> np.ndarray:
        return np.array([t[0] for t in self.trace])


# ---------------------------------------------------------------------------
# zone split


def partition_zones(geometry: UserGeometry, config: SystemConfig) -> ZonePartition:
    d = np.asarray(geometry.distances, dtype=float)
    is_near = d < config.D / 2
    near = np.flatnonzero(is_near)
    far = np.flatnonzero(~is_near)
    return ZonePartition(near=near, far=far, alpha=near_zone_share(d, config.D))


def near_zone_share(distances, D: float) -> float:
    """Fraction of the budget given to users inside D/2, weighted by d**2."""
    d2 = np.asarray(distances, dtype=float) ** 2
    return float(np.sum(d2[d2 < (D / 2) ** 2]) / np.sum(d2))


def far_zone_share(distances, D: float) -> float:
    d2 = np.asarray(distances, dtype=float) ** 2
    return float(np.sum(d2[d2 >= (D / 2) ** 2]) / np.sum(d2))


# ---------------------------------------------------------------------------
# the update map


def effective_noise(geometry: UserGeometry, config: SystemConfig) -> np.ndarray:
    """B*N0/beta_k: the noise expressed as an equivalent transmit power."""
    return config.noise_power / np.asarray(geometry.betas, dtype=float)


def power_map(p, rho, q_se, omega_user, noise_eff) -> np.ndarray:
    """Synchronous KKT power update for every user (last axis indexes users).

    p_k = (1+rho_k) / ([sum_{j!=k} (1+rho_j) / ((sum_{i!=j} p_i + n_j) ln2) + q + omega_k] ln2)

    where ``n_j`` is the effective noise of user j and ``q_se`` the EE
    parameter per unit bandwidth. Leading axes, if any, are independent
    problems.
    """
    p_new, ok = _power_map_rows(np.asarray(p, dtype=float), rho, q_se, omega_user, noise_eff)
    if not np.all(ok):
        raise DivergenceError("non-positive denominator in the power update")
    return p_new


def _power_map_rows(p, rho, q_se, omega_user, noise_eff):
    q_se = np.asarray(q_se, dtype=float)[..., np.newaxis]
    w = (1.0 + rho) / ((np.sum(p, axis=-1, keepdims=True) - p + noise_eff) * LN2)
    denom = (np.sum(w, axis=-1, keepdims=True) - w + q_se + omega_user) * LN2
    ok = np.all((denom > 0) & np.isfinite(denom), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1.0 + rho) / denom, ok


def _user_omega(omega, zones, K) -> np.ndarray:
    out = np.zeros(K)
    for w, idx in zip(omega, zones):
        out[idx] = w
    return out


def power_update(k: int, state: OptimizerState, partition: ZonePartition,
                 geometry: UserGeometry, config: SystemConfig) -> float:
    """New power of user k from the previous iterate ``state.p``."""
    omega_user = _user_omega(state.omega, partition.zones, geometry.K)
    p = power_map(state.p, state.rho, state.q / config.B, omega_user,
                  effective_noise(geometry, config))
    return float(p[k])


def update_multipliers(state: OptimizerState, partition: ZonePartition,
                       geometry: UserGeometry, config: SystemConfig) -> OptimizerState:
    """Projected subgradient step on the zone and rate multipliers (in place)."""
    zones = partition.zones
    caps = partition.caps(config.P_T)
    state.omega = _step_zone_multipliers(state.omega, state.p, zones, caps, config)
    se = rate_bound_all(state.p, geometry.betas, config) / config.B
    state.rho = np.maximum(0.0, state.rho - config.theta2 * (se - config.R_T))
    return state


def _step_zone_multipliers(omega, p, zones, caps, config):
    out = np.array(omega, dtype=float)
    for z, (idx, cap) in enumerate(zip(zones, caps)):
        if len(idx) == 0:
            out[z] = 0.0
            continue
        slack = (cap - np.sum(p[idx])) / config.P_T
        out[z] = max(0.0, out[z] - config.theta1 * slack)
    return out


def update_q(state: OptimizerState, geometry: UserGeometry, config: SystemConfig) -> float:
    r = high_sinr_rates(state.p, geometry, config)
    return float(np.sum(r) / (np.sum(state.p) + config.circuit_power))


def high_sinr_rates(p, geometry, config) -> np.ndarray:
    x = bound_sinr_all(p, geometry.betas, config)
    with np.errstate(divide="ignore"):
        return config.B * np.log2(x)


# ---------------------------------------------------------------------------
# feasibility of the rate floor


def min_power_allocation(geometry: UserGeometry, config: SystemConfig):
    """Componentwise-minimal powers meeting every rate floor, or None.

    With target SINR t = 2**R_T - 1 each floor reads
    (M/t + 1) p_k - sum(p) >= n_k, whose minimal solution is
    p_k = (S + n_k) / (M/t + 1) with S = sum(n) / (M/t + 1 - K).
    """
    t = 2.0 ** config.R_T - 1.0
    K = geometry.K
    if t <= 0:
        return np.zeros(K)
    a = config.M / t + 1.0
    if a - K <= 0:
        return None
    n = effective_noise(geometry, config)
    S = np.sum(n) / (a - K)
    return (S + n) / a


def rate_floor_feasible(geometry, config, zones, caps) -> bool:
    p_min = min_power_allocation(geometry, config)
    if p_min is None:
        return False
    return all(np.sum(p_min[idx]) <= cap + CAP_TOL for idx, cap in zip(zones, caps))


# ---------------------------------------------------------------------------
# the iterative solver


def _zone_membership(geometries, config, layout):
    """Boolean (T, Z, K) zone membership and (T, Z) caps for a batch of geometries."""
    K = geometries[0].K
    if any(g.K != K for g in geometries):
        raise ValueError("all geometries in a batch need the same user count")
    T = len(geometries)
    if layout == "two-zone":
        member = np.zeros((T, 2, K), dtype=bool)
        caps = np.empty((T, 2))
        parts = []
        for t, g in enumerate(geometries):
            part = partition_zones(g, config)
            member[t, 0, part.near] = True
            member[t, 1, part.far] = True
            caps[t] = part.caps(config.P_T)
            parts.append(part)
        return member, caps, parts
    if layout == "single":
        return np.ones((T, 1, K), dtype=bool), np.full((T, 1), config.P_T), [None] * T
    raise ValueError(f"unknown zone layout {layout!r}")


def solve_many(geometries, config: SystemConfig, layout: str = "two-zone",
               keep_trace: bool | None = None) -> list:
    """Run the iteration on a batch of independent geometries in lockstep.

    Each problem follows exactly the sequence it would follow on its own;
    finished problems are frozen while the rest keep iterating.
    """
    geometries = list(geometries)
    if not geometries:
        return []
    if keep_trace is None:
        keep_trace = len(geometries) == 1
    member, caps, parts = _zone_membership(geometries, config, layout)
    T, Z, K = member.shape
    betas = np.array([g.betas for g in geometries], dtype=float)
    n_eff = config.noise_power / betas
    memberf = member.astype(float)
    active = member.any(axis=2)
    B, M, circuit = config.B, config.M, config.circuit_power

    counts = np.maximum(member.sum(axis=2), 1)
    p = np.einsum("tz,tzk->tk", caps / counts, memberf)
    # users in a zone whose cap is zero still need a positive starting power
    p = np.maximum(p, np.finfo(float).tiny)

    def sinr(p_, n_):
        return M * p_ / (np.sum(p_, axis=-1, keepdims=True) - p_ + n_)

    q = B * np.sum(np.log2(sinr(p, n_eff)), axis=-1) / (np.sum(p, axis=-1) + circuit)
    omega = np.zeros((T, Z))
    rho = np.zeros((T, K))
    iters = np.zeros(T, dtype=int)
    converged = np.zeros(T, dtype=bool)
    diverged = np.zeros(T, dtype=bool)
    monotone = np.ones(T, dtype=bool)
    trace = [[(float(q[t]), float("nan"), tuple(memberf[t] @ p[t]))] for t in range(T)] if keep_trace else None

    live = np.arange(T)
    for n in range(1, config.max_iters + 1):
        if live.size == 0:
            break
        pl, rl, ql, ol, ml = p[live], rho[live], q[live], omega[live], memberf[live]
        omega_user = np.einsum("tz,tzk->tk", ol, ml)
        p_new, ok = _power_map_rows(pl, rl, ql / B, omega_user, n_eff[live])
        if not np.all(ok):
            diverged[live[~ok]] = True
            iters[live[~ok]] = n - 1
            live, pl, rl, ql, ol, ml, p_new = (a[ok] for a in (live, pl, rl, ql, ol, ml, p_new))
            if live.size == 0:
                break

        x = sinr(p_new, n_eff[live])
        sum_r = B * np.sum(np.log2(x), axis=-1)
        denom = np.sum(p_new, axis=-1) + circuit
        with np.errstate(divide="ignore", invalid="ignore"):
            objective = np.abs(sum_r - ql * denom) / np.abs(sum_r)
        dp = np.max(np.abs(p_new - pl) / pl, axis=-1)

        zone_sums = np.einsum("tzk,tk->tz", ml, p_new)
        zone_slack = caps[live] - zone_sums
        al = active[live]
        ol = np.where(al, np.maximum(0.0, ol - config.theta1 * zone_slack / config.P_T), 0.0)
        rate_slack = np.log2(1.0 + x) - config.R_T
        rl = np.maximum(0.0, rl - config.theta2 * rate_slack)
        q_new = sum_r / denom
        if n >= 2:
            monotone[live] &= q_new >= ql - 1e-12 * np.abs(q_new)

        p[live], rho[live], omega[live], q[live] = p_new, rl, ol, q_new
        iters[live] = n
        if keep_trace:
            for i, t in enumerate(live):
                trace[t].append((float(q_new[i]), float(objective[i]), tuple(zone_sums[i])))

        done = (
            (objective <= config.tau)
            & (dp <= config.tau)
            & np.all(rate_slack >= -RATE_TOL, axis=-1)
            & np.all(rl * rate_slack <= SLACKNESS_TOL, axis=-1)
            & np.all(~al | (zone_slack >= -CAP_TOL), axis=-1)
            & np.all(ol * np.maximum(zone_slack, 0.0) <= SLACKNESS_TOL * config.P_T, axis=-1)
        )
        converged[live[done]] = True
        live = live[~done]

    out = []
    for t, g in enumerate(geometries):
        zones = tuple(np.flatnonzero(member[t, z]) for z in range(Z))
        out.append(_result(
            g, config, p[t], q[t], omega[t], rho[t], zones, caps[t], parts[t],
            iterations=int(iters[t]), converged=bool(converged[t]), diverged=bool(diverged[t]),
            q_monotone=bool(monotone[t]), trace=tuple(trace[t]) if keep_trace else (),
        ))
    return out


def _result(geometry, config, p, q, omega, rho, zones, caps, partition, *, iterations,
            converged, diverged, q_monotone=True, trace=()) -> AllocationResult:
    r9 = rate_bound_all(p, geometry.betas, config)
    r10 = high_sinr_rates(p, geometry, config)
    x = bound_sinr_all(p, geometry.betas, config)
    zone_sums = np.array([np.sum(p[idx]) for idx in zones])
    return AllocationResult(
        p=p.copy(),
        partition=partition,
        ee=float(q),
        ee_bound=energy_efficiency(r9, p, config).ee,
        rates_bound=RateVector(r9, "bound"),
        rates_high_sinr=RateVector(r10, "bound-high-sinr"),
        iterations=iterations,
        converged=converged,
        feasible=rate_floor_feasible(geometry, config, zones, caps),
        zone_slack=np.asarray(caps, dtype=float) - zone_sums,
        rate_slack=r9 / config.B - config.R_T,
        omega=np.array(omega, dtype=float),
        rho=np.array(rho, dtype=float),
        low_sinr_users=tuple(int(k) for k in np.flatnonzero(x < HIGH_SINR_FLOOR)),
        diverged=diverged,
        q_monotone=q_monotone,
        trace=trace,
    )


def solve(geometry: UserGeometry, config: SystemConfig) -> AllocationResult:
    """Two-zone energy-efficient allocation (near zone gets alpha * P_T)."""
    return solve_many([geometry], config, "two-zone")[0]


def solve_baseline_single_zone(geometry: UserGeometry, config: SystemConfig) -> AllocationResult:
    """Same iteration with one cell-wide budget sum(p) <= P_T."""
    return solve_many([geometry], config, "single")[0]


def equal_power_allocation(geometry: UserGeometry, config: SystemConfig) -> AllocationResult:
    K = geometry.K
    p = np.full(K, config.P_T / K)
    q = np.sum(high_sinr_rates(p, geometry, config)) / (np.sum(p) + config.circuit_power)
    return _result(geometry, config, p, q, np.zeros(1), np.zeros(K), (np.arange(K),),
                   np.array([config.P_T]), None, iterations=0, converged=True, diverged=False)


# ---------------------------------------------------------------------------
# standard interference function axioms


def sif_axiom_check(p, geometry: UserGeometry, config: SystemConfig, c: float = 2.0,
                    p_larger=None, rho=None, q: float = 1.0, omega_user=None) -> dict:
    """Check positivity, monotonicity and scalability of the power map at ``p``.

    Multipliers and ``q`` (here already per unit bandwidth) are held fixed.
    ``p_larger`` defaults to ``2 * p``.
    """
    p = np.asarray(p, dtype=float)
    K = len(p)
    rho = np.zeros(K) if rho is None else np.asarray(rho, dtype=float)
    omega_user = np.zeros(K) if omega_user is None else np.asarray(omega_user, dtype=float)
    p_larger = 2.0 * p if p_larger is None else np.asarray(p_larger, dtype=float)
    n_eff = effective_noise(geometry, config)

    def I(x):
        return power_map(x, rho, q, omega_user, n_eff)

    Ip = I(p)
    return {
        "positivity": bool(np.all(Ip > 0)),
        "monotonicity": bool(np.all(I(p_larger) >= Ip)),
        "scalability": bool(np.all(c * Ip > I(c * p))),
    }
