"""Matched-seed Monte-Carlo trials, parameter sweeps and a brute-force oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .allocator import (
    AllocationResult,
    RATE_TOL,
    equal_power_allocation,
    partition_zones,
    solve_many,
)
from .channel import UserGeometry, draw_channel, generate_user_geometry
from .config import SystemConfig, dbm_to_watt, watt_to_dbm
from .metrics import bound_sinr_all, rate_from_sinr, sinr_exact_all

ALLOCATORS = ("proposed", "baseline", "equal")

# axis name -> (config field, converter from the axis' display unit to config units)
AXES = {
    "P_c": ("P_c", dbm_to_watt),  # values in dBm
    "M": ("M", int),
    "P_T": ("P_T", float),  # values in W
    "R_T": ("R_T", float),  # values in bit/s/Hz
}
AXIS_ALIASES = {"pc": "P_c", "m": "M", "pt": "P_T", "rt": "R_T"}

DEFAULT_GRIDS = {
    "P_c": tuple(range(0, 15, 2)),
    "M": (32, 64, 96, 128),
    "P_T": (1.0, 2.0, 3.0, 4.0),
    "R_T": (3.0, 4.0, 5.0, 6.0),
}


@dataclass(frozen=True)
class AllocatorOutcome:
    ee: float  # bit/J, log2(1 + x) bound rates
    ee_q: float  # bit/J, solver's own high-SINR EE
    power: float  # W, total transmit power
    iterations: int
    converged: bool
    feasible: bool
    rates_ok: bool
    q_monotone: bool

    @classmethod
    def from_result(cls, res: AllocationResult, config: SystemConfig) -> "AllocatorOutcome":
        return cls(
            ee=res.ee_bound,
            ee_q=res.ee,
            power=res.total_power,
            iterations=res.iterations,
            converged=res.converged,
            feasible=res.feasible,
            rates_ok=bool(np.all(res.rate_slack >= -1e-3)),
            q_monotone=res.q_monotone,
        )


@dataclass(frozen=True)
class TrialResult:
    seed: int
    distances: tuple
    alpha: float
    geometry_digest: str
    outcomes: dict  # allocator name -> AllocatorOutcome
    exact_ee: dict = field(default_factory=dict)  # allocator name -> Monte-Carlo EE, optional

    def __getitem__(self, name: str) -> AllocatorOutcome:
        return self.outcomes[name]


def q_trace_monotone(q, rel_tol: float = 1e-12) -> bool:
    """True when q never drops after the first iteration (up to round-off)."""
    q = np.asarray(q, dtype=float)
    if len(q) < 3:
        return True
    tail = q[1:]
    return bool(np.all(np.diff(tail) >= -rel_tol * np.abs(tail[1:])))


def exact_rate_ee(result: AllocationResult, geometry: UserGeometry, config: SystemConfig,
                  rng: np.random.Generator, draws: int) -> float:
    """EE from exact MRT SINR averaged over ``draws`` small-scale fading draws."""
    total = 0.0
    for _ in range(draws):
        ch = draw_channel(config, geometry, rng)
        total += float(np.sum(rate_from_sinr(sinr_exact_all(result.p, ch, config), config.B)))
    return total / draws / (result.total_power + config.circuit_power)


def run_trial(config: SystemConfig, seed: int, exact_draws: int = 0) -> TrialResult:
    """Run all three allocators on one geometry drawn from ``seed``."""
    return run_trials(config.replace(seed=seed), 1, exact_draws=exact_draws)[0]


def run_trials(config: SystemConfig, trials: int, exact_draws: int = 0) -> list:
    """Trials with seeds config.seed + i, in index order.

    Geometry i comes from ``default_rng(config.seed + i)``; the iterative
    allocators run on the whole batch at once.
    """
    seeds = [config.seed + i for i in range(trials)]
    rngs = [np.random.default_rng(s) for s in seeds]
    geometries = [generate_user_geometry(config, rng) for rng in rngs]
    digests = [g.digest() for g in geometries]
    results = {
        "proposed": solve_many(geometries, config, "two-zone"),
        "baseline": solve_many(geometries, config, "single"),
        "equal": [equal_power_allocation(g, config) for g in geometries],
    }
    out = []
    for i, (seed, g) in enumerate(zip(seeds, geometries)):
        # every allocator must have seen the same users
        assert g.digest() == digests[i]
        per = {name: res[i] for name, res in results.items()}
        exact = {}
        if exact_draws:
            exact = {name: exact_rate_ee(r, g, config, rngs[i], exact_draws) for name, r in per.items()}
        out.append(TrialResult(
            seed=seed,
            distances=tuple(float(d) for d in g.distances),
            alpha=partition_zones(g, config).alpha,
            geometry_digest=digests[i],
            outcomes={name: AllocatorOutcome.from_result(r, config) for name, r in per.items()},
            exact_ee=exact,
        ))
    return out


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    ci95: float
    min: float
    max: float
    n: int


def aggregate(values) -> Summary:
    """Mean, sample sd, normal-approximation 95% half-width, min and max."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("cannot aggregate an empty list")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return Summary(
        mean=float(np.mean(x)),
        sd=sd,
        ci95=1.96 * sd / math.sqrt(x.size),
        min=float(np.min(x)),
        max=float(np.max(x)),
        n=int(x.size),
    )


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    ee_proposed: Summary
    ee_baseline: Summary
    ee_equal: Summary
    improvement: Summary
    power_consumed_dbm_mean: float
    power_consumed_w_mean: float
    converged_fraction: float
    feasible_fraction: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: tuple
    rows: tuple
    trial_results: tuple = ()


def summarize_trials(axis_value, trials: list) -> SweepRow:
    prop = [t["proposed"].ee for t in trials]
    base = [t["baseline"].ee for t in trials]
    power = aggregate(t["proposed"].power for t in trials).mean
    return SweepRow(
        axis_value=axis_value,
        ee_proposed=aggregate(prop),
        ee_baseline=aggregate(base),
        ee_equal=aggregate(t["equal"].ee for t in trials),
        improvement=aggregate(np.subtract(prop, base)),
        power_consumed_dbm_mean=watt_to_dbm(power),
        power_consumed_w_mean=power,
        converged_fraction=float(np.mean([t["proposed"].converged for t in trials])),
        feasible_fraction=float(np.mean([t["proposed"].feasible for t in trials])),
        trials=len(trials),
    )


def resolve_axis(axis: str) -> str:
    axis = AXIS_ALIASES.get(axis, axis)
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(AXES)}")
    return axis


def config_at(config: SystemConfig, axis: str, value) -> SystemConfig:
    name, conv = AXES[resolve_axis(axis)]
    return config.replace(**{name: conv(value)})


def sweep(config: SystemConfig, axis: str, values, trials: int,
          keep_trials: bool = False) -> SweepResult:
    """Matched-seed trials at every axis value; the seed set is shared across values."""
    axis = resolve_axis(axis)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows, kept = [], []
    for v in values:
        res = run_trials(config_at(config, axis, v), trials)
        rows.append(summarize_trials(v, res))
        if keep_trials:
            kept.append(tuple(res))
    return SweepResult(axis=axis, values=tuple(values), rows=tuple(rows), trial_results=tuple(kept))


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleResult:
    p: np.ndarray | None
    ee: float  # bit/J with high-SINR rates, -inf if nothing feasible
    feasible: bool
    grid_points: int


def grid_levels(cap: float, resolution: float, spacing: str = "linear") -> np.ndarray:
    """Per-user power levels: {r*cap, 2r*cap, ..., cap}, or 1/r geometric levels.

    The geometric grid spans [LOG_GRID_FLOOR * cap, cap]; it is needed when the
    optimum sits far below the first linear level.
    """
    steps = int(round(1.0 / resolution))
    if spacing == "linear":
        return np.arange(1, steps + 1) * resolution * cap
    if spacing == "log":
        return cap * np.geomspace(LOG_GRID_FLOOR, 1.0, steps)
    raise ValueError(f"unknown grid spacing {spacing!r}")


LOG_GRID_FLOOR = 1e-7


def brute_force_oracle(geometry: UserGeometry, config: SystemConfig, resolution: float = 0.005,
                       zones: str = "two-zone", spacing: str = "linear",
                       chunk: int = 1 << 20) -> OracleResult:
    """Exhaustive grid search for the best feasible EE.

    Each p_k ranges over ``grid_levels`` of the budget of the user's zone.
    Feasibility means zone sums within caps and every rate floor met
    (log2(1 + x) bound); the objective is the high-SINR EE the solver
    maximizes.
    """
    K = geometry.K
    if K > 4:
        raise ValueError("brute-force oracle is limited to K <= 4")
    if not 0 < resolution <= 0.1:
        raise ValueError("resolution must lie in (0, 0.1]")
    if zones == "two-zone":
        part = partition_zones(geometry, config)
        groups, caps = part.zones, part.caps(config.P_T)
    elif zones == "single":
        groups, caps = (np.arange(K),), np.array([config.P_T])
    else:
        raise ValueError(f"unknown zone layout {zones!r}")

    user_cap = np.empty(K)
    for idx, cap in zip(groups, caps):
        user_cap[idx] = cap
    levels = [grid_levels(user_cap[k], resolution, spacing) for k in range(K)]
    steps = len(levels[0])

    betas = np.asarray(geometry.betas, dtype=float)
    n_eff = config.noise_power / betas
    se_floor = config.R_T
    best_ee, best_p = -np.inf, None
    total = steps**K
    # iterate over the leading K-1 coordinates in blocks, last coordinate vectorized
    lead = itertools.product(*[range(steps)] * (K - 1))
    block = max(1, chunk // steps)
    while True:
        heads = list(itertools.islice(lead, block))
        if not heads:
            break
        idx = np.asarray(heads, dtype=int).reshape(len(heads), K - 1)
        P = np.empty((len(heads), steps, K))
        for k in range(K - 1):
            P[:, :, k] = levels[k][idx[:, k]][:, None]
        P[:, :, K - 1] = levels[K - 1][None, :]
        P = P.reshape(-1, K)

        ok = np.ones(len(P), dtype=bool)
        for g, cap in zip(groups, caps):
            if len(g):
                ok &= P[:, g].sum(axis=1) <= cap * (1 + 1e-12)
        S = P.sum(axis=1, keepdims=True)
        x = config.M * P / (S - P + n_eff)
        ok &= np.all(np.log2(1.0 + x) >= se_floor - RATE_TOL, axis=1)
        ee = config.B * np.sum(np.log2(x), axis=1) / (S[:, 0] + config.circuit_power)
        ee = np.where(ok, ee, -np.inf)
        i = int(np.argmax(ee))
        if ee[i] > best_ee:
            best_ee, best_p = float(ee[i]), P[i].copy()
    return OracleResult(p=best_p, ee=best_ee, feasible=best_p is not None, grid_points=total)


def high_sinr_ee(p, geometry: UserGeometry, config: SystemConfig) -> float:
    x = bound_sinr_all(p, geometry.betas, config)
    return float(config.B * np.sum(np.log2(x)) / (np.sum(p) + config.circuit_power))


def snap_to_grid(p, geometry: UserGeometry, config: SystemConfig, resolution: float):
    """Nearest grid point (per the oracle's grid) that keeps the zone sums within caps."""
    part = partition_zones(geometry, config)
    caps = part.caps(config.P_T)
    user_cap = np.empty(geometry.K)
    for idx, cap in zip(part.zones, caps):
        user_cap[idx] = cap
    step = resolution * user_cap
    k = np.clip(np.round(np.asarray(p) / step), 1, round(1 / resolution))
    q = k * step
    for idx, cap in zip(part.zones, caps):
        while len(idx) and q[idx].sum() > cap * (1 + 1e-12):
            j = idx[np.argmax(q[idx])]
            q[j] -= step[j]
    return q
