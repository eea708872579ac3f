"""System-level Monte Carlo simulator, independent of the closed forms.

Each realization drops base stations, cellular UEs, and D2D pairs as
PPPs on a square torus, associates every UE with its nearest BS,
schedules one non-truncated cellular UE per cell uniformly at random,
applies the interference-protection rule to both D2D directions, and
measures SINR at every active receiver with iid unit-mean exponential
fading per probe-transmitter pair. Seeding is hierarchical: stream
(seed, k, stage) drives realization k's stage, so runs are reproducible
and realizations are independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import Mode, NetworkConfig, Scenario

#: stage offsets for the per-realization RNG streams
_STAGE_GENERATE = 0
_STAGE_SCHEDULE = 1
_STAGE_FADING = 2


def _rng(seed, stage):
    base = seed if isinstance(seed, (tuple, list)) else (seed,)
    return np.random.default_rng(tuple(base) + (stage,))


@dataclass
class Realization:
    """One network drop on an L x L torus, filled in two stages."""

    seed: tuple
    side: float  # meters
    bs: np.ndarray  # (n_bs, 2)
    cell_ue: np.ndarray  # (n_cell, 2)
    f_pos: np.ndarray  # (n_pairs, 2) f-D2D transmitter of the forward link
    r_pos: np.ndarray  # (n_pairs, 2) its pair partner
    pair_dist: np.ndarray  # (n_pairs,) separation r_d
    cell_assoc: np.ndarray
    cell_dist: np.ndarray  # r_c of each cellular UE
    f_assoc: np.ndarray
    f_dist: np.ndarray  # nearest-BS distance of the f-UE
    r_assoc: np.ndarray
    r_dist: np.ndarray  # nearest-BS distance of the r-UE (r_e)
    # stage 2: scheduling and mode selection
    scheduled: np.ndarray = field(default=None)  # indices into cell_ue
    p_cell: np.ndarray = field(default=None)
    f_active: np.ndarray = field(default=None)
    r_active: np.ndarray = field(default=None)
    p_f: np.ndarray = field(default=None)  # power where f_active, else 0
    p_r: np.ndarray = field(default=None)


def generate(cfg: NetworkConfig, area_km2: float, seed) -> Realization:
    """Drop the PPPs and compute every association distance."""
    side = math.sqrt(area_km2) * 1000.0
    if side <= 2.0 * cfg.derived().r_bar:
        raise ValueError(
            f"area side {side:.0f} m must exceed twice the maximum pair "
            f"separation {cfg.derived().r_bar:.0f} m for torus distances"
        )
    rng = _rng(seed, _STAGE_GENERATE)
    area = side * side

    n_bs = max(1, rng.poisson(cfg.lambda_bs * area))
    bs = rng.random((n_bs, 2)) * side
    n_cell = rng.poisson(cfg.lambda_c * area)
    cell_ue = rng.random((n_cell, 2)) * side
    n_pairs = rng.poisson(cfg.lambda_d * area)
    f_pos = rng.random((n_pairs, 2)) * side
    pair_dist = cfg.derived().r_bar * rng.random(n_pairs) ** (1.0 / (2.0 - cfg.omega))
    angle = rng.random(n_pairs) * 2.0 * math.pi
    r_pos = np.mod(
        f_pos + pair_dist[:, None] * np.stack([np.cos(angle), np.sin(angle)], axis=1),
        side,
    )

    tree = cKDTree(bs, boxsize=side)
    cell_dist, cell_assoc = tree.query(cell_ue) if n_cell else (np.empty(0), np.empty(0, int))
    f_dist, f_assoc = tree.query(f_pos) if n_pairs else (np.empty(0), np.empty(0, int))
    r_dist, r_assoc = tree.query(r_pos) if n_pairs else (np.empty(0), np.empty(0, int))

    return Realization(
        seed=tuple(seed) if isinstance(seed, (tuple, list)) else (seed,),
        side=side,
        bs=bs,
        cell_ue=cell_ue,
        f_pos=f_pos,
        r_pos=r_pos,
        pair_dist=pair_dist,
        cell_assoc=np.asarray(cell_assoc, int),
        cell_dist=np.asarray(cell_dist, float),
        f_assoc=np.asarray(f_assoc, int),
        f_dist=np.asarray(f_dist, float),
        r_assoc=np.asarray(r_assoc, int),
        r_dist=np.asarray(r_dist, float),
    )


def schedule_and_select(real: Realization, cfg: NetworkConfig) -> Realization:
    """Pick one non-truncated cellular UE per cell and apply the
    interference-protection rule to both D2D directions."""
    rng = _rng(real.seed, _STAGE_SCHEDULE)
    d = cfg.derived()

    req_c = real.cell_dist**cfg.eta_c * cfg.rho_c
    ok = req_c <= cfg.p_u
    idx_ok = np.nonzero(ok)[0]
    if idx_ok.size:
        # uniform pick per cell: random priorities, keep the best per cell
        prio = rng.random(idx_ok.size)
        order = np.lexsort((prio, real.cell_assoc[idx_ok]))
        sorted_ok = idx_ok[order]
        cells = real.cell_assoc[sorted_ok]
        first = np.ones(sorted_ok.size, bool)
        first[1:] = cells[1:] != cells[:-1]
        real.scheduled = sorted_ok[first]
    else:
        real.scheduled = np.empty(0, int)
    real.p_cell = req_c[real.scheduled]

    req_f = real.pair_dist**cfg.eta_d * d.rho_d
    req_r = real.pair_dist**cfg.eta_d * d.rho_e
    budget_f = cfg.t_d * real.f_dist**cfg.eta_c * cfg.rho_c
    budget_r = cfg.t_d * real.r_dist**cfg.eta_c * cfg.rho_c
    real.f_active = (req_f < cfg.p_u) & (req_f < budget_f)
    real.r_active = (req_r < cfg.p_u) & (req_r < budget_r)
    real.p_f = np.where(real.f_active, req_f, 0.0)
    real.p_r = np.where(real.r_active, req_r, 0.0)
    return real


@dataclass
class EmpiricalStats:
    """Per-realization measurement output."""

    sinr: dict  # Mode -> array of SINR samples at active receivers
    n_bs: int
    n_cell: int
    n_cell_ok: int
    n_scheduled: int
    n_pairs: int
    n_f_active: int
    n_r_active: int
    n_fd: int
    p_cell: np.ndarray  # inversion powers of all non-truncated cellular UEs
    p_f: np.ndarray  # powers of active f transmitters
    p_r: np.ndarray
    rd_samples: np.ndarray
    re_samples: np.ndarray
    interference: dict | None = None  # (kappa, chi) -> per-probe sums


def _torus_dist(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    delta = np.abs(a[:, None, :] - b[None, :, :])
    delta = np.minimum(delta, side - delta)
    return np.hypot(delta[..., 0], delta[..., 1])


def measure_sinr(
    real: Realization,
    cfg: NetworkConfig,
    scenario: Scenario = Scenario.FD,
    zeta=None,
    n_probes=None,
    record_interference: bool = False,
) -> EmpiricalStats:
    """Measure SINR at every active receiver of every mode the scenario
    carries (optionally capped at n_probes receivers per mode).

    Residual self-interference zeta * (own link power) is added at D2D
    receivers whose pair has both directions active (FD scenario only).
    """
    if real.scheduled is None:
        raise ValueError("realization not scheduled; call schedule_and_select first")
    z = cfg.zeta if zeta is None else zeta
    rng = _rng(real.seed, _STAGE_FADING)
    d = cfg.derived()
    side = real.side

    use_f = scenario in (Scenario.FD, Scenario.HD)
    use_r = scenario is Scenario.FD
    idx_f = np.nonzero(real.f_active)[0] if use_f else np.empty(0, int)
    idx_r = np.nonzero(real.r_active)[0] if use_r else np.empty(0, int)

    # transmitter classes: (positions, powers) in a fixed order
    tx = {
        Mode.CELLULAR: (real.cell_ue[real.scheduled], real.p_cell),
        Mode.F_D2D: (real.f_pos[idx_f], real.p_f[idx_f]),
        Mode.R_D2D: (real.r_pos[idx_r], real.p_r[idx_r]),
    }

    def cap(n):
        return n if n_probes is None else min(n, n_probes)

    # probe sets: (receiver positions, sensitivity, eta, pair ids or None)
    probes = {}
    n_sched = real.scheduled.size
    probes[Mode.CELLULAR] = (
        real.bs[real.cell_assoc[real.scheduled[: cap(n_sched)]]],
        cfg.rho_c,
        cfg.eta_c,
        None,
    )
    if use_f:
        sel = idx_f[: cap(idx_f.size)]
        probes[Mode.F_D2D] = (real.r_pos[sel], d.rho_d, cfg.eta_d, sel)
    if use_r:
        sel = idx_r[: cap(idx_r.size)]
        probes[Mode.R_D2D] = (real.f_pos[sel], d.rho_e, cfg.eta_d, sel)

    sinr = {}
    interference = {} if record_interference else None
    for chi, (rx, rho, eta, pair_ids) in probes.items():
        n_rx = rx.shape[0]
        h0 = rng.exponential(size=n_rx)
        total = np.full(n_rx, cfg.sigma2)
        for kappa, (pos, power) in tx.items():
            n_tx = pos.shape[0]
            if n_rx == 0 or n_tx == 0:
                if record_interference:
                    interference[(kappa, chi)] = np.zeros(n_rx)
                continue
            fading = rng.exponential(size=(n_rx, n_tx))
            with np.errstate(divide="ignore"):
                contrib = power[None, :] * fading * _torus_dist(rx, pos, side) ** (-eta)
            # null out each probe's own transmitter(s)
            if kappa is chi and chi is Mode.CELLULAR:
                np.fill_diagonal(contrib, 0.0)
            elif pair_ids is not None and kappa is not Mode.CELLULAR:
                own_pool = idx_f if kappa is Mode.F_D2D else idx_r
                col = np.searchsorted(own_pool, pair_ids)
                valid = (col < own_pool.size) & (own_pool[np.minimum(col, own_pool.size - 1)] == pair_ids)
                rows = np.nonzero(valid)[0]
                contrib[rows, col[valid]] = 0.0
            part = contrib.sum(axis=1)
            total += part
            if record_interference:
                interference[(kappa, chi)] = part
        if chi is not Mode.CELLULAR and scenario is Scenario.FD and z > 0 and n_rx:
            own_power = real.p_f if chi is Mode.F_D2D else real.p_r
            both = real.f_active[pair_ids] & real.r_active[pair_ids]
            total += np.where(both, z * own_power[pair_ids], 0.0)
        sinr[chi] = rho * h0 / total

    both_active = real.f_active & real.r_active
    req_c = real.cell_dist**cfg.eta_c * cfg.rho_c
    return EmpiricalStats(
        sinr=sinr,
        n_bs=real.bs.shape[0],
        n_cell=real.cell_ue.shape[0],
        n_cell_ok=int((req_c <= cfg.p_u).sum()),
        n_scheduled=n_sched,
        n_pairs=real.pair_dist.size,
        n_f_active=int(real.f_active.sum()),
        n_r_active=int(real.r_active.sum()),
        n_fd=int(both_active.sum()),
        p_cell=req_c[req_c <= cfg.p_u],
        p_f=real.p_f[real.f_active],
        p_r=real.p_r[real.r_active],
        rd_samples=real.pair_dist,
        re_samples=real.r_dist,
        interference=interference,
    )


def run_realization(
    cfg: NetworkConfig,
    area_km2: float,
    seed,
    scenario: Scenario = Scenario.FD,
    zeta=None,
    n_probes=None,
    record_interference: bool = False,
    keep_distances: bool = True,
) -> EmpiricalStats:
    real = schedule_and_select(generate(cfg, area_km2, seed), cfg)
    stats = measure_sinr(real, cfg, scenario, zeta, n_probes, record_interference)
    if not keep_distances:
        stats.rd_samples = np.empty(0)
        stats.re_samples = np.empty(0)
        stats.p_cell = np.asarray([stats.p_cell.mean()]) if stats.p_cell.size else np.empty(0)
        stats.p_f = np.asarray([stats.p_f.mean()]) if stats.p_f.size else np.empty(0)
        stats.p_r = np.asarray([stats.p_r.mean()]) if stats.p_r.size else np.empty(0)
    return stats


def _worker(args):
    cfg, area_km2, seed, scenario, zeta, n_probes, keep = args
    return run_realization(
        cfg, area_km2, seed, scenario, zeta, n_probes, keep_distances=keep
    )


def run_batch(
    cfg: NetworkConfig,
    area_km2: float,
    n_realizations: int,
    master_seed: int,
    scenario: Scenario = Scenario.FD,
    zeta=None,
    n_probes=None,
    workers: int = 1,
    keep_distances: bool = False,
):
    """Run independent realizations (seeds (master_seed, k)) and return
    their EmpiricalStats in realization order."""
    base = tuple(master_seed) if isinstance(master_seed, (tuple, list)) else (master_seed,)
    jobs = [
        (cfg, area_km2, base + (k,), scenario, zeta, n_probes, keep_distances)
        for k in range(n_realizations)
    ]
    if workers <= 1:
        return [_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def empirical_outage(stats_list, theta):
    """Per-mode outage across realizations with a clustered standard error.

    Returns {mode: (outage, stderr)} pooling probes over realizations;
    the stderr treats each realization as one cluster.
    """
    out = {}
    modes = stats_list[0].sinr.keys()
    for mode in modes:
        hits = np.array([float((s.sinr[mode] < theta).sum()) for s in stats_list])
        counts = np.array([s.sinr[mode].size for s in stats_list], dtype=float)
        total = counts.sum()
        if total == 0:
            out[mode] = (math.nan, math.nan)
            continue
        p = hits.sum() / total
        # ratio-estimator cluster variance
        resid = hits - p * counts
        var = (resid**2).sum() * len(stats_list) / (len(stats_list) - 1) if len(stats_list) > 1 else 0.0
        out[mode] = (p, math.sqrt(var) / total)
    return out


def empirical_rate(stats_list):
    """Per-mode mean Shannon rate ln(1+SINR) in nats over all probes."""
    out = {}
    for mode in stats_list[0].sinr.keys():
        samples = np.concatenate([s.sinr[mode] for s in stats_list])
        out[mode] = float(np.mean(np.log1p(samples))) if samples.size else math.nan
    return out


def empirical_metrics(stats_list, cfg: NetworkConfig, scenario: Scenario, theta: float):
    """Network metrics assembled from empirical components, mirroring the
    analytical aggregation: activity fractions, per-mode rates and
    powers measured in the batch."""
    n_cell = sum(s.n_cell for s in stats_list)
    n_cell_ok = sum(s.n_cell_ok for s in stats_list)
    n_pairs = sum(s.n_pairs for s in stats_list)
    one_minus_op = n_cell_ok / n_cell if n_cell else math.nan
    p_d = sum(s.n_f_active for s in stats_list) / n_pairs if n_pairs else 0.0
    p_e = sum(s.n_r_active for s in stats_list) / n_pairs if n_pairs else 0.0
    beta = cfg.lambda_bs / (one_minus_op * cfg.lambda_c)
    rates = empirical_rate(stats_list)
    outages = empirical_outage(stats_list, theta)

    if scenario is Scenario.FD:
        denom = 2.0 * cfg.lambda_d + cfg.lambda_c
    elif scenario is Scenario.HD:
        denom = cfg.lambda_d + cfg.lambda_c
    else:
        denom = cfg.lambda_c

    def mean_power(arrs):
        pooled = np.concatenate(arrs)
        return float(pooled.mean()) if pooled.size else 0.0

    a_chi, pur, pcr, lam, tx = {}, {}, {}, {}, {}
    for mode in stats_list[0].sinr.keys():
        rate = rates[mode]
        if mode is Mode.CELLULAR:
            a_chi[mode] = cfg.lambda_c / denom * one_minus_op
            pur[mode] = 0.5 * beta * rate
            pcr[mode] = rate
            lam[mode] = cfg.lambda_bs
            tx[mode] = beta * mean_power([s.p_cell for s in stats_list])
        else:
            p_on = p_d if mode is Mode.F_D2D else p_e
            u_on = cfg.lambda_d * p_on
            a_chi[mode] = cfg.lambda_d / denom * p_on
            pur[mode] = rate
            pcr[mode] = u_on / cfg.lambda_bs * rate
            lam[mode] = u_on
            arrs = [s.p_f for s in stats_list] if mode is Mode.F_D2D else [s.p_r for s in stats_list]
            tx[mode] = mean_power(arrs)

    lam_total = sum(lam.values())
    modes = list(a_chi.keys())
    return {
        "outage": {m: outages[m][0] for m in modes},
        "outage_se": {m: outages[m][1] for m in modes},
        "rate_nats": rates,
        "t_avg": sum(a_chi[m] * pur[m] for m in modes),
        "p_avg": sum(a_chi[m] * tx[m] for m in modes),
        "t_n": cfg.lambda_bs * sum(pcr.values()),
        "o_net": sum(lam[m] / lam_total * outages[m][0] for m in modes),
        "p_d": p_d,
        "p_e": p_e,
        "o_p": 1.0 - one_minus_op,
        "beta": beta,
    }
