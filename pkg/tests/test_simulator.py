import math

import numpy as np
import pytest

from fdd2d import simulator
from fdd2d.config import Mode, NetworkConfig, Scenario

CFG = NetworkConfig()
AREA = 25.0  # km^2, keeps unit runs fast; side 5 km well above 2 * r_bar


def test_generate_is_deterministic():
    a = simulator.generate(CFG, AREA, (1, 2))
    b = simulator.generate(CFG, AREA, (1, 2))
    assert np.array_equal(a.bs, b.bs)
    assert np.array_equal(a.pair_dist, b.pair_dist)
    c = simulator.generate(CFG, AREA, (1, 3))
    assert not np.array_equal(a.bs, c.bs)


def test_generate_rejects_too_small_area():
    with pytest.raises(ValueError):
        simulator.generate(CFG, 1.0, 0)  # side 1 km < 2 * r_bar


def test_pair_distance_law():
    real = simulator.generate(CFG, 100.0, 5)
    r_bar = CFG.derived().r_bar
    assert real.pair_dist.max() <= r_bar
    # omega = 1 gives linear density, cdf x^1... checked at the median
    med = np.median(real.pair_dist)
    assert med == pytest.approx(r_bar * 0.5, rel=0.05)


def test_nearest_bs_association():
    real = simulator.generate(CFG, AREA, 11)
    # spot-check: recorded distance is the minimum torus distance over BSs
    k = 7
    deltas = np.abs(real.bs - real.cell_ue[k])
    deltas = np.minimum(deltas, real.side - deltas)
    dists = np.hypot(deltas[:, 0], deltas[:, 1])
    assert real.cell_dist[k] == pytest.approx(dists.min(), rel=1e-9)
    assert real.cell_assoc[k] == int(np.argmin(dists))


def test_schedule_one_per_cell_and_power_cap():
    real = simulator.schedule_and_select(simulator.generate(CFG, AREA, 21), CFG)
    assoc = real.cell_assoc[real.scheduled]
    assert len(np.unique(assoc)) == len(assoc)
    powers = real.cell_dist[real.scheduled] ** CFG.eta_c * CFG.rho_c
    assert np.all(powers <= CFG.p_u + 1e-15)
    assert np.allclose(real.p_cell, powers)


def test_activity_respects_protection_rule():
    real = simulator.schedule_and_select(simulator.generate(CFG, AREA, 31), CFG)
    d = CFG.derived()
    need_f = real.pair_dist**CFG.eta_d * d.rho_d
    budget_f = CFG.t_d * CFG.rho_c * real.f_dist**CFG.eta_c
    ok_f = (need_f < CFG.p_u) & (need_f < budget_f)
    assert np.array_equal(real.f_active, ok_f)
    need_r = real.pair_dist**CFG.eta_d * d.rho_e
    budget_r = CFG.t_d * CFG.rho_c * real.r_dist**CFG.eta_c
    ok_r = (need_r < CFG.p_u) & (need_r < budget_r)
    assert np.array_equal(real.r_active, ok_r)
    assert np.allclose(real.p_f[real.f_active], need_f[real.f_active])
    assert np.all(real.p_f[~real.f_active] == 0.0)


def test_silent_network_has_no_d2d():
    cfg = NetworkConfig(t_d=0.0)
    real = simulator.schedule_and_select(simulator.generate(cfg, AREA, 41), cfg)
    assert real.f_active.sum() == 0
    assert real.r_active.sum() == 0


def test_scenario_probe_sets():
    real = simulator.schedule_and_select(simulator.generate(CFG, AREA, 51), CFG)
    fd = simulator.measure_sinr(real, CFG, Scenario.FD)
    hd = simulator.measure_sinr(real, CFG, Scenario.HD)
    tr = simulator.measure_sinr(real, CFG, Scenario.TRADITIONAL)
    assert set(fd.sinr) == {Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D}
    assert set(hd.sinr) == {Mode.CELLULAR, Mode.F_D2D}
    assert set(tr.sinr) == {Mode.CELLULAR}
    # fewer interferer classes means stochastically better cellular SINR
    assert np.median(tr.sinr[Mode.CELLULAR]) > np.median(fd.sinr[Mode.CELLULAR])


def test_probe_cap():
    real = simulator.schedule_and_select(simulator.generate(CFG, AREA, 61), CFG)
    st = simulator.measure_sinr(real, CFG, Scenario.FD, n_probes=5)
    assert st.sinr[Mode.CELLULAR].size == 5
    assert st.sinr[Mode.F_D2D].size <= 5


def test_truncation_probability_matches_analytic():
    # cluster across realizations; per-realization truncation shares a BS
    # layout so probe-level binomial errors would be far too optimistic
    stats = simulator.run_batch(CFG, 100.0, 80, (71,), scenario=Scenario.TRADITIONAL,
                                n_probes=1)
    shares = np.array([1.0 - s.n_cell_ok / s.n_cell for s in stats])
    se = shares.std(ddof=1) / math.sqrt(len(shares))
    assert abs(shares.mean() - CFG.derived().o_p) < 4 * se + 1e-4


def test_activity_fraction_matches_analytic():
    from fdd2d.mode_selection import prob_f_d2d

    stats = simulator.run_batch(CFG, 100.0, 60, (81,), scenario=Scenario.HD, n_probes=1)
    frac = np.array([s.n_f_active / s.n_pairs for s in stats])
    se = frac.std(ddof=1) / math.sqrt(len(frac))
    assert abs(frac.mean() - prob_f_d2d(CFG)) < 4 * se + 1e-4


def test_empirical_re_distance_is_rayleigh_of_bs_density():
    # the true nearest-BS distance of the r-UE is Rayleigh(pi lam) by
    # stationarity of the PPP, independent of the pair geometry
    reals = [simulator.generate(CFG, 100.0, (91, k)) for k in range(6)]
    r = np.concatenate([x.r_dist for x in reals])
    mean = r.mean()
    expect = 1.0 / (2.0 * math.sqrt(CFG.lambda_bs))
    assert mean == pytest.approx(expect, rel=0.02)


def test_run_batch_deterministic_and_order_stable():
    a = simulator.run_batch(CFG, AREA, 6, 7, n_probes=8)
    b = simulator.run_batch(CFG, AREA, 6, 7, n_probes=8)
    for x, y in zip(a, b):
        for m in x.sinr:
            assert np.array_equal(x.sinr[m], y.sinr[m])


def test_empirical_outage_bounds_and_se():
    stats = simulator.run_batch(CFG, AREA, 12, 101, n_probes=16)
    out = simulator.empirical_outage(stats, 1.0)
    for mode, (p, se) in out.items():
        assert 0.0 <= p <= 1.0
        assert se >= 0.0
    lo = simulator.empirical_outage(stats, 1e-6)
    hi = simulator.empirical_outage(stats, 1e6)
    for mode in out:
        assert lo[mode][0] <= out[mode][0] <= hi[mode][0]


def test_outage_close_to_analytic_at_defaults():
    from fdd2d.performance import success_probability

    stats = simulator.run_batch(CFG, 100.0, 60, (111,), scenario=Scenario.FD, n_probes=32)
    out = simulator.empirical_outage(stats, 1.0)
    for mode in (Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D):
        analytic = 1.0 - success_probability(mode, Scenario.FD, CFG, 1.0)
        assert abs(out[mode][0] - analytic) < 0.03


def test_self_interference_reduces_sinr():
    cfg = NetworkConfig(zeta=1.0, r1=1.0, r2=1.0, t_d=1.0)
    real = simulator.schedule_and_select(simulator.generate(cfg, AREA, 121), cfg)
    clean = simulator.measure_sinr(real, cfg, Scenario.FD, zeta=0.0)
    dirty = simulator.measure_sinr(real, cfg, Scenario.FD, zeta=1.0)
    both = real.f_active & real.r_active
    pair_ids = np.nonzero(real.f_active)[0]
    fd_rows = np.isin(pair_ids, np.nonzero(both)[0])
    assert np.all(dirty.sinr[Mode.F_D2D][fd_rows] < clean.sinr[Mode.F_D2D][fd_rows])
    assert np.allclose(dirty.sinr[Mode.F_D2D][~fd_rows], clean.sinr[Mode.F_D2D][~fd_rows])


def test_empirical_metrics_structure():
    stats = simulator.run_batch(CFG, AREA, 10, 131, n_probes=16)
    em = simulator.empirical_metrics(stats, CFG, Scenario.FD, 1.0)
    assert set(em["outage"]) == {Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D}
    assert em["t_avg"] > 0 and em["t_n"] > 0 and em["p_avg"] > 0
    assert 0.0 <= em["o_net"] <= 1.0
    assert em["p_d"] > em["p_e"] > 0.0


def test_worker_pool_matches_serial():
    serial = simulator.run_batch(CFG, AREA, 4, 141, n_probes=8, workers=1)
    pooled = simulator.run_batch(CFG, AREA, 4, 141, n_probes=8, workers=2)
    for x, y in zip(serial, pooled):
        for m in x.sinr:
            assert np.array_equal(x.sinr[m], y.sinr[m])
