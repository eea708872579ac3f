"""Command line interface.

Two subcommands: `sweep` evaluates one variable over a grid with either
engine and writes delimited CSV files (plus a rendered PNG per file
unless --no-plot), and `validate` runs the built-in consistency report
comparing closed forms, quadrature oracles, and the simulator.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical
failure, 3 I/O failure. Output files are byte-reproducible for a fixed
seed and argument set.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import link_geometry, simulator
from .config import (
    ConfigError,
    Mode,
    NetworkConfig,
    SCENARIO_MODES,
    Scenario,
    load_config,
)
from .interference import lt_interference, lt_interference_eta4
from .mode_selection import mode_stats, prob_f_d2d, prob_r_d2d
from .numerics import NumericsError
from .performance import scenario_metrics, success_probability, theta_sweep
from .power_stats import power_law, si_laplace

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

CSV_COLUMNS = (
    "variable",
    "value",
    "scenario",
    "mode",
    "engine",
    "outage",
    "rate_nats",
    "T_avg",
    "P_avg_W",
    "T_n",
    "O_net",
    "stderr",
)

VARIABLES = ("theta", "t_d", "r1", "r2", "zeta", "omega")

ALL_SCENARIOS = (Scenario.FD, Scenario.HD, Scenario.TRADITIONAL)


class CliError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """One sweep job: a variable, its grid, scenarios, and fixed overrides.

    variable "theta" sweeps the SINR threshold in dB; the others replace
    the named NetworkConfig field. focus names the metric a rendered
    plot puts on the y axis (outage, truncation, T_avg, P_avg, T_n).
    """

    name: str
    variable: str
    values: tuple
    scenarios: tuple
    overrides: tuple = ()  # ((field, value), ...)
    focus: str = "outage"
    suffix: str = ""

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise CliError(f"unknown sweep variable {self.variable!r}")
        if not self.values:
            raise CliError("sweep needs a nonempty value grid")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise CliError("sweep values must be strictly increasing")
        if not self.scenarios:
            raise CliError("sweep needs at least one scenario")

    def filename(self):
        return f"sweep_{self.name}{self.suffix}.csv"


def _grid(lo, hi, n):
    return tuple(float(f"{v:.12g}") for v in np.logspace(math.log10(lo), math.log10(hi), n))


_THETA_GRID = tuple(float(v) for v in range(-10, 21))
_TD_GRID = _grid(0.01, 100.0, 31)
_R2_GRID = _grid(0.01, 10.0, 31)
_ZETAS = (0.0, 1e-12, 1e-10, 1e-8)
_OMEGAS = (0.0, 0.5, 1.0, 1.5)


def build_presets():
    """Named sweep bundles reproducing the standard result figures."""
    presets = {}
    presets["fig4"] = [
        SweepSpec("fig4", "theta", _THETA_GRID, (Scenario.FD,),
                  (("t_d", 0.2), ("r1", 1.0), ("r2", r2)), "outage", f"_r2_{r2:g}")
        for r2 in (0.5, 2.0)
    ]
    presets["fig5"] = [
        SweepSpec("fig5", "theta", _THETA_GRID, (Scenario.FD,),
                  (("t_d", td), ("r1", r1), ("r2", 1.0)), "outage",
                  f"_r1_{r1:g}_td_{td:g}")
        for r1 in (0.2, 2.0)
        for td in (0.2, 1.0)
    ]
    base_d2d = (("r1", 0.2), ("r2", 0.2))
    presets["fig6"] = [SweepSpec("fig6", "t_d", _TD_GRID, ALL_SCENARIOS, base_d2d, "T_n")]
    presets["fig7"] = [SweepSpec("fig7", "t_d", _TD_GRID, ALL_SCENARIOS, base_d2d, "P_avg")]
    presets["fig8"] = [SweepSpec("fig8", "t_d", _TD_GRID, ALL_SCENARIOS, base_d2d, "outage")]
    presets["fig9"] = [
        SweepSpec("fig9", "r2", _R2_GRID, ALL_SCENARIOS, (("r1", 0.01), ("t_d", 1.0)), "T_avg")
    ]
    presets["fig10"] = [
        SweepSpec("fig10", "t_d", _TD_GRID, (Scenario.FD,), base_d2d, "truncation", "_truncation"),
        SweepSpec("fig10", "t_d", _TD_GRID, (Scenario.FD,), base_d2d, "outage", "_sinr"),
    ]
    for name, pair_overrides in (("fig11", (("r1", 1.0), ("r2", 2.0))),
                                 ("fig12", (("r1", 0.2), ("r2", 0.2)))):
        specs = [
            SweepSpec(name, "t_d", _TD_GRID, (Scenario.FD,),
                      pair_overrides + (("zeta", z),), "T_n", f"_zeta_{z:g}")
            for z in _ZETAS
        ]
        specs.append(SweepSpec(name, "t_d", _TD_GRID, (Scenario.HD,), pair_overrides, "T_n", "_hd"))
        presets[name] = specs
    presets["fig13"] = [
        SweepSpec("fig13", "t_d", _TD_GRID, (Scenario.FD,),
                  base_d2d + (("omega", om),), "T_n", f"_omega_{om:g}")
        for om in _OMEGAS
    ]
    return presets


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.10g}"
    return str(x)


def _truncation_outage(mode, p_d, p_e, o_p):
    if mode is Mode.CELLULAR:
        return o_p
    return 1.0 - (p_d if mode is Mode.F_D2D else p_e)


def _analytic_rows(spec: SweepSpec, cfg0: NetworkConfig, theta_db: float):
    rows = []
    overrides = dict(spec.overrides)
    if spec.variable == "theta":
        cfg = replace(cfg0, **overrides)
        thetas = [10.0 ** (v / 10.0) for v in spec.values]
        for scenario in spec.scenarios:
            met = scenario_metrics(scenario, cfg, theta=1.0)
            outage, o_net = theta_sweep(scenario, cfg, thetas)
            for i, v in enumerate(spec.values):
                for mode in SCENARIO_MODES[scenario]:
                    rows.append([
                        "theta", v, scenario.value, mode.value, "analytic",
                        outage[mode][i], met.rate_chi[mode], met.t_avg,
                        met.p_avg, met.t_n, o_net[i], None,
                    ])
        return rows

    theta = 10.0 ** (theta_db / 10.0)
    for v in spec.values:
        cfg = replace(cfg0, **overrides, **{spec.variable: v})
        for scenario in spec.scenarios:
            met = scenario_metrics(scenario, cfg, theta=theta)
            stats = mode_stats(cfg)
            for mode in SCENARIO_MODES[scenario]:
                if spec.focus == "truncation":
                    out = _truncation_outage(mode, stats.p_d, stats.p_e, stats.o_p)
                else:
                    out = met.outage_chi[mode]
                rows.append([
                    spec.variable, v, scenario.value, mode.value, "analytic",
                    out, met.rate_chi[mode], met.t_avg, met.p_avg, met.t_n,
                    met.o_net, None,
                ])
    return rows


def _simulate_rows(spec: SweepSpec, cfg0: NetworkConfig, args):
    rows = []
    overrides = dict(spec.overrides)
    sim_kw = dict(
        area_km2=args.area_km2,
        n_realizations=args.realizations,
        master_seed=args.seed,
        n_probes=args.probes,
        workers=args.workers,
    )
    if spec.variable == "theta":
        cfg = replace(cfg0, **overrides)
        thetas = [10.0 ** (v / 10.0) for v in spec.values]
        for scenario in spec.scenarios:
            stats = simulator.run_batch(cfg, scenario=scenario, **sim_kw)
            for i, v in enumerate(spec.values):
                em = simulator.empirical_metrics(stats, cfg, scenario, thetas[i])
                for mode in SCENARIO_MODES[scenario]:
                    rows.append([
                        "theta", v, scenario.value, mode.value, "simulate",
                        em["outage"][mode], em["rate_nats"][mode], em["t_avg"],
                        em["p_avg"], em["t_n"], em["o_net"], em["outage_se"][mode],
                    ])
        return rows

    theta = 10.0 ** (args.theta_db / 10.0)
    for v in spec.values:
        cfg = replace(cfg0, **overrides, **{spec.variable: v})
        for scenario in spec.scenarios:
            stats = simulator.run_batch(cfg, scenario=scenario, **sim_kw)
            em = simulator.empirical_metrics(stats, cfg, scenario, theta)
            for mode in SCENARIO_MODES[scenario]:
                if spec.focus == "truncation":
                    out = _truncation_outage(mode, em["p_d"], em["p_e"], em["o_p"])
                    se = None
                else:
                    out = em["outage"][mode]
                    se = em["outage_se"][mode]
                rows.append([
                    spec.variable, v, scenario.value, mode.value, "simulate",
                    out, em["rate_nats"][mode], em["t_avg"], em["p_avg"],
                    em["t_n"], em["o_net"], se,
                ])
    return rows


_FOCUS_COLUMN = {"outage": 5, "truncation": 5, "T_avg": 7, "P_avg": 8, "T_n": 9}


def _render_plot(png_path, spec: SweepSpec, rows, bits: bool):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    col = _FOCUS_COLUMN[spec.focus]
    per_mode = spec.focus in ("outage", "truncation")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    series = {}
    for r in rows:
        key = (r[2], r[3], r[4]) if per_mode else (r[2], r[4])
        series.setdefault(key, ([], []))
        series[key][0].append(r[1])
        series[key][1].append(r[col])
    for key in sorted(series):
        x, y = series[key]
        label = "/".join(key)
        style = "--" if key[-1] == "simulate" else "-"
        ax.plot(x, y, style, marker="o", markersize=3, label=label)
    if spec.variable == "theta":
        ax.set_xlabel("SINR threshold (dB)")
    else:
        ax.set_xlabel(spec.variable)
        if all(v > 0 for v in spec.values) and spec.values[-1] / spec.values[0] > 30:
            ax.set_xscale("log")
    ylabel = {"outage": "outage probability", "truncation": "truncation outage",
              "T_avg": "per-user rate (nats/s/Hz)", "P_avg": "avg transmit power (W)",
              "T_n": "network throughput (nats/s/Hz/m^2)"}[spec.focus]
    if bits and spec.focus in ("T_avg", "T_n"):
        ylabel = ylabel.replace("nats", "bits")
    ax.set_ylabel(ylabel)
    ax.set_title(f"{spec.name}{spec.suffix}")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def _write_csv(path, rows, bits: bool):
    columns = CSV_COLUMNS + ("rate_bits",) if bits else CSV_COLUMNS
    ln2 = math.log(2.0)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows:
            cells = [_fmt(c) for c in r]
            if bits:
                rate = r[6]
                cells.append(_fmt(rate / ln2 if isinstance(rate, float) else rate))
            fh.write(",".join(cells) + "\n")


def _run_sweep_spec(spec: SweepSpec, cfg: NetworkConfig, args):
    rows = []
    if args.engine in ("analytic", "both"):
        rows.extend(_analytic_rows(spec, cfg, args.theta_db))
    if args.engine in ("simulate", "both"):
        rows.extend(_simulate_rows(spec, cfg, args))
    # stable order: value, scenario, mode, engine
    scen_order = {s.value: i for i, s in enumerate(ALL_SCENARIOS)}
    mode_order = {m.value: i for i, m in enumerate(Mode)}
    rows.sort(key=lambda r: (r[1], scen_order[r[2]], mode_order[r[3]], r[4]))
    out_path = os.path.join(args.out, spec.filename())
    _write_csv(out_path, rows, args.bits)
    written = [out_path]
    if not args.no_plot:
        png = out_path[:-4] + ".png"
        _render_plot(png, spec, rows, args.bits)
        written.append(png)
    return written


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else NetworkConfig()
    if args.sweep == "custom":
        if not args.var or not args.values:
            raise CliError("custom sweeps need --var and --values")
        values = tuple(float(v) for v in args.values.split(","))
        scenarios = _parse_scenarios(args.scenarios)
        specs = [SweepSpec("custom", args.var, values, scenarios)]
    else:
        presets = build_presets()
        if args.sweep not in presets:
            raise CliError(
                f"unknown sweep {args.sweep!r}; choose from "
                f"{', '.join(sorted(presets))}, custom"
            )
        specs = presets[args.sweep]
        if args.scenarios:
            scenarios = _parse_scenarios(args.scenarios)
            specs = [replace(s, scenarios=scenarios) for s in specs]
    os.makedirs(args.out, exist_ok=True)
    for spec in specs:
        for path in _run_sweep_spec(spec, cfg, args):
            print(path)
    return EXIT_OK


def _parse_scenarios(text):
    if not text:
        return ALL_SCENARIOS
    out = []
    by_value = {s.value: s for s in Scenario}
    for part in text.split(","):
        part = part.strip()
        if part not in by_value:
            raise CliError(f"unknown scenario {part!r}; use FD, HD, Traditional")
        out.append(by_value[part])
    return tuple(out)


# ---------------------------------------------------------------------------
# validate


def _oracle_activity(cfg: NetworkConfig, mode: Mode):
    """Activity probability via direct quadrature over the pair separation."""
    from scipy.integrate import quad

    d = cfg.derived()
    rho = d.rho_d if mode is Mode.F_D2D else d.rho_e
    rate = math.pi * cfg.lambda_bs if mode is Mode.F_D2D else d.b
    r_max = min(d.r_bar, (cfg.p_u / rho) ** (1.0 / cfg.eta_d))

    def f(r):
        x = r**cfg.eta_d * rho
        surv = math.exp(-rate * (x / (cfg.t_d * cfg.rho_c)) ** (2.0 / cfg.eta_c))
        return float(link_geometry.pdf_rd(r, cfg)) * surv

    val, _ = quad(f, 0.0, r_max, limit=200)
    return val


def _oracle_moment(cfg: NetworkConfig, mode: Mode, alpha: float):
    """Fractional power moment via quadrature over the power density."""
    from scipy.integrate import quad

    pl = power_law(mode, cfg)
    val, _ = quad(lambda x: x**alpha * float(pl.pdf(x)), 0.0, pl.cap, limit=200,
                  points=[pl.cap])
    return val


def cmd_validate(args) -> int:
    cfg = load_config(args.config) if args.config else NetworkConfig()
    lines = []
    failures = 0

    def check(name, ok, detail):
        nonlocal failures
        failures += 0 if ok else 1
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    # 1. closed-form activity probabilities and power moments vs quadrature
    worst = 0.0
    for td in (0.05, 1.0, 20.0):
        for r1 in (0.2, 2.0):
            for om in (0.0, 1.0):
                c = replace(cfg, t_d=td, r1=r1, omega=om)
                for mode in (Mode.F_D2D, Mode.R_D2D):
                    closed = prob_f_d2d(c) if mode is Mode.F_D2D else prob_r_d2d(c)
                    oracle = _oracle_activity(c, mode)
                    worst = max(worst, abs(closed - oracle) / oracle)
                    for alpha in (0.5, 1.0):
                        m_closed = power_law(mode, c).moment(alpha)
                        m_oracle = _oracle_moment(c, mode, alpha)
                        worst = max(worst, abs(m_closed - m_oracle) / m_oracle)
    check("closed_forms_vs_quadrature", worst < 1e-6, f"max rel err {worst:.3e} (tol 1e-06)")

    # 2. arctan form of the at-BS transform against the general kernel
    worst = 0.0
    c4 = replace(cfg, eta_c=4.0)
    for s_rho in (0.1, 1.0, 10.0):
        s = s_rho / c4.rho_c
        for kappa in (Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D):
            a = lt_interference(kappa, Mode.CELLULAR, c4, s)
            b = lt_interference_eta4(kappa, c4, s)
            worst = max(worst, abs(a - b) / a)
    check("arctan_identity", worst < 1e-9, f"max rel err {worst:.3e} (tol 1e-09)")

    # 3. r-D2D nearest-BS distance model against simulated geometry
    pairs = []
    k = 0
    while sum(p.size for p in pairs) < 100_000:
        real = simulator.generate(cfg, args.area_km2, (args.seed, 900_000, k))
        pairs.append(real.r_dist)
        k += 1
    sample = np.sort(np.concatenate(pairs))
    model = np.asarray(link_geometry.cdf_re(sample, cfg))
    emp_hi = np.arange(1, sample.size + 1) / sample.size
    ks = float(np.max(np.maximum(np.abs(emp_hi - model), np.abs(emp_hi - 1 / sample.size - model))))
    check("re_distance_model_ks", ks <= 0.05,
          f"KS {ks:.4f} over {sample.size} pairs (tol 0.05)")

    # 4. analytic vs simulated SINR outage, FD scenario
    stats = simulator.run_batch(
        cfg, area_km2=args.area_km2, n_realizations=args.realizations,
        master_seed=(args.seed, 910_000), scenario=Scenario.FD,
        n_probes=args.probes, workers=args.workers,
    )
    worst = 0.0
    for th_db in (-5.0, 0.0, 5.0, 10.0):
        th = 10.0 ** (th_db / 10.0)
        out = simulator.empirical_outage(stats, th)
        for mode in SCENARIO_MODES[Scenario.FD]:
            an = 1.0 - success_probability(mode, Scenario.FD, cfg, th)
            worst = max(worst, abs(out[mode][0] - an))
    check("outage_analytic_vs_sim", worst <= 0.03,
          f"max abs gap {worst:.4f} over modes x thresholds (tol 0.03)")

    # 5. degenerate limits
    zero = replace(cfg, t_d=0.0)
    st = mode_stats(zero)
    ok = st.p_d == 0.0 and st.p_e == 0.0 and st.p_fd == 0.0
    t_fd = scenario_metrics(Scenario.FD, zero).t_n
    t_tr = scenario_metrics(Scenario.TRADITIONAL, zero).t_n
    ok = ok and abs(t_fd - t_tr) <= 1e-9 * t_tr
    ok = ok and si_laplace(Mode.F_D2D, replace(cfg, zeta=0.0, t_d=1.0), 1e9) == 1.0
    ok = ok and lt_interference(Mode.CELLULAR, Mode.CELLULAR, cfg, 0.0) == 1.0
    ok = ok and success_probability(Mode.CELLULAR, Scenario.FD, cfg, 0.0) == 1.0
    check("degenerate_limits", ok,
          "t_d=0 silences D2D and matches Traditional; zeta=0 and s=0 are exact identities")

    print(f"validation report (seed {args.seed}, {args.realizations} realizations, "
          f"{args.area_km2:g} km^2)")
    for line in lines:
        print(line)
    print(f"{len(lines) - failures}/{len(lines)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_CONFIG


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _build_parser():
    parser = _Parser(prog="fdd2d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file (key=value lines)")
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        p.add_argument("--realizations", type=int, default=2000,
                       help="Monte Carlo realizations per point")
        p.add_argument("--area-km2", type=float, default=100.0,
                       help="simulated torus area in km^2")
        p.add_argument("--probes", type=int, default=None,
                       help="cap on probed receivers per mode per realization")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes for the simulator")

    p_sweep = sub.add_parser("sweep", help="evaluate a variable over a grid")
    common(p_sweep)
    p_sweep.add_argument("--sweep", required=True,
                         help="preset name (fig4..fig13) or 'custom'")
    p_sweep.add_argument("--var", choices=VARIABLES, help="custom sweep variable")
    p_sweep.add_argument("--values", help="comma-separated, strictly increasing grid")
    p_sweep.add_argument("--scenarios", help="comma-separated subset of FD,HD,Traditional")
    p_sweep.add_argument("--engine", choices=("analytic", "simulate", "both"),
                         default="analytic")
    p_sweep.add_argument("--theta-db", type=float, default=0.0,
                         help="SINR threshold in dB for outage columns of non-theta sweeps")
    p_sweep.add_argument("--out", default=".", help="output directory")
    p_sweep.add_argument("--bits", action="store_true",
                         help="append a rate_bits column (rate_nats / ln 2)")
    p_sweep.add_argument("--no-plot", action="store_true",
                         help="skip PNG rendering next to each CSV")

    p_val = sub.add_parser("validate", help="run the consistency report")
    common(p_val)
    p_val.set_defaults(realizations=300, probes=64)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_validate(args)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
