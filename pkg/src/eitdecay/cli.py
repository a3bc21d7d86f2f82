"""Command-line front end.

Each ``cmd_*`` function takes a :class:`RunConfig` and returns a
:class:`Table` plus a success flag; :func:`main` handles files and exit
codes (0 ok, 1 usage/config error, 2 numerical failure).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from eitdecay.config import ConfigError, RunConfig
from eitdecay.dynamics import (
    CrossingNotFound,
    IntegrationError,
    adiabatic_stored_fraction,
    dark_state_moments,
    delay_time_tau_d,
    drift_matrix,
    evolve_moments,
    storage_protocol,
    storage_time_tau_s,
    theta_sweep,
)
from eitdecay.gas import ReducedPoint, reduced_temperature
from eitdecay.output import Table
from eitdecay.plot import PlotError, PlotSpec, plot_csv
from eitdecay.rates import QuadratureError, minimize_rate_over_k, total_rate

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
OK = "ok"


def _map(fn, items, threads: int):
    # pool.map keeps input order, so output is independent of the thread count
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _rate_row(gas, q, y, t, z_CB):
    try:
        r = total_rate(gas, ReducedPoint(y, t, z_CB), q)
    except QuadratureError as exc:
        return None, f"quadrature_failure: {exc}"
    return r, OK


def resolve_gamma_C(cfg: RunConfig) -> float:
    """coupling.gamma_C_per_s, or with ``auto`` the collisional rate at coupling.y_k, coupling.T_over_Tc."""
    value = cfg.get("coupling.gamma_C_per_s", "auto")
    if value != "auto":
        if value < 0:
            raise ConfigError("coupling.gamma_C_per_s must be >= 0")
        return value
    gas = cfg.gas()
    y = cfg.get("coupling.y_k", 1.0)
    frac = cfg.get("coupling.T_over_Tc", 0.5)
    try:
        t = reduced_temperature(gas, frac)
        return total_rate(gas, ReducedPoint(y, t, gas.z_CB), cfg.quadrature()).total
    except ValueError as exc:
        raise ConfigError(f"cannot derive gamma_C: {exc}") from None


def cmd_rates(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool]:
    gas, q = cfg.gas(), cfg.quadrature()
    temps = cfg.temperatures([0.0, 0.1, 0.5])
    ys = cfg.y_grid()
    z_CB = gas.z_CB
    jobs = []
    for frac in temps:
        try:
            t = reduced_temperature(gas, frac)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        jobs.extend((frac, t, y) for y in ys)
    results = _map(lambda job: _rate_row(gas, q, job[2], job[1], z_CB), jobs, threads)

    table = Table("rates", [
        "T_over_Tc", "t_reduced", "y_k", "z_CB", "beliaev_per_s", "landau_per_s",
        "total_per_s", "tau_s_s", "quad_error_per_s", "status",
    ])
    ok = True
    for (frac, t, y), (r, status) in zip(jobs, results):
        if r is None:
            ok = False
            table.add(frac, t, y, z_CB, None, None, None, None, None, status)
        else:
            table.add(frac, t, y, z_CB, r.beliaev, r.landau, r.total, storage_time_tau_s(r),
                      r.quadrature_error_estimate, status)
    return table, ok


def cmd_zcb_scan(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool]:
    gas, q = cfg.gas(), cfg.quadrature()
    temps = cfg.temperatures([0.1])
    if len(temps) != 1:
        raise ConfigError("zcb-scan takes a single scan.T_over_Tc")
    frac = temps[0]
    try:
        t = reduced_temperature(gas, frac)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    z_values = cfg.get("scan.z_CB", [1e-4, 1e-2, 1e2])
    if any(z <= 0 for z in z_values):
        raise ConfigError("scan.z_CB values must be positive")
    ys = cfg.y_grid()
    jobs = [(z, y) for z in z_values for y in ys]

    def run(job):
        z, y = job
        pt = ReducedPoint(y, t, z)
        try:
            full = total_rate(gas, pt, q)
            bare = total_rate(gas, pt, q, include_c_population=False)
        except QuadratureError as exc:
            return None, None, f"quadrature_failure: {exc}"
        return full, bare, OK

    table = Table("zcb-scan", [
        "z_CB", "y_k", "T_over_Tc", "t_reduced", "beliaev_per_s", "landau_per_s",
        "total_per_s", "total_without_nC_per_s", "status",
    ])
    ok = True
    for (z, y), (full, bare, status) in zip(jobs, _map(run, jobs, threads)):
        if full is None:
            ok = False
            table.add(z, y, frac, t, None, None, None, None, status)
        else:
            table.add(z, y, frac, t, full.beliaev, full.landau, full.total, bare.total, status)
    return table, ok


def cmd_optimize(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool, str]:
    gas, q = cfg.gas(), cfg.quadrature()
    temps = cfg.temperatures([0.0, 0.1, 0.3, 0.5])
    z_values = cfg.get("scan.z_CB", [gas.z_CB])
    if len(z_values) != 1:
        raise ConfigError("optimize takes a single scan.z_CB")
    z_CB = z_values[0]
    interval = (cfg.get("scan.y_lo", 0.01), cfg.get("scan.y_hi", 10.0))
    if not 0 < interval[0] < interval[1]:
        raise ConfigError("need 0 < scan.y_lo < scan.y_hi")
    grid_points = cfg.get("scan.grid_points", 64)

    def run(frac):
        try:
            t = reduced_temperature(gas, frac)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        try:
            return t, minimize_rate_over_k(gas, t, z_CB, interval, q, grid_points=grid_points), OK
        except QuadratureError as exc:
            return t, None, f"quadrature_failure: {exc}"

    table = Table("optimize", [
        "T_over_Tc", "t_reduced", "z_CB", "y_star", "gamma_min_per_s", "beliaev_per_s",
        "landau_per_s", "tau_s_max_s", "interior_minimum", "status",
    ])
    lines = []
    ok = True
    for frac, (t, res, status) in zip(temps, _map(run, temps, threads)):
        if res is None:
            ok = False
            table.add(frac, t, z_CB, None, None, None, None, None, None, status)
            lines.append(f"T/Tc={frac:g}: {status}")
            continue
        r = res.rate
        table.add(frac, t, z_CB, res.y_star, r.total, r.beliaev, r.landau, storage_time_tau_s(r),
                  res.interior, status)
        lines.append(
            f"T/Tc={frac:g}: y*={res.y_star:.5g}  gamma_min={r.total:.5g} 1/s  "
            f"tau_s_max={1e3 * storage_time_tau_s(r):.4g} ms  ({res.note})"
        )
    return table, ok, "\n".join(lines)


def cmd_theta_sweep(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool]:
    gamma_C = resolve_gamma_C(cfg)
    base = cfg.coupling(gamma_C)
    count = cfg.get("scan.theta_points", 50)
    if count < 2:
        raise ConfigError("scan.theta_points must be >= 2")
    thetas = [float(th) for th in np.linspace(0.0, 0.5 * math.pi, count)]
    if "scan.times_s" in cfg.values:
        times = cfg.values["scan.times_s"]
    else:
        if gamma_C <= 0:
            raise ConfigError("scan.times_gamma_C needs gamma_C > 0; give scan.times_s instead")
        times = [x / gamma_C for x in cfg.get("scan.times_gamma_C", [0.0, 0.5, 1.0, 2.0])]
    if times[0] < 0:
        raise ConfigError("times must be >= 0")
    try:
        values = theta_sweep(base, thetas, times, threads=threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    normalize = cfg.get("scan.normalize", False)
    columns = ["time_s", "theta_rad", "n_p_plus_n_C"] + (["fraction"] if normalize else [])
    table = Table("theta-sweep", columns)
    n = base.photon_number_n
    for j, t in enumerate(times):
        for i, th in enumerate(thetas):
            row = [t, th, values[i, j]]
            if normalize:
                row.append(values[i, j] / n if n > 0 else float("nan"))
            table.add(*row)
    table.note("gamma_C_per_s", gamma_C)
    table.note("omega_rad_s", base.omega)
    return table, True


def cmd_decay(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool]:
    gamma_C = resolve_gamma_C(cfg)
    c = cfg.coupling(gamma_C)
    if gamma_C <= 0 and "scan.t_max_s" not in cfg.values:
        raise ConfigError("gamma_C = 0: give scan.t_max_s")
    t_max = cfg.get("scan.t_max_s", 3.0 / gamma_C if gamma_C > 0 else 0.0)
    count = cfg.get("scan.t_points", 301)
    if not t_max > 0 or count < 2:
        raise ConfigError("need scan.t_max_s > 0 and scan.t_points >= 2")
    times = np.linspace(0.0, t_max, count)
    res = evolve_moments(dark_state_moments(c), drift_matrix(c), times)

    table = Table("decay", ["time_s", "n_p", "n_C", "n_A", "n_p_plus_n_C"])
    for k, t in enumerate(times):
        table.add(t, res.n_p[k], res.n_C[k], res.n_A[k], res.stored_sum[k])
    table.note("theta_rad", c.theta)
    table.note("gamma_C_per_s", gamma_C)
    table.note("propagator", res.method)
    ok = True
    if gamma_C > 0:
        try:
            tau_d = delay_time_tau_d(c)
            table.note("tau_d_s", tau_d)
            table.note("tau_d_times_gamma_C", tau_d * gamma_C)
        except CrossingNotFound as exc:
            table.note("tau_d_status", f"not_found: {exc}")
            ok = False
    return table, ok


def cmd_store(cfg: RunConfig, threads: int = 1) -> tuple[Table, bool]:
    gamma_C = resolve_gamma_C(cfg)
    c = cfg.coupling(gamma_C)
    ramp = cfg.ramp()
    try:
        res = storage_protocol(c, ramp, points_per_phase=cfg.get("ramp.points_per_phase", 50))
    except IntegrationError as exc:
        table = Table("store", ["time_s"])
        table.note("status", f"integration_failure: {exc}")
        return table, False
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    table = Table("store", ["time_s", "theta_rad", "omega_rad_s", "n_p", "n_C", "n_A", "n_p_plus_n_C"])
    g = c.g_root_N0
    for k, t in enumerate(res.times):
        th = res.theta[k]
        omega = g * math.cos(th) / math.sin(th)
        table.add(t, th, omega, res.n_p[k], res.n_C[k], res.n_A[k], res.stored_sum[k])
    table.note("gamma_C_per_s", gamma_C)
    table.note("recovered_photons", res.notes["recovered_photons"])
    table.note("recovered_fraction", res.notes["recovered_fraction"])
    table.note("adiabatic_fraction", adiabatic_stored_fraction(c, ramp))
    return table, True


COMMANDS = {
    "rates": cmd_rates,
    "zcb-scan": cmd_zcb_scan,
    "optimize": cmd_optimize,
    "theta-sweep": cmd_theta_sweep,
    "decay": cmd_decay,
    "store": cmd_store,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eitdecay", description="Collisional decay rates and EIT dark-state storage in a condensate.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--preset", help="named parameter set (hau1999, hau2001)")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--quad-rtol", type=float, help="quadrature relative tolerance")
    common.add_argument("--set", action="append", type=_key_value, default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")

    for name in COMMANDS:
        sub.add_parser(name, parents=[common])

    p = sub.add_parser("plot", help="render a CSV produced by this tool as SVG")
    p.add_argument("csv")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--group")
    p.add_argument("--groups", help="comma-separated group values to draw")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--title", default="")
    p.add_argument("--out", default="-")
    return parser


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "plot":
        spec = PlotSpec(
            x=args.x, y=args.y, group=args.group,
            groups=[g.strip() for g in args.groups.split(",")] if args.groups else None,
            log_x=args.logx, log_y=args.logy, title=args.title,
        )
        try:
            _emit(plot_csv(args.csv, spec), args.out)
        except PlotError as exc:
            print(f"eitdecay plot: {exc}", file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK

    if args.threads < 1:
        print("eitdecay: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    overrides = dict(args.set)
    if args.quad_rtol is not None:
        overrides["quad.rtol"] = repr(args.quad_rtol)
    try:
        cfg = RunConfig.build(args.preset, args.config, overrides)
        out = COMMANDS[args.command](cfg, args.threads)
    except ConfigError as exc:
        print(f"eitdecay {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, IntegrationError, CrossingNotFound) as exc:
        print(f"eitdecay {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    table, ok = out[0], out[1]
    if len(out) > 2:
        print(out[2], file=sys.stderr)
    _emit(table.render(), args.out)
    return EXIT_OK if ok else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
