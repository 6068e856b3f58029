"""Command-line entry points.

Subcommands: simulate, verify-inequalities, verify-estimates, report, bench.
Exit codes: 0 pass, 1 failed verdict, 2 usage/config error, 3 solver
divergence.  All outputs are deterministic functions of (config, seed);
timestamps live only in report metadata.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import io as sio
from .errors import ConfigError, SimulationDivergedError, SnapshotError, SqgError
from .estimates import ExperimentSpec, run_suite
from .grid import SpectralField, TorusGrid
from .inequalities import run_battery
from .randfields import rough_field, sine_field
from .solver import SimulationState, SolverConfig, integrate, nonlinear_term, step
from .spectral import forward_transform, inverse_transform

EXIT_OK = 0
EXIT_FAILED_VERDICT = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3


def _load_config(path, seed_override=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = sio.parse_config(fh.read(), source=path)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if seed_override is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "seed": seed_override})
    return cfg


def _initial_field(cfg):
    if cfg.initial_kind == "rough":
        return rough_field(cfg.seed, cfg.initial_s, cfg.n, cfg.initial_amplitude)
    if cfg.initial_kind == "sine":
        return sine_field(cfg.n, cfg.initial_amplitude)
    return SpectralField(TorusGrid(cfg.n), np.zeros((cfg.n, cfg.n), dtype=complex))


def _sample_times(cfg):
    if cfg.t_end <= 0:
        return [0.0]
    if cfg.sample_kind == "linear":
        return list(np.linspace(0.0, cfg.t_end, cfg.sample_count))
    pts = np.geomspace(max(cfg.dt, cfg.t_end * 1e-6), cfg.t_end, max(cfg.sample_count - 1, 1))
    return [0.0] + list(pts)


def _outdir(args, cfg):
    out = args.out or cfg.output_dir or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.seed)
    out = _outdir(args, cfg)
    hs = tuple(dict.fromkeys(2.0 - cfg.gamma + b for b in cfg.beta_list))
    solver_cfg = SolverConfig(
        gamma=cfg.gamma, n=cfg.n, dt=cfg.dt, t_end=cfg.t_end, hs_list=hs,
        t0=cfg.t0, linear_only=cfg.linear_only, scheme=cfg.scheme, dealias=cfg.dealias,
    )
    state, traj = integrate(solver_cfg, _initial_field(cfg), _sample_times(cfg))
    csv_path = os.path.join(out, "trajectory.csv")
    snap_path = os.path.join(out, "state.sqgf")
    spec_path = os.path.join(out, "spectrum.csv")
    sio.write_timeseries(traj, csv_path)
    sio.write_snapshot(state, cfg.gamma, snap_path)
    sio.write_spectrum_csv(state.theta, spec_path)
    if not args.quiet:
        print(f"simulate: {state.step_count} steps to t={state.t:.6g}; "
              f"{len(traj.times)} samples -> {csv_path}, {snap_path}, {spec_path}")
    return EXIT_OK


def cmd_verify_inequalities(args) -> int:
    cfg = _load_config(args.config, args.seed)
    out = _outdir(args, cfg)
    reports = run_battery(n=cfg.n, seed=cfg.seed)
    doc = sio.constant_reports_doc(reports, metadata={"n": cfg.n, "seed": cfg.seed})
    path = os.path.join(out, "constants.json")
    sio.write_json_report(doc, path)
    failed = [r for r in reports if r.verdict != "pass"]
    if not args.quiet:
        for r in reports:
            growth = "n/a" if r.refinement_growth is None else f"{100 * r.refinement_growth:+.2f}%"
            print(f"{r.verdict:5s} {r.inequality_id:24s} max={r.max_ratio:.4g} growth={growth}")
        print(f"verify-inequalities: {len(reports) - len(failed)}/{len(reports)} pass -> {path}")
    return EXIT_FAILED_VERDICT if failed else EXIT_OK


def cmd_verify_estimates(args) -> int:
    cfg = _load_config(args.config, args.seed)
    out = _outdir(args, cfg)
    spec = ExperimentSpec(
        gamma=cfg.gamma, n=cfg.n, dt=cfg.dt, t_end=cfg.t_end, seed=cfg.seed,
        data_slope=cfg.initial_s, amplitude=cfg.initial_amplitude,
        beta_list=cfg.beta_list, beta_pairs=cfg.beta_pairs, t0=cfg.t0,
        sample_kind=cfg.sample_kind, sample_count=cfg.sample_count, output_dir=out,
    )
    report = run_suite(spec)
    path = os.path.join(out, "estimates.json")
    sio.write_json_report(sio.estimate_report_doc(report), path)
    for name, traj in report.trajectories.items():
        sio.write_timeseries(traj, os.path.join(out, f"trajectory_{name}.csv"))
    failed = report.failed()
    if not args.quiet:
        for c in report.claims:
            print(f"{c['verdict']:14s} {c['id']}")
        print(f"verify-estimates: {len(report.claims) - len(failed)}/{len(report.claims)} "
              f"pass -> {path}")
    if any(c["verdict"] == "diverged" for c in failed):
        return EXIT_DIVERGED
    return EXIT_FAILED_VERDICT if failed else EXIT_OK


def cmd_report(args) -> int:
    bad = False
    for path in args.paths:
        if path.endswith(".csv"):
            t, cols = sio.read_timeseries(path)
            print(f"{path}: {len(t)} samples, t in [{t[0]:.6g}, {t[-1]:.6g}]")
            print("  columns: " + ", ".join(cols))
            continue
        doc = sio.load_json_report(path)
        print(f"{path}: {doc['kind']} (schema v{doc['schema_version']})")
        if doc["kind"] == "estimates":
            for c in doc["claims"]:
                line = f"  {c['verdict']:14s} {c['id']}"
                thr = c.get("threshold", {})
                meas = {k: v for k, v in c.get("measured", {}).items()
                        if isinstance(v, (int, float))}
                if meas:
                    line += "  " + ", ".join(f"{k}={v:.4g}" for k, v in meas.items())
                if thr:
                    line += "  [" + ", ".join(f"{k}={v}" for k, v in thr.items()
                                              if isinstance(v, (int, float))) + "]"
                print(line)
                bad = bad or c["verdict"] in ("fail", "diverged")
        else:
            for r in doc["reports"]:
                growth = r["refinement_growth"]
                gtxt = "n/a" if growth is None else f"{100 * growth:+.2f}%"
                print(f"  {r['verdict']:5s} {r['inequality_id']:24s} "
                      f"max={r['max_ratio']:.4g} growth={gtxt}")
                bad = bad or r["verdict"] != "pass"
    return EXIT_FAILED_VERDICT if bad else EXIT_OK


def cmd_bench(args) -> int:
    from .randfields import envelope_field

    print(f"{'n':>6s} {'fft ms':>10s} {'N(theta) ms':>12s} {'step ms':>10s}")
    for n in (64, 128, 256):
        theta = envelope_field(0, n, 2.0, amplitude=0.1)
        phys = inverse_transform(theta)
        reps = max(3, 2048 // n)
        t0 = time.perf_counter()
        for _ in range(reps):
            forward_transform(phys)
        t_fft = (time.perf_counter() - t0) / reps * 1e3
        from .grid import two_thirds_mask

        c = theta.coeffs.copy()
        c[~two_thirds_mask(n)] = 0.0
        theta_b = SpectralField(theta.grid, c)
        t0 = time.perf_counter()
        for _ in range(reps):
            nonlinear_term(theta_b)
        t_nl = (time.perf_counter() - t0) / reps * 1e3
        cfg = SolverConfig(gamma=1.0, n=n, dt=1e-5, t_end=1.0)
        st = SimulationState(0.0, theta_b)
        t0 = time.perf_counter()
        for _ in range(reps):
            st = step(st, 1e-5, cfg)
        t_step = (time.perf_counter() - t0) / reps * 1e3
        print(f"{n:6d} {t_fft:10.3f} {t_nl:12.3f} {t_step:10.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sqgsim",
        description="Pseudo-spectral simulator and estimate-verification harness "
                    "for the dissipative quasi-geostrophic equation on the unit torus.",
    )
    sub = ap.add_subparsers(dest="command")

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("simulate", help="integrate and write trajectory/snapshot/spectrum"))
    common(sub.add_parser("verify-inequalities", help="measure the inequality constants"))
    common(sub.add_parser("verify-estimates", help="run the estimate-measurement suite"))
    rp = sub.add_parser("report", help="summarize JSON/CSV artifacts")
    rp.add_argument("paths", nargs="+", help="report JSON or trajectory CSV files")
    bp = sub.add_parser("bench", help="timing table for the core kernels")
    bp.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "verify-inequalities":
            return cmd_verify_inequalities(args)
        if args.command == "verify-estimates":
            return cmd_verify_estimates(args)
        if args.command == "report":
            return cmd_report(args)
        if args.command == "bench":
            return cmd_bench(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SnapshotError as e:
        print(f"snapshot error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationDivergedError as e:
        print(f"diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SqgError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
