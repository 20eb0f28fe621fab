"""Command-line driver: verification workflows, CSV emission, reporting.

Exit codes: 0 pass, 1 fail, 2 inconclusive (blow-up or window truncation),
3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics, kernels
from .config import ConfigError, RunConfig, build_initial, parse_config
from .dynamics import (BlowUpError, QuadraticForm, SolverConfig, picard_iterate,
                       simulate_illustrative, simulate_nse)
from .grid import max_norm, multi_indices
from .snapshots import write_snapshot

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_IO = 3

KERNEL_SPREAD_TOL = 1e-6
COMPOSITE_SPREAD_TOL = 1e-2
COLLAPSE_TOL = 0.05
SCALING_TOL = 1e-6
PICARD_AGREEMENT_TOL = 1e-6


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _worker_count(n_tasks: int) -> int:
    cap = os.environ.get("NSKL_THREADS", "1")
    try:
        cap = max(1, int(cap))
    except ValueError:
        cap = 1
    return min(cap, n_tasks)


def _run_system(cfg: RunConfig, f, solver: SolverConfig):
    if cfg.system == "illustrative":
        form = QuadraticForm.component_squares(cfg.grid.dim, cfg.direction)
        return simulate_illustrative(f, form, solver)
    return simulate_nse(f, solver)


def _cmd_simulate(cfg: RunConfig) -> int:
    out = cfg.out_dir
    f = build_initial(cfg)
    try:
        traj = _run_system(cfg, f, cfg.solver)
    except BlowUpError as exc:
        print(f"simulate: {exc}")
        return EXIT_INCONCLUSIVE
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for k, (t, u) in enumerate(zip(traj.times, traj.snapshots)):
        write_snapshot(snap_dir / f"snap_{k:06d}.klns", u)
    for j in range(cfg.j_max + 1):
        series = diagnostics.phi_series(traj, j)
        _write_csv(out / f"phi_series_j{j}.csv", ["t", "phi"],
                   [[float(t), float(v)] for t, v in zip(series.times, series.values)])
    vs = diagnostics.v_series(traj)
    _write_csv(out / "v_series.csv", ["t", "V", "fitted_C"],
               [[float(t), float(v), float(c)]
                for t, v, c in zip(vs.times, vs.values, vs.fitted_constants)])
    print(f"simulate: {len(traj.snapshots)} snapshots, final |u| = {max_norm(traj.snapshots[-1]):.6g}")
    return EXIT_PASS


def _cmd_verify_kernels(cfg: RunConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    ks = cfg.kernels
    rows = kernels.kernel_report_rows(ks.dims, ks.max_order, ks.t_values)
    _write_csv(out / "kernel_lab.csv",
               ["n", "alpha", "t", "l1_norm", "scaled_norm", "maximal_norm"],
               [[r["n"], r["alpha"], r["t"], r["l1_norm"], r["scaled_norm"], r["maximal_norm"]]
                for r in rows])

    ok = True
    scaling_rows = []
    for n in ks.dims:
        for order in range(ks.max_order + 1):
            for alpha in multi_indices(n, order):
                check = kernels.kernel_scaling_check(alpha, ks.t_values)
                passed = check.max_rel_spread <= KERNEL_SPREAD_TOL
                ok &= passed
                scaling_rows.append([n, str(alpha), check.max_rel_spread,
                                     KERNEL_SPREAD_TOL, int(passed)])
    _write_csv(out / "kernel_scaling.csv",
               ["n", "alpha", "spread", "tolerance", "pass"], scaling_rows)

    if ks.composite:
        comp_rows = []
        spread_rows = []
        n = 3
        for order in range(ks.composite_max_order + 1):
            for alpha in multi_indices(n, order):
                for i in range(1, n + 1):
                    for l in range(i, n + 1):
                        scaled, spread = kernels.composite_scaling_spread(
                            i, l, alpha, ks.composite_t_values, ks.composite_points,
                            ks.composite_box_factor)
                        for t, sv in zip(sorted(ks.composite_t_values), scaled):
                            box = ks.composite_box_factor * math.sqrt(t)
                            comp_rows.append([n, str(alpha), i, l, t, box,
                                              sv / t ** (order / 2.0), sv])
                        # the time-scaling law holds for derivative orders >= 1
                        asserted = order >= 1
                        passed = (not asserted) or spread <= COMPOSITE_SPREAD_TOL
                        ok &= passed
                        spread_rows.append([n, str(alpha), i, l, spread,
                                            COMPOSITE_SPREAD_TOL, int(asserted), int(passed)])
        _write_csv(out / "composite_kernels.csv",
                   ["n", "alpha", "i", "l", "t", "box_length", "l1_norm", "scaled_norm"],
                   comp_rows)
        _write_csv(out / "composite_scaling.csv",
                   ["n", "alpha", "i", "l", "spread", "tolerance", "asserted", "pass"],
                   spread_rows)

    print(f"verify-kernels: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_FAIL


def _amplitude_run(cfg: RunConfig, amplitude: float):
    t_max = cfg.c_win / amplitude**2
    steps = cfg.solver.steps
    solver = SolverConfig(t_max / steps, t_max, cfg.solver.scheme, cfg.solver.dealias,
                          cfg.solver.snapshot_stride)
    f = build_initial(cfg, amplitude)
    traj = _run_system(cfg, f, solver)
    window = diagnostics.WindowParams(cfg.c_win, max_norm(f))
    return traj, window


def _cmd_verify_theorem(cfg: RunConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    amplitudes = cfg.amplitudes
    try:
        with ThreadPoolExecutor(max_workers=_worker_count(len(amplitudes))) as pool:
            runs = list(pool.map(lambda a: _amplitude_run(cfg, a), amplitudes))
    except BlowUpError as exc:
        print(f"verify-theorem: {exc}")
        return EXIT_INCONCLUSIVE

    kj = {}
    doubling_ok = True
    for amplitude, (traj, window) in zip(amplitudes, runs):
        rows = []
        for j in range(cfg.j_max + 1):
            try:
                kj[amplitude, j] = diagnostics.estimate_Kj(traj, j, window)
            except ValueError as exc:
                print(f"verify-theorem: {exc}")
                return EXIT_INCONCLUSIVE
            rows.append([j, kj[amplitude, j], window.t_max])
        _write_csv(out / f"kj_table_A{amplitude:g}.csv", ["j", "K_j", "window"], rows)
        passed = diagnostics.doubling_check(traj, window, cfg.doubling_factor)
        doubling_ok &= passed
        if not passed:
            c_emp = diagnostics.empirical_window_constant(traj, cfg.doubling_factor)
            print(f"verify-theorem: doubling failed at A={amplitude:g}; "
                  f"empirical window constant {c_emp:.6g}")

    ok = doubling_ok
    summary = []
    for j in range(cfg.j_max + 1):
        vals = [kj[a, j] for a in amplitudes]
        spread = (max(vals) - min(vals)) / min(vals) if min(vals) > 0 else 0.0
        passed = spread <= COLLAPSE_TOL
        ok &= passed
        summary.append([j, spread, COLLAPSE_TOL, int(passed)])
        print(f"verify-theorem: j={j} K_j spread {spread:.4f} "
              f"({'PASS' if passed else 'FAIL'})")
    summary.append(["doubling", float(cfg.doubling_factor), 0.0, int(doubling_ok)])
    _write_csv(out / "theorem_summary.csv", ["j", "spread", "tolerance", "pass"], summary)
    print(f"verify-theorem: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_verify_scaling(cfg: RunConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    f = build_initial(cfg)
    rows = []
    worst = 0.0
    try:
        for lam in cfg.lambdas:
            report = diagnostics.scaling_equivariance_check(f, lam, cfg.solver)
            for row in report.rows:
                rows.append([row.j, row.lam, row.rel_error])
                worst = max(worst, row.rel_error)
    except BlowUpError as exc:
        print(f"verify-scaling: {exc}")
        return EXIT_INCONCLUSIVE
    _write_csv(out / "scaling_report.csv", ["j", "lambda", "rel_error"], rows)

    window = diagnostics.WindowParams(cfg.c_win, max_norm(f))
    steps = cfg.solver.steps
    solver = SolverConfig(window.t_max / steps, window.t_max, cfg.solver.scheme,
                          cfg.solver.dealias, cfg.solver.snapshot_stride)
    try:
        traj = _run_system(cfg, f, solver)
    except BlowUpError as exc:
        print(f"verify-scaling: {exc}")
        return EXIT_INCONCLUSIVE
    smoothing_rows = []
    bounds_ok = True
    for j in range(min(cfg.j_max, 2) + 1):
        check = diagnostics.smoothing_window_check(traj, window, j)
        bounds_ok &= check.bound_ok
        smoothing_rows.append([j, check.c_j, check.window_max, check.bound,
                               check.margin, int(check.bound_ok)])
    _write_csv(out / "smoothing_window.csv",
               ["j", "C_j", "window_max", "bound", "margin", "pass"], smoothing_rows)

    ok = worst <= SCALING_TOL and bounds_ok
    print(f"verify-scaling: max rel error {worst:.3e}, "
          f"window bounds {'hold' if bounds_ok else 'violated'} "
          f"({'PASS' if ok else 'FAIL'})")
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_picard_compare(cfg: RunConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    f = build_initial(cfg)
    T = cfg.picard.T
    try:
        result = picard_iterate(f, T, cfg.picard.nodes, cfg.picard.k_max,
                                window_constant=cfg.c_win, use_dealias=cfg.solver.dealias)
    except ValueError as exc:
        print(f"picard-compare: {exc}")
        return EXIT_INCONCLUSIVE
    steps = max(1, round(T / cfg.solver.dt))
    solver = SolverConfig(T / steps, T, cfg.solver.scheme, cfg.solver.dealias,
                          snapshot_stride=steps)
    try:
        traj = _run_system(cfg, f, solver)
    except BlowUpError as exc:
        print(f"picard-compare: {exc}")
        return EXIT_INCONCLUSIVE

    diff = result.field_at_horizon.values - traj.snapshots[-1].values
    discrepancy = float(np.sqrt((diff**2).sum(axis=0)).max())
    residuals = result.residuals
    ratios = residuals[1:] / residuals[:-1] if len(residuals) > 1 else np.array([])
    contracting = bool((ratios <= 0.8).all()) if ratios.size else True

    _write_csv(out / "picard_residuals.csv", ["iteration", "residual"],
               [[k, float(r)] for k, r in enumerate(residuals)])
    _write_csv(out / "picard_compare.csv",
               ["T", "nodes", "k_max", "discrepancy", "converged", "contracting"],
               [[T, cfg.picard.nodes, cfg.picard.k_max, discrepancy,
                 int(result.converged), int(contracting)]])

    ok = contracting and discrepancy <= PICARD_AGREEMENT_TOL
    print(f"picard-compare: discrepancy {discrepancy:.3e}, "
          f"residual contraction {'yes' if contracting else 'no'} "
          f"({'PASS' if ok else 'FAIL'})")
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_report(cfg: RunConfig) -> int:
    from . import plots

    out = cfg.out_dir
    if not out.is_dir():
        print(f"report: no output directory {out}")
        return EXIT_IO
    lines = ["run report", "=" * 40]
    for csv_path in sorted(out.glob("*.csv")):
        body = csv_path.read_text().strip().splitlines()
        lines.append(f"{csv_path.name}: {len(body) - 1} rows ({body[0]})")
    figures = plots.render_all(out)
    lines.append("")
    lines.extend(f"figure: {p.name}" for p in figures)
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_PASS


_SUBCOMMANDS = {
    "simulate": _cmd_simulate,
    "verify-kernels": _cmd_verify_kernels,
    "verify-theorem": _cmd_verify_theorem,
    "verify-scaling": _cmd_verify_scaling,
    "picard-compare": _cmd_picard_compare,
    "report": _cmd_report,
}


def run_subcommand(name: str, cfg: RunConfig) -> int:
    """Dispatch one verification workflow; returns the process exit code."""
    if name not in _SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {name!r}")
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return _SUBCOMMANDS[name](cfg)
    except OSError as exc:
        print(f"{name}: I/O failure: {exc}")
        return EXIT_IO


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nskl",
                                     description="spectral estimate-verification laboratory")
    parser.add_argument("subcommand", choices=sorted(_SUBCOMMANDS))
    parser.add_argument("--config", help="path to a key-value run configuration")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--seed", type=int, help="random seed override")
    args = parser.parse_args(argv)

    if args.config is None:
        if args.subcommand != "report" or args.out is None:
            parser.error("--config is required (report may use --out alone)")
        cfg = parse_config_defaults(out_dir=args.out)
    else:
        try:
            cfg = parse_config(args.config)
        except ConfigError as exc:
            print(f"nskl: {exc}", file=sys.stderr)
            return EXIT_IO
    cfg = cfg.with_overrides(out_dir=args.out, seed=args.seed)
    return run_subcommand(args.subcommand, cfg)


def parse_config_defaults(out_dir: str) -> RunConfig:
    """All-default configuration pointed at an existing output directory."""
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(f"output.dir = {out_dir}\n")
        path = fh.name
    try:
        return parse_config(path)
    finally:
        os.unlink(path)


if __name__ == "__main__":
    sys.exit(main())
