"""Figure rendering for the report path.

Reads the delimited outputs a run left behind and renders summary figures next
to them. Imported lazily by the CLI so the computational modules never depend
on a plotting backend.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path: Path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    columns = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            columns[name].append(cell)
    return columns


def _floats(cells):
    return np.array([float(c) for c in cells])


def _save(fig, path: Path, written: list):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)


def _plot_phi_series(out: Path, written: list):
    paths = sorted(out.glob("phi_series_j*.csv"))
    if not paths:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in paths:
        cols = _read_csv(path)
        j = path.stem.rsplit("j", 1)[-1]
        ax.plot(_floats(cols["t"]), _floats(cols["phi"]), label=f"j = {j}")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$t^{j/2}\,\|\mathcal{D}^j u\|_\infty$")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, out / "phi_series.png", written)


def _plot_v_series(out: Path, written: list):
    path = out / "v_series.csv"
    if not path.is_file():
        return
    cols = _read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(_floats(cols["t"]), _floats(cols["V"]), label="V(t)")
    ax.plot(_floats(cols["t"]), _floats(cols["fitted_C"]), "--", label="fitted C")
    ax.set_xlabel("t")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, out / "v_series.png", written)


def _plot_kj_tables(out: Path, written: list):
    paths = sorted(out.glob("kj_table_A*.csv"))
    if not paths:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / len(paths)
    for idx, path in enumerate(paths):
        cols = _read_csv(path)
        j = _floats(cols["j"])
        ax.bar(j + idx * width, _floats(cols["K_j"]), width=width,
               label=path.stem.replace("kj_table_", ""))
    ax.set_xlabel("derivative order j")
    ax.set_ylabel("empirical K_j")
    ax.legend()
    ax.grid(alpha=0.3, axis="y")
    _save(fig, out / "kj_collapse.png", written)


def _plot_scaling(out: Path, written: list):
    path = out / "scaling_report.csv"
    if not path.is_file():
        return
    cols = _read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(_floats(cols["j"]), np.maximum(_floats(cols["rel_error"]), 1e-18), "o-")
    ax.set_xlabel("derivative order j")
    ax.set_ylabel("relative equivariance error")
    ax.grid(alpha=0.3)
    _save(fig, out / "scaling_report.png", written)


def _plot_kernels(out: Path, written: list):
    path = out / "kernel_lab.csv"
    if not path.is_file():
        return
    cols = _read_csv(path)
    t = _floats(cols["t"])
    scaled = _floats(cols["scaled_norm"])
    labels = [f"n={n} a={a}" for n, a in zip(cols["n"], cols["alpha"])]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in dict.fromkeys(labels):
        sel = [k for k, lab in enumerate(labels) if lab == label]
        ax.semilogx(t[sel], scaled[sel], "o-", lw=0.8, ms=3, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$t^{|\alpha|/2}\,\|D^\alpha\theta(t)\|_1$")
    if len(set(labels)) <= 12:
        ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3)
    _save(fig, out / "kernel_scaling.png", written)


def _plot_picard(out: Path, written: list):
    path = out / "picard_residuals.csv"
    if not path.is_file():
        return
    cols = _read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(_floats(cols["iteration"]), _floats(cols["residual"]), "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup-norm residual")
    ax.grid(alpha=0.3)
    _save(fig, out / "picard_residuals.png", written)


def render_all(out_dir) -> list[Path]:
    """Render every figure whose source CSV exists; returns written paths."""
    out = Path(out_dir)
    written: list[Path] = []
    _plot_phi_series(out, written)
    _plot_v_series(out, written)
    _plot_kj_tables(out, written)
    _plot_scaling(out, written)
    _plot_kernels(out, written)
    _plot_picard(out, written)
    return written
