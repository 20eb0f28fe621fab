"""Quantitative checks on computed trajectories.

Everything here post-processes immutable trajectories: weighted derivative
norms, window constants, doubling flags, the V(t) functional, scale
equivariance between paired runs, and the derivative bound on the back half of
the estimate window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SolverConfig, Trajectory, simulate_nse
from .grid import GridSpec, VectorField, derivative_sup_norm, max_norm


@dataclass(frozen=True)
class WindowParams:
    """Estimate window t <= c_win / |f|^2; c_win is configuration, not a claim."""

    c_win: float
    f_inf: float

    def __post_init__(self):
        if self.c_win <= 0:
            raise ValueError("window constant must be positive")
        if self.f_inf < 0:
            raise ValueError("initial norm must be non-negative")

    @property
    def t_max(self) -> float:
        return math.inf if self.f_inf == 0 else self.c_win / self.f_inf**2


@dataclass(frozen=True)
class PhiSeries:
    j: int
    times: np.ndarray
    values: np.ndarray


def phi_series(traj: Trajectory, j: int) -> PhiSeries:
    """t^{j/2} * sup-norm of the j-th derivatives along the trajectory.

    At t = 0 the weight makes the value 0 for j >= 1; for j = 0 it is |f|.
    """
    if j < 0:
        raise ValueError("derivative order must be >= 0")
    values = np.empty(len(traj.times))
    for k, (t, u) in enumerate(zip(traj.times, traj.snapshots)):
        if t == 0.0:
            values[k] = traj.initial_max_norm if j == 0 else 0.0
        else:
            values[k] = t ** (j / 2.0) * derivative_sup_norm(u, j)
    return PhiSeries(j, traj.times.copy(), values)


def estimate_Kj(traj: Trajectory, j: int, window: WindowParams) -> float:
    """Empirical K_j: max of phi_j / |f| over snapshots inside the window."""
    if window.f_inf == 0:
        return 0.0
    t_max = window.t_max
    if traj.times[-1] < t_max * (1 - 1e-9):
        raise ValueError(
            f"trajectory ends at {traj.times[-1]:.6g}, window needs {t_max:.6g}"
        )
    series = phi_series(traj, j)
    inside = series.times <= t_max * (1 + 1e-9)
    return float(series.values[inside].max() / window.f_inf)


def doubling_check(traj: Trajectory, window: WindowParams, factor: float) -> bool:
    """True iff |u(t)| stays below factor * |f| for all snapshots before t_max."""
    inside = traj.times < window.t_max
    norms = np.array([max_norm(u) for u, keep in zip(traj.snapshots, inside) if keep])
    if window.f_inf == 0:
        return bool((norms == 0.0).all())
    return bool((norms < factor * window.f_inf).all())


def empirical_window_constant(traj: Trajectory, factor: float) -> float:
    """Largest c such that the doubling bound holds on t < c/|f|^2 (snapshot scan)."""
    f_inf = traj.initial_max_norm
    if f_inf == 0:
        return math.inf
    for t, u in zip(traj.times, traj.snapshots):
        if max_norm(u) >= factor * f_inf:
            return t * f_inf**2
    return traj.times[-1] * f_inf**2


@dataclass(frozen=True)
class VSeries:
    times: np.ndarray
    values: np.ndarray
    fitted_constants: np.ndarray

    @property
    def fitted_C(self) -> float:
        return float(self.fitted_constants[-1])


def v_series(traj: Trajectory) -> VSeries:
    """V(t) = |u| + t^{1/2} |D u| and the smallest C with
    V(t) <= C (|f| + t^{1/2} max_{s<=t} V(s)^2) pointwise up to each snapshot."""
    f_inf = traj.initial_max_norm
    times = traj.times
    values = np.empty(len(times))
    for k, (t, u) in enumerate(zip(times, traj.snapshots)):
        values[k] = max_norm(u) + math.sqrt(t) * derivative_sup_norm(u, 1)
    fitted = np.zeros(len(times))
    running_sq = 0.0
    best = 0.0
    for k, t in enumerate(times):
        running_sq = max(running_sq, values[k] ** 2)
        denom = f_inf + math.sqrt(t) * running_sq
        if denom > 0:
            best = max(best, values[k] / denom)
        fitted[k] = best
    return VSeries(times.copy(), values, fitted)


@dataclass(frozen=True)
class ScalingRow:
    j: int
    lam: float
    rel_error: float


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple[ScalingRow, ...]
    max_rel_error: float


def _embed_scaled(f: VectorField, lam: int) -> VectorField:
    """f_lambda(x) = lam * f(lam x) on a grid with lam * N points per axis."""
    grid = f.grid
    fine = GridSpec(grid.dim, grid.points * lam, grid.box_length)
    hats = np.fft.fftn(f.values, axes=grid.spatial_axes) / grid.size
    out = np.zeros((grid.dim,) + fine.shape, dtype=np.complex128)
    idx = [((lam * grid.wavenumbers[ax]).astype(int)) % fine.points for ax in range(grid.dim)]
    out[(slice(None),) + np.ix_(*idx)] = lam * hats
    vals = np.fft.ifftn(out * fine.size, axes=fine.spatial_axes).real
    return VectorField(fine, vals, divergence_free=f.divergence_free)


def scaling_equivariance_check(f: VectorField, lam: int, cfg: SolverConfig,
                               j_max: int = 2) -> ScalingReport:
    """Compare the run from f with the run from lam*f(lam x) at matched times.

    The rescaled run uses step dt/lam^2 on a lam-times finer grid, which makes
    the two discrete flows exactly conjugate; derivative sup norms must then
    satisfy |D^j u_lam(t)| = lam^{j+1} |D^j u(lam^2 t)| to rounding.
    """
    if lam != int(lam) or lam < 1:
        raise ValueError(f"scaling factor must be a positive integer, got {lam}")
    lam = int(lam)
    base = simulate_nse(f, cfg)
    if lam == 1:
        rows = tuple(ScalingRow(j, 1.0, 0.0) for j in range(j_max + 1))
        return ScalingReport(rows, 0.0)
    scaled_cfg = SolverConfig(cfg.dt / lam**2, cfg.T / lam**2, cfg.scheme,
                              cfg.dealias, cfg.snapshot_stride)
    scaled = simulate_nse(_embed_scaled(f, lam), scaled_cfg)

    rows = []
    worst = 0.0
    for j in range(j_max + 1):
        err = 0.0
        for k, t in enumerate(scaled.times):
            a = derivative_sup_norm(scaled.snapshots[k], j)
            b = lam ** (j + 1) * derivative_sup_norm(base.snapshots[k], j)
            if t == 0.0 and j >= 1 and b == 0.0:
                continue
            err = max(err, abs(a - b) / max(abs(b), 1e-300))
        rows.append(ScalingRow(j, float(lam), err))
        worst = max(worst, err)
    return ScalingReport(tuple(rows), worst)


@dataclass(frozen=True)
class SmoothingCheck:
    j: int
    c_j: float
    window_max: float
    bound: float
    margin: float
    bound_ok: bool


def smoothing_window_check(traj: Trajectory, window: WindowParams, j: int) -> SmoothingCheck:
    """Derivative bound |D^j u(t)| <= C_j |f|^{j+1} on [t_max/2, t_max].

    C_j = 2^{j/2} K_j / c_win^{j/2} is derived from the empirical K_j, so the
    report's margin quantifies how much slack the trajectory leaves.
    """
    k_j = estimate_Kj(traj, j, window)
    c_j = 2 ** (j / 2.0) * k_j / window.c_win ** (j / 2.0)
    t_max = window.t_max
    if traj.times[-1] < t_max * (1 - 1e-9):
        raise ValueError("trajectory does not cover the window")
    inside = (traj.times >= t_max / 2 * (1 - 1e-9)) & (traj.times <= t_max * (1 + 1e-9))
    if not inside.any():
        raise ValueError("no snapshots on the back half of the window")
    window_max = max(
        derivative_sup_norm(u, j)
        for u, keep in zip(traj.snapshots, inside) if keep
    )
    bound = c_j * window.f_inf ** (j + 1)
    margin = math.inf if window_max == 0 else bound / window_max
    return SmoothingCheck(j, c_j, window_max, bound, margin, window_max <= bound * (1 + 1e-12))
