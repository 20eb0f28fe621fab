"""Closed-form heat-kernel derivatives and kernel-norm measurements.

The n-dimensional Gaussian kernel factors over axes, so D^alpha theta(t) is a
product of one-dimensional Hermite-weighted Gaussians and its absolute integral
over a box is the product of one-dimensional integrals. Composite kernels
(projector applied to a kernel derivative) have no closed form and are measured
on a large periodic box via FFT.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite, legendre

from .grid import GridSpec, MultiIndex, multi_indices

RADIUS_FACTOR = 12.0  # Gaussian tail beyond 12*sqrt(t) is below 1e-31 of the mass


def _hermite_coeff(m: int) -> np.ndarray:
    c = np.zeros(m + 1)
    c[m] = 1.0
    return c


def gauss_derivative_1d(m: int, x, t: float):
    """m-th spatial derivative of the 1-d heat kernel at time t."""
    if t <= 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    x = np.asarray(x, dtype=np.float64)
    root_t = math.sqrt(t)
    y = x / (2.0 * root_t)
    scale = (4.0 * math.pi * t) ** -0.5 * (2.0 * root_t) ** -m * (-1.0) ** m
    return scale * hermite.hermval(y, _hermite_coeff(m)) * np.exp(-(y**2))


def default_s_set() -> tuple[float, ...]:
    return tuple(np.logspace(-1.5, 1.5, 13))


@dataclass(frozen=True)
class KernelQuery:
    """One kernel-norm evaluation: dimension, derivative order, time, quadrature."""

    dim: int
    alpha: MultiIndex
    t: float
    radius: float | None = None
    samples_per_axis: int = 48
    s_set: tuple[float, ...] = field(default_factory=default_s_set)

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError(f"kernel time must be positive, got {self.t}")
        if self.alpha.dim != self.dim:
            raise ValueError("multi-index dimension != query dimension")
        floor = RADIUS_FACTOR * math.sqrt(self.t)
        radius = floor if self.radius is None else float(self.radius)
        if radius < floor * (1.0 - 1e-12):
            raise ValueError(f"radius {radius} below tail-safe minimum {floor}")
        object.__setattr__(self, "radius", radius)
        if self.samples_per_axis < 4:
            raise ValueError("samples_per_axis must be at least 4")
        s_sorted = tuple(sorted(float(s) for s in self.s_set))
        if not s_sorted or s_sorted[0] <= 0:
            raise ValueError("s_set must be non-empty positive reals")
        object.__setattr__(self, "s_set", s_sorted)


def heat_kernel_derivative(q: KernelQuery, x) -> np.ndarray:
    """Exact D^alpha theta(x, t) via the tensor-product Hermite form.

    x has shape (..., dim); broadcasting over leading axes is supported.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[-1] != q.dim:
        raise ValueError(f"points must have {q.dim} coordinates")
    out = np.ones(x.shape[:-1])
    for ax, m in enumerate(q.alpha.components):
        out = out * gauss_derivative_1d(m, x[..., ax], q.t)
    return out if out.size > 1 else float(out.reshape(-1)[0])


def _axis_breakpoints(m: int, t: float, radius: float, panels: int) -> np.ndarray:
    """Panel edges on [-R, R]: uniform subdivision with the kernel zeros inserted.

    Splitting at the sign changes of D^m theta keeps |D^m theta| smooth on every
    panel, so fixed-order Gauss-Legendre quadrature converges spectrally.
    """
    edges = set(np.linspace(-radius, radius, panels + 1))
    if m > 0:
        roots = hermite.hermroots(_hermite_coeff(m)) * 2.0 * math.sqrt(t)
        edges.update(r for r in roots if -radius < r < radius)
    return np.array(sorted(edges))


def _abs_gauss_integral_1d(m: int, t: float, radius: float, panels: int, gl_order: int = 16) -> float:
    nodes, weights = legendre.leggauss(gl_order)
    edges = _axis_breakpoints(m, t, radius, panels)
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.abs(gauss_derivative_1d(m, pts, t))
    return float((half[:, None] * weights[None, :] * vals).sum())


def kernel_l1_norm(q: KernelQuery) -> float:
    """L1 norm of D^alpha theta(t) over the truncated box [-R, R]^n.

    The absolute value factors over axes, so the tensor-product quadrature
    reduces to a product of one-dimensional panel integrals.
    """
    total = 1.0
    for m in q.alpha.components:
        total *= _abs_gauss_integral_1d(m, q.t, q.radius, q.samples_per_axis)
    return total


@dataclass(frozen=True)
class KernelScalingCheck:
    alpha: MultiIndex
    t_values: tuple[float, ...]
    l1_norms: tuple[float, ...]
    scaled_norms: tuple[float, ...]
    max_rel_spread: float


def kernel_scaling_check(alpha: MultiIndex, t_values, *, radius_factor: float = RADIUS_FACTOR,
                         samples_per_axis: int = 48) -> KernelScalingCheck:
    """t^{|alpha|/2} * L1 norm across times; exact change of variables, so the
    spread measures quadrature error only."""
    ts = tuple(sorted(float(t) for t in t_values))
    if len(set(ts)) < 2:
        raise ValueError("need at least 2 distinct t values")
    norms = []
    for t in ts:
        q = KernelQuery(alpha.dim, alpha, t, radius=radius_factor * math.sqrt(t),
                        samples_per_axis=samples_per_axis)
        norms.append(kernel_l1_norm(q))
    scaled = tuple(t ** (alpha.order / 2.0) * v for t, v in zip(ts, norms))
    spread = (max(scaled) - min(scaled)) / min(scaled)
    return KernelScalingCheck(alpha, ts, tuple(norms), scaled, float(spread))


_MAXIMAL_SAMPLES = {1: 8001, 2: 801, 3: 201}


def maximal_function_norm(q: KernelQuery, samples_per_axis: int | None = None) -> float:
    """L1 norm over the box of sup_{s in s_set} |h_s * D^alpha theta(t)|.

    With h = theta(., 1) the dilation h_s equals theta(., s^2), so each
    convolution is the kernel derivative at shifted time t + s^2 in closed
    form. The sup is taken over the finite s grid and integrated by the
    trapezoid rule on a uniform lattice.
    """
    if q.s_set[-1] / q.s_set[0] < 1e3 * (1.0 - 1e-12):
        raise ValueError("s_set must cover at least three decades")
    n = samples_per_axis or _MAXIMAL_SAMPLES[q.dim]
    x = np.linspace(-q.radius, q.radius, n)
    w = np.full(n, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    best = None
    for s in q.s_set:
        tau = q.t + s * s
        factors = [np.abs(gauss_derivative_1d(m, x, tau)) for m in q.alpha.components]
        prod = factors[0]
        for f in factors[1:]:
            prod = np.multiply.outer(prod, f)
        best = prod if best is None else np.maximum(best, prod)
    weight = w
    for _ in range(q.dim - 1):
        weight = np.multiply.outer(weight, w)
    return float((best * weight).sum())


def composite_kernel_l1_norm(i: int, l: int, alpha: MultiIndex, t: float, grid: GridSpec) -> float:
    """Box L1 norm of (delta_il + R_i R_l) D^alpha theta(t) on a periodic grid.

    The kernel derivative is sampled in closed form around the origin, the
    projector pair is applied spectrally, and the trapezoid rule (exact for
    periodic data) integrates the absolute value. Emits a warning when the
    sampled Gaussian derivative has not decayed at the box boundary.
    """
    if not (1 <= i <= grid.dim and 1 <= l <= grid.dim):
        raise ValueError("component indices must be in 1..dim")
    if alpha.dim != grid.dim:
        raise ValueError("multi-index dimension != grid dimension")
    if t <= 0:
        raise ValueError(f"kernel time must be positive, got {t}")
    factors = []
    for ax, m in enumerate(alpha.components):
        L = grid.box_length[ax]
        x = np.arange(grid.points) * (L / grid.points)
        x = (x + 0.5 * L) % L - 0.5 * L  # kernel centered at the origin
        factors.append(gauss_derivative_1d(m, x, t))
    vals = factors[0]
    for f in factors[1:]:
        vals = np.multiply.outer(vals, f)

    boundary_peak = 0.0
    for ax in range(grid.dim):
        slab = np.take(np.abs(vals), grid.points // 2, axis=ax)
        boundary_peak = max(boundary_peak, float(slab.max()))
    peak = float(np.abs(vals).max())
    if boundary_peak > 1e-10 * peak:
        warnings.warn(
            f"composite kernel box too small: boundary/peak = {boundary_peak / peak:.3e}",
            stacklevel=2,
        )

    hat = np.fft.fftn(vals)
    xi_i = grid._along(i - 1, grid.axis_frequencies(i - 1))
    xi_l = grid._along(l - 1, grid.axis_frequencies(l - 1))
    symbol = (1.0 if i == l else 0.0) - xi_i * xi_l * grid.inv_xi_squared
    kernel_vals = np.fft.ifftn(hat * symbol).real
    return float(np.abs(kernel_vals).sum() * grid.cell_volume)


def composite_scaling_spread(i: int, l: int, alpha: MultiIndex, t_values, points: int,
                             box_factor: float = 48.0) -> tuple[tuple[float, ...], float]:
    """Scaled composite norms across times, each on its own box >= box_factor*sqrt(t)."""
    ts = tuple(sorted(float(t) for t in t_values))
    scaled = []
    for t in ts:
        grid = GridSpec(alpha.dim, points, box_factor * math.sqrt(t))
        scaled.append(t ** (alpha.order / 2.0) * composite_kernel_l1_norm(i, l, alpha, t, grid))
    spread = (max(scaled) - min(scaled)) / min(scaled)
    return tuple(scaled), float(spread)


def kernel_report_rows(dims, max_order: int, t_values, *, samples_per_axis: int = 48,
                       maximal_max_order: int = 2) -> list[dict]:
    """CSV-ready rows (n, alpha, t, l1_norm, scaled_norm, maximal_norm)."""
    rows = []
    for n in dims:
        for order in range(max_order + 1):
            for alpha in multi_indices(n, order):
                for t in t_values:
                    q = KernelQuery(n, alpha, float(t), samples_per_axis=samples_per_axis)
                    l1 = kernel_l1_norm(q)
                    maximal = (
                        maximal_function_norm(q)
                        if order <= maximal_max_order or n == 1
                        else float("nan")
                    )
                    rows.append({
                        "n": n,
                        "alpha": str(alpha),
                        "t": float(t),
                        "l1_norm": l1,
                        "scaled_norm": float(t) ** (order / 2.0) * l1,
                        "maximal_norm": maximal,
                    })
    return rows
