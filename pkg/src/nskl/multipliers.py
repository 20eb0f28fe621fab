"""Fourier multiplier operators on periodic fields.

Heat semigroup, Riesz transforms, Leray projection, pressure recovery, and the
two dealiased forms of the quadratic nonlinearity. Sign conventions: the Riesz
symbol is i*xi_i/|xi|, so the pair R_i R_l carries -xi_i*xi_l/|xi|^2 and the
projector is the orthogonal delta_il - xi_i*xi_l/|xi|^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field, GridSpec, SpectralField, VectorField, forward_transform, inverse_transform


@dataclass(frozen=True)
class MultiplierSpec:
    """Scalar Fourier multiplier with an explicit value at the zero mode."""

    symbol: Callable[[GridSpec], np.ndarray]
    zero_mode_rule: complex

    def apply(self, s: SpectralField) -> SpectralField:
        sym = np.asarray(self.symbol(s.grid), dtype=np.complex128)
        if not np.isfinite(sym).all():
            raise ValueError("multiplier symbol must be bounded on the lattice")
        origin = (0,) * s.grid.dim
        sym = sym.copy()
        sym[origin] = self.zero_mode_rule
        return SpectralField(s.grid, s.coefficients * sym)


def dealias(s: SpectralField) -> SpectralField:
    """Zero all modes with any |k_j| > N/3 (2/3 rule for quadratic products)."""
    return SpectralField(s.grid, np.where(s.grid.dealias_keep, s.coefficients, 0.0))


def _vector_hats(u: VectorField) -> np.ndarray:
    return np.fft.fftn(u.values, axes=u.grid.spatial_axes) / u.grid.size


def _hats_to_vector(grid: GridSpec, hats: np.ndarray, divergence_free: bool = False) -> VectorField:
    vals = np.fft.ifftn(hats * grid.size, axes=grid.spatial_axes).real
    return VectorField(grid, vals, divergence_free=divergence_free)


def heat_semigroup(u, t: float):
    """Per-mode multiplication by exp(-|xi|^2 t); t = 0 is the identity."""
    if t < 0:
        raise ValueError(f"heat semigroup needs t >= 0, got {t}")
    decay = np.exp(-u.grid.xi_squared * t)
    if isinstance(u, Field):
        hats = np.fft.fftn(u.values) * decay
        return Field(u.grid, np.fft.ifftn(hats).real)
    hats = np.fft.fftn(u.values, axes=u.grid.spatial_axes) * decay
    vals = np.fft.ifftn(hats, axes=u.grid.spatial_axes).real
    return VectorField(u.grid, vals, divergence_free=u.divergence_free)


def _riesz_symbol(grid: GridSpec, axis: int) -> np.ndarray:
    xi = np.broadcast_to(grid._along(axis, grid.axis_frequencies(axis)), grid.shape)
    mag = np.sqrt(grid.xi_squared)
    ratio = np.zeros(grid.shape)
    np.divide(xi, mag, out=ratio, where=mag > 0)
    return 1j * ratio


def riesz(f: Field, i: int) -> Field:
    """i-th Riesz transform, multiplier i*xi_i/|xi|; the mean is mapped to 0."""
    if not 1 <= i <= f.grid.dim:
        raise ValueError(f"component index must be in 1..{f.grid.dim}, got {i}")
    spec = MultiplierSpec(lambda g: _riesz_symbol(g, i - 1), 0.0)
    return inverse_transform(spec.apply(forward_transform(f)))


def project_hats(grid: GridSpec, hats: np.ndarray) -> np.ndarray:
    """Leray projection on stacked spectral components; zero mode passes through."""
    xi = [grid._along(ax, grid.axis_frequencies(ax)) for ax in range(grid.dim)]
    dot = sum(xi[ax] * hats[ax] for ax in range(grid.dim)) * grid.inv_xi_squared
    return np.stack([hats[ax] - xi[ax] * dot for ax in range(grid.dim)])


def leray_project(u: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields, delta_il + R_i R_l."""
    return _hats_to_vector(u.grid, project_hats(u.grid, _vector_hats(u)), divergence_free=True)


def _dealiased_product_hat(grid: GridSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Spectrum of the pointwise product a*b with the 2/3 mask applied."""
    hat = np.fft.fftn(a * b) / grid.size
    return np.where(grid.dealias_keep, hat, 0.0)


def pressure_from_velocity(u: VectorField) -> Field:
    """Pressure sum_{i,l} R_i R_l (u_i u_l); zero mean by the zero-mode rule."""
    grid = u.grid
    xi = [grid._along(ax, grid.axis_frequencies(ax)) for ax in range(grid.dim)]
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for i in range(grid.dim):
        for l in range(i, grid.dim):
            t_hat = _dealiased_product_hat(grid, u.values[i], u.values[l])
            weight = 2.0 if l > i else 1.0
            acc += weight * xi[i] * xi[l] * t_hat
    p_hat = -acc * grid.inv_xi_squared
    return Field(grid, np.fft.ifftn(p_hat * grid.size).real)


def _warn_unflagged(u: VectorField, op: str):
    if not u.divergence_free:
        warnings.warn(f"{op}: input not flagged divergence-free", stacklevel=3)


def nonlinear_advective(u: VectorField) -> VectorField:
    """P(u . grad u) with pointwise products formed in physical space."""
    _warn_unflagged(u, "nonlinear_advective")
    grid = u.grid
    grads = np.empty((grid.dim, grid.dim) + grid.shape)
    hats = _vector_hats(u)
    for i in range(grid.dim):
        for j in range(grid.dim):
            xi = grid._along(j, grid.axis_frequencies(j, zero_nyquist=True))
            grads[i, j] = np.fft.ifftn(1j * xi * hats[i] * grid.size).real
    adv_hats = np.empty((grid.dim,) + grid.shape, dtype=np.complex128)
    for i in range(grid.dim):
        s = sum(u.values[j] * grads[i, j] for j in range(grid.dim))
        adv_hats[i] = np.where(grid.dealias_keep, np.fft.fftn(s) / grid.size, 0.0)
    return _hats_to_vector(grid, project_hats(grid, adv_hats))


def nonlinear_divergence_hats(grid: GridSpec, u_values: np.ndarray, use_dealias: bool = True) -> np.ndarray:
    """Spectrum of sum_i D_i P(u_i u) from stacked physical components."""
    t_hats = {}
    for i in range(grid.dim):
        for l in range(i, grid.dim):
            hat = np.fft.fftn(u_values[i] * u_values[l]) / grid.size
            if use_dealias:
                hat = np.where(grid.dealias_keep, hat, 0.0)
            t_hats[i, l] = t_hats[l, i] = hat
    xi = [grid._along(ax, grid.axis_frequencies(ax, zero_nyquist=True)) for ax in range(grid.dim)]
    conv = np.stack([
        sum(1j * xi[i] * t_hats[i, m] for i in range(grid.dim)) for m in range(grid.dim)
    ])
    return project_hats(grid, conv)


def nonlinear_divergence(u: VectorField) -> VectorField:
    """sum_i D_i P(u_i u), the solver's canonical form of the nonlinearity.

    The outer derivative annihilates the zero mode, so the output has mean
    zero exactly; for divergence-free input it agrees with the advective form.
    """
    _warn_unflagged(u, "nonlinear_divergence")
    return _hats_to_vector(u.grid, nonlinear_divergence_hats(u.grid, u.values))
