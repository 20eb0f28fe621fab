"""Periodic grids, real/spectral fields, derivatives, and maximum norms.

The whole space is modeled as the torus [0, L_1) x ... x [0, L_n) sampled on a
uniform lattice of N points per axis, with physical frequencies xi = 2*pi*k/L.
Spectral multipliers are exact there, so derivatives and norms are exact for
band-limited data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: dimension, points per axis, box lengths."""

    dim: int
    points: int
    box_length: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.points < 8 or not _is_power_of_two(self.points):
            raise ValueError(f"points must be a power of two >= 8, got {self.points}")
        lengths = self.box_length
        if isinstance(lengths, (int, float)):
            lengths = (float(lengths),) * self.dim
        elif len(lengths) == 0:
            lengths = (TWO_PI,) * self.dim
        elif len(lengths) != self.dim:
            raise ValueError("box_length must supply one length per axis")
        lengths = tuple(float(L) for L in lengths)
        if any(L <= 0 for L in lengths):
            raise ValueError("box_length entries must be positive")
        object.__setattr__(self, "box_length", lengths)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @cached_property
    def cell_volume(self) -> float:
        return math.prod(L / self.points for L in self.box_length)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers per axis in FFT layout: 0..N/2-1, -N/2..-1."""
        k = np.fft.fftfreq(self.points, 1.0 / self.points)
        return tuple(k.copy() for _ in range(self.dim))

    def axis_frequencies(self, axis: int, zero_nyquist: bool = False) -> np.ndarray:
        """Physical frequencies 2*pi*k/L along one axis.

        With zero_nyquist the unpaired -N/2 mode is dropped; odd-order
        derivative symbols need that to keep inverse transforms real.
        """
        k = self.wavenumbers[axis].copy()
        if zero_nyquist:
            k[self.points // 2] = 0.0
        return TWO_PI * k / self.box_length[axis]

    def _along(self, axis: int, arr: np.ndarray) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.points
        return arr.reshape(shape)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi|^2 on the full lattice (true Nyquist frequencies included)."""
        total = np.zeros(self.shape)
        for ax in range(self.dim):
            total = total + self._along(ax, self.axis_frequencies(ax) ** 2)
        return total

    @cached_property
    def inv_xi_squared(self) -> np.ndarray:
        """1/|xi|^2 with the zero mode mapped to 0 (explicit zero-mode rule)."""
        out = np.zeros(self.shape)
        np.divide(1.0, self.xi_squared, out=out, where=self.xi_squared > 0)
        return out

    @cached_property
    def dealias_keep(self) -> np.ndarray:
        """Boolean mask keeping modes with every |k_j| <= N/3 (2/3 rule)."""
        cutoff = self.points // 3
        keep = np.ones(self.shape, dtype=bool)
        for ax in range(self.dim):
            keep &= self._along(ax, np.abs(self.wavenumbers[ax]) <= cutoff)
        return keep

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        axes = [np.arange(self.points) * (L / self.points) for L in self.box_length]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class MultiIndex:
    """Derivative order alpha = (alpha_1, ..., alpha_n)."""

    components: tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(a) for a in self.components)
        if any(a < 0 for a in comps):
            raise ValueError("multi-index components must be non-negative")
        object.__setattr__(self, "components", comps)

    @property
    def order(self) -> int:
        return sum(self.components)

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if self.dim != other.dim:
            raise ValueError("multi-index dimensions differ")
        return MultiIndex(tuple(a + b for a, b in zip(self.components, other.components)))

    def __str__(self) -> str:
        return "(" + ",".join(str(a) for a in self.components) + ")"


def multi_indices(dim: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of the given total order, C(order+dim-1, dim-1) of them."""
    if dim == 1:
        return (MultiIndex((order,)),)
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(dim - 1, order - first):
            out.append(MultiIndex((first,) + rest.components))
    return tuple(out)


@dataclass(frozen=True)
class Field:
    """Real scalar samples on a grid, row-major over grid points."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class VectorField:
    """dim real components sharing one grid, stored stacked on a leading axis."""

    grid: GridSpec
    values: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        expected = (self.grid.dim,) + self.grid.shape
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} != {expected}")
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_components(cls, components, divergence_free: bool = False) -> "VectorField":
        grids = {f.grid for f in components}
        if len(grids) != 1:
            raise ValueError("all components must share one grid")
        grid = components[0].grid
        if len(components) != grid.dim:
            raise ValueError("need exactly dim components")
        return cls(grid, np.stack([f.values for f in components]), divergence_free)

    @property
    def components(self) -> tuple[Field, ...]:
        return tuple(Field(self.grid, self.values[i]) for i in range(self.grid.dim))


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients on the frequency lattice, zero mode = mean."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=np.complex128)
        if coeff.shape != self.grid.shape:
            raise ValueError(f"coefficients shape {coeff.shape} != {self.grid.shape}")
        object.__setattr__(self, "coefficients", coeff)


def forward_transform(f: Field) -> SpectralField:
    """DFT normalized so the zero mode equals the mean of f."""
    return SpectralField(f.grid, np.fft.fftn(f.values) / f.grid.size)


def inverse_transform(s: SpectralField) -> Field:
    return Field(s.grid, np.fft.ifftn(s.coefficients * s.grid.size).real)


def hermitian_defect(s: SpectralField) -> float:
    """Max |c(k) - conj(c(-k))|; zero for spectra of real fields."""
    c = s.coefficients
    mirrored = c
    for ax in range(s.grid.dim):
        mirrored = np.roll(np.flip(mirrored, axis=ax), 1, axis=ax)
    return float(np.abs(c - np.conj(mirrored)).max())


def _apply_derivative_symbol(grid: GridSpec, hats: np.ndarray, alpha: MultiIndex) -> np.ndarray:
    """Multiply spectral data by prod_j (i*xi_j)^alpha_j, one axis at a time."""
    if alpha.dim != grid.dim:
        raise ValueError("multi-index dimension != grid dimension")
    out = hats
    spatial_offset = hats.ndim - grid.dim
    for ax, a in enumerate(alpha.components):
        if a == 0:
            continue
        xi = grid.axis_frequencies(ax, zero_nyquist=(a % 2 == 1))
        w = (1j * xi) ** a
        shape = [1] * hats.ndim
        shape[spatial_offset + ax] = grid.points
        out = out * w.reshape(shape)
    return out


def derivative(f: Field, alpha: MultiIndex) -> Field:
    """Spectral derivative D^alpha; the order-0 index is the identity."""
    if alpha.order == 0:
        return Field(f.grid, f.values.copy())
    hats = np.fft.fftn(f.values)
    hats = _apply_derivative_symbol(f.grid, hats, alpha)
    return Field(f.grid, np.fft.ifftn(hats).real)


def max_norm(u) -> float:
    """Sup over grid points of the pointwise Euclidean norm."""
    if isinstance(u, Field):
        return float(np.abs(u.values).max())
    return float(np.sqrt((u.values**2).sum(axis=0)).max())


def derivative_sup_norm(u, j: int) -> float:
    """Max of max_norm(D^alpha u) over all multi-indices with |alpha| = j."""
    if j < 0:
        raise ValueError("derivative order must be >= 0")
    if j == 0:
        return max_norm(u)
    grid = u.grid
    vals = u.values if isinstance(u, VectorField) else u.values[np.newaxis]
    hats = np.fft.fftn(vals, axes=grid.spatial_axes)
    best = 0.0
    for alpha in multi_indices(grid.dim, j):
        d = _apply_derivative_symbol(grid, hats, alpha)
        dv = np.fft.ifftn(d, axes=grid.spatial_axes).real
        best = max(best, float(np.sqrt((dv**2).sum(axis=0)).max()))
    return best


def divergence(u: VectorField) -> Field:
    """Spectral divergence sum_j D_j u_j."""
    grid = u.grid
    hats = np.fft.fftn(u.values, axes=grid.spatial_axes)
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for ax in range(grid.dim):
        xi = grid.axis_frequencies(ax, zero_nyquist=True)
        acc += 1j * grid._along(ax, xi) * hats[ax]
    return Field(grid, np.fft.ifftn(acc).real)


def taylor_green(grid: GridSpec, amplitude: float) -> VectorField:
    """Canonical divergence-free trigonometric datum on the 2*pi cube."""
    if grid.dim != 3:
        raise ValueError("taylor_green requires dim = 3")
    if any(not math.isclose(L, TWO_PI, rel_tol=1e-12) for L in grid.box_length):
        raise ValueError("taylor_green requires box_length 2*pi per axis")
    x1, x2, x3 = grid.coords
    a = float(amplitude)
    u1 = a * np.sin(x1) * np.cos(x2) * np.cos(x3)
    u2 = -a * np.cos(x1) * np.sin(x2) * np.cos(x3)
    u3 = np.zeros(grid.shape)
    return VectorField(grid, np.stack([u1, u2, u3]), divergence_free=True)


def shear_mode(grid: GridSpec, amplitude: float) -> VectorField:
    """Single shear mode (A sin x_2, 0, ..., 0); divergence-free by construction."""
    vals = np.zeros((grid.dim,) + grid.shape)
    vals[0] = amplitude * np.sin(grid.coords[1] * (TWO_PI / grid.box_length[1]))
    return VectorField(grid, vals, divergence_free=True)


def random_divergence_free(grid: GridSpec, seed: int, band: int, amplitude: float) -> VectorField:
    """Band-limited random field, projected divergence-free and rescaled.

    Deterministic per seed; the sup norm of the result equals `amplitude`.
    """
    if not 1 <= band < grid.points // 2:
        raise ValueError(f"band must satisfy 1 <= band < N/2, got {band}")
    from .multipliers import project_hats

    rng = np.random.default_rng(seed)
    white = rng.standard_normal((grid.dim,) + grid.shape)
    hats = np.fft.fftn(white, axes=grid.spatial_axes) / grid.size
    keep = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.dim):
        keep &= grid._along(ax, np.abs(grid.wavenumbers[ax]) <= band)
    hats *= keep
    hats = project_hats(grid, hats)
    vals = np.fft.ifftn(hats * grid.size, axes=grid.spatial_axes).real
    peak = float(np.sqrt((vals**2).sum(axis=0)).max())
    vals *= amplitude / peak
    return VectorField(grid, vals, divergence_free=True)
