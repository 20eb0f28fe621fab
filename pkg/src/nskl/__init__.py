"""Pseudo-spectral laboratory for maximum-norm estimates of periodic flows."""

from .diagnostics import (PhiSeries, ScalingReport, SmoothingCheck, VSeries, WindowParams,
                          doubling_check, empirical_window_constant, estimate_Kj, phi_series,
                          scaling_equivariance_check, smoothing_window_check, v_series)
from .dynamics import (BlowUpError, PicardResult, QuadraticForm, SolverConfig, Trajectory,
                       etd_step, nse_nonlinearity, picard_iterate, quadratic_nonlinearity,
                       simulate_illustrative, simulate_nse, zero_nonlinearity)
from .grid import (Field, GridSpec, MultiIndex, SpectralField, VectorField, derivative,
                   derivative_sup_norm, divergence, forward_transform, hermitian_defect,
                   inverse_transform, max_norm, multi_indices, random_divergence_free,
                   shear_mode, taylor_green)
from .kernels import (KernelQuery, KernelScalingCheck, composite_kernel_l1_norm,
                      composite_scaling_spread, gauss_derivative_1d, heat_kernel_derivative,
                      kernel_l1_norm, kernel_scaling_check, maximal_function_norm)
from .multipliers import (MultiplierSpec, dealias, heat_semigroup, leray_project,
                          nonlinear_advective, nonlinear_divergence, pressure_from_velocity,
                          riesz)
from .snapshots import read_snapshot, write_snapshot

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
