"""Blind separation of layovered scatterers in multibaseline SAR stacks."""

from .covariance import center_columns, center_kernel, sample_covariance, sign_covariance
from .errors import (DegenerateGeometryError, DegenerateInputError, InvalidInputError,
                     NoPeakError, NoSignalError, TomoBSSError, UndefinedRatioError)
from .estimation import (PeriodogramGrid, angular_bias, ensemble_coherence,
                         per_baseline_phase_bias, periodogram, relative_angular_bias)
from .estimators import KernelScattererSeparation, PCASeparation, PeriodogramElevation
from .geometry import (AcquisitionGeometry, DeformationTerm, ScattererParams, default_geometry,
                       model_covariance, rayleigh_resolution, steering_vector)
from .kernels import KernelSpec, estimate_gaussian_sigma, kernel_matrix
from .separation import (SeparationResult, deflate, estimate_model_order, kpca_dominant,
                         pca_components, rayleigh_intensity, reestimate_two, separate_scatterers)
from .simulation import MonteCarloSummary, SimulationConfig, draw_stack, monte_carlo

__version__ = "0.1.0"
