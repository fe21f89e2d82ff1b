"""Numerical laboratory for Steklov spectra of collar metrics.

Profiles for the metric constructions live in :mod:`steklov_lab.collar_profiles`,
cross-section spectra in :mod:`steklov_lab.boundary_modes`, the separable
collar solver in :mod:`steklov_lab.mode_solver`, the 2D finite element
oracle in :mod:`steklov_lab.fem2d` and scenario orchestration in
:mod:`steklov_lab.experiments`.
"""

from .errors import (
    ConfigurationError,
    DomainError,
    NumericError,
    ResourceError,
    SteklovLabError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DomainError",
    "NumericError",
    "ResourceError",
    "SteklovLabError",
    "__version__",
]
