"""Flexural-gravity wave scattering by thin elastic plates of varying thickness.

The package solves the linear time-harmonic scattering of flexural-gravity
waves by a thin plate of smoothly varying thickness floating on an
infinite-depth fluid.  The problem is reduced to a second-kind integral
equation for an auxiliary density supported on the thickness perturbation,
discretized by a locally corrected trapezoidal rule and applied through
zero-padded FFT convolutions.

Subpackage layout:

- ``dispersion``:  roots/residues of the quintic dispersion polynomial
- ``specfun``:     Struve/Hankel/Bessel evaluation for complex arguments
- ``greens``:      surface Green's functions and their derivatives
- ``geometry``:    thickness profiles and coefficient fields
- ``quadrature``:  corrected trapezoidal rules for the singular kernels
- ``operators``:   FFT-accelerated integral operator and right-hand sides
- ``solver``:      GMRES driver
- ``postprocess``: field reconstruction, interpolation, consistency checks
- ``cli``:         config-driven command line entry point
"""

from platewave.dispersion import (
    IcePreset,
    PhysicalParams,
    DispersionData,
    derive_params,
    solve_dispersion,
)

__all__ = [
    "IcePreset",
    "PhysicalParams",
    "DispersionData",
    "derive_params",
    "solve_dispersion",
]

__version__ = "0.1.0"
