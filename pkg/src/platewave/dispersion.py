"""Dispersion relation of deep-water flexural-gravity waves.

The background medium is characterized by the quintic polynomial

    p(z) = alpha0 * z**5 - beta0 * z + gamma

whose five roots determine the surface Green's functions.  For real
coefficients with alpha0 > 0 and gamma < 0 exactly one root is a positive
real number; it is the propagating wavenumber and is selected as the
radiating root by the limiting absorption principle (the root that moves
into the upper half-plane when a small positive imaginary part is added
to beta0).

Physical coefficients derive from ice-sheet constants:

    alpha = E * H**3 / (12 * (1 - nu**2))      flexural rigidity
    beta  = rho_ice * H * omega**2 - rho_sea * g
    gamma = -rho_sea * omega**2
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IcePreset",
    "PhysicalParams",
    "DispersionData",
    "derive_params",
    "omega_for_wavenumber",
    "solve_dispersion",
    "moment_sums",
    "RepeatedRootsError",
]

# roots closer than this (relative to max |root|) are treated as repeated
REPEATED_ROOT_RTOL = 1e-6

# Newton polish stopping tolerance, relative to polynomial scale
_NEWTON_RTOL = 1e-13


class RepeatedRootsError(ValueError):
    """Raised when the dispersion polynomial has (near-)repeated roots."""


@dataclass(frozen=True)
class IcePreset:
    """Physical constants of an ice sheet over deep water.

    Units: E in Pa, H in m, densities in kg/m^3, g in m/s^2,
    omega in rad/s.
    """

    youngs_modulus: float = 7.0e9
    nu: float = 0.33
    thickness: float = 1.0
    rho_ice: float = 917.0
    rho_sea: float = 1025.0
    g: float = 9.8
    omega: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "youngs_modulus",
            "thickness",
            "rho_ice",
            "rho_sea",
            "g",
            "omega",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.nu < 0.5:
            raise ValueError("nu must lie in (0, 0.5)")


@dataclass(frozen=True)
class PhysicalParams:
    """Background coefficients of the dispersion polynomial.

    alpha0 is the flexural rigidity of the background plate, beta0 the
    inertia/gravity coefficient (complex in the dissipative regime,
    Im(beta0) > 0), gamma the hydrodynamic pressure coefficient, nu the
    Poisson ratio.
    """

    alpha0: float
    beta0: complex
    gamma: float
    nu: float = 0.33

    def __post_init__(self) -> None:
        if not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if not self.gamma < 0:
            raise ValueError("gamma must be negative")
        if not 0.0 < self.nu < 0.5:
            raise ValueError("nu must lie in (0, 0.5)")
        if np.imag(self.beta0) < 0:
            raise ValueError("Im(beta0) must be >= 0")

    @property
    def dissipative(self) -> bool:
        """True when beta0 carries a positive imaginary part."""
        return np.imag(self.beta0) > 0

    def polynomial(self, z: np.ndarray | complex) -> np.ndarray | complex:
        """Evaluate p(z) = alpha0 z^5 - beta0 z + gamma."""
        return self.alpha0 * z**5 - self.beta0 * z + self.gamma

    def polynomial_derivative(self, z: np.ndarray | complex):
        """Evaluate p'(z) = 5 alpha0 z^4 - beta0."""
        return 5.0 * self.alpha0 * z**4 - self.beta0


@dataclass(frozen=True)
class DispersionData:
    """Roots and residues of the dispersion polynomial.

    roots[radiating_index] is the positive real (propagating) root when
    Im(beta0) = 0; in the dissipative regime no root is singled out and
    radiating_index is None.  residues[j] = 1 / p'(roots[j]).
    """

    params: PhysicalParams
    roots: np.ndarray
    residues: np.ndarray
    radiating_index: int | None = field(default=None)

    @property
    def radiating(self) -> bool:
        """True when a radiating (positive real) root is present."""
        return self.radiating_index is not None

    @property
    def k_radiating(self) -> float:
        """Propagating wavenumber (positive real root)."""
        if self.radiating_index is None:
            raise ValueError("no radiating root in the dissipative regime")
        return float(np.real(self.roots[self.radiating_index]))


def derive_params(
    preset: IcePreset, background_thickness: float | None = None
) -> PhysicalParams:
    """Background coefficients from ice constants at a reference thickness.

    ``background_thickness`` defaults to the preset thickness; presets with
    spatially varying thickness pass their background (far-field) value.
    """
    H = preset.thickness if background_thickness is None else background_thickness
    if not H > 0:
        raise ValueError("thickness must be positive")
    alpha0 = preset.youngs_modulus * H**3 / (12.0 * (1.0 - preset.nu**2))
    beta0 = preset.rho_ice * H * preset.omega**2 - preset.rho_sea * preset.g
    gamma = -preset.rho_sea * preset.omega**2
    return PhysicalParams(alpha0=alpha0, beta0=beta0, gamma=gamma, nu=preset.nu)


def omega_for_wavenumber(preset: IcePreset, k: float, background_thickness: float | None = None) -> float:
    """Angular frequency making ``k`` the propagating wavenumber.

    Inverts p(k) = 0 for omega at fixed background thickness:

        omega**2 = (alpha0 k^5 + rho_sea g k) / (rho_ice H k + rho_sea)
    """
    if not k > 0:
        raise ValueError("k must be positive")
    H = preset.thickness if background_thickness is None else background_thickness
    alpha0 = preset.youngs_modulus * H**3 / (12.0 * (1.0 - preset.nu**2))
    omega_sq = (alpha0 * k**5 + preset.rho_sea * preset.g * k) / (
        preset.rho_ice * H * k + preset.rho_sea
    )
    return float(np.sqrt(omega_sq))


def _polish_roots(params: PhysicalParams, roots: np.ndarray) -> np.ndarray:
    """A few Newton steps on each root of p."""
    z = roots.astype(np.complex128)
    scale = max(abs(params.alpha0), abs(params.beta0), abs(params.gamma))
    for _ in range(8):
        p = params.polynomial(z)
        dp = params.polynomial_derivative(z)
        step = p / dp
        z = z - step
        if np.all(np.abs(p) <= _NEWTON_RTOL * scale * np.maximum(1.0, np.abs(z) ** 5)):
            break
    return z


def solve_dispersion(params: PhysicalParams) -> DispersionData:
    """Roots, residues, and radiating-root selection for p(z).

    Raises RepeatedRootsError when two roots are closer than
    REPEATED_ROOT_RTOL relative to the largest root magnitude (the
    repeated-root Green's function is unsupported).
    """
    coeffs = np.array(
        [params.alpha0, 0.0, 0.0, 0.0, -params.beta0, params.gamma],
        dtype=np.complex128,
    )
    roots = np.roots(coeffs)
    roots = _polish_roots(params, roots)

    rmax = np.max(np.abs(roots))
    for i in range(5):
        for j in range(i + 1, 5):
            if abs(roots[i] - roots[j]) < REPEATED_ROOT_RTOL * rmax:
                raise RepeatedRootsError(
                    "repeated roots unsupported: dispersion polynomial has "
                    f"near-coincident roots {roots[i]} and {roots[j]}"
                )

    radiating_index: int | None = None
    if np.imag(params.beta0) == 0.0:
        # exactly one positive real root exists for real coefficients
        mask = (np.abs(np.imag(roots)) < 1e-8 * rmax) & (np.real(roots) > 0)
        (idx,) = np.nonzero(mask)
        if idx.size != 1:
            raise ValueError(
                f"expected exactly one positive real root, found {idx.size}"
            )
        radiating_index = int(idx[0])
        # snap the radiating root onto the real axis
        roots = roots.copy()
        roots[radiating_index] = np.real(roots[radiating_index])

    residues = 1.0 / params.polynomial_derivative(roots)
    return DispersionData(
        params=params,
        roots=roots,
        residues=residues,
        radiating_index=radiating_index,
    )


def moment_sums(data: DispersionData, max_power: int = 7) -> np.ndarray:
    """Power sums sum_j e_j rho_j**q for q = 0..max_power.

    Residue calculus gives 0 for q in {0,1,2,3} and {5,6,7}, and
    1/alpha0 for q = 4.
    """
    q = np.arange(max_power + 1)
    return np.sum(data.residues[None, :] * data.roots[None, :] ** q[:, None], axis=1)
