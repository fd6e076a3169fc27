"""Discretized Lippmann-Schwinger operator: grid, kernels, FFT apply.

The second-kind equation is

    (alpha/alpha0) mu + 1/2 sum_j K_j mu = f

with each kernel K_j(r, r') = beta_j(r) w_j(r - r'); beta_j is a
coefficient-field factor and w_j a translation-invariant combination of
Green's function derivatives.  In polar displacement coordinates every
w_j separates into angular factors times the five radial profiles
M1/r, M2, M3, G_S, G_phi, which is what both the FFT tableau assembly
and the quadrature-correction fitting exploit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft as _fft

from platewave._accel import stencil_apply
from platewave.greens import GreensEvaluator

__all__ = [
    "Grid",
    "DensityGrid",
    "KernelSpec",
    "KERNELS",
    "radial_tables",
    "kernel_values",
    "PlaneWave",
    "PointSource",
    "IncidentField",
    "incident_field",
    "LhsOperator",
    "apply_lhs",
    "build_rhs",
    "compute_sigma",
    "convolve_kernel",
]


@dataclass(frozen=True)
class Grid:
    """Uniform square-celled grid with nodes origin + h * (i1, i2).

    Indices run over i1 in [-nx, nx], i2 in [-ny, ny], so the node arrays
    have shape (2*nx + 1, 2*ny + 1) with x along the first axis.
    """

    h: float
    nx: int
    ny: int
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid half-extents must be at least 1")

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.nx + 1, 2 * self.ny + 1)

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(-self.nx, self.nx + 1)

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(-self.ny, self.ny + 1)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        xs, ys = self.xs, self.ys
        return (xs[0], xs[-1], ys[0], ys[-1])


# -- kernel decomposition ----------------------------------------------

RADIAL_KEYS = ("m1r", "m2", "m3", "gs", "gphi")


def radial_tables(ge: GreensEvaluator, r) -> dict:
    """The five radial kernel profiles at separations r > 0."""
    p = ge.profiles(r)
    return {
        "m1r": p["m1"] / np.asarray(r, dtype=np.float64),
        "m2": p["m2"],
        "m3": p["m3"],
        "gs": p["g_s"],
        "gphi": p["g_phi"],
    }


@dataclass(frozen=True)
class KernelSpec:
    """One kernel K_j = beta_j(r) * w_j(r - r') of the integral equation.

    ``terms`` lists (angular factor g(theta), radial profile key) pairs
    with w_j(d) = sum g(theta) * F(|d|); ``coefficient`` maps a
    CoefficientField to the nodewise beta_j values.
    """

    kid: str
    terms: tuple[tuple[Callable, str], ...]
    coefficient: Callable

    def evaluate(self, tables: dict, theta: np.ndarray) -> np.ndarray:
        """w_j from precomputed radial tables and polar angles."""
        out = np.zeros(np.shape(theta), dtype=np.complex128)
        for angular, key in self.terms:
            out += angular(theta) * tables[key]
        return out


def _one(theta):
    return np.ones_like(theta)


KERNELS: tuple[KernelSpec, ...] = (
    # 2 dx(alpha_c) * dx(Laplacian G_S); grad Laplacian G_S = -(d/r) M3
    KernelSpec(
        "K1",
        ((lambda t: -np.cos(t), "m3"),),
        lambda f: 2.0 * f.dx_alpha_c,
    ),
    KernelSpec(
        "K2",
        ((lambda t: -np.sin(t), "m3"),),
        lambda f: 2.0 * f.dy_alpha_c,
    ),
    # Laplacian(alpha_c) * Laplacian G_S
    KernelSpec("K3", ((_one, "m2"),), lambda f: f.lap_alpha_c),
    # -(1-nu) dxx(alpha_c) * dyy G_S;  dyy G_S = cos(2t) M1/r + sin^2 t M2
    KernelSpec(
        "K4",
        ((lambda t: np.cos(2 * t), "m1r"), (lambda t: np.sin(t) ** 2, "m2")),
        lambda f: -(1.0 - f.nu) * f.dxx_alpha_c,
    ),
    # -(1-nu) dyy(alpha_c) * dxx G_S;  dxx G_S = -cos(2t) M1/r + cos^2 t M2
    KernelSpec(
        "K5",
        ((lambda t: -np.cos(2 * t), "m1r"), (lambda t: np.cos(t) ** 2, "m2")),
        lambda f: -(1.0 - f.nu) * f.dyy_alpha_c,
    ),
    # 2(1-nu) dxy(alpha_c) * dxy G_S; dxy G_S = -sin(2t) M1/r + sin(2t)/2 M2
    KernelSpec(
        "K6",
        (
            (lambda t: -np.sin(2 * t), "m1r"),
            (lambda t: 0.5 * np.sin(2 * t), "m2"),
        ),
        lambda f: 2.0 * (1.0 - f.nu) * f.dxy_alpha_c,
    ),
    # ((alpha_c beta0 - alpha0 beta_c)/alpha0) G_S
    KernelSpec(
        "K7",
        ((_one, "gs"),),
        lambda f: (f.alpha_c * f.beta0 - f.alpha0 * f.beta_c) / f.alpha0,
    ),
    # -(2 gamma alpha_c / alpha0) G_phi; the factor 2 makes the 1/2 in the
    # equation consistent with the G_phi normalization (its transform is
    # 1/p(xi) while that of G_S is 2 xi / p(xi))
    KernelSpec(
        "K8",
        ((_one, "gphi"),),
        lambda f: -2.0 * f.gamma * f.alpha_c / f.alpha0,
    ),
)


def _profile_grids(ge: GreensEvaluator, dx, dy):
    """Radial profile tables and polar angles on displacement arrays.

    Returns (tables, theta, zero_mask); table entries at zero separation
    are 0.  Profile evaluation is deduplicated across equal separations,
    which on uniform grids collapses the work to O(#distinct radii).
    """
    dx, dy = np.broadcast_arrays(
        np.asarray(dx, dtype=np.float64), np.asarray(dy, dtype=np.float64)
    )
    r = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    flat = r.ravel()
    nonzero = flat > 0
    uniq, inverse = np.unique(flat[nonzero], return_inverse=True)
    tabs_u = radial_tables(ge, uniq)
    tables = {}
    for key, vals in tabs_u.items():
        full = np.zeros(flat.shape, dtype=np.complex128)
        full[nonzero] = vals[inverse]
        tables[key] = full.reshape(r.shape)
    return tables, theta, r == 0


def kernel_values(
    ge: GreensEvaluator, dx: np.ndarray, dy: np.ndarray, kernels=KERNELS
) -> dict:
    """w_j(d) for every kernel on displacement arrays (r = 0 set to 0)."""
    tables, theta, zero = _profile_grids(ge, dx, dy)
    out = {}
    for spec in kernels:
        w = spec.evaluate(tables, theta)
        w[zero] = 0.0
        out[spec.kid] = w
    return out


@dataclass(frozen=True)
class DensityGrid:
    """Complex nodal values of one surface quantity on a grid."""

    grid: Grid
    values: np.ndarray
    role: str = "mu"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(
                f"values shape {v.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("density grid contains non-finite entries")
        object.__setattr__(self, "values", v)


# -- incident fields and right-hand side --------------------------------


@dataclass(frozen=True)
class PlaneWave:
    """Incident plane wave exp(i k dhat . x) exp(|k| z).

    ``k`` defaults to the radiating root of the background dispersion
    relation, the only wavenumber for which the incident field satisfies
    the constant-coefficient plate equation.
    """

    direction: tuple[float, float] = (1.0, 0.0)
    k: float | None = None


@dataclass(frozen=True)
class PointSource:
    """Incident field radiated from a point at a grid node (z = 0)."""

    location: tuple[float, float]


@dataclass(frozen=True)
class IncidentField:
    """Surface traces of the incident field and the derivatives of its
    vertical-derivative trace that the right-hand side formula needs."""

    phi: np.ndarray
    dz: np.ndarray
    lap_dz: np.ndarray
    dx_lap_dz: np.ndarray
    dy_lap_dz: np.ndarray
    dxx_dz: np.ndarray
    dyy_dz: np.ndarray
    dxy_dz: np.ndarray


def incident_field(kind, grid: Grid, ge: GreensEvaluator) -> IncidentField:
    """Evaluate an incident field's traces on the grid nodes."""
    X, Y = grid.meshes()
    if isinstance(kind, PlaneWave):
        dx, dy = float(kind.direction[0]), float(kind.direction[1])
        norm = np.hypot(dx, dy)
        if norm == 0:
            raise ValueError("plane-wave direction must be nonzero")
        dx, dy = dx / norm, dy / norm
        rho1 = ge.data.k_radiating
        k = complex(rho1) if kind.k is None else complex(kind.k)
        if abs(k - rho1) > 1e-8 * abs(rho1):
            warnings.warn(
                "plane-wave wavenumber differs from the radiating root; "
                "the incident field does not satisfy the background "
                "plate equation",
                stacklevel=2,
            )
        if k.imag == 0:
            k = k.real
        kx, ky = k * dx, k * dy
        phi = np.exp(1j * (kx * X + ky * Y))
        dz = k * phi
        return IncidentField(
            phi=phi,
            dz=dz,
            lap_dz=-(k**2) * dz,
            dx_lap_dz=-1j * kx * k**2 * dz,
            dy_lap_dz=-1j * ky * k**2 * dz,
            dxx_dz=-(kx**2) * dz,
            dyy_dz=-(ky**2) * dz,
            dxy_dz=-kx * ky * dz,
        )
    if isinstance(kind, PointSource):
        sx, sy = float(kind.location[0]), float(kind.location[1])
        i1 = (sx - grid.origin[0]) / grid.h
        i2 = (sy - grid.origin[1]) / grid.h
        if abs(i1 - round(i1)) > 1e-8 or abs(i2 - round(i2)) > 1e-8:
            raise ValueError("point source must sit on a grid node")
        tabs, theta, _ = _profile_grids(ge, X - sx, Y - sy)
        cos2, sin2 = np.cos(2 * theta), np.sin(2 * theta)
        cost, sint = np.cos(theta), np.sin(theta)
        return IncidentField(
            phi=tabs["gphi"],
            dz=0.5 * tabs["gs"],
            lap_dz=0.5 * tabs["m2"],
            dx_lap_dz=-0.5 * cost * tabs["m3"],
            dy_lap_dz=-0.5 * sint * tabs["m3"],
            dxx_dz=0.5 * (-cos2 * tabs["m1r"] + cost**2 * tabs["m2"]),
            dyy_dz=0.5 * (cos2 * tabs["m1r"] + sint**2 * tabs["m2"]),
            dxy_dz=0.5 * (-sin2 * tabs["m1r"] + 0.5 * sin2 * tabs["m2"]),
        )
    raise TypeError(f"unknown incident field kind {type(kind).__name__}")


def build_rhs(kind, field, ge: GreensEvaluator) -> DensityGrid:
    """Right-hand side f of the integral equation for an incident field.

    f collects the action of the variable-coefficient part of the plate
    operator on the incident traces; it vanishes wherever the coefficient
    perturbations and their derivatives vanish.
    """
    grid = field.grid
    inc = incident_field(kind, grid, ge)
    if isinstance(kind, PointSource):
        sx, sy = kind.location
        i1 = int(round((sx - grid.origin[0]) / grid.h)) + grid.nx
        i2 = int(round((sy - grid.origin[1]) / grid.h)) + grid.ny
        if 0 <= i1 < grid.shape[0] and 0 <= i2 < grid.shape[1]:
            if field.alpha_c[i1, i2] != 0 or field.beta_c[i1, i2] != 0:
                warnings.warn(
                    "point source lies inside the coefficient support; "
                    "the right-hand side is singular there",
                    stacklevel=2,
                )
    f = (
        -(
            2.0 * field.dx_alpha_c * inc.dx_lap_dz
            + 2.0 * field.dy_alpha_c * inc.dy_lap_dz
            + field.lap_alpha_c * inc.lap_dz
            + (1.0 - field.nu)
            * (
                2.0 * field.dxy_alpha_c * inc.dxy_dz
                - field.dxx_alpha_c * inc.dyy_dz
                - field.dyy_alpha_c * inc.dxx_dz
            )
        )
        - (field.alpha_c * field.beta0 / field.alpha0 - field.beta_c) * inc.dz
        + (field.alpha_c / field.alpha0) * field.gamma * inc.phi
    )
    return DensityGrid(grid, f, role="f")


# -- FFT-accelerated operator application -------------------------------


def _fft_shape(n1: int, n2: int) -> tuple[int, int]:
    # full linear-convolution length of an (n) signal with its
    # (2n - 1) displacement tableau, rounded up to a small-prime size
    return (_fft.next_fast_len(3 * n1 - 2), _fft.next_fast_len(3 * n2 - 2))


class LhsOperator:
    """(alpha/alpha0) mu + 1/2 sum_j beta_j (corrected conv of w_j with mu).

    Kernel tableaus are evaluated once per (field, table) pair and their
    FFTs cached, so repeated applications (GMRES iterations) cost a pair
    of FFTs per active kernel plus the sparse correction stencil.
    Kernels whose coefficient factor vanishes identically are skipped.
    """

    def __init__(self, field, ge: GreensEvaluator, table, kernels=KERNELS):
        grid = field.grid
        if abs(table.h - grid.h) > 1e-13 * grid.h:
            raise ValueError("correction table spacing does not match grid")
        self.grid = grid
        self.table = table
        self.diag = np.asarray(field.alpha / field.alpha0, dtype=np.complex128)
        n1, n2 = grid.shape
        self.fshape = _fft_shape(n1, n2)
        d1 = grid.h * np.arange(-(n1 - 1), n1)
        d2 = grid.h * np.arange(-(n2 - 1), n2)
        active = [
            spec
            for spec in kernels
            if np.any(np.asarray(spec.coefficient(field)))
        ]
        tableaus = kernel_values(ge, d1[:, None], d2[None, :], active)
        self.betas = {
            spec.kid: np.asarray(spec.coefficient(field), dtype=np.complex128)
            for spec in active
        }
        self.what = {
            spec.kid: _fft.fft2(tableaus[spec.kid], self.fshape)
            for spec in active
        }

    def apply(self, mu: np.ndarray) -> np.ndarray:
        mu = np.asarray(mu, dtype=np.complex128)
        if mu.shape != self.grid.shape:
            raise ValueError("density shape does not match operator grid")
        out = self.diag * mu
        if not self.what:
            return out
        n1, n2 = self.grid.shape
        h2 = self.grid.h**2
        muhat = _fft.fft2(mu, self.fshape)
        for kid, what in self.what.items():
            conv = _fft.ifft2(what * muhat)[
                n1 - 1 : 2 * n1 - 1, n2 - 1 : 2 * n2 - 1
            ]
            corr = stencil_apply(mu, self.table.stencil, self.table.weights[kid])
            out = out + 0.5 * self.betas[kid] * (h2 * conv + corr)
        return out


def apply_lhs(mu: DensityGrid, field, table, ge: GreensEvaluator) -> DensityGrid:
    """One-shot operator application (see LhsOperator for repeated use)."""
    if mu.grid != field.grid:
        raise ValueError("density and coefficient-field grids differ")
    op = LhsOperator(field, ge, table)
    return DensityGrid(mu.grid, op.apply(mu.values), role=mu.role)


def convolve_kernel(
    kid: str, mu: DensityGrid, ge: GreensEvaluator, table
) -> DensityGrid:
    """Corrected convolution of one kernel profile w_j with a density.

    ``kid`` = "K7" convolves G_S itself, ``kid`` = "K8" convolves G_phi
    (the kernel tableaus carry no coefficient factors).
    """
    grid = mu.grid
    if abs(table.h - grid.h) > 1e-13 * grid.h:
        raise ValueError("correction table spacing does not match grid")
    spec = {s.kid: s for s in KERNELS}[kid]
    n1, n2 = grid.shape
    d1 = grid.h * np.arange(-(n1 - 1), n1)
    d2 = grid.h * np.arange(-(n2 - 1), n2)
    tableau = kernel_values(ge, d1[:, None], d2[None, :], (spec,))[kid]
    fshape = _fft_shape(n1, n2)
    conv = _fft.ifft2(_fft.fft2(tableau, fshape) * _fft.fft2(mu.values, fshape))[
        n1 - 1 : 2 * n1 - 1, n2 - 1 : 2 * n2 - 1
    ]
    corr = stencil_apply(mu.values, table.stencil, table.weights[kid])
    return DensityGrid(grid, grid.h**2 * conv + corr, role=kid)


def compute_sigma(mu: DensityGrid, ge: GreensEvaluator, table) -> DensityGrid:
    """sigma = G_S convolved with mu (corrected rule on the grid)."""
    out = convolve_kernel("K7", mu, ge, table)
    return DensityGrid(out.grid, out.values, role="sigma")
