"""Field reconstruction, spectral interpolation, and consistency checks.

Reconstructs the surface traces from the solved density,

    phi    = phi_inc + G_phi * mu
    dz phi = dz phi_inc + (1/2) G_S * mu,

interpolates densities to finer grids by zero-padded FFT, verifies the
solution against the plate boundary condition with order-8 finite
differences, and measures reflection/transmission probes over
wavenumber sweeps.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as _fft

from platewave.dispersion import (
    IcePreset,
    derive_params,
    omega_for_wavenumber,
    solve_dispersion,
)
from platewave.geometry import CoefficientField, build_field
from platewave.greens import GreensEvaluator
from platewave.operators import (
    DensityGrid,
    Grid,
    LhsOperator,
    PlaneWave,
    build_rhs,
    convolve_kernel,
    incident_field,
)
from platewave.quadrature import build_corrections
from platewave.solver import SolveConfig, SolveResult, gmres_solve

__all__ = [
    "FieldBundle",
    "ScatterSolution",
    "reconstruct_fields",
    "fft_interpolate",
    "pde_residual",
    "solve_scattering",
    "probe_sweep",
    "self_convergence",
    "write_grid",
    "read_grid",
    "write_sweep_csv",
]


# -- field reconstruction -------------------------------------------------


@dataclass(frozen=True)
class FieldBundle:
    """Surface traces of the total and scattered fields on one grid."""

    grid: Grid
    phi_total: np.ndarray
    dz_phi_total: np.ndarray
    phi_scat: np.ndarray
    dz_phi_scat: np.ndarray
    metadata: dict


def reconstruct_fields(
    mu: DensityGrid, ge: GreensEvaluator, table, incident
) -> FieldBundle:
    """Total and scattered surface traces from the solved density."""
    phi_scat = convolve_kernel("K8", mu, ge, table).values  # G_phi * mu
    dz_scat = 0.5 * convolve_kernel("K7", mu, ge, table).values  # G_S/2 * mu
    inc = incident_field(incident, mu.grid, ge)
    return FieldBundle(
        grid=mu.grid,
        phi_total=inc.phi + phi_scat,
        dz_phi_total=inc.dz + dz_scat,
        phi_scat=phi_scat,
        dz_phi_scat=dz_scat,
        metadata={"h": mu.grid.h, "incident": repr(incident)},
    )


# -- spectral interpolation ----------------------------------------------


def fft_interpolate(data: DensityGrid, refine_factor: int) -> DensityGrid:
    """Zero-padded FFT interpolation onto a refine_factor finer grid.

    Exact for band-limited data; appropriate here because the solved
    densities are smooth and numerically compactly supported inside the
    grid.  The refined grid covers the same physical box.
    """
    r = int(refine_factor)
    if r < 1:
        raise ValueError("refine_factor must be at least 1")
    if r == 1:
        return data
    grid = data.grid
    n1, n2 = grid.shape
    spec = _fft.fftshift(_fft.fft2(data.values))
    m1, m2 = n1 * r, n2 * r
    padded = np.zeros((m1, m2), dtype=np.complex128)
    # place the zero frequency of the (odd-sized) input spectrum at the
    # padded array's ifftshift center
    o1 = m1 // 2 - (n1 - 1) // 2
    o2 = m2 // 2 - (n2 - 1) // 2
    padded[o1 : o1 + n1, o2 : o2 + n2] = spec
    up = _fft.ifft2(_fft.ifftshift(padded)) * (m1 * m2) / (n1 * n2)
    # keep the points inside the original box (the tail of the periodic
    # extension is dropped)
    keep1 = (n1 - 1) * r + 1
    keep2 = (n2 - 1) * r + 1
    fine = Grid(
        h=grid.h / r, nx=grid.nx * r, ny=grid.ny * r, origin=grid.origin
    )
    return DensityGrid(fine, up[:keep1, :keep2], role=data.role)


# -- high-order finite-difference consistency -----------------------------

_FD8_D1 = np.array(
    [1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]
)
_FD8_D2 = np.array(
    [
        -1 / 560,
        8 / 315,
        -1 / 5,
        8 / 5,
        -205 / 72,
        8 / 5,
        -1 / 5,
        8 / 315,
        -1 / 560,
    ]
)


def _fd_axis(values: np.ndarray, coeffs: np.ndarray, axis: int, h: float, order: int):
    """Centered FD along one axis (wraparound garbage stays near edges)."""
    out = np.zeros_like(values)
    half = len(coeffs) // 2
    for t, c in enumerate(coeffs):
        if c == 0.0:
            continue
        out += c * np.roll(values, half - t, axis=axis)
    return out / h**order


def fd_derivatives(values: np.ndarray, h: float) -> dict:
    """Order-8 FD approximations of the derivatives the residual needs."""
    dx = _fd_axis(values, _FD8_D1, 0, h, 1)
    dy = _fd_axis(values, _FD8_D1, 1, h, 1)
    dxx = _fd_axis(values, _FD8_D2, 0, h, 2)
    dyy = _fd_axis(values, _FD8_D2, 1, h, 2)
    lap = dxx + dyy
    return {
        "dx": dx,
        "dy": dy,
        "dxx": dxx,
        "dyy": dyy,
        "dxy": _fd_axis(dx, _FD8_D1, 1, h, 1),
        "lap": lap,
        "dx_lap": _fd_axis(lap, _FD8_D1, 0, h, 1),
        "dy_lap": _fd_axis(lap, _FD8_D1, 1, h, 1),
        "lap2": _fd_axis(lap, _FD8_D2, 0, h, 2) + _fd_axis(lap, _FD8_D2, 1, h, 2),
    }


def _default_samples() -> np.ndarray:
    m = np.arange(-8, 9)
    return np.array([(a / 2.0, b / 2.0) for a in m for b in m])


def pde_residual(
    bundle: FieldBundle, field: CoefficientField, samples=None
) -> dict:
    """Relative plate boundary-condition residual at sample points.

    The residual of (alpha lap_S^2 - beta) dz_phi + gamma phi -- with
    lap_S^2 the variable-coefficient plate operator -- is normalized by
    the largest individual term magnitude over the sample set.
    """
    grid = bundle.grid
    if field.grid != grid:
        raise ValueError("coefficient field grid does not match bundle grid")
    pts = _default_samples() if samples is None else np.asarray(samples)
    xs, ys = grid.xs, grid.ys
    i1 = np.rint((pts[:, 0] - xs[0]) / grid.h).astype(int)
    i2 = np.rint((pts[:, 1] - ys[0]) / grid.h).astype(int)
    if (
        np.any(i1 < 0)
        or np.any(i1 >= grid.shape[0])
        or np.any(i2 < 0)
        or np.any(i2 >= grid.shape[1])
    ):
        raise ValueError("sample points fall outside the grid")
    if np.max(np.abs(xs[i1] - pts[:, 0])) > 1e-9 * grid.h or np.max(
        np.abs(ys[i2] - pts[:, 1])
    ) > 1e-9 * grid.h:
        raise ValueError("sample points must be grid nodes")

    d = fd_derivatives(bundle.dz_phi_total, grid.h)
    nu = field.nu
    terms = [
        field.alpha * d["lap2"],
        2.0 * field.dx_alpha_c * d["dx_lap"] + 2.0 * field.dy_alpha_c * d["dy_lap"],
        field.lap_alpha_c * d["lap"],
        -(1.0 - nu)
        * (
            field.dxx_alpha_c * d["dyy"]
            + field.dyy_alpha_c * d["dxx"]
            - 2.0 * field.dxy_alpha_c * d["dxy"]
        ),
        -field.beta * bundle.dz_phi_total,
        field.gamma * bundle.phi_total,
    ]
    residual = sum(terms)
    res_pts = residual[i1, i2]
    denom = max(np.max(np.abs(t[i1, i2])) for t in terms)
    if denom == 0.0:
        raise ValueError("boundary-condition terms vanish at all samples")
    rel = np.abs(res_pts) / denom
    return {
        "rel_l2": float(np.sqrt(np.mean(rel**2))),
        "rel_linf": float(np.max(rel)),
        "denominator": float(denom),
        "n_samples": int(len(pts)),
    }


# -- end-to-end pipeline ---------------------------------------------------


@dataclass(frozen=True)
class ScatterSolution:
    """Everything produced by one scattering solve."""

    preset: IcePreset
    field: CoefficientField
    ge: GreensEvaluator
    table: object
    mu: DensityGrid
    rhs: DensityGrid
    solve: SolveResult
    incident: object


def solve_scattering(
    profile,
    preset: IcePreset,
    grid: Grid,
    incident=None,
    solve_cfg: SolveConfig = SolveConfig(),
    cache_dir=None,
) -> ScatterSolution:
    """Assemble and solve one scattering problem end to end."""
    field = build_field(profile, preset, grid)
    data = solve_dispersion(
        derive_params(
            preset, background_thickness=profile.background_thickness
        )
    )
    ge = GreensEvaluator(data)
    if incident is None:
        incident = PlaneWave()
    table = build_corrections(ge, grid.h, cache_dir=cache_dir)
    rhs = build_rhs(incident, field, ge)
    op = LhsOperator(field, ge, table)
    result = gmres_solve(op.apply, rhs, solve_cfg)
    return ScatterSolution(
        preset=preset,
        field=field,
        ge=ge,
        table=table,
        mu=result.mu,
        rhs=rhs,
        solve=result,
        incident=incident,
    )


def probe_sweep(
    profile,
    base_preset: IcePreset,
    grid: Grid,
    k_values,
    upstream,
    downstream,
    direction=(1.0, 0.0),
    solve_cfg: SolveConfig = SolveConfig(),
    cache_dir=None,
) -> list[dict]:
    """Reflection/transmission proxies over a set of wavenumbers.

    For each k the background frequency is chosen so the radiating root
    equals k, the problem re-solved, and |phi_scat| sampled at the
    upstream probe (reflection proxy) and |phi_total| at the downstream
    probe (transmission proxy).  Probes must be grid nodes.
    """
    bg = profile.background_thickness
    rows = []
    for k in k_values:
        omega = omega_for_wavenumber(
            base_preset, float(k), background_thickness=bg
        )
        preset = replace(base_preset, omega=omega)
        sol = solve_scattering(
            profile,
            preset,
            grid,
            incident=PlaneWave(direction=direction),
            solve_cfg=solve_cfg,
            cache_dir=cache_dir,
        )
        bundle = reconstruct_fields(sol.mu, sol.ge, sol.table, sol.incident)
        iu = _node_index(grid, upstream)
        idn = _node_index(grid, downstream)
        rows.append(
            {
                "k": float(k),
                "reflected_abs": float(np.abs(bundle.phi_scat[iu])),
                "transmitted_abs": float(np.abs(bundle.phi_total[idn])),
                "converged": sol.solve.converged,
            }
        )
    return rows


def _node_index(grid: Grid, point) -> tuple[int, int]:
    i1 = (point[0] - grid.origin[0]) / grid.h + grid.nx
    i2 = (point[1] - grid.origin[1]) / grid.h + grid.ny
    j1, j2 = int(round(i1)), int(round(i2))
    if abs(i1 - j1) > 1e-8 or abs(i2 - j2) > 1e-8:
        raise ValueError("probe point must be a grid node")
    if not (0 <= j1 < grid.shape[0] and 0 <= j2 < grid.shape[1]):
        raise ValueError("probe point outside grid")
    return j1, j2


def self_convergence(
    profile,
    preset: IcePreset,
    h_values,
    half_extent: float,
    incident=None,
    solve_cfg: SolveConfig = SolveConfig(),
    cache_dir=None,
) -> dict:
    """Density self-convergence across dyadic spacings.

    Each solve's density is FFT-interpolated to the finest spacing in
    ``h_values``; consecutive levels are compared in the max norm.
    """
    hs = sorted(float(h) for h in h_values)[::-1]
    h_fine = hs[-1]
    fine = []
    for h in hs:
        nx = int(round(half_extent / h))
        if abs(nx * h - half_extent) > 1e-9 * half_extent:
            raise ValueError("half_extent must be a multiple of every h")
        grid = Grid(h=h, nx=nx, ny=nx)
        sol = solve_scattering(
            profile, preset, grid, incident, solve_cfg, cache_dir
        )
        refine = int(round(h / h_fine))
        fine.append(fft_interpolate(sol.mu, refine).values)
    errors = [
        float(np.max(np.abs(a - b))) for a, b in zip(fine, fine[1:])
    ]
    logs = np.log2(hs[:-1])
    slope = (
        float(np.polyfit(logs, np.log2(np.maximum(errors, 1e-300)), 1)[0])
        if len(errors) >= 2
        else float("nan")
    )
    return {"h": hs, "errors": errors, "slope": slope}


# -- binary grid files, sweep tables --------------------------------------

_GRID_MAGIC = b"PWGRID01"
_GRID_VERSION = 1
_DTYPE_COMPLEX128 = 0


def write_grid(path, data: DensityGrid) -> None:
    """Binary grid file: fixed header + row-major little-endian values."""
    g = data.grid
    header = _GRID_MAGIC + struct.pack(
        "<IdiiddI",
        _GRID_VERSION,
        g.h,
        g.nx,
        g.ny,
        g.origin[0],
        g.origin[1],
        _DTYPE_COMPLEX128,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(
            np.ascontiguousarray(data.values, dtype="<c16").tobytes(order="C")
        )


def read_grid(path) -> DensityGrid:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _GRID_MAGIC:
            raise ValueError("not a grid file (bad magic)")
        version, h, nx, ny, ox, oy, dtype = struct.unpack(
            "<IdiiddI", fh.read(struct.calcsize("<IdiiddI"))
        )
        if version != _GRID_VERSION:
            raise ValueError(f"unsupported grid file version {version}")
        if dtype != _DTYPE_COMPLEX128:
            raise ValueError(f"unsupported grid dtype tag {dtype}")
        grid = Grid(h=h, nx=nx, ny=ny, origin=(ox, oy))
        count = grid.shape[0] * grid.shape[1]
        vals = np.frombuffer(fh.read(count * 16), dtype="<c16", count=count)
    return DensityGrid(grid, vals.reshape(grid.shape).astype(np.complex128))


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,reflected_abs,transmitted_abs\n")
        for row in rows:
            fh.write(
                f"{row['k']:.12g},{row['reflected_abs']:.12g},"
                f"{row['transmitted_abs']:.12g}\n"
            )
