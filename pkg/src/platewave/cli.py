"""Config-driven command-line driver.

Two subcommands:

``platewave run --config cfg.json --output dir``
    Single scattering solve: writes ``mu.grid``, ``phi.grid``,
    ``phi_scat.grid``, ``residuals.csv`` (solver history) and
    ``meta.json`` (resolved config + results).

``platewave harness --config cfg.json --output dir``
    One of the built-in verification harnesses
    (``quadrature_convergence``, ``pde_consistency``,
    ``self_convergence``, ``sweep``); writes a CSV table plus
    ``meta.json`` with fitted slopes and pass/fail data.

Configs are JSON with a closed-world schema (unknown keys are
rejected) and explicit units in key names (``h_m``,
``omega_rad_per_s``).  Exit codes: 0 ok, 2 config or I/O error,
3 solver non-convergence, 4 harness threshold failure.

Identical configs produce byte-identical output files: nothing
time- or host-dependent is written, and all randomness is seeded
from the config.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import math
import sys
from dataclasses import replace
from importlib import metadata as _im
from pathlib import Path

import numpy as np

from platewave.dispersion import (
    IcePreset,
    derive_params,
    omega_for_wavenumber,
    solve_dispersion,
)
from platewave.geometry import (
    ConstantProfile,
    GaussianBumpProfile,
    RandomMediumProfile,
    RidgeProfile,
    RollsProfile,
    SpiralProfile,
)
from platewave.greens import GreensEvaluator
from platewave.operators import Grid, PlaneWave, PointSource
from platewave.postprocess import (
    pde_residual,
    probe_sweep,
    reconstruct_fields,
    self_convergence,
    solve_scattering,
    write_grid,
    write_sweep_csv,
)
from platewave.quadrature import convergence_study
from platewave.solver import SolveConfig

__all__ = ["main", "load_config", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_THRESHOLD = 4


class ConfigError(Exception):
    """Invalid configuration (schema, values, or file I/O)."""


# -- schema -----------------------------------------------------------------

_PROFILE_PARAMS = {
    "constant": {"thickness_m"},
    "gaussian_bump": {"sigma_m", "amplitude_m", "background_m", "center_m"},
    "rolls": {
        "amplitude_m",
        "width_m",
        "freeboard_m",
        "taper_rate_per_m",
        "box_m",
    },
    "random_medium": {
        "mean_thickness_m",
        "gauss_sigma_m",
        "spacing_m",
        "domain_size_m",
        "amp_range_m",
        "seed",
    },
    "ridges": {"ridge_thickness_m", "background_m", "sigma_m", "polylines_m"},
    "spiral": {
        "a_per_m2",
        "background_m",
        "sigma_m",
        "t_range",
        "min_thickness_m",
    },
}

_SECTION_KEYS = {
    "profile": {"preset", "params"},
    "physics": {
        "youngs_modulus_pa",
        "nu",
        "rho_ice_kg_m3",
        "rho_sea_kg_m3",
        "g_m_s2",
        "omega_rad_per_s",
    },
    "grid": {"h_m", "half_extent_x_m", "half_extent_y_m"},
    "incident": {"kind", "direction", "k_per_m", "location_m"},
    "solver": {"rel_tolerance", "max_iterations", "restart"},
    "harness": {
        "kind",
        "h_m_values",
        "half_extent_m",
        "slope_min",
        "max_rel_linf",
        "sigma_m",
        "center_m",
        "target_m",
        "k_per_m_values",
        "upstream_m",
        "downstream_m",
    },
}

_TOP_KEYS = set(_SECTION_KEYS)

_PHYSICS_DEFAULTS = {
    "youngs_modulus_pa": 7.0e9,
    "nu": 0.33,
    "rho_ice_kg_m3": 917.0,
    "rho_sea_kg_m3": 1025.0,
    "g_m_s2": 9.8,
}

# override shorthand used in docs and sweeps
_OVERRIDE_ALIASES = {"k": "incident.k_per_m"}


def _check_keys(section: str, mapping: dict, allowed: set) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"'{section}' must be a JSON object")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}"
        )


def _parse_override(text: str) -> tuple[list[str], object]:
    if "=" not in text:
        raise ConfigError(f"override '{text}' is not of the form key=value")
    key, raw = text.split("=", 1)
    key = _OVERRIDE_ALIASES.get(key.strip(), key.strip())
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def load_config(path, overrides=()) -> dict:
    """Read, apply overrides to, and validate a run config."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = copy.deepcopy(cfg)
    for text in overrides:
        keys, value = _parse_override(text)
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path '{text}' crosses a non-object")
        node[keys[-1]] = value
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    _check_keys("(top level)", cfg, _TOP_KEYS)
    if "profile" not in cfg:
        raise ConfigError("config must contain a 'profile' section")
    if "grid" not in cfg:
        raise ConfigError("config must contain a 'grid' section")
    for name in _TOP_KEYS & set(cfg):
        _check_keys(name, cfg[name], _SECTION_KEYS[name])

    prof = cfg["profile"]
    preset = prof.get("preset")
    if preset not in _PROFILE_PARAMS:
        raise ConfigError(
            f"profile.preset must be one of {sorted(_PROFILE_PARAMS)}, "
            f"got {preset!r}"
        )
    _check_keys(
        "profile.params", prof.get("params", {}), _PROFILE_PARAMS[preset]
    )

    grid = cfg["grid"]
    if "h_m" not in grid or not (
        isinstance(grid["h_m"], (int, float)) and grid["h_m"] > 0
    ):
        raise ConfigError("grid.h_m must be a positive number")

    inc = cfg.get("incident", {})
    kind = inc.get("kind", "plane_wave")
    if kind not in ("plane_wave", "point_source"):
        raise ConfigError("incident.kind must be plane_wave or point_source")
    if kind == "point_source" and "location_m" not in inc:
        raise ConfigError("point_source incident needs incident.location_m")
    if inc.get("k_per_m") is not None and "omega_rad_per_s" in cfg.get(
        "physics", {}
    ):
        raise ConfigError(
            "give either incident.k_per_m or physics.omega_rad_per_s, not both"
        )

    harness = cfg.get("harness")
    if harness is not None:
        kinds = (
            "quadrature_convergence",
            "pde_consistency",
            "self_convergence",
            "sweep",
        )
        if harness.get("kind") not in kinds:
            raise ConfigError(f"harness.kind must be one of {kinds}")


# -- config -> objects -------------------------------------------------------


def _build_profile(cfg: dict):
    prof = cfg["profile"]
    p = prof.get("params", {})
    preset = prof["preset"]
    try:
        if preset == "constant":
            return ConstantProfile(thickness=p.get("thickness_m", 1.0))
        if preset == "gaussian_bump":
            return GaussianBumpProfile(
                sigma=p.get("sigma_m", 4.0),
                amplitude=p.get("amplitude_m", 2.0),
                background=p.get("background_m", 1.0),
                center=tuple(p.get("center_m", (0.0, 0.0))),
            )
        if preset == "rolls":
            kw = {}
            if "amplitude_m" in p:
                kw["amplitude"] = p["amplitude_m"]
            if "width_m" in p:
                kw["width"] = p["width_m"]
            if "freeboard_m" in p:
                kw["freeboard"] = p["freeboard_m"]
            if "taper_rate_per_m" in p:
                kw["taper_rate"] = p["taper_rate_per_m"]
            if "box_m" in p:
                kw["box"] = tuple(p["box_m"])
            phys = {**_PHYSICS_DEFAULTS, **cfg.get("physics", {})}
            kw["rho_ice"] = phys["rho_ice_kg_m3"]
            kw["rho_sea"] = phys["rho_sea_kg_m3"]
            return RollsProfile(**kw)
        if preset == "random_medium":
            kw = {}
            if "mean_thickness_m" in p:
                kw["mean_thickness"] = p["mean_thickness_m"]
            if "gauss_sigma_m" in p:
                kw["gauss_sigma"] = p["gauss_sigma_m"]
            if "spacing_m" in p:
                kw["spacing"] = p["spacing_m"]
            if "domain_size_m" in p:
                kw["domain_size"] = p["domain_size_m"]
            if "amp_range_m" in p:
                kw["amp_range"] = tuple(p["amp_range_m"])
            if "seed" in p:
                kw["seed"] = int(p["seed"])
            return RandomMediumProfile(**kw)
        if preset == "ridges":
            kw = {}
            if "ridge_thickness_m" in p:
                kw["ridge_thickness"] = p["ridge_thickness_m"]
            if "background_m" in p:
                kw["background"] = p["background_m"]
            if "sigma_m" in p:
                kw["sigma"] = p["sigma_m"]
            if "polylines_m" in p:
                kw["polylines"] = tuple(
                    tuple(tuple(pt) for pt in line) for line in p["polylines_m"]
                )
            return RidgeProfile(**kw)
        if preset == "spiral":
            kw = {}
            if "a_per_m2" in p:
                kw["a"] = p["a_per_m2"]
            if "background_m" in p:
                kw["background"] = p["background_m"]
            if "sigma_m" in p:
                kw["sigma"] = p["sigma_m"]
            if "t_range" in p:
                kw["t_range"] = tuple(p["t_range"])
            if "min_thickness_m" in p:
                kw["min_thickness"] = p["min_thickness_m"]
            return SpiralProfile(**kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid profile parameters: {exc}") from exc
    raise ConfigError(f"unknown profile preset {preset!r}")


def _build_preset(cfg: dict, profile) -> IcePreset:
    phys = {**_PHYSICS_DEFAULTS, **cfg.get("physics", {})}
    omega = phys.get("omega_rad_per_s", 1.0)
    try:
        base = IcePreset(
            youngs_modulus=phys["youngs_modulus_pa"],
            nu=phys["nu"],
            thickness=profile.background_thickness,
            rho_ice=phys["rho_ice_kg_m3"],
            rho_sea=phys["rho_sea_kg_m3"],
            g=phys["g_m_s2"],
            omega=omega,
        )
        k = cfg.get("incident", {}).get("k_per_m")
        if k is not None:
            base = replace(base, omega=omega_for_wavenumber(base, float(k)))
        return base
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid physics parameters: {exc}") from exc


def _grid_half_extents(cfg: dict, profile) -> tuple[float, float]:
    grid = cfg["grid"]
    h = float(grid["h_m"])
    hx = grid.get("half_extent_x_m")
    hy = grid.get("half_extent_y_m")
    if hx is None or hy is None:
        box = profile.support_box
        if box is None:
            raise ConfigError(
                "grid.half_extent_x_m/half_extent_y_m are required for "
                "profiles without compact support"
            )
        if hx is None:
            hx = math.ceil(max(abs(box[0]), abs(box[1])) / h) * h
        if hy is None:
            hy = math.ceil(max(abs(box[2]), abs(box[3])) / h) * h
    return float(hx), float(hy)


def _build_grid(cfg: dict, profile) -> Grid:
    h = float(cfg["grid"]["h_m"])
    hx, hy = _grid_half_extents(cfg, profile)
    nx, ny = round(hx / h), round(hy / h)
    if abs(nx * h - hx) > 1e-9 * h or abs(ny * h - hy) > 1e-9 * h:
        raise ConfigError("grid half extents must be multiples of h_m")
    if nx < 1 or ny < 1:
        raise ConfigError("grid half extents must be at least h_m")
    return Grid(h=h, nx=int(nx), ny=int(ny))


def _build_incident(cfg: dict):
    inc = cfg.get("incident", {})
    if inc.get("kind", "plane_wave") == "point_source":
        return PointSource(tuple(float(v) for v in inc["location_m"]))
    direction = inc.get("direction", (1.0, 0.0))
    return PlaneWave(direction=tuple(float(v) for v in direction))


def _build_solve_config(cfg: dict) -> SolveConfig:
    s = cfg.get("solver", {})
    try:
        return SolveConfig(
            rel_tolerance=s.get("rel_tolerance", 1e-12),
            max_iterations=s.get("max_iterations", 500),
            restart=s.get("restart"),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid solver config: {exc}") from exc


def _resolved_config(cfg: dict, grid: Grid, preset: IcePreset) -> dict:
    """Config with derived values filled in; re-runs to identical results."""
    out = copy.deepcopy(cfg)
    out.setdefault("grid", {})
    out["grid"]["h_m"] = grid.h
    out["grid"]["half_extent_x_m"] = grid.nx * grid.h
    out["grid"]["half_extent_y_m"] = grid.ny * grid.h
    phys = out.setdefault("physics", {})
    for key, value in _PHYSICS_DEFAULTS.items():
        phys.setdefault(key, value)
    phys["omega_rad_per_s"] = preset.omega
    inc = out.setdefault("incident", {})
    inc.pop("k_per_m", None)  # omega now pins the wavenumber
    inc.setdefault("kind", "plane_wave")
    if inc["kind"] == "plane_wave":
        inc.setdefault("direction", [1.0, 0.0])
    solver = out.setdefault("solver", {})
    solver.setdefault("rel_tolerance", 1e-12)
    solver.setdefault("max_iterations", 500)
    solver.setdefault("restart", None)
    return out


def _write_meta(out_dir: Path, meta: dict) -> None:
    try:
        version = _im.version("artifact")
    except _im.PackageNotFoundError:
        version = "unknown"
    meta = {"format": 1, "package_version": version, **meta}
    with open(out_dir / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _log(verbose: bool, message: str) -> None:
    if verbose:
        print(message, file=sys.stderr)


# -- run subcommand ----------------------------------------------------------


def _cmd_run(cfg: dict, out_dir: Path, verbose: bool) -> int:
    profile = _build_profile(cfg)
    preset = _build_preset(cfg, profile)
    grid = _build_grid(cfg, profile)
    incident = _build_incident(cfg)
    solve_cfg = _build_solve_config(cfg)
    _log(
        verbose,
        f"run: grid {grid.shape[0]}x{grid.shape[1]} (h={grid.h} m), "
        f"omega={preset.omega:.6g} rad/s",
    )

    try:
        sol = solve_scattering(
            profile, preset, grid, incident=incident, solve_cfg=solve_cfg
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _log(
        verbose,
        f"solver: {sol.solve.iterations} iterations, "
        f"residual {sol.solve.final_residual:.3e}, "
        f"converged={sol.solve.converged}",
    )
    bundle = reconstruct_fields(sol.mu, sol.ge, sol.table, sol.incident)

    residual = None
    try:
        residual = pde_residual(bundle, sol.field)
    except ValueError:
        pass  # default sample lattice not on this grid; skip the check

    write_grid(out_dir / "mu.grid", sol.mu)
    from platewave.operators import DensityGrid

    write_grid(out_dir / "phi.grid", DensityGrid(grid, bundle.phi_total, role="phi"))
    write_grid(
        out_dir / "phi_scat.grid",
        DensityGrid(grid, bundle.phi_scat, role="phi_scat"),
    )
    with open(out_dir / "residuals.csv", "w", encoding="utf-8") as fh:
        fh.write("iteration,relative_residual\n")
        for i, r in enumerate(sol.solve.residual_history, start=1):
            fh.write(f"{i},{r:.12g}\n")

    _write_meta(
        out_dir,
        {
            "command": "run",
            "config": _resolved_config(cfg, grid, preset),
            "results": {
                "converged": sol.solve.converged,
                "iterations": sol.solve.iterations,
                "final_residual": sol.solve.final_residual,
                "omega_rad_per_s": preset.omega,
                "k_radiating_per_m": sol.ge.data.k_radiating,
                "max_abs_mu": float(np.max(np.abs(sol.mu.values))),
                "max_abs_phi_scat": float(np.max(np.abs(bundle.phi_scat))),
                "pde_residual": residual,
            },
        },
    )
    return EXIT_OK if sol.solve.converged else EXIT_NONCONVERGENCE


# -- harness subcommand -------------------------------------------------------


def _harness_quadrature(cfg: dict, out_dir: Path, verbose: bool) -> int:
    hc = cfg["harness"]
    profile = _build_profile(cfg)
    preset = _build_preset(cfg, profile)
    ge = GreensEvaluator(solve_dispersion(derive_params(preset)))
    h_values = hc.get("h_m_values", [0.5, 0.25, 0.125, 0.0625])
    slope_min = hc.get("slope_min", 5.7)
    _log(verbose, f"quadrature_convergence: h={h_values}")
    study = convergence_study(
        ge,
        h_values,
        sigma=hc.get("sigma_m", 1.0),
        center=tuple(hc.get("center_m", (0.7, -0.3))),
        target=tuple(hc.get("target_m", (0.0, 0.0))),
    )
    with open(out_dir / "quadrature_convergence.csv", "w", encoding="utf-8") as fh:
        fh.write("kernel,h_m,error,stability_sum\n")
        for kid, errs in study["errors"].items():
            for h, e, s in zip(study["h"], errs, study["stability"][kid]):
                fh.write(f"{kid},{h:.12g},{e:.12g},{s:.12g}\n")
    passed = all(s >= slope_min for s in study["slopes"].values())
    _write_meta(
        out_dir,
        {
            "command": "harness",
            "config": cfg,
            "results": {
                "kind": "quadrature_convergence",
                "slopes": study["slopes"],
                "slope_min": slope_min,
                "passed": passed,
            },
        },
    )
    for kid, slope in sorted(study["slopes"].items()):
        _log(verbose, f"  {kid}: slope {slope:.2f}")
    return EXIT_OK if passed else EXIT_THRESHOLD


def _harness_pde(cfg: dict, out_dir: Path, verbose: bool) -> int:
    hc = cfg["harness"]
    profile = _build_profile(cfg)
    preset = _build_preset(cfg, profile)
    incident = _build_incident(cfg)
    solve_cfg = _build_solve_config(cfg)
    h_values = sorted(float(h) for h in hc.get("h_m_values", [0.5, 0.25]))[::-1]
    max_rel = hc.get("max_rel_linf", 1e-5)
    rows = []
    all_converged = True
    for h in h_values:
        sub = copy.deepcopy(cfg)
        sub["grid"]["h_m"] = h
        grid = _build_grid(sub, profile)
        sol = solve_scattering(
            profile, preset, grid, incident=incident, solve_cfg=solve_cfg
        )
        all_converged &= sol.solve.converged
        bundle = reconstruct_fields(sol.mu, sol.ge, sol.table, sol.incident)
        res = pde_residual(bundle, sol.field)
        rows.append((h, res["rel_linf"], res["rel_l2"]))
        _log(verbose, f"  h={h}: rel_linf={res['rel_linf']:.3e}")
    with open(out_dir / "pde_consistency.csv", "w", encoding="utf-8") as fh:
        fh.write("h_m,rel_linf,rel_l2\n")
        for h, linf, l2 in rows:
            fh.write(f"{h:.12g},{linf:.12g},{l2:.12g}\n")
    errors = [r[1] for r in rows]
    slope = (
        float(
            np.polyfit(
                np.log2([r[0] for r in rows]),
                np.log2(np.maximum(errors, 1e-300)),
                1,
            )[0]
        )
        if len(rows) >= 2
        else float("nan")
    )
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    passed = decreasing and errors[-1] <= max_rel
    _write_meta(
        out_dir,
        {
            "command": "harness",
            "config": cfg,
            "results": {
                "kind": "pde_consistency",
                "h_m": [r[0] for r in rows],
                "rel_linf": errors,
                "slope": slope,
                "max_rel_linf": max_rel,
                "decreasing": decreasing,
                "passed": passed,
            },
        },
    )
    if not all_converged:
        return EXIT_NONCONVERGENCE
    return EXIT_OK if passed else EXIT_THRESHOLD


def _harness_self(cfg: dict, out_dir: Path, verbose: bool) -> int:
    hc = cfg["harness"]
    profile = _build_profile(cfg)
    preset = _build_preset(cfg, profile)
    incident = _build_incident(cfg)
    solve_cfg = _build_solve_config(cfg)
    h_values = hc.get("h_m_values", [1.0, 0.5, 0.25])
    if "half_extent_m" in hc:
        half = float(hc["half_extent_m"])
    else:
        half = max(_grid_half_extents(cfg, profile))
    slope_min = hc.get("slope_min", 5.5)
    _log(verbose, f"self_convergence: h={h_values}, half_extent={half}")
    try:
        report = self_convergence(
            profile,
            preset,
            h_values,
            half,
            incident=incident,
            solve_cfg=solve_cfg,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with open(out_dir / "self_convergence.csv", "w", encoding="utf-8") as fh:
        fh.write("h_m,error\n")
        for h, e in zip(report["h"], report["errors"]):
            fh.write(f"{h:.12g},{e:.12g}\n")
    passed = report["slope"] >= slope_min
    _log(verbose, f"  slope {report['slope']:.2f}")
    _write_meta(
        out_dir,
        {
            "command": "harness",
            "config": cfg,
            "results": {
                "kind": "self_convergence",
                "h_m": report["h"],
                "errors": report["errors"],
                "slope": report["slope"],
                "slope_min": slope_min,
                "passed": passed,
            },
        },
    )
    return EXIT_OK if passed else EXIT_THRESHOLD


def _sweep_worker(cfg: dict, k: float) -> dict:
    """One sweep point; module-level so process pools can pickle it."""
    profile = _build_profile(cfg)
    preset = _build_preset(cfg, profile)
    grid = _build_grid(cfg, profile)
    hc = cfg["harness"]
    inc = cfg.get("incident", {})
    rows = probe_sweep(
        profile,
        preset,
        grid,
        [k],
        upstream=tuple(hc["upstream_m"]),
        downstream=tuple(hc["downstream_m"]),
        direction=tuple(inc.get("direction", (1.0, 0.0))),
        solve_cfg=_build_solve_config(cfg),
    )
    return rows[0]


def _harness_sweep(cfg: dict, out_dir: Path, jobs: int, verbose: bool) -> int:
    hc = cfg["harness"]
    for key in ("k_per_m_values", "upstream_m", "downstream_m"):
        if key not in hc:
            raise ConfigError(f"sweep harness needs harness.{key}")
    k_values = [float(k) for k in hc["k_per_m_values"]]
    _log(verbose, f"sweep: {len(k_values)} wavenumbers, jobs={jobs}")
    try:
        if jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=jobs
            ) as pool:
                rows = list(
                    pool.map(_sweep_worker, [cfg] * len(k_values), k_values)
                )
        else:
            rows = [_sweep_worker(cfg, k) for k in k_values]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for row in rows:
        _log(
            verbose,
            f"  k={row['k']:.6g}: R={row['reflected_abs']:.4e} "
            f"T={row['transmitted_abs']:.4e}",
        )
    write_sweep_csv(out_dir / "sweep.csv", rows)
    all_converged = all(r["converged"] for r in rows)
    _write_meta(
        out_dir,
        {
            "command": "harness",
            "config": cfg,
            "results": {
                "kind": "sweep",
                "rows": rows,
                "all_converged": all_converged,
            },
        },
    )
    return EXIT_OK if all_converged else EXIT_NONCONVERGENCE


def _cmd_harness(cfg: dict, out_dir: Path, jobs: int, verbose: bool) -> int:
    if "harness" not in cfg:
        raise ConfigError("harness subcommand needs a 'harness' config section")
    kind = cfg["harness"]["kind"]
    if kind == "quadrature_convergence":
        return _harness_quadrature(cfg, out_dir, verbose)
    if kind == "pde_consistency":
        return _harness_pde(cfg, out_dir, verbose)
    if kind == "self_convergence":
        return _harness_self(cfg, out_dir, verbose)
    return _harness_sweep(cfg, out_dir, jobs, verbose)


# -- entry point ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platewave",
        description="Flexural-gravity wave scattering by plates of "
        "varying thickness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "solve one scattering problem and write fields"),
        ("harness", "run a convergence/consistency harness"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument(
            "--output",
            default="platewave-output",
            help="output directory (created if missing)",
        )
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry, e.g. grid.h_m=0.25 or k=0.0265",
        )
        p.add_argument("--jobs", type=int, default=1, help="sweep workers")
        p.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            return _cmd_run(cfg, out_dir, args.verbose)
        return _cmd_harness(cfg, out_dir, args.jobs, args.verbose)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
