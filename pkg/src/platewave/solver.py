"""GMRES driver for the discretized integral equation.

The discretized system is second kind (identity plus a compact-like
part), so unpreconditioned GMRES converges quickly; restart is exposed
only for memory-constrained runs.  The implementation is the standard
modified-Gram-Schmidt Arnoldi recurrence with Givens rotations, which
gives an exactly non-increasing residual history, handles the happy
breakdown (exact solution inside the Krylov space), and always returns
the minimal-residual iterate even on non-convergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from platewave.operators import DensityGrid

__all__ = ["SolveConfig", "SolveResult", "gmres_solve"]


@dataclass(frozen=True)
class SolveConfig:
    rel_tolerance: float = 1e-12
    max_iterations: int = 500
    restart: int | None = None  # None = no restart (full Krylov basis)

    def __post_init__(self):
        if not 0.0 < self.rel_tolerance < 1.0:
            raise ValueError("rel_tolerance must be in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.restart is not None and self.restart < 1:
            raise ValueError("restart must be at least 1 when given")


@dataclass(frozen=True)
class SolveResult:
    mu: DensityGrid
    iterations: int
    residual_history: tuple[float, ...]
    converged: bool
    final_residual: float


def _givens(a: complex, b: float) -> tuple[float, complex]:
    """(c, s) with [c, s; -conj(s), c] @ [a, b] = [r, 0], b real >= 0."""
    if b == 0.0:
        return 1.0, 0.0 + 0.0j
    if a == 0.0:
        return 0.0, 1.0 + 0.0j
    denom = np.hypot(abs(a), b)
    return abs(a) / denom, (a / abs(a)) * (b / denom)


def _gmres_cycle(matvec, b, x0, tol_abs, max_steps):
    """One (possibly full-length) GMRES cycle; returns (x, residuals)."""
    r0 = b - matvec(x0)
    beta = float(np.linalg.norm(r0))
    if beta == 0.0 or beta <= tol_abs:
        return x0, []
    V = [r0 / beta]
    R_cols: list[np.ndarray] = []  # rotated (triangular) Hessenberg columns
    cs: list[float] = []
    sn: list[complex] = []
    g = [beta + 0.0j]
    residuals: list[float] = []
    for j in range(max_steps):
        w = matvec(V[j])
        h = np.zeros(j + 2, dtype=np.complex128)
        for i in range(j + 1):
            h[i] = np.vdot(V[i], w)
            w = w - h[i] * V[i]
        wnorm = float(np.linalg.norm(w))
        h[j + 1] = wnorm
        for i in range(j):  # accumulated rotations
            t = cs[i] * h[i] + sn[i] * h[i + 1]
            h[i + 1] = -np.conj(sn[i]) * h[i] + cs[i] * h[i + 1]
            h[i] = t
        c, s = _givens(h[j], float(h[j + 1].real))
        cs.append(c)
        sn.append(s)
        h[j] = c * h[j] + s * h[j + 1]
        h[j + 1] = 0.0
        g.append(-np.conj(s) * g[j])
        g[j] = c * g[j]
        R_cols.append(h[: j + 1].copy())
        residuals.append(abs(g[j + 1]))
        if residuals[-1] <= tol_abs or wnorm == 0.0:
            break
        V.append(w / wnorm)
    k = len(R_cols)
    R = np.zeros((k, k), dtype=np.complex128)
    for col in range(k):
        R[: col + 1, col] = R_cols[col]
    y = np.linalg.solve(R, np.asarray(g[:k], dtype=np.complex128))
    x = x0 + np.tensordot(y, np.asarray(V[:k]), axes=(0, 0))
    return x, residuals


def gmres_solve(
    apply, f: DensityGrid, cfg: SolveConfig = SolveConfig()
) -> SolveResult:
    """Solve apply(mu) = f by GMRES; returns the best iterate either way.

    ``apply`` maps a complex array of f's grid shape to another; the
    residual history holds the relative residual after each iteration.
    """
    grid = f.grid
    shape = grid.shape
    b = f.values.ravel()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return SolveResult(
            mu=DensityGrid(grid, np.zeros(shape), role="mu"),
            iterations=0,
            residual_history=(),
            converged=True,
            final_residual=0.0,
        )

    def matvec(v):
        return np.asarray(apply(v.reshape(shape)), dtype=np.complex128).ravel()

    tol_abs = cfg.rel_tolerance * bnorm
    x = np.zeros_like(b)
    history: list[float] = []
    cycle_len = cfg.max_iterations if cfg.restart is None else cfg.restart
    steps_left = cfg.max_iterations
    while steps_left > 0:
        x, residuals = _gmres_cycle(
            matvec, b, x, tol_abs, min(cycle_len, steps_left)
        )
        history.extend(r / bnorm for r in residuals)
        steps_left -= max(len(residuals), 1)
        if not residuals or residuals[-1] <= tol_abs:
            break

    true_resid = float(np.linalg.norm(matvec(x) - b) / bnorm)
    return SolveResult(
        mu=DensityGrid(grid, x.reshape(shape), role="mu"),
        iterations=len(history),
        residual_history=tuple(history),
        converged=true_resid <= cfg.rel_tolerance,
        final_residual=true_resid,
    )
