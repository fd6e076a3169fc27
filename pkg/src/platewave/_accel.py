"""Hot numerical loops with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time: set ``PLATEWAVE_NUMBA=0`` to
force the numpy implementations; any other value (or the variable being
unset) selects numba when it is importable.  Both backends implement the
same contracts and agree to floating-point roundoff.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "stencil_apply",
    "gaussian_accumulate",
    "oscillatory_quadrature",
    "poly_log_eval",
]


def _numpy_stencil_apply(
    values: np.ndarray, offsets: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """out[i, j] = sum_k weights[k] * values[i - o1_k, j - o2_k] (zero-fill)."""
    out = np.zeros_like(values)
    n1, n2 = values.shape
    for (o1, o2), w in zip(offsets, weights):
        ti0, ti1 = max(0, o1), min(n1, n1 + o1)
        tj0, tj1 = max(0, o2), min(n2, n2 + o2)
        if ti0 >= ti1 or tj0 >= tj1:
            continue
        out[ti0:ti1, tj0:tj1] += (
            w * values[ti0 - o1 : ti1 - o1, tj0 - o2 : tj1 - o2]
        )
    return out


def _numpy_gaussian_accumulate(x, y, cx, cy, weights, sigma, chunk=256):
    """Sums of weighted Gaussians and their first two derivatives.

    Returns (h, hx, hy, hxx, hyy, hxy) arrays over the flat points (x, y)
    for h(r) = sum_k w_k exp(-|r - c_k|^2 / (2 sigma^2)).
    """
    s2 = sigma * sigma
    n = x.shape[0]
    h, hx, hy = np.zeros(n), np.zeros(n), np.zeros(n)
    hxx, hyy, hxy = np.zeros(n), np.zeros(n), np.zeros(n)
    for start in range(0, len(cx), chunk):
        vx = x[:, None] - cx[None, start : start + chunk]
        vy = y[:, None] - cy[None, start : start + chunk]
        g = np.exp(-(vx**2 + vy**2) / (2.0 * s2))
        w = weights[start : start + chunk]
        h += g @ w
        hx += (-vx / s2 * g) @ w
        hy += (-vy / s2 * g) @ w
        hxx += ((vx**2 / s2 - 1.0) / s2 * g) @ w
        hyy += ((vy**2 / s2 - 1.0) / s2 * g) @ w
        hxy += (vx * vy / s2**2 * g) @ w
    return h, hx, hy, hxx, hyy, hxy


def _numpy_oscillatory_quadrature(z, nodes, weights):
    """sum_k weights[k] * exp(i z nodes[k]) for each complex z."""
    return np.exp(1j * z[:, None] * nodes[None, :]) @ weights.astype(
        np.complex128
    )


def _numpy_poly_log_eval(z, poly, logpoly, pole):
    """sum p_m z^m + log(z) sum q_m z^m + sum c_j z^(-j-1) (Horner)."""
    out = np.zeros_like(z)
    for c in poly[::-1]:
        out = out * z + c
    if len(logpoly):
        lp = np.zeros_like(z)
        for c in logpoly[::-1]:
            lp = lp * z + c
        out = out + np.log(z) * lp
    if len(pole):
        inv = 1.0 / z
        acc = np.zeros_like(z)
        for c in pole[::-1]:
            acc = (acc + c) * inv
        out = out + acc
    return out


_want_numba = os.environ.get("PLATEWAVE_NUMBA", "1") != "0"
_numba_ok = False
if _want_numba:
    try:
        import numba

        _numba_ok = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba_ok = False

if _numba_ok:
    BACKEND = "numba"

    @numba.njit(cache=True)
    def _nb_stencil_apply(values, offsets, weights):  # pragma: no cover
        out = np.zeros_like(values)
        n1, n2 = values.shape
        for k in range(offsets.shape[0]):
            o1, o2 = offsets[k, 0], offsets[k, 1]
            w = weights[k]
            for i in range(max(0, o1), min(n1, n1 + o1)):
                for j in range(max(0, o2), min(n2, n2 + o2)):
                    out[i, j] += w * values[i - o1, j - o2]
        return out

    @numba.njit(cache=True)
    def _nb_gaussian_accumulate(
        x, y, cx, cy, weights, sigma
    ):  # pragma: no cover
        s2 = sigma * sigma
        n = x.shape[0]
        h, hx, hy = np.zeros(n), np.zeros(n), np.zeros(n)
        hxx, hyy, hxy = np.zeros(n), np.zeros(n), np.zeros(n)
        for i in range(n):
            for k in range(cx.shape[0]):
                vx = x[i] - cx[k]
                vy = y[i] - cy[k]
                g = weights[k] * np.exp(-(vx * vx + vy * vy) / (2.0 * s2))
                h[i] += g
                hx[i] += -vx / s2 * g
                hy[i] += -vy / s2 * g
                hxx[i] += (vx * vx / s2 - 1.0) / s2 * g
                hyy[i] += (vy * vy / s2 - 1.0) / s2 * g
                hxy[i] += vx * vy / (s2 * s2) * g
        return h, hx, hy, hxx, hyy, hxy

    @numba.njit(cache=True)
    def _nb_oscillatory_quadrature(z, nodes, weights):  # pragma: no cover
        out = np.zeros(z.shape[0], dtype=np.complex128)
        for i in range(z.shape[0]):
            acc = 0.0 + 0.0j
            for k in range(nodes.shape[0]):
                acc += weights[k] * np.exp(1j * z[i] * nodes[k])
            out[i] = acc
        return out

    @numba.njit(cache=True)
    def _nb_poly_log_eval(z, poly, logpoly, pole):  # pragma: no cover
        out = np.zeros_like(z)
        for i in range(z.shape[0]):
            zi = z[i]
            acc = 0.0 + 0.0j
            for m in range(poly.shape[0] - 1, -1, -1):
                acc = acc * zi + poly[m]
            if logpoly.shape[0]:
                lp = 0.0 + 0.0j
                for m in range(logpoly.shape[0] - 1, -1, -1):
                    lp = lp * zi + logpoly[m]
                acc += np.log(zi) * lp
            if pole.shape[0]:
                inv = 1.0 / zi
                pl = 0.0 + 0.0j
                for m in range(pole.shape[0] - 1, -1, -1):
                    pl = (pl + pole[m]) * inv
                acc += pl
            out[i] = acc
        return out

    def oscillatory_quadrature(z, nodes, weights):
        return _nb_oscillatory_quadrature(
            np.ascontiguousarray(z, dtype=np.complex128),
            np.ascontiguousarray(nodes, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
        )

    def poly_log_eval(z, poly, logpoly, pole):
        return _nb_poly_log_eval(
            np.ascontiguousarray(z, dtype=np.complex128),
            np.ascontiguousarray(poly, dtype=np.complex128),
            np.ascontiguousarray(logpoly, dtype=np.complex128),
            np.ascontiguousarray(pole, dtype=np.complex128),
        )

    def stencil_apply(values, offsets, weights):
        return _nb_stencil_apply(
            np.ascontiguousarray(values),
            np.ascontiguousarray(offsets, dtype=np.int64),
            np.ascontiguousarray(weights),
        )

    def gaussian_accumulate(x, y, cx, cy, weights, sigma):
        return _nb_gaussian_accumulate(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(y, dtype=np.float64),
            np.ascontiguousarray(cx, dtype=np.float64),
            np.ascontiguousarray(cy, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
            float(sigma),
        )

else:
    BACKEND = "numpy"

    def oscillatory_quadrature(z, nodes, weights):
        return _numpy_oscillatory_quadrature(
            np.asarray(z, dtype=np.complex128),
            np.asarray(nodes, dtype=np.float64),
            np.asarray(weights, dtype=np.float64),
        )

    def poly_log_eval(z, poly, logpoly, pole):
        return _numpy_poly_log_eval(
            np.asarray(z, dtype=np.complex128),
            np.asarray(poly, dtype=np.complex128),
            np.asarray(logpoly, dtype=np.complex128),
            np.asarray(pole, dtype=np.complex128),
        )

    def stencil_apply(values, offsets, weights):
        return _numpy_stencil_apply(values, offsets, weights)

    def gaussian_accumulate(x, y, cx, cy, weights, sigma):
        return _numpy_gaussian_accumulate(
            np.asarray(x, dtype=np.float64),
            np.asarray(y, dtype=np.float64),
            np.asarray(cx, dtype=np.float64),
            np.asarray(cy, dtype=np.float64),
            np.asarray(weights, dtype=np.float64),
            float(sigma),
        )
