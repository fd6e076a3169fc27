"""Struve, Hankel, and Bessel evaluation for complex arguments.

The Green's functions need the Struve combinations

    K_n(z) = H_n(z) - Y_n(z)          (H_n the Struve function)
    R_n(z) = J_n(z) + i H_n(z)

on the principal branch (arg z in (-pi, pi], values on the negative real
axis taken as the limit from the upper half-plane), plus the log-cancelled
stable combinations

    (i/4) H0^(1)(z) + log(z) / (2 pi)
    K_0(z) + (2/pi) log(z)

and their derivatives up to order three.  R_n is entire; for |z| < 95 it
is computed from the integral representation

    R_n(z) = 2 (z/2)^n / (sqrt(pi) Gamma(n+1/2)) *
             int_0^1 (1 - t^2)^(n-1/2) exp(izt) dt

after the substitution t = sin(theta) (which removes the endpoint
singularity) with a fixed Gauss-Legendre rule; for |z| >= 95 the
asymptotic series of K_n combined with the Hankel function is used.
Lower half-plane arguments of K_n are reached by Schwarz reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.special as _sp

from platewave._accel import oscillatory_quadrature, poly_log_eval

__all__ = [
    "BRANCH_RADIUS",
    "SERIES_RADIUS",
    "SpecFunValue",
    "bessel_j",
    "bessel_y",
    "hankel1",
    "struve_R",
    "struve_K",
    "stable_combo",
    "branch_for",
]

# |z| at which R_n/K_n switch from quadrature to the asymptotic series
BRANCH_RADIUS = 95.0

# |z| below which the stable combos use their cancelled power series
SERIES_RADIUS = 4.0

_QUAD_NODES = 280  # Gauss-Legendre nodes for the R_n integral, |z| <= 95
_ASYM_TERMS = 45  # asymptotic series length for K_n, |z| >= 95

_EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class SpecFunValue:
    """A special-function value together with the branch that produced it."""

    value: complex
    branch_tag: str


def _gl_rule():
    x, w = np.polynomial.legendre.leggauss(_QUAD_NODES)
    theta = 0.25 * np.pi * (x + 1.0)
    w = 0.25 * np.pi * w
    return np.sin(theta), np.cos(theta), w


_SIN_NODES, _COS_NODES, _GL_WEIGHTS = _gl_rule()
_R_WEIGHTS = (_GL_WEIGHTS, _GL_WEIGHTS * _COS_NODES**2)


def _as_complex_array(z):
    a = np.asarray(z, dtype=np.complex128)
    return a, a.shape


def bessel_j(n: int, z):
    """Bessel J_n for complex argument (scipy amos)."""
    return _sp.jv(n, np.asarray(z, dtype=np.complex128))


def bessel_y(n: int, z):
    """Bessel Y_n, principal branch, limit from above on the cut."""
    return _sp.yv(n, np.asarray(z, dtype=np.complex128))


def hankel1(n: int, z):
    """Hankel H^(1)_n, principal branch, limit from above on the cut."""
    return _sp.hankel1(n, np.asarray(z, dtype=np.complex128))


def branch_for(z) -> str:
    """Which evaluation branch handles this argument magnitude."""
    return "quadrature" if abs(complex(z)) < BRANCH_RADIUS else "asymptotic"


def _struve_R_quadrature(n: int, z_flat: np.ndarray) -> np.ndarray:
    integral = oscillatory_quadrature(z_flat, _SIN_NODES, _R_WEIGHTS[n])
    if n == 0:
        pref = 2.0 / np.pi
    else:
        pref = 2.0 * z_flat / np.pi
    return pref * integral


def _struve_K_series(n: int, z_flat: np.ndarray) -> np.ndarray:
    # K_n(z) ~ (1/pi) sum_k Gamma(k+1/2) (z/2)^(n-2k-1) / Gamma(n+1/2-k),
    # valid away from the negative real axis
    half_z = 0.5 * z_flat
    term = (
        _sp.gamma(0.5)
        / (np.pi * _sp.gamma(n + 0.5))
        * half_z ** (n - 1)
    ) * np.ones_like(z_flat)
    total = term.copy()
    inv_sq = 1.0 / half_z**2
    for k in range(_ASYM_TERMS):
        term = term * ((k + 0.5) * (n - 0.5 - k)) * inv_sq
        total += term
    return total


def _struve_K_asymptotic(n: int, z_flat: np.ndarray) -> np.ndarray:
    # The plain series misses the algebraic branch jump of Y_n near
    # arg z = pi; reflect Re z < 0 through the connection formula
    # K_n(z) = (-1)^(n+1) [K_n(-z) + 2i H^(2)_n(-z)].
    out = np.empty_like(z_flat)
    left = z_flat.real < 0
    if np.any(~left):
        out[~left] = _struve_K_series(n, z_flat[~left])
    if np.any(left):
        w = -z_flat[left]
        out[left] = (-1.0) ** (n + 1) * (
            _struve_K_series(n, w) + 2j * _sp.hankel2(n, w)
        )
    return out


def struve_R(n: int, z):
    """R_n(z) = J_n(z) + i*StruveH_n(z) for Im z >= 0, n in {0, 1}."""
    if n not in (0, 1):
        raise ValueError("order must be 0 or 1")
    a, shape = _as_complex_array(z)
    flat = a.ravel()
    if np.any(flat.imag < 0):
        raise ValueError("struve_R requires Im z >= 0")
    out = np.empty_like(flat)
    near = np.abs(flat) < BRANCH_RADIUS
    if np.any(near):
        out[near] = _struve_R_quadrature(n, flat[near])
    if np.any(~near):
        zf = flat[~near]
        out[~near] = _sp.hankel1(n, zf) + 1j * _struve_K_asymptotic(n, zf)
    return out.reshape(shape) if shape else complex(out[0])


def struve_K(n: int, z):
    """Struve K_n(z) = StruveH_n(z) - Y_n(z), principal branch, n in {0, 1}.

    Lower half-plane arguments use Schwarz reflection (the series
    coefficients are real); the negative real axis takes the limit from
    the upper half-plane.
    """
    if n not in (0, 1):
        raise ValueError("order must be 0 or 1")
    a, shape = _as_complex_array(z)
    flat = a.ravel().copy()
    if np.any(flat == 0):
        raise ValueError("struve_K is singular at z = 0")
    lower = flat.imag < 0
    flat[lower] = np.conj(flat[lower])
    out = np.empty_like(flat)
    near = np.abs(flat) < BRANCH_RADIUS
    if np.any(near):
        zf = flat[near]
        out[near] = 1j * (_sp.hankel1(n, zf) - _struve_R_quadrature(n, zf))
    if np.any(~near):
        out[~near] = _struve_K_asymptotic(n, flat[~near])
    out[lower] = np.conj(out[lower])
    return out.reshape(shape) if shape else complex(out[0])


# ----------------------------------------------------------------------
# stable log-cancelled combinations
#
# Two representations per combo: a power series with the leading log
# cancelled analytically (small |z|), and a closed-form expression in
# H0/H1 (or K0/K1), log z, and powers of z (everywhere else).
# ----------------------------------------------------------------------

_SERIES_TERMS = 34  # even-index terms, covers |z| <= 4 to below 1e-15


class _PolyLog:
    """f(z) = sum p_m z^m + log(z) sum q_m z^m + sum c_j z^(-j-1)."""

    __slots__ = ("poly", "logpoly", "pole")

    def __init__(self, poly, logpoly, pole):
        self.poly = np.asarray(poly, dtype=np.complex128)
        self.logpoly = np.asarray(logpoly, dtype=np.complex128)
        self.pole = np.asarray(pole, dtype=np.complex128)

    def derivative(self) -> "_PolyLog":
        p, q, c = self.poly, self.logpoly, self.pole
        m = np.arange(1, len(p))
        dp = np.zeros(len(p) - 1, dtype=np.complex128)
        dq = np.zeros(len(q) - 1, dtype=np.complex128)
        dp += m * p[1:]
        dp += q[1:]
        dq += m * q[1:]
        dc = np.zeros(len(c) + 1, dtype=np.complex128)
        dc[0] += q[0]
        if len(c):
            dc[1:] -= np.arange(1, len(c) + 1) * c
        return _PolyLog(dp, dq, dc)

    def __neg__(self) -> "_PolyLog":
        return _PolyLog(-self.poly, -self.logpoly, -self.pole)

    def shifted(self, const: complex) -> "_PolyLog":
        poly = self.poly.copy()
        poly[0] += const
        return _PolyLog(poly, self.logpoly, self.pole)

    def __call__(self, z_flat: np.ndarray) -> np.ndarray:
        return poly_log_eval(z_flat, self.poly, self.logpoly, self.pole)


def _base_series():
    """Cancelled power series of the two order-0 combos."""
    m = _SERIES_TERMS * 2 + 2
    k = np.arange(_SERIES_TERMS + 1)
    fact_sq = _sp.factorial(k) ** 2
    a = (-1.0) ** k / (4.0**k * fact_sq)  # J0 coefficients at z^(2k)
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, _SERIES_TERMS + 1))))
    c0 = np.log(2.0) - _EULER_GAMMA

    # hankel_log: (i/4) H0^(1)(z) + log(z)/(2 pi)
    poly_h = np.zeros(m, dtype=np.complex128)
    logp_h = np.zeros(m, dtype=np.complex128)
    poly_h[2 * k] = (0.25j + c0 / (2.0 * np.pi)) * a
    poly_h[2 * k[1:]] += -(1.0 / (2.0 * np.pi)) * (-1.0) ** k[1:] * harmonic[
        1:
    ] * (-1.0) / (4.0 ** k[1:] * fact_sq[1:])
    logp_h[2 * k[1:]] = -(1.0 / (2.0 * np.pi)) * a[1:]

    # struve_log: K0(z) + (2/pi) log(z)
    poly_k = np.zeros(m, dtype=np.complex128)
    logp_k = np.zeros(m, dtype=np.complex128)
    poly_k[2 * k] = (2.0 / np.pi) * c0 * a
    poly_k[2 * k[1:]] += -(2.0 / np.pi) * (-1.0) ** k[1:] * harmonic[1:] * (
        -1.0
    ) / (4.0 ** k[1:] * fact_sq[1:])
    # Struve H0 odd series at z^(2k+1)
    gam = _sp.gamma(k + 1.5)
    poly_k[2 * k + 1] = (-1.0) ** k / (2.0 ** (2 * k + 1) * gam**2)
    logp_k[2 * k[1:]] = -(2.0 / np.pi) * a[1:]

    return (
        _PolyLog(poly_h, logp_h, []),
        _PolyLog(poly_k, logp_k, []),
    )


def _build_series_table():
    ch, ck = _base_series()
    table = {}
    base = {
        ("hankel_log", 0): ch,
        ("hankel_log", 1): -ch.derivative(),
        ("struve_log", 0): ck,
        ("struve_log", 1): (-ck.derivative()).shifted(2.0 / np.pi),
    }
    for key, f in base.items():
        g = f
        for order in range(4):
            table[key + (order,)] = g
            g = g.derivative()
    return table


_SERIES_TABLE = _build_series_table()


# closed-form representation: dict {(tag, power): coeff} with tags
# f0/f1 (H0,H1 or K0,K1), "log", "one"; differentiated symbolically.


def _rep_derivative(rep, kind):
    out: dict = {}

    def add(key, val):
        out[key] = out.get(key, 0.0) + val

    for (tag, p), c in rep.items():
        if tag == "f0":
            if kind == "hankel_log":
                add(("f1", p), -c)  # H0' = -H1
            else:
                add(("one", p), c * 2.0 / np.pi)  # K0' = 2/pi - K1
                add(("f1", p), -c)
            add(("f0", p - 1), c * p)
        elif tag == "f1":
            add(("f0", p), c)  # H1' = H0 - H1/z; K1' = K0 - K1/z
            add(("f1", p - 1), c * (p - 1))
        elif tag == "log":
            add(("one", p - 1), c)
            add(("log", p - 1), c * p)
        elif tag == "one":
            if p != 0:
                add(("one", p - 1), c * p)
    return {key: val for key, val in out.items() if val != 0.0}


def _build_direct_table():
    table = {}
    base = {
        ("hankel_log", 0): {("f0", 0): 0.25j, ("log", 0): 1.0 / (2.0 * np.pi)},
        ("struve_log", 0): {("f0", 0): 1.0, ("log", 0): 2.0 / np.pi},
    }
    for kind in ("hankel_log", "struve_log"):
        d1 = _rep_derivative(base[(kind, 0)], kind)
        neg = {key: -val for key, val in d1.items()}
        if kind == "struve_log":
            neg[("one", 0)] = neg.get(("one", 0), 0.0) + 2.0 / np.pi
        base[(kind, 1)] = {k: v for k, v in neg.items() if v != 0.0}
    for (kind, n), rep in base.items():
        r = rep
        for order in range(4):
            table[(kind, n, order)] = r
            r = _rep_derivative(r, kind)
    return table


_DIRECT_TABLE = _build_direct_table()


def _eval_direct(rep, kind, z_flat):
    if kind == "hankel_log":
        f0 = _sp.hankel1(0, z_flat)
        f1 = _sp.hankel1(1, z_flat)
    else:
        f0 = struve_K(0, z_flat)
        f1 = struve_K(1, z_flat)
    logz = np.log(z_flat)
    one = np.ones_like(z_flat)
    funcs = {"f0": f0, "f1": f1, "log": logz, "one": one}
    out = np.zeros_like(z_flat)
    for (tag, p), c in rep.items():
        out += c * funcs[tag] * z_flat ** float(p)
    return out


def stable_combo(kind: str, n: int, z, derivative_order: int = 0):
    """Log-cancelled combination and its z-derivatives.

    kind "hankel_log": order 0 is (i/4) H0^(1)(z) + log(z)/(2 pi);
    order 1 is (i/4) H1^(1)(z) - 1/(2 pi z).
    kind "struve_log": order 0 is K0(z) + (2/pi) log(z);
    order 1 is K1(z) - 2/(pi z).
    derivative_order in 0..3 differentiates with respect to z.
    """
    if kind not in ("hankel_log", "struve_log"):
        raise ValueError(f"unknown combo kind {kind!r}")
    if n not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if not 0 <= derivative_order <= 3:
        raise ValueError("derivative_order must be in 0..3")
    a, shape = _as_complex_array(z)
    flat = a.ravel()
    if np.any(flat == 0):
        raise ValueError("stable_combo is singular at z = 0")
    out = np.empty_like(flat)
    near = np.abs(flat) <= SERIES_RADIUS
    if np.any(near):
        out[near] = _SERIES_TABLE[(kind, n, derivative_order)](flat[near])
    if np.any(~near):
        out[~near] = _eval_direct(
            _DIRECT_TABLE[(kind, n, derivative_order)], kind, flat[~near]
        )
    return out.reshape(shape) if shape else complex(out[0])
