"""Independent reference implementations used as test oracles.

Everything here is deliberately slow and simple: mpmath arbitrary
precision root finding and series, adaptive quadrature, and dense direct
summation.  The library under test must match these, never the other way
around.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def quintic_roots_oracle(alpha0, beta0, gamma):
    """Roots of alpha0 z^5 - beta0 z + gamma by mpmath polyroots."""
    roots = mp.polyroots(
        [mp.mpf(alpha0), 0, 0, 0, -mp.mpmathify(beta0), mp.mpmathify(gamma)],
        maxsteps=200,
        extraprec=80,
    )
    return np.array([complex(r) for r in roots])


def residues_oracle(alpha0, beta0, roots):
    """Residues 1/p'(rho_j) in extended precision."""
    out = []
    for r in roots:
        rm = mp.mpmathify(complex(r))
        out.append(complex(1 / (5 * mp.mpf(alpha0) * rm**4 - mp.mpmathify(beta0))))
    return np.array(out)


def _dps_for(z: complex) -> int:
    # J/Y/StruveH grow like exp(|Im z|) while their combinations stay
    # bounded; add enough digits to survive the cancellation
    return 40 + int(0.5 * abs(complex(z).imag))


def struve_R_oracle(n: int, z: complex) -> complex:
    """R_n(z) = J_n(z) + i H_n(z) via mpmath (H = Struve function)."""
    with mp.workdps(_dps_for(z)):
        zm = mp.mpmathify(complex(z))
        val = mp.besselj(n, zm) + 1j * mp.struveh(n, zm)
        return complex(val)


def struve_R_quadrature_oracle(n: int, z: complex) -> complex:
    """R_n(z) from its integral representation, by adaptive quadrature.

    R_n(z) = 2 (z/2)^n / (sqrt(pi) Gamma(n + 1/2)) *
             integral_0^1 (1 - t^2)^(n - 1/2) exp(i z t) dt,  Im z >= 0.
    """
    zm = mp.mpmathify(complex(z))
    pref = 2 * (zm / 2) ** n / (mp.sqrt(mp.pi) * mp.gamma(n + mp.mpf(1) / 2))
    # substitute t = sin(theta) so the integrand is smooth
    integrand = lambda th: mp.cos(th) ** (2 * n) * mp.exp(1j * zm * mp.sin(th))
    val = pref * mp.quad(integrand, [0, mp.pi / 2])
    return complex(val)


def struve_K_oracle(n: int, z: complex) -> complex:
    """Struve K_n(z) = H_n(z) - Y_n(z) on the principal branch.

    On the negative real axis the limit from the upper half-plane is taken.
    """
    zc = complex(z)
    if zc.imag == 0.0 and zc.real < 0.0:
        zc = complex(zc.real, 1e-35)
    with mp.workdps(_dps_for(zc)):
        zm = mp.mpmathify(zc)
        val = mp.struveh(n, zm) - mp.bessely(n, zm)
        return complex(val)


def hankel1_oracle(n: int, z: complex) -> complex:
    """H^(1)_n(z) = J_n(z) + i Y_n(z), limit from above on the cut."""
    zc = complex(z)
    if zc.imag == 0.0 and zc.real < 0.0:
        zc = complex(zc.real, 1e-35)
    zm = mp.mpmathify(zc)
    return complex(mp.besselj(n, zm) + 1j * mp.bessely(n, zm))


def hankel_log_combo_oracle(z: complex, order: int = 0) -> complex:
    """(i/4) H0^(1)(z) + log(z)/(2 pi), or its order-th z derivative."""
    f = lambda w: 1j / 4 * (mp.besselj(0, w) + 1j * mp.bessely(0, w)) + mp.log(
        w
    ) / (2 * mp.pi)
    zm = mp.mpmathify(complex(z))
    if order == 0:
        return complex(f(zm))
    return complex(mp.diff(f, zm, order))


def struve_log_combo_oracle(z: complex, order: int = 0) -> complex:
    """K0(z) + (2/pi) log(z), or its order-th z derivative.

    The sign of the log term is the one that actually cancels the
    singularity: K0(z) ~ -(2/pi) log z + const as z -> 0.
    """
    f = lambda w: (mp.struveh(0, w) - mp.bessely(0, w)) + 2 / mp.pi * mp.log(w)
    zm = mp.mpmathify(complex(z))
    if order == 0:
        return complex(f(zm))
    return complex(mp.diff(f, zm, order))


def gaussian_kernel_integral_oracle(ge, kid, sigma, center, target):
    """Kernel integral against a Gaussian density, via Bessel identities.

    For the radially symmetric kernels (K3, K7, K8) and the dipole
    kernels (K1, K2) the angular integral of a Gaussian density has a
    closed form in terms of modified Bessel functions:

        int_0^{2pi} exp(a cos(t - phi)) dt            = 2 pi I0(a)
        int_0^{2pi} cos(t) exp(a cos(t - phi)) dt     = 2 pi cos(phi) I1(a)
        int_0^{2pi} sin(t) exp(a cos(t - phi)) dt     = 2 pi sin(phi) I1(a)

    which reduces the 2D integral to a single radial scipy quadrature --
    an entirely different scheme from the polar product rule under test.
    """
    import numpy as np
    from scipy.integrate import quad
    from scipy.special import i0, i1

    from platewave.operators import radial_tables

    ux = float(target[0]) - float(center[0])
    uy = float(target[1]) - float(center[1])
    d = float(np.hypot(ux, uy))
    phi = float(np.arctan2(uy, ux))
    s2 = float(sigma) ** 2
    r_max = d + 12.0 * float(sigma)

    def radial(r, key):
        return radial_tables(ge, np.asarray([r]))[key][0]

    if kid in ("K3", "K7", "K8"):
        key = {"K3": "m2", "K7": "gs", "K8": "gphi"}[kid]
        ang = lambda r: 2.0 * np.pi * i0(r * d / s2)
    elif kid in ("K1", "K2"):
        key = "m3"
        trig = np.cos(phi) if kid == "K1" else np.sin(phi)
        ang = lambda r: -2.0 * np.pi * trig * i1(r * d / s2)
    else:
        raise ValueError(f"no closed angular form for {kid}")

    def integrand(r, part):
        val = radial(r, key) * ang(r) * r * np.exp(-(d * d + r * r) / (2.0 * s2))
        return val.real if part == "re" else val.imag

    pts = [1e-6 * r_max, 0.01 * r_max, 0.1 * r_max, 0.5 * r_max]
    re = quad(integrand, 0.0, r_max, args=("re",), points=pts,
              limit=400, epsabs=1e-16, epsrel=1e-13)[0]
    im = quad(integrand, 0.0, r_max, args=("im",), points=pts,
              limit=400, epsabs=1e-16, epsrel=1e-13)[0]
    return complex(re, im)
