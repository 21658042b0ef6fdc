"""Special functions used by the elliptic solution.

Incomplete elliptic integrals are evaluated through Carlson's symmetric
forms (``scipy.special.elliprf`` and relatives). All integrals use the *modulus* ``p`` (not the parameter ``m = p**2``)
and the characteristic convention

    Pi(amp, r, p) = int_0^amp dt / ((1 - r sin^2 t) sqrt(1 - p^2 sin^2 t)).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError, SingularCharacteristic

def _as_array(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    return [np.array(a, dtype=float) for a in arrs]


def _scalar_or_array(out, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


def carlson_rc(x, y):
    """R_C(x, y) for x >= 0, y > 0."""
    x, y = _as_array(x, y)
    return _scalar_or_array(special.elliprc(x, y), x, y)


def carlson_rf(x, y, z):
    """R_F(x, y, z); at most one argument may be zero."""
    x, y, z = _as_array(x, y, z)
    return _scalar_or_array(special.elliprf(x, y, z), x, y, z)


def carlson_rd(x, y, z):
    """R_D(x, y, z) = R_J(x, y, z, z); z > 0 and at most one of x, y zero."""
    x, y, z = _as_array(x, y, z)
    return _scalar_or_array(special.elliprd(x, y, z), x, y, z)


def carlson_rj(x, y, z, p):
    """R_J(x, y, z, p) for p > 0 (the only case the package needs)."""
    x, y, z, p = _as_array(x, y, z, p)
    if np.any(p <= 0):
        raise DomainError("carlson_rj requires p > 0")
    return _scalar_or_array(special.elliprj(x, y, z, p), x, y, z, p)


def _check_modulus(p):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise DomainError(f"modulus must lie in [0, 1], got {p}")


def _check_amplitude(amp):
    amp = np.asarray(amp, dtype=float)
    if np.any(~np.isfinite(amp)) or np.any(amp < 0) or np.any(amp > math.pi / 2 + 1e-15):
        raise DomainError(f"amplitude must lie in [0, pi/2], got {amp}")


def ellip_f(amplitude, modulus):
    """Incomplete elliptic integral of the first kind F(amplitude, modulus)."""
    _check_modulus(modulus)
    _check_amplitude(amplitude)
    amp, p = _as_array(amplitude, modulus)
    amp = np.minimum(amp, math.pi / 2)
    s, c = np.sin(amp), np.cos(amp)
    c = np.where(amp == math.pi / 2, 0.0, c)
    y = (1 - p * s) * (1 + p * s)
    out = np.empty_like(amp)
    inf = (c == 0) & (y <= 0)
    out[inf] = np.inf
    ok = ~inf
    out[ok] = s[ok] * carlson_rf(c[ok] ** 2, y[ok], np.ones(np.count_nonzero(ok)))
    return _scalar_or_array(out, amplitude, modulus)


def ellip_e(amplitude, modulus):
    """Incomplete elliptic integral of the second kind E(amplitude, modulus)."""
    _check_modulus(modulus)
    _check_amplitude(amplitude)
    amp, p = _as_array(amplitude, modulus)
    amp = np.minimum(amp, math.pi / 2)
    s, c = np.sin(amp), np.cos(amp)
    c = np.where(amp == math.pi / 2, 0.0, c)
    y = (1 - p * s) * (1 + p * s)
    out = np.empty_like(amp)
    # p = 1: E = sin(amp) exactly; R_D would see two vanishing arguments at amp = pi/2
    deg = (c == 0) & (y <= 0)
    out[deg] = s[deg]
    ok = ~deg
    one = np.ones(np.count_nonzero(ok))
    s3 = s[ok] ** 3
    out[ok] = s[ok] * carlson_rf(c[ok] ** 2, y[ok], one) - (p[ok] ** 2) * s3 / 3 * carlson_rd(
        c[ok] ** 2, y[ok], one
    )
    return _scalar_or_array(out, amplitude, modulus)


def ellip_pi(amplitude, characteristic, modulus):
    """Incomplete elliptic integral of the third kind Pi(amplitude, r, modulus).

    Raises SingularCharacteristic when ``r * sin(amplitude)**2 >= 1``.
    """
    _check_modulus(modulus)
    _check_amplitude(amplitude)
    amp, r, p = _as_array(amplitude, characteristic, modulus)
    amp = np.minimum(amp, math.pi / 2)
    s, c = np.sin(amp), np.cos(amp)
    c = np.where(amp == math.pi / 2, 0.0, c)
    w = 1 - r * s * s
    if np.any(w <= 0):
        raise SingularCharacteristic(f"r sin^2(amplitude) >= 1 (r = {characteristic}, amplitude = {amplitude})")
    y = (1 - p * s) * (1 + p * s)
    out = np.zeros_like(amp)
    nz = s > 0
    if np.any((c[nz] == 0) & (y[nz] <= 0)):
        raise DomainError("Pi diverges at amplitude pi/2 with modulus 1")
    one = np.ones(np.count_nonzero(nz))
    sn = s[nz]
    out[nz] = sn * carlson_rf(c[nz] ** 2, y[nz], one) + r[nz] * sn**3 / 3 * carlson_rj(
        c[nz] ** 2, y[nz], one, w[nz]
    )
    return _scalar_or_array(out, amplitude, characteristic, modulus)


def ellip_k(modulus):
    """Complete integral K(modulus) = F(pi/2, modulus)."""
    return ellip_f(np.full(np.shape(modulus), math.pi / 2) if np.ndim(modulus) else math.pi / 2, modulus)


def jacobi_sn(u, modulus):
    """Jacobi elliptic sine sn(u; modulus) for real u (``scipy.special.ellipj``, AGM based)."""
    _check_modulus(modulus)
    u_arr, p = _as_array(u, modulus)
    out = special.ellipj(u_arr, p * p)[0]
    out = np.where(p >= 1.0, np.tanh(u_arr), out)
    return _scalar_or_array(out, u, modulus)


def arth(x):
    """Inverse hyperbolic tangent, defined for |x| < 1."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(np.abs(xa) < 1)):
        raise DomainError(f"arth requires |x| < 1, got {x}")
    out = np.arctanh(xa)
    return float(out) if out.ndim == 0 else out


def _poly_eval(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _polish(coeffs, x, iters=3):
    deriv = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
    for _ in range(iters):
        d = _poly_eval(deriv, x)
        if d == 0:
            break
        step = _poly_eval(coeffs, x) / d
        if not math.isfinite(step):
            break
        x_new = x - step
        if abs(_poly_eval(coeffs, x_new)) >= abs(_poly_eval(coeffs, x)):
            break
        x = x_new
    return x


def _solve_quadratic(a, b, c):
    if a == 0:
        if b == 0:
            raise DomainError("all polynomial coefficients vanish")
        return [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    qq = -0.5 * (b + math.copysign(sq, b))
    if qq == 0:
        return [0.0, 0.0]
    return sorted([qq / a, c / qq])


def solve_cubic_real(c3, c2, c1, c0):
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending, with multiplicity.

    A vanishing leading coefficient routes to the quadratic/linear solver.
    """
    coeffs = [float(c3), float(c2), float(c1), float(c0)]
    if not all(math.isfinite(c) for c in coeffs):
        raise DomainError("cubic coefficients must be finite")
    if c3 == 0:
        return _solve_quadratic(coeffs[1], coeffs[2], coeffs[3])
    a, b, c = coeffs[1] / coeffs[0], coeffs[2] / coeffs[0], coeffs[3] / coeffs[0]
    shift = a / 3
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    scale = max(abs(a), math.sqrt(abs(b)), abs(c) ** (1 / 3), 1e-300)
    disc = (q / 2) ** 2 + (p / 3) ** 3
    if p == 0 and q == 0:
        roots = [-shift] * 3
    elif disc > 1e-14 * scale**6 and p < 0 or disc > 0:
        sd = math.sqrt(disc)
        u = np.cbrt(-q / 2 + sd) if -q / 2 + sd != 0 else 0.0
        v = np.cbrt(-q / 2 - sd)
        roots = [float(u + v) - shift]
        # deflate to locate a possible (near-)double pair
        r0 = _polish([1.0, a, b, c], roots[0])
        qb = a + r0
        qc = b + r0 * qb
        extra = _solve_quadratic(1.0, qb, qc)
        roots = [r0] + extra
    else:
        m = 2 * math.sqrt(-p / 3)
        arg = 3 * q / (p * m) if p != 0 else 0.0
        arg = max(-1.0, min(1.0, arg))
        th = math.acos(arg) / 3
        roots = [m * math.cos(th - 2 * math.pi * k / 3) - shift for k in range(3)]
    roots = [_polish([1.0, a, b, c], r) for r in roots]
    return sorted(roots)
