"""Adiabatic (Hamiltonian) solution of resonant three-wave mixing.

The atoms follow one eigenstate of the three-level Hamiltonian. Its
eigenvalue ``lam`` (with ``lam0 = lam + q J`` the instantaneous root of the
characteristic cubic) is conserved along z. The exchanged flux ``J`` then
obeys a one-dimensional pendulum-like equation whose solution is written
with incomplete elliptic integrals.

Atomic amplitudes are expressed in the basis of the amplitude equations,

    H = [[0,    -W1,            -W3          ],
         [-W1,  -d2,            -W2 e^{i phi}],
         [-W3,  -W2 e^{-i phi}, -d3          ]],

whose characteristic polynomial is

    lam^3 + (d2 + d3) lam^2 + (d2 d3 - W1^2 - W2^2 - W3^2) lam
        - W1^2 d3 - W3^2 d2 + 2 W1 W2 W3 cos(phi) = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchAmbiguity,
    DomainError,
    NoOscillationRegime,
    NonMonotoneRelation,
    RegimeWarning,
    VanishingA0,
)
from .model import BoundaryFields, MediumParams, rabi
from .specfun import ellip_e, ellip_f, ellip_k, ellip_pi, solve_cubic_real

DEGENERACY_TOL = 1e-10
HOMOTOPY_STEPS = 20
HIGHER_ORDER_GUARD = 0.01
UNIT_MODULUS_TOL = 1e-8

MODELS = ("exact", "eit", "maxcoh", "conventional")


# --------------------------------------------------------------------------
# eigenvalue problem
# --------------------------------------------------------------------------


def characteristic_coefficients(omega1, omega2, omega3, phi, delta2, delta3):
    """Coefficients (c3, c2, c1, c0) of the characteristic cubic in lam0."""
    s = omega1**2 + omega2**2 + omega3**2
    return (
        1.0,
        delta2 + delta3,
        delta2 * delta3 - s,
        -(omega1**2) * delta3 - omega3**2 * delta2 + 2 * omega1 * omega2 * omega3 * math.cos(phi),
    )


def hamiltonian_matrix(omega1, omega2, omega3, phi, delta2, delta3, gamma=0.0):
    """3x3 interaction Hamiltonian; ``gamma > 0`` makes it non-Hermitian."""
    e = np.exp(1j * phi)
    return np.array(
        [
            [0.0, -omega1, -omega3],
            [-omega1, -delta2, -omega2 * e],
            [-omega3, -omega2 * np.conj(e), -(delta3 + 1j * gamma)],
        ],
        dtype=complex,
    )


def _boundary_rabi(params: MediumParams, boundary: BoundaryFields, scale=1.0):
    return (
        scale * rabi(params.mu1, boundary.eta10),
        scale * rabi(params.mu2, boundary.eta20),
        scale * rabi(params.mu3, boundary.eta30),
    )


def _entrance_phase(params: MediumParams, boundary: BoundaryFields) -> float:
    return boundary.phi0 + params.theta


def _newton_cubic(coeffs, x, iters=4):
    c3, c2, c1, c0 = coeffs
    for _ in range(iters):
        f = ((c3 * x + c2) * x + c1) * x + c0
        d = (3 * c3 * x + 2 * c2) * x + c1
        if d == 0:
            break
        x_new = x - f / d
        if not math.isfinite(x_new):
            break
        x = x_new
    return x


def _select_initial(roots, omegas, phi, params):
    """Index of the root whose eigenvector has the largest |<1|psi>|^2."""
    h = hamiltonian_matrix(*omegas, phi, params.delta2, params.delta3)
    w, v = np.linalg.eigh(h)
    weights = []
    for r in roots:
        k = int(np.argmin(np.abs(w - r)))
        weights.append(abs(v[0, k]) ** 2)
    return int(np.argmax(weights))


def _check_separation(roots, chosen):
    others = [r for i, r in enumerate(roots) if i != chosen]
    if others and min(abs(roots[chosen] - r) for r in others) < DEGENERACY_TOL:
        raise BranchAmbiguity(f"eigenvalue {roots[chosen]!r} is degenerate within {DEGENERACY_TOL}")


def entrance_eigenvalue(params: MediumParams, boundary: BoundaryFields, branch="ground") -> float:
    """Conserved eigenvalue fixed by the entrance fields.

    ``branch`` selects the root:
      * ``"ground"``: the root adiabatically connected to the bare ground
        state, found by a homotopy in the overall field amplitude;
      * ``"lower"``, ``"middle"``, ``"upper"``: by order of the real roots;
      * a float: the real root closest to that value.
    """
    phi = _entrance_phase(params, boundary)
    omegas = _boundary_rabi(params, boundary)
    coeffs = characteristic_coefficients(*omegas, phi, params.delta2, params.delta3)
    roots = solve_cubic_real(*coeffs)
    if isinstance(branch, str) and branch in ("lower", "middle", "upper"):
        if len(roots) != 3:
            raise BranchAmbiguity(f"branch {branch!r} needs three real roots, found {len(roots)}")
        idx = {"lower": 0, "middle": 1, "upper": 2}[branch]
        _check_separation(roots, idx)
        return float(roots[idx])
    if not isinstance(branch, str):
        idx = int(np.argmin([abs(r - float(branch)) for r in roots]))
        _check_separation(roots, idx)
        return float(roots[idx])
    if branch != "ground":
        raise DomainError(f"unknown branch {branch!r}")

    scale_max = max(max(omegas), abs(params.delta2), abs(params.delta3), 1e-300)
    s_values = np.geomspace(1e-4, 1.0, HOMOTOPY_STEPS)
    lam = None
    for s in s_values:
        om = tuple(s * o for o in omegas)
        c = characteristic_coefficients(*om, phi, params.delta2, params.delta3)
        rts = solve_cubic_real(*c)
        if lam is None:
            idx = _select_initial(rts, om, phi, params)
        else:
            idx = int(np.argmin([abs(r - lam) for r in rts]))
        lam = _newton_cubic(c, rts[idx])
    idx = int(np.argmin([abs(r - lam) for r in roots]))
    if abs(roots[idx] - lam) > 1e-6 * scale_max:
        lam = _newton_cubic(coeffs, lam)
        idx = int(np.argmin([abs(r - lam) for r in roots]))
    _check_separation(roots, idx)
    return float(_newton_cubic(coeffs, roots[idx]))


# --------------------------------------------------------------------------
# expansion coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MismatchCoefficients:
    """Expansion G = A1 J + A2 J^2 + A3 J^3 and dG/dlam = a0 + a1 J + a2 J^2."""

    A1: float
    A2: float
    A3: float
    a0: float
    a1: float
    a2: float
    q: float


def mismatch_coefficients(params: MediumParams, lam: float, boundary: BoundaryFields, model="exact"):
    """Coefficients of G and dG/dlam for generation from vacuum.

    ``model`` picks the exact expressions or one of the regime
    approximations (``"eit"``, ``"maxcoh"``, ``"conventional"``); the
    approximations change A1, a0 and a1 only.
    """
    if boundary.eta30 != 0:
        raise DomainError("expansion coefficients assume eta30 = 0")
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}")
    q = params.q
    d2, d3 = params.delta2, params.delta3
    m1, m2, m3 = params.mu1, params.mu2, params.mu3
    s1, s2 = m1 * boundary.eta10, m2 * boundary.eta20
    dmu = m1 + m2 - m3
    A2 = q * q * (3 * lam + d2 + d3) + q * dmu
    A3 = q**3
    a2 = 3 * q * q
    if model == "exact":
        A1 = q * ((lam + d2) * (lam + d3) + lam * (lam + d2) + lam * (lam + d3) - s1 - s2) + (
            m1 * (lam + d3) + m2 * lam - m3 * (lam + d2)
        )
        a0 = 3 * lam * lam + 2 * lam * (d2 + d3) + d2 * d3 - s1 - s2
        a1 = 2 * q * (3 * lam + d2 + d3) + dmu
    elif model == "eit":
        A1 = -q * s2 - m3 * d2
        a0 = -s2
        a1 = 2 * q * d2 + dmu
    elif model == "maxcoh":
        A1 = q * ((2 * lam + d2) * d3 - s1 - s2) + m1 * d3 + m2 * lam - m3 * (lam + d2)
        a0 = (2 * lam + d2) * d3 - s1 - s2
        a1 = 2 * q * d3 + dmu
    else:
        A1 = q * d2 * d3 + m1 * d3 - m3 * d2
        a0 = d2 * d3
        a1 = 2 * q * (d2 + d3) + dmu
    return MismatchCoefficients(A1, A2, A3, a0, a1, a2, q)


def exchange_polynomial(params: MediumParams, coeffs: MismatchCoefficients, boundary: BoundaryFields):
    """Coefficients (highest power first) of g^2 - G^2 as a polynomial in J.

    g^2 - G^2 = 4 mu1 mu2 mu3 J (eta10 - J)(eta20 - J) - (A1 + A2 J + A3 J^2)^2 J^2,
    a polynomial of degree 6 (lower when A3 or A2 vanish, zero-padded).
    """
    e1, e2 = boundary.eta10, boundary.eta20
    cubic = 4 * params.mu_product * np.polymul([1.0, 0.0], np.polymul([-1.0, e1], [-1.0, e2]))
    quad = np.polymul([coeffs.A3, coeffs.A2, coeffs.A1], [coeffs.A3, coeffs.A2, coeffs.A1])
    sextic = np.polymul(quad, [1.0, 0.0, 0.0])
    return np.polysub(np.concatenate([np.zeros(7 - len(cubic)), cubic]), sextic)


def oscillation_roots(params: MediumParams, coeffs: MismatchCoefficients, boundary: BoundaryFields):
    """Turning points (J1, J2) and B1 = A1^2 / (4 mu1 mu2 mu3).

    A2 and A3 are neglected; a RegimeWarning is emitted when
    |A2 J1 + A3 J1^2| exceeds 1% of |A1|.
    """
    e1, e2 = boundary.eta10, boundary.eta20
    B1 = coeffs.A1**2 / (4 * params.mu_product)
    S = e1 + e2 + B1
    disc = S * S - 4 * e1 * e2
    if disc < 0:
        raise NoOscillationRegime(f"complex turning points (discriminant {disc!r})")
    root = math.sqrt(disc)
    J2 = 0.5 * (S + root)
    J1 = 2 * e1 * e2 / (S + root) if S + root > 0 else 0.0
    higher = abs(coeffs.A2 * J1 + coeffs.A3 * J1 * J1)
    if higher > 0 and higher > HIGHER_ORDER_GUARD * abs(coeffs.A1):
        warnings.warn(
            f"|A2 J1 + A3 J1^2| = {higher:.3g} is not small against |A1| = {abs(coeffs.A1):.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    return J1, J2, B1


def conversion_coefficient(params: MediumParams, J2: float, a0: float) -> float:
    """kappa = (N/2) sqrt(mu1 mu2 mu3 J2) / |a0| (direction is carried by sign0)."""
    if a0 == 0 or not math.isfinite(a0):
        raise VanishingA0("a0 vanishes; the conversion coefficient is undefined")
    return 0.5 * params.N * math.sqrt(params.mu_product * J2) / abs(a0)


# --------------------------------------------------------------------------
# analytic trajectory
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExchangeState:
    J: np.ndarray
    phi: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class AtomicState:
    c1: complex
    c2: complex
    c3: complex

    @property
    def populations(self):
        return abs(self.c1) ** 2, abs(self.c2) ** 2, abs(self.c3) ** 2


@dataclass(frozen=True)
class AdiabaticSolution:
    """Everything needed to evaluate J(z), phi(z) and the atomic state."""

    params: MediumParams
    boundary: BoundaryFields
    lam: float
    q: float
    A1: float
    A2: float
    A3: float
    a0: float
    a1: float
    a2: float
    J1: float
    J2: float
    B1: float
    kappa: float
    sign0: float
    chi0: float
    model: str = "exact"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def modulus(self) -> float:
        if self.J2 <= 0:
            return 0.0
        return min(1.0, math.sqrt(self.J1 / self.J2))

    @property
    def c(self) -> float:
        """a1 J2 / a0, the weight of the second-kind term."""
        return self.a1 * self.J2 / self.a0

    @property
    def monotone(self) -> bool:
        """True when J approaches J1 without ever reaching it (p = 1)."""
        return self.J1 > 0 and self.J1 == self.J2

    @property
    def quarter_distance(self) -> float:
        """Distance from J = 0 to the turning point J1 (infinite when monotone)."""
        if "zq" not in self._cache:
            if self.J1 == 0:
                self._cache["zq"] = 0.0
            elif self.monotone:
                self._cache["zq"] = math.inf
            else:
                p = self.modulus
                K = ellip_k(p)
                E = ellip_e(math.pi / 2, p)
                self._cache["zq"] = (K + self.c * (K - E)) / self.kappa
        return self._cache["zq"]

    @property
    def period(self) -> float:
        """Period of J(z): one rise from 0 to J1 and one fall back."""
        return 2.0 * self.quarter_distance

    @property
    def coefficients(self) -> MismatchCoefficients:
        return MismatchCoefficients(self.A1, self.A2, self.A3, self.a0, self.a1, self.a2, self.q)


def solve(
    params: MediumParams,
    boundary: BoundaryFields,
    branch="ground",
    lam: float | None = None,
    model: str = "exact",
) -> AdiabaticSolution:
    """Build the adiabatic solution for generation from vacuum (eta30 = 0).

    ``lam`` overrides the eigenvalue (e.g. a regime closed form); otherwise
    it is obtained from ``entrance_eigenvalue`` with ``branch``.
    """
    if boundary.eta30 != 0:
        raise DomainError("the analytic solution covers generation from vacuum (eta30 = 0)")
    if lam is None:
        lam = entrance_eigenvalue(params, boundary, branch)
    co = mismatch_coefficients(params, lam, boundary, model)
    J1, J2, B1 = oscillation_roots(params, co, boundary)
    kappa = conversion_coefficient(params, J2, co.a0)
    if co.a0 * (co.a0 + co.a1 * J1) <= 0:
        raise NonMonotoneRelation("dG/dlam changes sign on [0, J1]; the adiabatic branch is not followed")
    sign0 = -math.copysign(1.0, co.a0)
    return AdiabaticSolution(
        params=params,
        boundary=boundary,
        lam=float(lam),
        q=co.q,
        A1=co.A1,
        A2=co.A2,
        A3=co.A3,
        a0=co.a0,
        a1=co.a1,
        a2=co.a2,
        J1=J1,
        J2=J2,
        B1=B1,
        kappa=kappa,
        sign0=sign0,
        chi0=0.0,
        model=model,
    )


def _gamma1(J, sol: AdiabaticSolution):
    return np.arcsin(np.sqrt(np.clip(J / sol.J1, 0.0, 1.0)))


def _reduced_distance(g, sol: AdiabaticSolution):
    """kappa z as a function of the amplitude g = arcsin sqrt(J / J1)."""
    p = sol.modulus
    F = ellip_f(g, p)
    return F + sol.c * (F - ellip_e(g, p))


def implicit_distance(J, sol: AdiabaticSolution, form: str = "auto"):
    """Distance z at which the rising branch first reaches J (0 <= J <= J1).

    ``form`` chooses between the second-kind representation (``"E"``) and
    the equivalent third-kind one (``"Pi"``); ``"auto"`` uses the latter
    except near unit modulus where it degenerates.
    """
    Ja = np.asarray(J, dtype=float)
    if np.any(Ja < 0) or np.any(Ja > sol.J1 * (1 + 1e-12)):
        raise DomainError(f"J must lie in [0, J1 = {sol.J1!r}]")
    if sol.J1 == 0:
        out = np.zeros_like(Ja)
        return float(out) if out.ndim == 0 else out
    p = sol.modulus
    if form == "auto":
        form = "E" if 1 - p < UNIT_MODULUS_TOL else "Pi"
    g1 = _gamma1(Ja, sol)
    if form == "E":
        if sol.monotone and np.any(Ja >= sol.J1):
            raise DomainError("J1 is approached only asymptotically when the modulus is one")
        u = _reduced_distance(g1, sol)
    elif form == "Pi":
        Jc = np.minimum(Ja, sol.J1)
        arg = sol.J2 * (sol.J1 - Jc) / (sol.J1 * (sol.J2 - Jc))
        g2 = np.arcsin(np.sqrt(np.clip(arg, 0.0, 1.0)))
        r = p * p
        third = (1 - r) * ellip_pi(g2, r, p)
        K = ellip_k(p)
        chi0 = -sol.c * (K - (1 - r) * ellip_pi(math.pi / 2, r, p))
        u = ellip_f(g1, p) - sol.c * (ellip_f(g2, p) - third) - chi0 - sol.chi0
    else:
        raise DomainError(f"unknown form {form!r}")
    out = np.asarray(u / sol.kappa, dtype=float)
    return float(out) if out.ndim == 0 else out


def _invert_reduced(u, sol: AdiabaticSolution):
    """Amplitude g in [0, pi/2] with reduced distance equal to u."""
    p = sol.modulus
    lo = np.zeros_like(u)
    hi = np.full_like(u, math.pi / 2)
    for _ in range(8):
        mid = (lo + hi) / 2
        fm = _reduced_distance(np.minimum(mid, math.pi / 2 * (1 - 1e-16)), sol) - u
        lo = np.where(fm <= 0, mid, lo)
        hi = np.where(fm > 0, mid, hi)
    g = (lo + hi) / 2
    for _ in range(60):
        gs = np.minimum(g, math.pi / 2 * (1 - 1e-16)) if sol.monotone else g
        f = _reduced_distance(gs, sol) - u
        s2 = np.sin(gs) ** 2
        delta = np.sqrt(np.maximum(1 - p * p * s2, 1e-300))
        fp = (1 + sol.c * p * p * s2) / delta
        lo = np.where(f <= 0, gs, lo)
        hi = np.where(f > 0, gs, hi)
        g_new = gs - f / fp
        bad = (g_new <= lo) | (g_new >= hi) | ~np.isfinite(g_new)
        g_new = np.where(bad, (lo + hi) / 2, g_new)
        if np.all(np.abs(g_new - gs) <= 4e-16 * np.maximum(gs, 1e-300)):
            g = g_new
            break
        g = g_new
    return np.where(u == 0, 0.0, g)


def _branch_info(z, sol: AdiabaticSolution):
    """Reduced distance on the rising branch and the rising/falling flag."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("z must be non-negative")
    if sol.monotone:
        return sol.kappa * z, np.ones_like(z, dtype=bool)
    T = sol.period
    zr = np.mod(z, T)
    rising = zr < T / 2
    local = np.where(rising, zr, T - zr)
    return sol.kappa * local, rising


def exchange_at(z, sol: AdiabaticSolution) -> ExchangeState:
    """J(z) and phi(z) along the analytic trajectory (vectorized in z)."""
    z_arr = np.asarray(z, dtype=float)
    if sol.J1 == 0:
        J = np.zeros_like(z_arr)
        return ExchangeState(J, phase_at(z_arr, J, sol), z_arr)
    u, _ = _branch_info(z_arr, sol)
    g = _invert_reduced(np.atleast_1d(u).astype(float), sol)
    J = sol.J1 * np.sin(g) ** 2
    J = J.reshape(z_arr.shape)
    return ExchangeState(J, phase_at(z_arr, J, sol), z_arr)


def fluxes_at(J, boundary: BoundaryFields):
    """(eta1, eta2, eta3) from the exchanged flux."""
    J = np.asarray(J, dtype=float)
    return boundary.eta10 - J, boundary.eta20 - J, boundary.eta30 + J


def phase_at(z, J, sol: AdiabaticSolution):
    """Relative phase phi for the exchanged flux J reached at distance z.

    cos(phi) = G / g = -(A1 J + A2 J^2 + A3 J^3) / (2 sqrt(mu1 mu2 mu3 J (eta10 - J)(eta20 - J))),
    the sign following from g = -2 sqrt(mu1 mu2 mu3 eta1 eta2 eta3).
    sin(phi) has the sign of ``sol.sign0`` while J grows and the opposite
    one while J decreases. Where the quotient is 0/0 the continuous
    limit is used.
    """
    z_arr = np.asarray(z, dtype=float)
    J = np.asarray(J, dtype=float)
    b = sol.boundary
    e1, e2 = b.eta10 - J, b.eta20 - J
    num_sqrtJ = -(sol.A1 + sol.A2 * J + sol.A3 * J * J) * np.sqrt(np.maximum(J, 0.0))
    den = 2 * math.sqrt(sol.params.mu_product) * np.sqrt(np.maximum(e1 * e2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        cosphi = np.where(den > 0, num_sqrtJ / den, np.sign(num_sqrtJ))
    cosphi = np.clip(np.nan_to_num(cosphi), -1.0, 1.0)
    _, rising = _branch_info(z_arr, sol)
    s = np.where(rising, sol.sign0, -sol.sign0)
    sinphi = s * np.sqrt(np.maximum(1 - cosphi * cosphi, 0.0))
    out = np.arctan2(sinphi, cosphi)
    return float(out) if out.ndim == 0 else out


def eigenvalue_along(J, sol: AdiabaticSolution):
    """Instantaneous root lam0 = lam + q J of the characteristic cubic."""
    return sol.lam + sol.q * np.asarray(J, dtype=float)


def atomic_state(omega1, omega2, omega3, phi, delta2, delta3, lam_branch) -> AtomicState:
    """Normalized eigenvector of the Hamiltonian for the eigenvalue closest to ``lam_branch``.

    The global phase makes c1 real and positive (or the largest component
    when c1 is negligible), which keeps the state continuous along a trajectory.
    """
    h = hamiltonian_matrix(omega1, omega2, omega3, phi, delta2, delta3)
    w, v = np.linalg.eigh(h)
    k = int(np.argmin(np.abs(w - lam_branch)))
    others = np.delete(w, k)
    if others.size and np.min(np.abs(others - w[k])) < DEGENERACY_TOL:
        raise BranchAmbiguity(f"eigenvalue {w[k]!r} is degenerate")
    vec = v[:, k]
    pivot = 0 if abs(vec[0]) > 1e-8 else int(np.argmax(np.abs(vec)))
    vec = vec * np.exp(-1j * np.angle(vec[pivot]))
    vec = vec / np.linalg.norm(vec)
    return AtomicState(complex(vec[0]), complex(vec[1]), complex(vec[2]))


def atomic_state_at(z, sol: AdiabaticSolution, state: ExchangeState | None = None):
    """Atomic amplitudes along the analytic trajectory; returns an (n, 3) complex array."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if state is None:
        state = exchange_at(z_arr, sol)
    J = np.atleast_1d(state.J)
    phi = np.atleast_1d(state.phi)
    e1, e2, e3 = fluxes_at(J, sol.boundary)
    p = sol.params
    out = np.empty((z_arr.size, 3), dtype=complex)
    lam0 = eigenvalue_along(J, sol)
    for i in range(z_arr.size):
        st = atomic_state(
            rabi(p.mu1, max(e1[i], 0.0)),
            rabi(p.mu2, max(e2[i], 0.0)),
            rabi(p.mu3, max(e3[i], 0.0)),
            phi[i],
            p.delta2,
            p.delta3,
            lam0[i],
        )
        out[i] = (st.c1, st.c2, st.c3)
    return out
