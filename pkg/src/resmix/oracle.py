"""Independent numerical references for the analytic solution.

* ``quadrature_elliptic``: adaptive quadrature of the defining integrals.
* ``integrate_canonical``: the reduced Hamiltonian system for (J, phi),
  with the eigenvalue re-solved from the characteristic cubic at every
  right-hand-side evaluation.
* ``integrate_mb``: Maxwell-Bloch equations in the retarded frame. The
  atomic amplitudes at a set of Chebyshev nodes in z are integrated in
  retarded time; the fields at the same instant follow from spectral
  integration of the polarization in z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy import special
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.interpolate import CubicSpline

from .errors import BranchLoss, DomainError, GridMismatch, NonConvergence, ParameterError, StiffnessFailure
from .hamiltonian import entrance_eigenvalue
from .model import BoundaryFields, MediumParams, validate
from .specfun import solve_cubic_real

# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


def quadrature_elliptic(amplitude, modulus, characteristic=None, kind=None):
    """Elliptic integral by adaptive quadrature of its defining integrand.

    ``kind`` is ``"F"``, ``"E"`` or ``"Pi"``; it defaults to ``"Pi"`` when a
    characteristic is given and ``"F"`` otherwise.
    """
    if kind is None:
        kind = "F" if characteristic is None else "Pi"
    a, p = float(amplitude), float(modulus)
    if not 0 <= p <= 1:
        raise DomainError(f"modulus must lie in [0, 1], got {p}")
    if a == 0:
        return 0.0
    r = 0.0 if characteristic is None else float(characteristic)

    # complements written without cancellation near t = pi/2
    def one_minus_p_sin(t):
        return (1 - p) + 2 * p * math.sin((math.pi / 2 - t) / 2) ** 2

    def delta(t):
        return math.sqrt(one_minus_p_sin(t) * (1 + p * math.sin(t)))

    if kind == "F":
        f = lambda t: 1 / delta(t)  # noqa: E731
    elif kind == "E":
        f = delta
    elif kind == "Pi":
        if r * math.sin(a) ** 2 >= 1:
            raise DomainError("characteristic makes the integrand singular")
        f = lambda t: 1 / (((1 - r) + r * math.cos(t) ** 2) * delta(t))  # noqa: E731
    else:
        raise DomainError(f"unknown kind {kind!r}")
    # the integrand can peak sharply near pi/2 when p or r is close to one;
    # split the interval geometrically towards the upper end
    width = max(math.sqrt(max(1 - p * p, 0.0)), math.sqrt(max(1 - abs(r), 0.0)), 1e-8)
    breaks = [0.0]
    w = 0.5
    while a - w > breaks[-1] and w > width / 16:
        breaks.append(a - w)
        w /= 4
    breaks.append(a)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        with warnings.catch_warnings():
            # the tolerances sit at machine precision; the error estimate is checked below
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(f, lo, hi, epsabs=1e-15, epsrel=1e-14, limit=400)
        if not math.isfinite(val) or err > 1e-11 * max(1.0, abs(val)):
            raise NonConvergence(f"quadrature error estimate {err:.3g} on [{lo}, {hi}]")
        total += val
    return total


# --------------------------------------------------------------------------
# canonical (J, phi) system
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step_fraction: float = 0.01
    method: str = "DOP853"

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ParameterError("tolerance", (self.rtol, self.atol), "tolerances must be positive")
        if self.max_step_fraction <= 0:
            raise ParameterError("max_step_fraction", self.max_step_fraction, "must be positive")


@dataclass(frozen=True)
class CanonicalTrajectory:
    """Samples of the canonical flow; ``hamiltonian`` is (N/2)(lam0 - q J)."""

    z: np.ndarray
    J: np.ndarray
    phi: np.ndarray
    lam0: np.ndarray
    hamiltonian: np.ndarray
    x: np.ndarray
    y: np.ndarray
    returned_to: tuple | None = None

    def fluxes(self, boundary: BoundaryFields):
        return boundary.eta10 - self.J, boundary.eta20 - self.J, boundary.eta30 + self.J


class _CanonicalSystem:
    """Reduced flow in Cartesian charts built on one of the three fluxes.

    Chart k uses K = e_k (e3 = eta30 + J, e1 = eta10 - J, e2 = eta20 - J)
    and the angle psi = sigma_k phi, with sigma_3 = +1 and sigma_1 = sigma_2 = -1,
    so that (K, psi) stays canonical. With x = sqrt(2K) cos psi the
    eigenvalue constraint reads
        P(lam0; J, x) = G(lam0, J) + sqrt(2 mu1 mu2 mu3) R_k(J) x = 0,
    R_k the square root of the product of the other two fluxes, and the flow is
        dx/dz = -dH/dy, dy/dz = dH/dx, H = (N/2)(lam0 - q J).
    A flux vanishing at a turning point is the regular origin of its own
    chart; the integrator switches to the chart of the smallest flux.
    """

    SIGMA = {1: -1.0, 2: -1.0, 3: 1.0}

    def __init__(self, params: MediumParams, boundary: BoundaryFields, lam_start: float):
        self.p = params
        self.b = boundary
        self.s = math.sqrt(2.0 * params.mu_product)
        self.lam = lam_start
        self.chart = 3
        scale = max(
            abs(params.delta2),
            abs(params.delta3),
            math.sqrt(params.mu1 * boundary.eta10 + params.mu2 * boundary.eta20 + params.mu3 * boundary.eta30),
            1e-300,
        )
        self.scale = scale

    def fluxes(self, J):
        b = self.b
        return {1: b.eta10 - J, 2: b.eta20 - J, 3: b.eta30 + J}

    def exchange(self, K, chart=None):
        """J from the chart radius K."""
        chart = chart or self.chart
        b = self.b
        return {1: b.eta10 - K, 2: b.eta20 - K, 3: K - b.eta30}[chart]

    def to_chart(self, J, phi, chart):
        K = self.fluxes(J)[chart]
        r = math.sqrt(2 * max(K, 0.0))
        psi = self.SIGMA[chart] * phi
        return r * math.cos(psi), r * math.sin(psi)

    def from_chart(self, x, y, chart=None):
        """(J, phi) from chart coordinates."""
        chart = chart or self.chart
        K = 0.5 * (x * x + y * y)
        return self.exchange(K, chart), self.SIGMA[chart] * math.atan2(y, x)

    def _poly(self, J, x, chart=None):
        chart = chart or self.chart
        p = self.p
        e = self.fluxes(J)
        others = [e[j] for j in (1, 2, 3) if j != chart]
        if min(e.values()) < 0:
            raise BranchLoss(f"exchange J = {J!r} left the physical range")
        R = math.sqrt(others[0] * others[1])
        sw = p.mu1 * e[1] + p.mu2 * e[2] + p.mu3 * e[3]
        coeffs = (
            1.0,
            p.delta2 + p.delta3,
            p.delta2 * p.delta3 - sw,
            -p.mu1 * e[1] * p.delta3 - p.mu3 * e[3] * p.delta2 + self.s * R * x,
        )
        return coeffs, e, R

    def eigenvalue(self, J, x, guess=None, chart=None):
        coeffs, *_ = self._poly(J, x, chart)
        lam = self.lam if guess is None else guess
        c3, c2, c1, c0 = coeffs
        for _ in range(30):
            f = ((lam + c2) * lam + c1) * lam + c0
            d = (3 * lam + 2 * c2) * lam + c1
            if d == 0:
                break
            step = f / d
            lam -= step
            if abs(step) <= 1e-15 * max(abs(lam), self.scale):
                break
        f = ((lam + c2) * lam + c1) * lam + c0
        if not math.isfinite(lam) or abs(f) > 1e-9 * self.scale**3:
            roots = solve_cubic_real(*coeffs)
            ref = self.lam if guess is None else guess
            lam = min(roots, key=lambda r: abs(r - ref))
        return lam

    def rhs(self, z, state):
        x, y = state
        chart = self.chart
        J = self.exchange(0.5 * (x * x + y * y))
        if min(self.fluxes(J).values()) < 0:
            # an overshooting trial stage; NaN makes the stepper reject the step and shrink it
            return [math.nan, math.nan]
        coeffs, e, R = self._poly(J, x)
        lam = self.eigenvalue(J, x)
        self.lam = lam
        p = self.p
        sigma = self.SIGMA[chart]
        P_lam = (3 * lam + 2 * coeffs[1]) * lam + coeffs[2]
        if abs(P_lam) < 1e-12 * self.scale**2:
            raise BranchLoss("dG/dlam vanishes: eigenvalue degeneracy along the trajectory")
        G_J = (p.mu1 + p.mu2 - p.mu3) * lam + p.mu1 * p.delta3 - p.mu3 * p.delta2
        # d(R_k^2)/dJ for the two fluxes other than the chart flux
        dR2 = {3: -(e[1] + e[2]), 2: e[1] - e[3], 1: e[2] - e[3]}[chart]
        dR = dR2 / (2 * R) if R > 0 else 0.0
        P_x = self.s * R
        P_K = sigma * (G_J + self.s * dR * x)
        lam_x = -P_x / P_lam
        lam_K = -P_K / P_lam
        half_n = 0.5 * p.N
        H_K = lam_K - sigma * p.q
        dH_dx = half_n * (lam_x + H_K * x)
        dH_dy = half_n * H_K * y
        return [-dH_dy, dH_dx]

    def switch_event(self):
        """Zero when the chart flux reaches twice the smallest other flux."""

        def event(z, state):
            x, y = state
            K = 0.5 * (x * x + y * y)
            e = self.fluxes(self.exchange(K))
            return K - 2 * min(e[j] for j in (1, 2, 3) if j != self.chart)

        event.terminal = True
        event.direction = 1
        return event

    def hamiltonian(self, J, phi, lam_guess):
        x, _ = self.to_chart(J, phi, 3)
        lam = self.eigenvalue(J, x, guess=lam_guess, chart=3)
        return lam, 0.5 * self.p.N * (lam - self.p.q * J)


def _flow(system: _CanonicalSystem, J0, phi0, z, config, max_step):
    """Integrate from (J0, phi0) at z[0] through the samples z, switching charts as needed."""
    e = system.fluxes(J0)
    system.chart = min(e, key=e.get)
    J_out = np.empty(z.size)
    phi_out = np.empty(z.size)
    J_out[0], phi_out[0] = J0, phi0
    z_now, J_now, phi_now = z[0], J0, phi0
    done = 1
    for _ in range(10000):
        if done == z.size:
            break
        state = system.to_chart(J_now, phi_now, system.chart)
        sol = solve_ivp(
            system.rhs,
            (z_now, z[-1]),
            state,
            method=config.method,
            t_eval=z[done:],
            rtol=config.rtol,
            atol=config.atol,
            max_step=max_step,
            events=system.switch_event(),
        )
        if sol.status == -1:
            raise StiffnessFailure(f"canonical integration failed: {sol.message}")
        for k in range(sol.t.size):
            J_out[done + k], phi_out[done + k] = system.from_chart(sol.y[0, k], sol.y[1, k])
        done += sol.t.size
        if sol.status == 1:
            z_now = sol.t_events[0][0]
            J_now, phi_now = system.from_chart(*sol.y_events[0][0])
            e = system.fluxes(J_now)
            system.chart = min(e, key=e.get)
    else:
        raise StiffnessFailure("too many chart switches")
    return J_out, phi_out


def integrate_canonical(
    params: MediumParams,
    boundary: BoundaryFields,
    z,
    config: IntegratorConfig | None = None,
    seed_eps: float = 0.0,
    lam: float | None = None,
    branch="ground",
    kappa: float | None = None,
    reverse_check: bool = False,
) -> CanonicalTrajectory:
    """Integrate the reduced canonical equations and sample them at ``z``.

    ``z`` is an increasing grid starting at 0 (or a single z_max). The
    initial condition is J = seed_eps with phi = +-pi/2 on the growing
    branch; seed_eps = 0 starts exactly at the vacuum.
    ``kappa`` sets the step cap (``max_step_fraction / kappa``).
    """
    config = config or IntegratorConfig()
    validate(params, boundary)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size == 1:
        z = np.array([0.0, float(z[0])])
    if z[0] != 0 or np.any(np.diff(z) <= 0):
        raise GridMismatch("z grid must start at 0 and increase strictly")
    if lam is None:
        lam = entrance_eigenvalue(params, boundary, branch)
    system = _CanonicalSystem(params, boundary, lam)

    J0 = seed_eps
    phi0 = boundary.phi0 + params.theta
    if boundary.eta30 == 0:
        # growth direction: sin(phi) has the sign opposite to dG/dlam at the entrance
        c = system._poly(J0, 0.0, chart=3)[0]
        P_lam = (3 * lam + 2 * c[1]) * lam + c[2]
        phi0 = -math.copysign(math.pi / 2, P_lam)
    if seed_eps > 0 or boundary.eta30 > 0:
        x0, _ = system.to_chart(J0, phi0, 3)
        system.lam = system.eigenvalue(J0, x0, guess=lam, chart=3)
    lam_start = system.lam

    max_step = np.inf
    if kappa is not None and kappa > 0:
        max_step = config.max_step_fraction / kappa
    J, phi = _flow(system, J0, phi0, z, config, max_step)
    lam0 = np.empty_like(J)
    ham = np.empty_like(J)
    guess = lam_start
    for i in range(J.size):
        lam0[i], ham[i] = system.hamiltonian(J[i], phi[i], guess)
        guess = lam0[i]
    returned_to = None
    if reverse_check:
        system.lam = lam0[-1]
        Jb, phib = _flow(system, J[-1], phi[-1], z[::-1].copy(), config, max_step)
        returned_to = (Jb[-1], phib[-1])
    K = boundary.eta30 + J
    return CanonicalTrajectory(
        z=z.copy(),
        J=J,
        phi=phi,
        lam0=lam0,
        hamiltonian=ham,
        x=np.sqrt(2 * np.maximum(K, 0.0)) * np.cos(phi),
        y=np.sqrt(2 * np.maximum(K, 0.0)) * np.sin(phi),
        returned_to=returned_to,
    )


# --------------------------------------------------------------------------
# Maxwell-Bloch
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Retarded-time samples ``tau`` and the medium length ``z_max`` with ``n_z`` nodes."""

    tau: np.ndarray
    z_max: float
    n_z: int = 48

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 1 or tau.size < 2 or np.any(np.diff(tau) <= 0):
            raise GridMismatch("tau must be strictly increasing with at least 2 samples")
        if not self.z_max > 0 or self.n_z < 2:
            raise GridMismatch("z grid needs z_max > 0 and at least 2 nodes")

    @property
    def z(self) -> np.ndarray:
        """Chebyshev-Gauss-Lobatto nodes on [0, z_max], increasing."""
        k = np.arange(self.n_z)
        return 0.5 * self.z_max * (1 - np.cos(np.pi * k / (self.n_z - 1)))


def _spectral_integration_matrix(n, length):
    """Matrix S with (S f)_i = int_0^{z_i} f dz on Chebyshev-Lobatto nodes."""
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    V = cheb.chebvander(x, n - 1)
    Vinv = np.linalg.inv(V)
    S = np.empty((n, n))
    for j in range(n):
        coef = Vinv[:, j]
        icoef = cheb.chebint(coef, lbnd=-1)
        S[:, j] = cheb.chebval(x, icoef)
    return 0.5 * length * S


def tanh_ramp(t_on: float, rise: float) -> Callable:
    """Switch-on 0.5 (1 + tanh((t - t_on) / rise))."""

    def f(t):
        return 0.5 * (1 + np.tanh((np.asarray(t, dtype=float) - t_on) / rise))

    return f


def erf_ramp(t_on: float, width: float) -> Callable:
    """Switch-on 0.5 (1 + erf((t - t_on) / width)).

    Entire in t, with Gaussian tails: for two ramps with different centers
    the ratio of the later to the earlier one vanishes as t -> -inf.
    """

    def f(t):
        return 0.5 * (1 + special.erf((np.asarray(t, dtype=float) - t_on) / width))

    return f


def counterintuitive_envelopes(width: float, start: float = 0.0, separation: float = 4.0):
    """Envelope pair (f1, f2) with mode 2 switched on before mode 1.

    Mode 2 rises around ``start + separation * width`` and mode 1 around
    ``start + 2 * separation * width``; both are flat to 1e-16 from
    ``start + (2 * separation + 6) * width`` on.
    """
    t2 = start + separation * width
    t1 = start + 2 * separation * width
    return erf_ramp(t1, width), erf_ramp(t2, width)


@dataclass
class MBResult:
    """Fields and amplitudes on (tau, z); arrays indexed [i_tau, i_z]."""

    tau: np.ndarray
    z: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray
    c: np.ndarray
    params: MediumParams
    _chebyshev: bool = field(default=True, repr=False)

    @property
    def eta1(self):
        return np.abs(self.omega1) ** 2 / self.params.mu1

    @property
    def eta2(self):
        return np.abs(self.omega2) ** 2 / self.params.mu2

    @property
    def eta3(self):
        return np.abs(self.omega3) ** 2 / self.params.mu3

    @property
    def populations(self):
        return np.abs(self.c) ** 2

    def relative_phase(self):
        """Relative phase in the convention of the adiabatic solution."""
        p = self.params
        loop = np.conj(self.omega1) * np.conj(self.omega2) * self.omega3
        return np.angle(loop * np.exp(1j * (p.theta - p.delta_k * self.z)))

    def at_z(self, values, z_new):
        """Spectrally interpolate a [.., n_z] array to new z positions."""
        z_new = np.asarray(z_new, dtype=float)
        L = self.z[-1]
        n = self.z.size
        x_nodes = 2 * self.z / L - 1
        V = cheb.chebvander(x_nodes, n - 1)
        coef = np.linalg.solve(V, np.moveaxis(np.asarray(values), -1, 0).reshape(n, -1))
        out = cheb.chebval(2 * z_new / L - 1, coef.reshape((n,) + np.asarray(values).shape[:-1]))
        return np.moveaxis(np.asarray(out), 0, -1) if np.ndim(out) > 1 else out


def _envelope_functions(boundary: BoundaryFields, envelopes):
    if envelopes is not None:
        return envelopes
    funcs = []
    for env in (boundary.envelope1, boundary.envelope2):
        if env is None:
            funcs.append(lambda t: np.ones_like(np.asarray(t, dtype=float)))
        else:
            spline = CubicSpline(np.asarray(boundary.tau, float), np.asarray(env, float), extrapolate=True)
            tmin, tmax = float(boundary.tau[0]), float(boundary.tau[-1])
            funcs.append(lambda t, s=spline, a=tmin, b=tmax: np.clip(s(np.clip(t, a, b)), 0.0, 1.0))
    return tuple(funcs)


def integrate_mb(
    params: MediumParams,
    boundary: BoundaryFields,
    grid: SpaceTimeGrid,
    config: IntegratorConfig | None = None,
    envelopes: tuple[Callable, Callable] | None = None,
) -> MBResult:
    """Maxwell-Bloch integration in the retarded frame.

    Fields (complex Rabi frequencies):
        dW1/dz = i (N mu1 / 2) c1* c2
        dW2/dz = i (N mu2 / 2) c2* c3 e^{i theta - i dk z}
        dW3/dz = i (N mu3 / 2) c1* c3
    Atoms (time = retarded time):
        c1' = i (W1* c2 + W3* c3)
        c2' = i (W1 c1 + W2* e^{i theta - i dk z} c3 + d2 c2)
        c3' = i (W2 e^{-i theta + i dk z} c2 + W3 c1 + (d3 + i gamma) c3)
    Every atom starts in |1>. ``envelopes`` are callables f1(tau), f2(tau)
    scaling the entrance fluxes; by default the samples stored in
    ``boundary`` are spline-interpolated (constant 1 when absent).
    """
    config = config or IntegratorConfig(rtol=1e-10, atol=1e-12)
    validate(params, boundary)
    f1, f2 = _envelope_functions(boundary, envelopes)
    z = grid.z
    n = z.size
    S = _spectral_integration_matrix(n, grid.z_max)
    p = params
    w10 = math.sqrt(p.mu1 * boundary.eta10)
    w20 = math.sqrt(p.mu2 * boundary.eta20)
    w30 = math.sqrt(p.mu3 * boundary.eta30) * np.exp(1j * boundary.phi0)
    phase = np.exp(1j * (p.theta - p.delta_k * z))
    k1, k2, k3 = 0.5j * p.N * p.mu1, 0.5j * p.N * p.mu2, 0.5j * p.N * p.mu3
    d3c = p.delta3 + 1j * p.gamma

    def fields(t, c1, c2, c3):
        a1 = w10 * math.sqrt(max(float(f1(t)), 0.0))
        a2 = w20 * math.sqrt(max(float(f2(t)), 0.0))
        W1 = a1 + S @ (k1 * np.conj(c1) * c2)
        W2 = a2 + S @ (k2 * np.conj(c2) * c3 * phase)
        W3 = w30 + S @ (k3 * np.conj(c1) * c3)
        return W1, W2, W3

    def rhs(t, y):
        # trial steps of the embedded scheme may overflow before being rejected
        with np.errstate(over="ignore", invalid="ignore"):
            return _rhs(t, y)

    def _rhs(t, y):
        c = y.view(complex)
        c1, c2, c3 = c[:n], c[n : 2 * n], c[2 * n :]
        W1, W2, W3 = fields(t, c1, c2, c3)
        out = np.empty(3 * n, dtype=complex)
        out[:n] = 1j * (np.conj(W1) * c2 + np.conj(W3) * c3)
        out[n : 2 * n] = 1j * (W1 * c1 + np.conj(W2) * phase * c3 + p.delta2 * c2)
        out[2 * n :] = 1j * (W2 * np.conj(phase) * c2 + W3 * c1 + d3c * c3)
        return out.view(float)

    c_init = np.zeros(3 * n, dtype=complex)
    c_init[:n] = 1.0
    tau = np.asarray(grid.tau, dtype=float)
    sol = solve_ivp(
        rhs,
        (tau[0], tau[-1]),
        c_init.view(float),
        method=config.method,
        t_eval=tau,
        rtol=config.rtol,
        atol=config.atol,
    )
    if sol.status != 0:
        raise NonConvergence(f"Maxwell-Bloch integration failed: {sol.message}")
    nt = tau.size
    c_all = np.empty((nt, n, 3), dtype=complex)
    W = np.empty((3, nt, n), dtype=complex)
    for i in range(nt):
        c = np.ascontiguousarray(sol.y[:, i]).view(complex)
        c1, c2, c3 = c[:n], c[n : 2 * n], c[2 * n :]
        c_all[i, :, 0], c_all[i, :, 1], c_all[i, :, 2] = c1, c2, c3
        W[0, i], W[1, i], W[2, i] = fields(tau[i], c1, c2, c3)
    return MBResult(tau=tau, z=z, omega1=W[0], omega2=W[1], omega3=W[2], c=c_all, params=params)
