"""Medium and boundary parameters for the resonant three-level mixing problem.

Unit convention: every frequency-like quantity (detunings, decay rate,
Rabi frequencies, eigenvalues) shares one arbitrary frequency unit and
every length shares one arbitrary length unit. Couplings ``mu_j`` carry
frequency**2 per flux unit so that ``sqrt(mu * eta)`` is a frequency.
Nothing in the package converts units; a convenient normalization is
``gamma = 1`` or ``mu3 = 1, eta0 = 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import NegativeFlux, NonPositiveCoupling, ParameterError, RegimeWarning, ResonanceViolation

MU_HIERARCHY_RATIO = 0.2


@dataclass(frozen=True)
class MediumParams:
    """Atomic and medium constants.

    ``N`` only ever enters through ``N * z`` and ``q = -2 * delta_k / N``.
    ``delta2 = omega1 - omega21`` and ``delta3 = omega3 - omega31``.
    """

    N: float
    mu1: float
    mu2: float
    mu3: float
    delta2: float = 0.0
    delta3: float = 0.0
    gamma: float = 0.0
    delta_k: float = 0.0
    theta: float = 0.0

    @property
    def q(self) -> float:
        return -2.0 * self.delta_k / self.N

    @property
    def mu_product(self) -> float:
        return self.mu1 * self.mu2 * self.mu3

    def with_(self, **changes) -> "MediumParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class BoundaryFields:
    """Entrance photon fluxes, entrance relative phase and pulse envelopes.

    Envelopes are optional samples ``f_j(tau)`` on the grid ``tau``; they
    are linearly interpolated and scale the peak fluxes ``eta10``/``eta20``.
    """

    eta10: float
    eta20: float
    eta30: float = 0.0
    phi0: float = 0.0
    tau: np.ndarray | None = field(default=None, compare=False)
    envelope1: np.ndarray | None = field(default=None, compare=False)
    envelope2: np.ndarray | None = field(default=None, compare=False)

    def with_(self, **changes) -> "BoundaryFields":
        return replace(self, **changes)

    def at(self, tau: float) -> "BoundaryFields":
        """Boundary values for one retarded-time slice (envelopes dropped)."""
        f1 = _interp_envelope(self.tau, self.envelope1, tau)
        f2 = _interp_envelope(self.tau, self.envelope2, tau)
        return BoundaryFields(self.eta10 * f1, self.eta20 * f2, self.eta30, self.phi0)


def _interp_envelope(tau, env, t):
    if env is None:
        return 1.0
    return float(np.interp(t, tau, env))


@dataclass(frozen=True)
class BackgroundTransition:
    """Far-detuned transition of mode ``mode`` (1, 2 or 3) outside the three-level system."""

    mu: float
    delta: float
    mode: int


def validate(params: MediumParams, boundary: BoundaryFields):
    """Check type invariants and return the pair unchanged.

    Raises NonPositiveCoupling / NegativeFlux naming the offending field.
    Regime concerns (coupling hierarchy, decay vs. drive) are warnings.
    """
    for name in ("mu1", "mu2", "mu3", "N"):
        value = getattr(params, name)
        if not np.isfinite(value) or value <= 0:
            raise NonPositiveCoupling(name, value)
    if not np.isfinite(params.gamma) or params.gamma < 0:
        raise ParameterError("gamma", params.gamma, "decay rate gamma must be >= 0")
    for name in ("eta10", "eta20", "eta30"):
        value = getattr(boundary, name)
        if not np.isfinite(value) or value < 0:
            raise NegativeFlux(name, value)
    for name in ("envelope1", "envelope2"):
        env = getattr(boundary, name)
        if env is None:
            continue
        env = np.asarray(env, dtype=float)
        if boundary.tau is None or len(boundary.tau) != len(env):
            raise ParameterError(name, "shape", f"{name} must be sampled on boundary.tau")
        if np.any(env < 0) or np.any(env > 1 + 1e-12):
            raise ParameterError(name, "range", f"{name} must lie in [0, 1]")

    if params.mu1 > MU_HIERARCHY_RATIO * params.mu2:
        warnings.warn(
            f"mu1/mu2 = {params.mu1 / params.mu2:.3g}; the simple model assumes mu1 << mu2",
            RegimeWarning,
            stacklevel=2,
        )
    omega2 = rabi(params.mu2, boundary.eta20)
    if params.gamma > 0 and params.gamma >= omega2:
        warnings.warn(
            f"gamma = {params.gamma:.3g} is not small against Omega20 = {omega2:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    return params, boundary


def rabi(mu, eta):
    """Rabi frequency sqrt(mu * eta) for a coupling and a photon flux."""
    mu = np.asarray(mu, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.any(mu <= 0):
        raise NonPositiveCoupling("mu", mu)
    if np.any(eta < 0):
        raise NegativeFlux("eta", eta)
    out = np.sqrt(mu * eta)
    return float(out) if out.ndim == 0 else out


def residual_mismatch(
    transitions: Sequence[BackgroundTransition],
    omega1: float,
    omega2: float,
    omega3: float,
    N: float,
    c: float = 1.0,
    rtol: float = 1e-12,
) -> float:
    """Background phase mismatch k1 + k2 - k3 from far-detuned transitions.

    The refractive index of mode j is ``1 + N (c / omega_j) sum_m mu_jm / delta_jm``.
    The vacuum parts ``omega_j / c`` cancel exactly under the multiphoton
    resonance ``omega3 = omega1 + omega2``, so only the background parts are summed.
    """
    if abs(omega3 - (omega1 + omega2)) > rtol * abs(omega3):
        raise ResonanceViolation(f"omega3 = {omega3!r} differs from omega1 + omega2 = {omega1 + omega2!r}")
    omegas = {1: omega1, 2: omega2, 3: omega3}
    k_background = {1: 0.0, 2: 0.0, 3: 0.0}
    for tr in transitions:
        if tr.mode not in omegas:
            raise ParameterError("mode", tr.mode, "background transition mode must be 1, 2 or 3")
        if tr.delta == 0:
            raise ParameterError("delta", tr.delta, "background detuning must be nonzero")
        n_minus_one = N * (c / omegas[tr.mode]) * tr.mu / tr.delta
        k_background[tr.mode] += n_minus_one * omegas[tr.mode] / c
    return k_background[1] + k_background[2] - k_background[3]
