"""Closed-form regime solutions, compensation tuning and efficiency metrics.

Three limits of the general adiabatic solution are covered:

* EIT: a strong coupling field on |2>-|3> makes the dark state carry the
  conversion (``EitUndepleted``, ``EitDepleted``);
* maximum coherence: a large one-photon detuning delta3 with the atoms in a
  superposition of |1> and |2> (``MaxCohUndepleted``, ``MaxCohDepleted``);
* conventional nonlinear optics: both detunings large (``Conventional``).

In every limit the total mismatch relates to the expansion coefficients
through ``dk' = -(N/2) A1 / a0``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditionViolated,
    DomainError,
    GridMismatch,
    MuOrdering,
    NonMonotoneRelation,
    NoSolution,
    ParameterError,
    RegimeWarning,
    ResonanceViolation,
)
from .hamiltonian import (
    characteristic_coefficients,
    exchange_at,
    mismatch_coefficients,
    solve,
)
from .model import BoundaryFields, MediumParams, rabi
from .specfun import ellip_k, jacobi_sn, solve_cubic_real

VALIDITY_FACTOR = 10.0
UNDEPLETED_RATIO = 0.1
CONDITION_RTOL = 1e-9


class Regime(str, enum.Enum):
    EIT_UNDEPLETED = "EitUndepleted"
    EIT_DEPLETED = "EitDepleted"
    MAXCOH_UNDEPLETED = "MaxCohUndepleted"
    MAXCOH_DEPLETED = "MaxCohDepleted"
    CONVENTIONAL = "Conventional"

    @property
    def family(self) -> str:
        return {"Eit": "eit", "Max": "maxcoh", "Con": "conventional"}[self.value[:3]]


def _regime(tag) -> Regime:
    try:
        return Regime(tag)
    except ValueError:
        raise DomainError(f"unknown regime {tag!r}; expected one of {[r.value for r in Regime]}") from None


@dataclass(frozen=True)
class RegimeSpec:
    """Linear-regime constants: kappa (1/length), Gamma (dimensionless), dk' (1/length)."""

    tag: Regime
    kappa: float
    Gamma: float
    delta_k_prime: float
    N: float = 1.0
    zeta: float | None = None

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ParameterError("kappa", self.kappa, "conversion coefficient must be positive")
        if not self.Gamma >= 0:
            raise ParameterError("Gamma", self.Gamma, "loss coefficient must be >= 0")

    @property
    def mismatch_ratio(self) -> float:
        """dk' / (2 kappa)."""
        return self.delta_k_prime / (2 * self.kappa)

    @property
    def coherence_length(self) -> float:
        """L_c = 2 / |dk'| (infinite when matched)."""
        return math.inf if self.delta_k_prime == 0 else 2 / abs(self.delta_k_prime)


@dataclass(frozen=True)
class EfficiencyReport:
    epsilon: float
    W: float
    figure_of_merit: float

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ParameterError("epsilon", self.epsilon, "fractional efficiency must lie in [0, 1]")
        if not 0 <= self.W <= 1:
            raise ParameterError("W", self.W, "total efficiency must lie in [0, 1]")


def _warn(message):
    warnings.warn(message, RegimeWarning, stacklevel=3)


def _check_much_larger(big_name, big, small: dict):
    for name, value in small.items():
        if abs(big) < VALIDITY_FACTOR * abs(value):
            _warn(f"{big_name} = {abs(big):.3g} is not much larger than {name} = {abs(value):.3g}")


# --------------------------------------------------------------------------
# linear regimes
# --------------------------------------------------------------------------


def regime_parameters(tag, params: MediumParams, boundary: BoundaryFields, rho12=None, c1=None, c2=None) -> RegimeSpec:
    """kappa, Gamma and dk' of the linear (undepleted) theory for a regime.

    For the maximum-coherence family the atomic state is caller supplied;
    ``rho12 = |c1 c2|`` defaults to 1/2 with ``|c1|^2 = |c2|^2 = 1/2``.
    Validity conditions of the regime are checked and reported as
    ``RegimeWarning``.
    """
    tag = _regime(tag)
    N, g = params.N, params.gamma
    d2, d3, dk = params.delta2, params.delta3, params.delta_k
    m1, m2, m3 = params.mu1, params.mu2, params.mu3
    W1 = rabi(m1, boundary.eta10)
    W2 = rabi(m2, boundary.eta20)
    if tag.family == "eit":
        if W2 == 0:
            raise DomainError("EIT regime needs a nonzero coupling field eta20")
        small = {"gamma": g, "|delta2|": d2}
        if tag is Regime.EIT_UNDEPLETED:
            small["Omega10"] = W1
        _check_much_larger("Omega20", W2, small)
        kappa = 0.5 * N * math.sqrt(m1 * m3) / W2
        Gamma = g / W2 * math.sqrt(m1 / m3)
        dkp = dk - 0.5 * N * m3 * d2 / W2**2
        return RegimeSpec(tag, kappa, Gamma, dkp, N)
    if tag.family == "maxcoh":
        if d3 == 0:
            raise DomainError("maximum-coherence regime needs a nonzero delta3")
        _check_much_larger("|delta3 + i gamma|", abs(complex(d3, g)), {"Omega10": W1, "Omega20": W2})
        zeta = None
        if tag is Regime.MAXCOH_DEPLETED and rho12 is None and m2 < m3:
            zeta = math.sqrt(m3 / (m3 - m2))
            c1 = 1 / math.sqrt(1 + zeta**2)
            c2 = zeta * c1
        p1 = abs(c1) ** 2 if c1 is not None else 0.5
        p2 = abs(c2) ** 2 if c2 is not None else 0.5
        if rho12 is None:
            rho12 = math.sqrt(p1 * p2)
        if rho12 <= 0:
            raise ParameterError("rho12", rho12, "coherence must be positive")
        kappa = 0.5 * N * math.sqrt(m2 * m3) / abs(d3) * rho12
        Gamma = g / abs(d3) * (m2 * p2 + m3 * p1) / (rho12 * math.sqrt(m2 * m3))
        dkp = dk + 0.5 * N * (m3 * p1 - m2 * p2) / d3
        return RegimeSpec(tag, kappa, Gamma, dkp, N, zeta)
    if d2 == 0 or d3 == 0 or W2 == 0:
        raise DomainError("conventional regime needs nonzero delta2, delta3 and eta20")
    rabis = {"Omega10": W1, "Omega20": W2, "gamma": g}
    _check_much_larger("|delta2|", d2, rabis)
    _check_much_larger("|delta3|", d3, rabis)
    kappa = 0.5 * N * W2 * math.sqrt(m1 * m3) / abs(d2 * d3)
    Gamma = g / abs(d3) * math.sqrt(m1 / m3) * abs(d2) / W2
    dkp = dk + 0.5 * N * (m3 / d3 - m1 / d2)
    return RegimeSpec(tag, kappa, Gamma, dkp, N)


def linear_solution(spec: RegimeSpec, eta_in, z):
    """eta3(z) of the linear theory for the weak input flux ``eta_in``."""
    z = np.asarray(z, dtype=float)
    r2 = 1 + spec.mismatch_ratio**2
    out = eta_in / r2 * np.exp(-spec.Gamma * spec.kappa * z) * np.sin(spec.kappa * z * math.sqrt(r2)) ** 2
    return float(out) if out.ndim == 0 else out


def optimal_length(spec: RegimeSpec) -> float:
    """Density-length product N z at the first conversion maximum (matched case)."""
    if abs(spec.mismatch_ratio) > 0.1:
        _warn(f"|dk'/2kappa| = {abs(spec.mismatch_ratio):.3g}; the matched optimum does not apply")
    return spec.N * math.pi / (2 * spec.kappa)


# --------------------------------------------------------------------------
# depleted and general closed forms
# --------------------------------------------------------------------------


def _invert_arth_relation(Z, slope):
    """Solve Arth(s) + slope * s = Z for s in [0, 1), vectorized in Z >= 0.

    With s = tanh(u) the relation reads u + slope tanh(u) = Z; it is monotone
    for all u >= 0 exactly when slope > -1.
    """
    if slope <= -1:
        raise NonMonotoneRelation(f"Arth(s) + ({slope:.6g}) s is not monotone on [0, 1)")
    Z = np.asarray(Z, dtype=float)
    if np.any(Z < 0):
        raise DomainError("z must be non-negative")
    lo = np.zeros_like(Z)
    hi = Z + abs(slope) + 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f = mid + slope * np.tanh(mid) - Z
        lo = np.where(f <= 0, mid, lo)
        hi = np.where(f > 0, mid, hi)
    u = 0.5 * (lo + hi)
    for _ in range(3):
        u = u - (u + slope * np.tanh(u) - Z) / (1 + slope / np.cosh(u) ** 2)
    return np.tanh(np.maximum(u, 0.0))


def _as_output(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def eit_kappa(params: MediumParams, eta20: float) -> float:
    """kappa_e = (N/2) sqrt(mu1 mu3 / (mu2 eta20))."""
    return 0.5 * params.N * math.sqrt(params.mu1 * params.mu3 / (params.mu2 * eta20))


def eit_depleted(z, params: MediumParams, eta0: float):
    """J(z) for equal entrance fluxes eta0 under exact phase matching (EIT).

    The exact reduction of the general solution is
    (mu2/mu3) kappa_e z = Arth(s) + ((mu1 + mu2 - mu3)/mu3) s with s = sqrt(J/eta0),
    inverted by bisection and Newton polishing.
    """
    if eta0 <= 0:
        raise ParameterError("eta0", eta0, "entrance flux must be positive")
    A1 = -params.q * params.mu2 * eta0 - params.mu3 * params.delta2
    if abs(A1) > CONDITION_RTOL * params.mu2 * eta0:
        raise ConditionViolated("EIT depleted solution requires A1 = 0", A1)
    m1, m2, m3 = params.mu1, params.mu2, params.mu3
    Z = (m2 / m3) * eit_kappa(params, eta0) * np.asarray(z, dtype=float)
    s = _invert_arth_relation(Z, (m1 + m2 - m3) / m3)
    return _as_output(eta0 * s * s)


@dataclass(frozen=True)
class MismatchedEIT:
    J: np.ndarray | float
    J1: float
    J2: float
    period: float
    period_estimate: float


def eit_mismatch(z, params: MediumParams, eta0: float, delta_k_prime: float) -> MismatchedEIT:
    """Approximate J(z) for equal entrance fluxes and a total mismatch dk'.

    J = eta0 (1 - r) sn^2[kappa_e z sqrt(1 + r); sqrt(J1/J2)] with r = dk'/(2 kappa_e)
    and J2,1 = eta0 (1 +- r). ``period`` is the period of this expression,
    ``period_estimate`` the logarithmic estimate ln(16 kappa_e/dk') / kappa_e.
    """
    kap = eit_kappa(params, eta0)
    r = delta_k_prime / (2 * kap)
    if abs(r) >= 1:
        raise DomainError(f"|dk'/2kappa_e| = {abs(r):.3g} must be below 1")
    ra = abs(r)
    J1, J2 = eta0 * (1 - ra), eta0 * (1 + ra)
    p = math.sqrt(J1 / J2)
    arg = kap * np.asarray(z, dtype=float) * math.sqrt(1 + ra)
    J = J1 * jacobi_sn(arg, p) ** 2
    period = 2 * ellip_k(p) / (kap * math.sqrt(1 + ra)) if p < 1 else math.inf
    estimate = math.log(16 * kap / abs(delta_k_prime)) / kap if delta_k_prime != 0 else math.inf
    return MismatchedEIT(_as_output(J), J1, J2, period, estimate)


def maxcoh_kappa(params: MediumParams) -> float:
    """kappa_m = (N/4) sqrt(mu2 mu3) / |delta3|."""
    if params.delta3 == 0:
        raise DomainError("maximum-coherence regime needs a nonzero delta3")
    return 0.25 * params.N * math.sqrt(params.mu2 * params.mu3) / abs(params.delta3)


def maxcoh_mismatch(params: MediumParams, eta10: float) -> float:
    """dk' = dk - (N/4) (sqrt(mu1/eta10) + (mu2 - mu3)/delta3), including the Stark term of Omega10."""
    if params.delta3 == 0:
        raise DomainError("maximum-coherence regime needs a nonzero delta3")
    return params.delta_k - 0.25 * params.N * (
        math.sqrt(params.mu1 / eta10) + (params.mu2 - params.mu3) / params.delta3
    )


def maxcoh_undepleted(z, params: MediumParams, boundary: BoundaryFields):
    """J(z) with the atoms held in (|1> - |2>)/sqrt(2) by a strong undepleted Omega1."""
    if boundary.eta20 > UNDEPLETED_RATIO * boundary.eta10:
        _warn(f"eta20/eta10 = {boundary.eta20 / boundary.eta10:.3g}; the undepleted limit needs it small")
    kap = maxcoh_kappa(params)
    spec = RegimeSpec(Regime.MAXCOH_UNDEPLETED, kap, 0.0, maxcoh_mismatch(params, boundary.eta10), params.N)
    return linear_solution(spec, boundary.eta20, z)


def maxcoh_zeta(params: MediumParams) -> float:
    """zeta = sqrt(mu3 / (mu3 - mu2)); requires mu2 < mu3."""
    if params.mu2 >= params.mu3:
        raise MuOrdering(f"mu2 = {params.mu2!r} must be smaller than mu3 = {params.mu3!r}")
    return math.sqrt(params.mu3 / (params.mu3 - params.mu2))


def maxcoh_condition_residual(params: MediumParams, eta0: float) -> float:
    """mu3 eta0 - mu1 delta3^2 / (mu3 - mu2), zero on the matched maximum-coherence line."""
    return params.mu3 * eta0 - params.mu1 * params.delta3**2 / (params.mu3 - params.mu2)


def maxcoh_entrance_state(params: MediumParams):
    """(c1, c2) = (1, -zeta) / sqrt(1 + zeta^2) and the coherence rho12 = zeta / (1 + zeta^2)."""
    zeta = maxcoh_zeta(params)
    norm = math.sqrt(1 + zeta**2)
    return 1 / norm, -zeta / norm, zeta / (1 + zeta**2)


def maxcoh_depleted(z, params: MediumParams, eta0: float):
    """J(z) for equal entrance fluxes on the matched maximum-coherence line.

    kappa_m (2/zeta) z = Arth(s) - ((mu1 + mu2 - mu3)/mu3) s with s = sqrt(J/eta0).
    """
    zeta = maxcoh_zeta(params)
    res = maxcoh_condition_residual(params, eta0)
    if abs(res) > CONDITION_RTOL * params.mu3 * eta0:
        raise ConditionViolated("mu3 eta0 = mu1 delta3^2 / (mu3 - mu2) does not hold", res)
    if params.delta2 != 0 or params.delta_k != 0:
        raise ConditionViolated("matched maximum coherence needs delta2 = 0 and delta_k = 0", abs(params.delta2) + abs(params.delta_k))
    m1, m2, m3 = params.mu1, params.mu2, params.mu3
    Z = maxcoh_kappa(params) * (2 / zeta) * np.asarray(z, dtype=float)
    s = _invert_arth_relation(Z, -(m1 + m2 - m3) / m3)
    return _as_output(eta0 * s * s)


@dataclass(frozen=True)
class ConventionalSolution:
    J: np.ndarray | float
    J1: float
    J2: float
    kappa: float
    A1: float
    delta_k_prime: float


def conventional(z, params: MediumParams, boundary: BoundaryFields) -> ConventionalSolution:
    """J = J1 sn^2[kappa_n z; sqrt(J1/J2)] for weak excitation (large detunings)."""
    d2, d3 = params.delta2, params.delta3
    if d2 == 0 or d3 == 0:
        raise DomainError("conventional regime needs nonzero delta2 and delta3")
    W1 = rabi(params.mu1, boundary.eta10)
    W2 = rabi(params.mu2, boundary.eta20)
    rabis = {"Omega10": W1, "Omega20": W2, "gamma": params.gamma}
    _check_much_larger("|delta2|", d2, rabis)
    _check_much_larger("|delta3|", d3, rabis)
    A1 = params.q * d2 * d3 + params.mu1 * d3 - params.mu3 * d2
    mu = params.mu_product
    B1 = A1**2 / (4 * mu)
    e1, e2 = boundary.eta10, boundary.eta20
    S = e1 + e2 + B1
    root = math.sqrt(max(S * S - 4 * e1 * e2, 0.0))
    J2 = 0.5 * (S + root)
    J1 = 2 * e1 * e2 / (S + root) if S + root > 0 else 0.0
    kap = 0.5 * params.N * math.sqrt(mu * J2) / abs(d2 * d3)
    p = min(1.0, math.sqrt(J1 / J2)) if J2 > 0 else 0.0
    J = J1 * jacobi_sn(kap * np.asarray(z, dtype=float), p) ** 2
    dkp = -0.5 * params.N * A1 / (d2 * d3)
    return ConventionalSolution(_as_output(J), J1, J2, kap, A1, dkp)


def conventional_sinc(z, params: MediumParams, boundary: BoundaryFields):
    """Strongly mismatched limit N^2 mu1 mu2 mu3 eta10 eta20 sin^2(dk' z/2) / (4 d2^2 d3^2 (dk'/2)^2)."""
    d2, d3 = params.delta2, params.delta3
    dkp = params.delta_k - 0.5 * params.N * params.mu1 / d2 + 0.5 * params.N * params.mu3 / d3
    if dkp == 0:
        raise DomainError("the sinc^2 limit needs a nonzero total mismatch")
    z = np.asarray(z, dtype=float)
    pref = params.N**2 * params.mu_product * boundary.eta10 * boundary.eta20 / (4 * d2**2 * d3**2)
    return _as_output(pref * np.sin(dkp * z / 2) ** 2 / (dkp / 2) ** 2)


# --------------------------------------------------------------------------
# compensation tuning
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Tuning:
    """A tuned parameter value with the targeted quantity before and after tuning."""

    name: str
    value: float
    params: MediumParams
    residual: float
    untuned: float


def compensation_tuning(tag, params: MediumParams, boundary: BoundaryFields, method: str | None = None) -> Tuning:
    """Parameter value that cancels the linear phase mismatch of a regime.

    * EIT: delta2 = (2/N)(mu2 eta20/mu3) dk, targeting A1 = -q mu2 eta20 - mu3 delta2.
    * MaxCohUndepleted, ``method="d3m"`` (default when dk = 0):
      delta3 = -((mu2 - mu3)/mu1) sqrt(mu1 eta10), cancelling dk' including the Stark term.
    * MaxCohUndepleted, ``method="qm"``: delta3 = (mu3 - mu2)/(2q), cancelling
      dk' when the Stark term sqrt(mu1/eta10) is negligible.
    * MaxCohDepleted: delta2 = 0 and delta3 = sqrt(mu3 eta0 (mu3 - mu2)/mu1),
      targeting A1 at lam = Omega10 zeta.
    * Conventional: q = mu3/delta3 - mu1/delta2 (returned as delta_k = -N q/2), targeting A1.
    """
    tag = _regime(tag)
    N, m1, m2, m3 = params.N, params.mu1, params.mu2, params.mu3
    e1, e2 = boundary.eta10, boundary.eta20
    if tag.family == "eit":

        def target(p):
            return -p.q * m2 * e2 - m3 * p.delta2

        value = 2 / N * m2 * e2 / m3 * params.delta_k
        tuned = params.with_(delta2=value)
        return Tuning("delta2", value, tuned, target(tuned), target(params))
    if tag is Regime.MAXCOH_UNDEPLETED:
        method = method or ("d3m" if params.delta_k == 0 else "qm")
        if method == "d3m":
            if m2 == m3:
                raise NoSolution("delta3 = 0 would be required (mu2 = mu3)")
            value = -(m2 - m3) / m1 * math.sqrt(m1 * e1)

            def target(p):
                return maxcoh_mismatch(p, e1) if p.delta3 else math.inf

        elif method == "qm":
            if params.q == 0 or m2 == m3:
                raise NoSolution("the detuning rule needs q != 0 and mu2 != mu3")
            value = (m3 - m2) / (2 * params.q)

            def target(p):
                return p.delta_k - 0.25 * N * (m2 - m3) / p.delta3 if p.delta3 else math.inf

        else:
            raise DomainError(f"unknown method {method!r}")
        tuned = params.with_(delta3=value)
        return Tuning("delta3", value, tuned, target(tuned), target(params))
    if tag is Regime.MAXCOH_DEPLETED:
        if m2 >= m3:
            raise NoSolution(f"mu2 = {m2!r} >= mu3 = {m3!r}: no real delta3 satisfies the condition")
        if e1 != e2:
            _warn("the matched maximum-coherence line assumes eta10 = eta20")
        zeta = maxcoh_zeta(params)
        lam = rabi(m1, e1) * zeta
        value = math.sqrt(m3 * e1 * (m3 - m2) / m1)

        def target(p):
            if p.delta3 == 0:
                return math.inf
            return mismatch_coefficients(p, lam, boundary, model="maxcoh").A1

        tuned = params.with_(delta2=0.0, delta3=value, delta_k=0.0)
        return Tuning("delta3", value, tuned, target(tuned), target(params))
    d2, d3 = params.delta2, params.delta3
    if d2 == 0 or d3 == 0:
        raise NoSolution("conventional tuning needs nonzero delta2 and delta3")
    q = m3 / d3 - m1 / d2
    value = -0.5 * N * q

    def target(p):
        return p.q * d2 * d3 + m1 * d3 - m3 * d2

    tuned = params.with_(delta_k=value)
    return Tuning("delta_k", value, tuned, target(tuned), target(params))


# --------------------------------------------------------------------------
# efficiency metrics
# --------------------------------------------------------------------------


def fractional_efficiency(J_max: float, eta10: float, eta20: float) -> float:
    """epsilon = J_max / min(eta10, eta20)."""
    if J_max < 0:
        raise DomainError("J_max must be non-negative")
    if eta10 == 0 and eta20 == 0:
        raise ZeroDivisionError("both entrance fluxes vanish")
    floor = min(eta10, eta20)
    if floor == 0:
        if J_max > 0:
            raise DomainError("no flux can be exchanged when one entrance flux vanishes")
        return 0.0
    eps = J_max / floor
    if eps > 1 + 1e-9:
        raise DomainError(f"J_max exceeds the smaller entrance flux (epsilon = {eps:.6g})")
    return min(eps, 1.0)


def total_efficiency(tau, eta3, eta10, eta20, omega1: float, omega2: float, omega3: float) -> float:
    """W = int omega3 eta3(z, t) dt / int (omega1 eta1 + omega2 eta2)(0, t) dt.

    ``eta3`` is sampled at the observation point and ``eta10``, ``eta20`` at
    the entrance on the same retarded-time grid ``tau`` (trapezoidal rule).
    """
    if abs(omega3 - (omega1 + omega2)) > 1e-12 * abs(omega3):
        raise ResonanceViolation(f"omega3 = {omega3!r} differs from omega1 + omega2 = {omega1 + omega2!r}")
    tau = np.asarray(tau, dtype=float)
    arrays = [np.broadcast_to(np.asarray(a, dtype=float), np.shape(a)) for a in (eta3, eta10, eta20)]
    for name, a in zip(("eta3", "eta10", "eta20"), arrays):
        if a.shape != tau.shape:
            raise GridMismatch(f"{name} has shape {a.shape}, the time grid {tau.shape}")
    if tau.size < 2 or np.any(np.diff(tau) <= 0):
        raise GridMismatch("the time grid must be strictly increasing with at least two points")
    num = np.trapezoid(omega3 * arrays[0], tau)
    den = np.trapezoid(omega1 * arrays[1] + omega2 * arrays[2], tau)
    if den <= 0:
        raise ZeroDivisionError("no input energy on the time grid")
    return float(min(max(num / den, 0.0), 1.0))


def figure_of_merit(tag, tau: float, omega10: float, omega20: float, delta2=None, delta3=None) -> float:
    """Converted photons per atom, n / N_at, for a pulse of duration tau."""
    tag = _regime(tag)
    if tag.family == "eit":
        return tau * omega10
    if delta3 is None or delta3 == 0:
        raise DomainError("delta3 is required for this regime")
    if tag.family == "maxcoh":
        return tau * omega20 * omega20 / abs(delta3)
    if delta2 is None or delta2 == 0:
        raise DomainError("delta2 is required for the conventional regime")
    return tau * omega20 * omega10 * omega20 / abs(delta3 * delta2)


# --------------------------------------------------------------------------
# adiabaticity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidityReport:
    """Loss-limited duration tau0, tau / tau0 and the minimum eigenvalue gap times tau."""

    tau: float
    tau0: float
    ratio: float
    min_gap: float
    gap_tau: float

    @property
    def adiabatic(self) -> bool:
        return self.ratio < 1 and self.gap_tau > 1


def eigenvalue_gap(omega1, omega2, omega3, phi, delta2, delta3, lam0):
    """Distance from the root nearest lam0 to the other roots of the characteristic cubic."""
    roots = np.asarray(solve_cubic_real(*characteristic_coefficients(omega1, omega2, omega3, phi, delta2, delta3)))
    k = int(np.argmin(np.abs(roots - lam0)))
    others = np.delete(roots, k)
    return float(np.min(np.abs(others - roots[k]))) if others.size else math.inf


def trajectory_gap(params: MediumParams, boundary: BoundaryFields, z_max: float | None = None, n: int = 200, **solve_kw):
    """Minimum eigenvalue gap along the analytic trajectory on [0, z_max].

    ``z_max`` defaults to one period, or to 10 / kappa for a monotone solution.
    """
    sol = solve(params, boundary, **solve_kw)
    if z_max is None:
        z_max = 10 / sol.kappa if sol.monotone else sol.period
    z = np.linspace(0.0, z_max, n)
    st = exchange_at(z, sol)
    gaps = []
    for J, phi in zip(np.atleast_1d(st.J), np.atleast_1d(st.phi)):
        w1 = rabi(params.mu1, max(boundary.eta10 - J, 0.0))
        w2 = rabi(params.mu2, max(boundary.eta20 - J, 0.0))
        w3 = rabi(params.mu3, max(boundary.eta30 + J, 0.0))
        gaps.append(eigenvalue_gap(w1, w2, w3, phi, params.delta2, params.delta3, sol.lam + sol.q * J))
    return float(min(gaps))


def adiabatic_validity(tag, params: MediumParams, boundary: BoundaryFields, tau: float, min_gap: float | None = None, **gap_kw):
    """Loss limit and gap-based adiabaticity indicator for pulses of duration tau.

    tau0 is (Omega20/Omega10)^2 / gamma for EIT and (delta3/Omega20)^2 / gamma
    for maximum coherence; for the conventional regime the excited-state
    admixture (Omega10/delta3)^2 sets tau0 = (delta3/Omega10)^2 / gamma.
    """
    tag = _regime(tag)
    W1 = rabi(params.mu1, boundary.eta10)
    W2 = rabi(params.mu2, boundary.eta20)
    g = params.gamma
    if g == 0:
        tau0 = math.inf
    elif tag.family == "eit":
        tau0 = (W2 / W1) ** 2 / g if W1 > 0 else math.inf
    elif tag.family == "maxcoh":
        tau0 = (params.delta3 / W2) ** 2 / g if W2 > 0 else math.inf
    else:
        tau0 = (params.delta3 / W1) ** 2 / g if W1 > 0 else math.inf
    if min_gap is None:
        min_gap = trajectory_gap(params, boundary, **gap_kw)
    return ValidityReport(tau, tau0, tau / tau0, min_gap, min_gap * tau)
