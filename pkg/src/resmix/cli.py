"""Scenario-driven command line: ``resmix solve|sweep|compare|validate``.

A scenario is a YAML mapping. Every key has a default (``DEFAULTS``) and
unknown keys are rejected::

    name: fig2
    medium:   {N: 1, mu1: 0.05, mu2: 0.5, mu3: 1.0, delta2: 0, delta3: 0,
               gamma: 0, delta_k: 0, theta: 0}
    boundary: {eta10: 1, eta20: 1, eta30: 0, phi0: 0,
               envelope1: flat, envelope2: flat}
    regime: general          # or EitUndepleted, EitDepleted, MaxCohUndepleted,
                             # MaxCohDepleted, Conventional
    tune: false              # apply the regime's compensation tuning first
    model: exact             # exact | eit | maxcoh | conventional
    branch: ground           # ground | lower | middle | upper | <number>
    eigenvalue: null         # null | <number> | maxcoh_zeta
    solver: analytic         # analytic | canonical-ode | maxwell-bloch | all
    grid: {z_max: 40, n_z: 201, tau_span: [0, 0], n_tau: 1}
    mb: {width: 30, separation: 4, z_max: null, n_z: 32, rtol: 1e-10, atol: 1e-12}
    oracle: {rtol: 1e-11, atol: 1e-13, seed_eps: 0}
    frequencies: {omega1: 1, omega2: 1}
    sweep: {parameter: medium.delta3, start: 0, stop: 1, count: 11}
    tolerances: {analytic_canonical: 1e-6, analytic_mb: 1e-3,
                 manley_rowe: 1e-8, hamiltonian: 1e-9}
    outputs: {format: csv}

Envelopes are ``flat``, ``{shape: gaussian, fwhm: w, center: t0}``,
``{shape: sech, width: w, center: t0}`` or a list sampled on the tau grid.
The analytic and canonical solvers treat every tau slice independently.
The Maxwell-Bloch solver needs pulses switched on from zero: with flat
envelopes it uses counterintuitive erf ramps of the given ``width`` and
reports the flat top, otherwise it propagates the named envelopes.

Exit codes: 0 ok, 2 invalid scenario, 3 solver failure, 4 tolerance breach.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import ResmixError
from .hamiltonian import (
    atomic_state,
    atomic_state_at,
    entrance_eigenvalue,
    exchange_at,
    fluxes_at,
    solve,
)
from .model import BoundaryFields, MediumParams, rabi, validate
from .oracle import (
    IntegratorConfig,
    SpaceTimeGrid,
    counterintuitive_envelopes,
    integrate_canonical,
    integrate_mb,
)
from .regimes import (
    Regime,
    compensation_tuning,
    conventional,
    eit_depleted,
    eit_kappa,
    eit_mismatch,
    linear_solution,
    maxcoh_depleted,
    maxcoh_undepleted,
    maxcoh_zeta,
    regime_parameters,
    total_efficiency,
)

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_TOLERANCE = 0, 2, 3, 4
SOLVERS = ("analytic", "canonical-ode", "maxwell-bloch")
COLUMNS = ("tau", "z", "eta1", "eta2", "eta3", "J", "phi", "pop1", "pop2", "pop3")

DEFAULTS = {
    "name": "scenario",
    "medium": {"N": 1.0, "mu1": None, "mu2": None, "mu3": None, "delta2": 0.0, "delta3": 0.0,
               "gamma": 0.0, "delta_k": 0.0, "theta": 0.0},
    "boundary": {"eta10": None, "eta20": None, "eta30": 0.0, "phi0": 0.0,
                 "envelope1": "flat", "envelope2": "flat"},
    "regime": "general",
    "tune": False,
    "model": "exact",
    "branch": "ground",
    "eigenvalue": None,
    "solver": "analytic",
    "grid": {"z_max": 40.0, "n_z": 201, "tau_span": [0.0, 0.0], "n_tau": 1},
    "mb": {"width": 30.0, "separation": 4.0, "z_max": None, "n_z": 32, "rtol": 1e-10, "atol": 1e-12},
    "oracle": {"rtol": 1e-11, "atol": 1e-13, "seed_eps": 0.0},
    "frequencies": {"omega1": 1.0, "omega2": 1.0},
    "sweep": {"parameter": None, "start": None, "stop": None, "count": 11},
    "tolerances": {"analytic_canonical": 1e-6, "analytic_mb": 1e-3, "manley_rowe": 1e-8, "hamiltonian": 1e-9},
    "outputs": {"format": "csv"},
}


class ScenarioError(ValueError):
    """Malformed scenario (exit code 2)."""


# --------------------------------------------------------------------------
# scenario handling
# --------------------------------------------------------------------------


def _merge(defaults, given, path=""):
    if not isinstance(given, dict):
        raise ScenarioError(f"{path or 'scenario'} must be a mapping")
    out = {}
    for key in given:
        if key not in defaults:
            raise ScenarioError(f"unknown key {path + key!r}")
    for key, default in defaults.items():
        value = given.get(key, default)
        if isinstance(default, dict):
            out[key] = _merge(default, value if value is not None else {}, path + key + ".")
        else:
            out[key] = value
    return out


def normalize(raw: dict) -> dict:
    """Fill defaults, reject unknown keys and check required values."""
    sc = _merge(DEFAULTS, raw or {})
    for section, keys in (("medium", ("mu1", "mu2", "mu3")), ("boundary", ("eta10", "eta20"))):
        for key in keys:
            if sc[section][key] is None:
                raise ScenarioError(f"missing required key {section}.{key}")
    for key, value in sc["medium"].items():
        sc["medium"][key] = _number(value, f"medium.{key}")
    for key in ("eta10", "eta20", "eta30", "phi0"):
        sc["boundary"][key] = _number(sc["boundary"][key], f"boundary.{key}")
    if sc["solver"] not in SOLVERS + ("all",):
        raise ScenarioError(f"solver must be one of {SOLVERS + ('all',)}")
    if sc["regime"] != "general" and sc["regime"] not in [r.value for r in Regime]:
        raise ScenarioError(f"unknown regime {sc['regime']!r}")
    if sc["outputs"]["format"] not in ("csv", "svg", "both"):
        raise ScenarioError("outputs.format must be csv, svg or both")
    g = sc["grid"]
    g["z_max"] = _number(g["z_max"], "grid.z_max")
    if not g["z_max"] > 0 or int(g["n_z"]) < 2:
        raise ScenarioError("empty grid: need grid.z_max > 0 and grid.n_z >= 2")
    g["n_z"] = int(g["n_z"])
    g["n_tau"] = int(g["n_tau"])
    if g["n_tau"] < 1 or len(g["tau_span"]) != 2:
        raise ScenarioError("grid.tau_span needs two values and grid.n_tau >= 1")
    if sc["tune"] and sc["regime"] == "general":
        raise ScenarioError("tune: true needs a regime tag")
    return sc


def scenario_hash(sc: dict) -> str:
    return hashlib.sha256(json.dumps(sc, sort_keys=True, default=str).encode()).hexdigest()


def _number(value, name):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ScenarioError(f"{name} must be finite")
    return out


def load_scenario(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML in {path}: {exc}") from None
    return normalize(raw)


@dataclass
class Setup:
    """Physical objects built from a normalized scenario."""

    params: MediumParams
    boundary: BoundaryFields
    tau: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    lam: float | None


def tau_grid(sc) -> np.ndarray:
    a, b = (float(t) for t in sc["grid"]["tau_span"])
    n = sc["grid"]["n_tau"]
    return np.array([a]) if n == 1 else np.linspace(a, b, n)


def envelope_samples(spec, tau, name):
    if spec is None or spec == "flat":
        return np.ones_like(tau)
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float)
        if arr.shape != tau.shape:
            raise ScenarioError(f"{name} has {arr.size} samples, the tau grid {tau.size}")
        return arr
    if isinstance(spec, dict):
        shape = spec.get("shape")
        center = float(spec.get("center", 0.0))
        extra = set(spec) - {"shape", "center", "fwhm", "width"}
        if extra:
            raise ScenarioError(f"unknown keys {sorted(extra)} in {name}")
        if shape == "gaussian" and "fwhm" in spec:
            w = float(spec["fwhm"])
            return np.exp(-4 * math.log(2) * ((tau - center) / w) ** 2)
        if shape == "sech" and "width" in spec:
            return 1 / np.cosh((tau - center) / float(spec["width"])) ** 2
    raise ScenarioError(f"{name} must be flat, a sample list, gaussian(fwhm) or sech(width)")


def build(sc) -> Setup:
    """Construct and validate parameters; applies tuning when requested."""
    try:
        params = MediumParams(**sc["medium"])
        b = sc["boundary"]
        boundary = BoundaryFields(b["eta10"], b["eta20"], b["eta30"], b["phi0"])
        validate(params, boundary)
    except ResmixError as exc:
        raise ScenarioError(str(exc)) from None
    if sc["tune"]:
        params = compensation_tuning(sc["regime"], params, boundary).params
    tau = tau_grid(sc)
    f1 = envelope_samples(sc["boundary"]["envelope1"], tau, "boundary.envelope1")
    f2 = envelope_samples(sc["boundary"]["envelope2"], tau, "boundary.envelope2")
    lam = sc["eigenvalue"]
    if lam == "maxcoh_zeta":
        lam = rabi(params.mu1, boundary.eta10) * maxcoh_zeta(params)
    elif lam is not None:
        lam = _number(lam, "eigenvalue")
    return Setup(params, boundary, tau, f1, f2, lam)


def _branch(sc):
    br = sc["branch"]
    return br if isinstance(br, str) else float(br)


def _slice_boundary(setup: Setup, i):
    b = setup.boundary
    return BoundaryFields(b.eta10 * setup.f1[i], b.eta20 * setup.f2[i], b.eta30, b.phi0)


def _z_grid(sc):
    return np.linspace(0.0, sc["grid"]["z_max"], sc["grid"]["n_z"])


def _pool_map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# solvers
# --------------------------------------------------------------------------


def regime_curve(sc, params, boundary, z):
    """Closed-form J(z) for the scenario's regime tag (None for 'general')."""
    tag = sc["regime"]
    if tag == "general":
        return None
    if tag == Regime.EIT_UNDEPLETED.value:
        return linear_solution(regime_parameters(tag, params, boundary), boundary.eta10, z)
    if tag == Regime.EIT_DEPLETED.value:
        eta0 = boundary.eta10
        dkp = regime_parameters(tag, params, boundary).delta_k_prime
        if params.q == 0 and params.delta2 == 0:
            return eit_depleted(z, params, eta0)
        return eit_mismatch(z, params, eta0, dkp).J
    if tag == Regime.MAXCOH_UNDEPLETED.value:
        return maxcoh_undepleted(z, params, boundary)
    if tag == Regime.MAXCOH_DEPLETED.value:
        return maxcoh_depleted(z, params, boundary.eta10)
    return conventional(z, params, boundary).J


def _analytic_slice(sc, setup, i, z):
    b = _slice_boundary(setup, i)
    p = setup.params
    if b.eta10 == 0 or b.eta20 == 0:
        J = np.zeros_like(z)
        phi = np.zeros_like(z)
        pops = np.tile([1.0, 0.0, 0.0], (z.size, 1))
        return J, phi, pops, None
    sol = solve(p, b, branch=_branch(sc), lam=setup.lam, model=sc["model"])
    st = exchange_at(z, sol)
    pops = np.abs(atomic_state_at(z, sol, st)) ** 2
    return np.asarray(st.J), np.asarray(st.phi), pops, regime_curve(sc, p, b, z)


def _canonical_slice(sc, setup, i, z, seed_eps):
    b = _slice_boundary(setup, i)
    p = setup.params
    cfg = IntegratorConfig(rtol=sc["oracle"]["rtol"], atol=sc["oracle"]["atol"])
    lam = setup.lam if setup.lam is not None else entrance_eigenvalue(p, b, _branch(sc))
    tr = integrate_canonical(p, b, z, config=cfg, seed_eps=seed_eps, lam=lam)
    e1, e2, e3 = fluxes_at(tr.J, b)
    pops = np.empty((z.size, 3))
    for k in range(z.size):
        st = atomic_state(
            rabi(p.mu1, max(e1[k], 0.0)), rabi(p.mu2, max(e2[k], 0.0)), rabi(p.mu3, max(e3[k], 0.0)),
            tr.phi[k], p.delta2, p.delta3, tr.lam0[k],
        )
        pops[k] = st.populations
    return tr, pops


def _rows(tau, z, boundary, J, phi, pops, extra=None):
    e1, e2, e3 = fluxes_at(J, boundary)
    cols = [np.full_like(z, tau), z, e1, e2, e3, J, phi, pops[:, 0], pops[:, 1], pops[:, 2]]
    if extra is not None:
        cols.append(np.asarray(extra, dtype=float))
    return np.column_stack(cols)


def run_analytic(sc, setup, threads=1):
    z = _z_grid(sc)
    results = _pool_map(lambda i: _analytic_slice(sc, setup, i, z), range(setup.tau.size), threads)
    blocks = []
    has_regime = any(r[3] is not None for r in results)
    for i, (J, phi, pops, reg) in enumerate(results):
        extra = (reg if reg is not None else np.full_like(z, np.nan)) if has_regime else None
        blocks.append(_rows(setup.tau[i], z, _slice_boundary(setup, i), J, phi, pops, extra))
    cols = COLUMNS + (("J_regime",) if has_regime else ())
    return cols, np.vstack(blocks)


def run_canonical(sc, setup, threads=1, seed_eps=0.0):
    z = _z_grid(sc)
    results = _pool_map(lambda i: _canonical_slice(sc, setup, i, z, seed_eps), range(setup.tau.size), threads)
    blocks = [
        _rows(setup.tau[i], z, _slice_boundary(setup, i), tr.J, tr.phi, pops, tr.hamiltonian)
        for i, (tr, pops) in enumerate(results)
    ]
    return COLUMNS + ("hamiltonian",), np.vstack(blocks), [r[0] for r in results]


def _mb_setup(sc, setup):
    m = sc["mb"]
    z_max = float(m["z_max"] or sc["grid"]["z_max"])
    flat = all(sc["boundary"][k] in (None, "flat") for k in ("envelope1", "envelope2"))
    if flat:
        width, sep = float(m["width"]), float(m["separation"])
        envelopes = counterintuitive_envelopes(width, separation=sep)
        t_end = (3 * sep + 4) * width
        tau = np.array([0.0, t_end])
        report = np.array([1])
    else:
        if setup.tau.size < 2:
            raise ScenarioError("shaped envelopes for the Maxwell-Bloch solver need grid.n_tau >= 2")
        tau = setup.tau
        envelopes = (
            lambda t: np.interp(t, setup.tau, setup.f1),
            lambda t: np.interp(t, setup.tau, setup.f2),
        )
        report = np.arange(tau.size)
    grid = SpaceTimeGrid(tau=tau, z_max=z_max, n_z=int(m["n_z"]))
    return grid, envelopes, report


def run_mb(sc, setup):
    grid, envelopes, report = _mb_setup(sc, setup)
    cfg = IntegratorConfig(rtol=float(sc["mb"]["rtol"]), atol=float(sc["mb"]["atol"]))
    res = integrate_mb(setup.params, setup.boundary, grid, config=cfg, envelopes=envelopes)
    blocks = []
    b = setup.boundary
    phase = res.relative_phase()
    for i in report:
        J = res.eta3[i] - b.eta30
        pops = res.populations[i]
        e = np.column_stack([np.full_like(res.z, res.tau[i]), res.z, res.eta1[i], res.eta2[i], res.eta3[i],
                             J, phase[i], pops[:, 0], pops[:, 1], pops[:, 2]])
        blocks.append(e)
    return COLUMNS, np.vstack(blocks), res, report


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _flatten(d, prefix=""):
    for key, value in d.items():
        if isinstance(value, dict):
            yield from _flatten(value, prefix + key + ".")
        else:
            yield prefix + key, value


def _fmt(x):
    return f"{x:.17g}"


def write_csv(path: Path, columns, data, sc, meta: dict):
    lines = [f"# resmix {__version__}", f"# scenario_sha256: {scenario_hash(sc)}"]
    lines += [f"# {k}: {v}" for k, v in meta.items()]
    lines += [f"# {k} = {json.dumps(v)}" for k, v in _flatten(sc)]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(x) for x in row) for row in np.atleast_2d(data)]
    path.write_text("\n".join(lines) + "\n")


def write_svg(path: Path, columns, data, title, scale):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "resmix"
    idx = {c: k for k, c in enumerate(columns)}
    first_tau = data[0, idx["tau"]]
    rows = data[data[:, idx["tau"]] == first_tau]
    fig, ax = plt.subplots(figsize=(6, 4))
    z = rows[:, idx["z"]]
    ax.plot(z, rows[:, idx["J"]] / scale, "k-", label="J / eta0")
    for k, style in zip((1, 2, 3), ("--", ":", "-.")):
        ax.plot(z, rows[:, idx[f"pop{k}"]], style, label=f"|c{k}|^2")
    ax.set_xlabel("z")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _emit(out: Path, stem, columns, data, sc, meta, fmt, scale):
    written = []
    if fmt in ("csv", "both"):
        p = out / f"{stem}.csv"
        write_csv(p, columns, data, sc, meta)
        written.append(p)
    if fmt in ("svg", "both"):
        p = out / f"{stem}.svg"
        write_svg(p, columns, data, stem, scale)
        written.append(p)
    return written


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _scale(setup):
    return max(min(setup.boundary.eta10, setup.boundary.eta20), 1e-300)


def cmd_solve(sc, out: Path, threads=1, seed_eps=0.0):
    setup = build(sc)
    fmt = sc["outputs"]["format"]
    solvers = SOLVERS if sc["solver"] == "all" else (sc["solver"],)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in solvers:
        if name == "analytic":
            cols, data = run_analytic(sc, setup, threads)
        elif name == "canonical-ode":
            cols, data, _ = run_canonical(sc, setup, threads, seed_eps)
        else:
            cols, data, _, _ = run_mb(sc, setup)
        meta = {"command": "solve", "solver": name}
        written += _emit(out, f"{sc['name']}_{name}", cols, data, sc, meta, fmt, _scale(setup))
    return written


SWEEP_COLUMNS = ("value", "J_max", "z_opt", "epsilon", "W")


def _set_path(sc, path, value):
    if path == "mismatch_ratio":
        p, b = sc["medium"], sc["boundary"]
        ke = eit_kappa(MediumParams(**p), b["eta20"])
        dkp = 2 * ke * value
        p["delta2"] = (p["delta_k"] - dkp) * 2 * p["mu2"] * b["eta20"] / (p["N"] * p["mu3"])
        return
    parts = path.split(".")
    if len(parts) != 2 or parts[0] not in ("medium", "boundary") or parts[1] not in DEFAULTS[parts[0]]:
        raise ScenarioError(f"sweep parameter {path!r} does not resolve")
    sc[parts[0]][parts[1]] = float(value)


def sweep_row(sc, setup_tuned: Setup, path, value):
    row_sc = copy.deepcopy(sc)
    row_sc["tune"] = False
    row_sc["medium"] = {k: getattr(setup_tuned.params, k) for k in DEFAULTS["medium"]}
    _set_path(row_sc, path, value)
    setup = build(row_sc)
    z = _z_grid(row_sc)
    w1, w2 = (float(row_sc["frequencies"][k]) for k in ("omega1", "omega2"))
    best_eps, J_max, z_opt, J_at = 0.0, 0.0, 0.0, []
    slices = []
    for i in range(setup.tau.size):
        b = _slice_boundary(setup, i)
        if b.eta10 == 0 or b.eta20 == 0:
            slices.append((b, None))
            continue
        sol = solve(setup.params, b, branch=_branch(row_sc), lam=setup.lam, model=row_sc["model"])
        slices.append((b, sol))
    peak = int(np.argmax([min(b.eta10, b.eta20) for b, _ in slices]))
    b, sol = slices[peak]
    if sol is not None:
        zq = sol.quarter_distance
        if zq <= z[-1]:
            J_max, z_opt = sol.J1, zq
        else:
            J = np.asarray(exchange_at(z, sol).J)
            k = int(np.argmax(J))
            J_max, z_opt = float(J[k]), float(z[k])
        best_eps = min(J_max / min(b.eta10, b.eta20), 1.0)
    for b, s in slices:
        J_at.append(0.0 if s is None else float(exchange_at(z_opt, s).J))
    eta10 = np.array([b.eta10 for b, _ in slices])
    eta20 = np.array([b.eta20 for b, _ in slices])
    if setup.tau.size == 1:
        W = (w1 + w2) * J_at[0] / (w1 * eta10[0] + w2 * eta20[0])
    else:
        W = total_efficiency(setup.tau, np.array(J_at), eta10, eta20, w1, w2, w1 + w2)
    return [value, J_max, z_opt, best_eps, min(max(W, 0.0), 1.0)]


def cmd_sweep(sc, out: Path, threads=1):
    sw = sc["sweep"]
    if sw["parameter"] is None or sw["start"] is None or sw["stop"] is None:
        raise ScenarioError("sweep needs parameter, start and stop")
    count = int(sw["count"])
    if count < 1:
        raise ScenarioError("sweep.count must be >= 1")
    values = np.linspace(float(sw["start"]), float(sw["stop"]), count)
    setup = build(sc)
    _set_path(copy.deepcopy(sc), sw["parameter"], values[0])
    rows = _pool_map(lambda v: sweep_row(sc, setup, sw["parameter"], float(v)), values, threads)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{sc['name']}_sweep.csv"
    write_csv(path, SWEEP_COLUMNS, np.array(rows, dtype=float), sc, {"command": "sweep", "parameter": sw["parameter"]})
    return [path]


def compare_report(sc, threads=1, seed_eps=0.0) -> dict:
    """Deviations between the three solvers and conservation-law drifts."""
    setup = build(sc)
    if setup.boundary.eta30 != 0:
        raise ScenarioError("compare covers generation from vacuum (eta30 = 0)")
    scale = _scale(setup)
    tol = sc["tolerances"]
    report = {}

    cols, an = run_analytic(sc, setup, threads)
    _, ca, trajs = run_canonical(sc, setup, threads, seed_eps)
    dev = np.abs(an[:, 5] - ca[:, 5]) / scale
    report["analytic_canonical_max"] = float(dev.max())
    report["analytic_canonical_mean"] = float(dev.mean())

    p, b = setup.params, setup.boundary
    ham_scale = 0.5 * p.N * max(rabi(p.mu1, b.eta10), rabi(p.mu2, b.eta20), abs(p.delta2), abs(p.delta3), 1e-300)
    report["hamiltonian_drift"] = float(max(np.max(np.abs(t.hamiltonian - t.hamiltonian[0])) for t in trajs) / ham_scale)

    _, _, res, rep = run_mb(sc, setup)
    i = int(rep[-1])
    peak = BoundaryFields(b.eta10, b.eta20, b.eta30, b.phi0)
    f1 = float(np.interp(res.tau[i], setup.tau, setup.f1)) if setup.tau.size > 1 else 1.0
    f2 = float(np.interp(res.tau[i], setup.tau, setup.f2)) if setup.tau.size > 1 else 1.0
    slice_b = BoundaryFields(peak.eta10 * f1, peak.eta20 * f2, 0.0, peak.phi0)
    sol = solve(p, slice_b, branch=_branch(sc), lam=setup.lam, model=sc["model"])
    J_an = np.asarray(exchange_at(res.z, sol).J)
    J_mb = res.eta3[i]
    dmb = np.abs(J_mb - J_an) / scale
    report["analytic_mb_max"] = float(dmb.max())
    report["analytic_mb_mean"] = float(dmb.mean())
    s13 = res.eta1[i] + res.eta3[i]
    s12 = res.eta1[i] - res.eta2[i]
    norm = slice_b.eta10 + slice_b.eta30
    report["manley_rowe_13_drift"] = float(np.max(np.abs(s13 - s13[0])) / norm)
    report["manley_rowe_12_drift"] = float(np.max(np.abs(s12 - s12[0])) / norm)
    report["mb_tau"] = float(res.tau[i])

    checks = {
        "analytic_canonical_max": tol["analytic_canonical"],
        "analytic_mb_max": tol["analytic_mb"],
        "hamiltonian_drift": tol["hamiltonian"],
    }
    if p.gamma == 0:
        checks["manley_rowe_13_drift"] = tol["manley_rowe"]
        checks["manley_rowe_12_drift"] = tol["manley_rowe"]
    breaches = sorted(k for k, t in checks.items() if not report[k] <= float(t))
    report["tolerances"] = {k: float(t) for k, t in checks.items()}
    report["breaches"] = breaches
    report["status"] = "ok" if not breaches else "breach"
    return report


def cmd_compare(sc, out: Path, threads=1, seed_eps=0.0):
    report = compare_report(sc, threads, seed_eps)
    out.mkdir(parents=True, exist_ok=True)
    text = f"# resmix {__version__}\n# scenario_sha256: {scenario_hash(sc)}\n" + yaml.safe_dump(report, sort_keys=True)
    (out / f"{sc['name']}_compare.yaml").write_text(text)
    sys.stdout.write(text)
    return report


def cmd_validate(sc):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        setup = build(sc)
        if sc["solver"] in ("maxwell-bloch", "all"):
            _mb_setup(sc, setup)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    sys.stdout.write(f"valid scenario {sc['name']} sha256 {scenario_hash(sc)}\n")


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def make_parser():
    parser = argparse.ArgumentParser(prog="resmix", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"resmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "compare", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="YAML scenario file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--solver", choices=SOLVERS + ("all",), help="override the scenario solver")
        p.add_argument("--threads", type=int, default=1, help="worker threads for tau slices / sweep rows")
        p.add_argument("--seed-eps", type=float, default=None, help="initial J of the canonical oracle")
        p.add_argument("--format", choices=("csv", "svg", "both"), help="override outputs.format")
        if name == "sweep":
            p.add_argument("--param", help="parameter path, e.g. medium.delta3 or mismatch_ratio")
            p.add_argument("--start", type=float)
            p.add_argument("--stop", type=float)
            p.add_argument("--count", type=int)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        if args.solver:
            sc["solver"] = args.solver
        if args.format:
            sc["outputs"]["format"] = args.format
        if args.seed_eps is not None:
            sc["oracle"]["seed_eps"] = args.seed_eps
        if args.command == "sweep":
            for key, flag in (("parameter", args.param), ("start", args.start), ("stop", args.stop), ("count", args.count)):
                if flag is not None:
                    sc["sweep"][key] = flag
        if args.threads < 1:
            raise ScenarioError("--threads must be >= 1")
        seed = float(sc["oracle"]["seed_eps"])
        if seed < 0:
            raise ScenarioError("seed_eps must be >= 0")
        out = Path(args.out)
        if args.command == "validate":
            cmd_validate(sc)
        elif args.command == "solve":
            for path in cmd_solve(sc, out, args.threads, seed):
                sys.stdout.write(f"{path}\n")
        elif args.command == "sweep":
            for path in cmd_sweep(sc, out, args.threads):
                sys.stdout.write(f"{path}\n")
        else:
            report = cmd_compare(sc, out, args.threads, seed)
            if report["breaches"]:
                sys.stderr.write(f"tolerance breach: {', '.join(report['breaches'])}\n")
                return EXIT_TOLERANCE
    except ScenarioError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (ResmixError, ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
