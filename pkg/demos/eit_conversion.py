"""Depleted EIT conversion with equal inputs, three ways.

The closed Arth form, the general elliptic solution and the canonical ODE
oracle are evaluated on one grid; the Maxwell-Bloch oracle then propagates
counterintuitively ramped pulses through the same medium.

    python demos/eit_conversion.py
"""

import numpy as np

from resmix.hamiltonian import atomic_state_at, exchange_at, solve
from resmix.model import BoundaryFields, MediumParams
from resmix.oracle import IntegratorConfig, SpaceTimeGrid, counterintuitive_envelopes, integrate_canonical, integrate_mb
from resmix.regimes import eit_depleted, eit_kappa


def main():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    boundary = BoundaryFields(eta10=1.0, eta20=1.0)
    sol = solve(params, boundary)
    print(f"entrance eigenvalue {sol.lam:g}, kappa_e = {eit_kappa(params, 1.0):.6f}")

    z = np.linspace(0.0, 40.0, 9)
    closed = eit_depleted(z, params, 1.0)
    general = exchange_at(z, sol).J
    oracle = integrate_canonical(params, boundary, z, IntegratorConfig(rtol=1e-12, atol=1e-14), kappa=sol.kappa).J
    pops = np.abs(atomic_state_at(z, sol)) ** 2
    print(f"{'z':>6} {'Arth':>12} {'elliptic':>12} {'canonical':>12} {'|c1|^2':>8} {'|c2|^2':>8} {'|c3|^2':>8}")
    for row in zip(z, closed, general, oracle, *pops.T):
        print("{:6.1f} {:12.9f} {:12.9f} {:12.9f} {:8.4f} {:8.4f} {:8.4f}".format(*row))

    width, sep = 30.0, 4.0
    grid = SpaceTimeGrid(tau=np.array([0.0, (2 * sep + 6) * width]), z_max=15.0, n_z=32)
    res = integrate_mb(params, boundary, grid, envelopes=counterintuitive_envelopes(width, separation=sep))
    J = exchange_at(res.z, sol).J
    print(f"Maxwell-Bloch vs adiabatic over z <= 15: max |dJ| = {np.max(np.abs(res.eta3[-1] - J)):.2e}")


if __name__ == "__main__":
    main()
