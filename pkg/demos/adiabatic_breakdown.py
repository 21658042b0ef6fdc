"""How long must the pulses be for the adiabatic solution to hold?

The Maxwell-Bloch oracle is run with ramp widths spanning three decades.
The product of the smallest eigenvalue gap along the trajectory and the
ramp width measures adiabaticity; the deviation from the adiabatic J(z)
falls as it grows.

    python demos/adiabatic_breakdown.py
"""

import numpy as np

from resmix.hamiltonian import exchange_at, solve
from resmix.model import BoundaryFields, MediumParams
from resmix.oracle import SpaceTimeGrid, counterintuitive_envelopes, integrate_mb
from resmix.regimes import trajectory_gap


def main():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    b = BoundaryFields(1.0, 1.0)
    gap = trajectory_gap(params, b, z_max=15.0)
    print(f"minimum gap along the trajectory: {gap:.4f}")
    sep = 4.0
    for width in (0.4, 1.0, 4.0, 10.0, 40.0, 400.0):
        grid = SpaceTimeGrid(tau=np.array([0.0, (2 * sep + 6) * width]), z_max=15.0, n_z=32)
        res = integrate_mb(params, b, grid, envelopes=counterintuitive_envelopes(width, separation=sep))
        J = exchange_at(res.z, solve(params, b)).J
        err = np.max(np.abs(res.eta3[-1] - J))
        print(f"  width {width:6.1f}  gap*width {gap * width:8.2f}  max |J_MB - J| = {err:.2e}")


if __name__ == "__main__":
    main()
