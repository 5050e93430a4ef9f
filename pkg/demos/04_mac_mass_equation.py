"""
Mass equation on a staggered grid
=================================

Densities live in cells and velocities on edges. Plugging sampled smooth
fields into the discrete mass operator and testing against a smooth ``phi``
approaches the continuous weak form as the grid is refined.
"""

import numpy as np

from fvlab.harness import mac_grid_sequence, mac_histories, observed_order
from fvlab.mac2d import build_mac_grid, lw_functional, quasi_uniformity_ratio, weak_form_value
from fvlab.mesh import TimeGrid
from fvlab.problems import mac_lw_fields

rho, velocity, rho0, phi = mac_lw_fields()
T = 0.5

# Reference value of the weak form on a fine uniform grid.
ref = build_mac_grid(np.linspace(0, 1, 65), np.linspace(0, 1, 65))
weak = weak_form_value(rho, velocity, phi, rho0, ref, TimeGrid(T, 50))
print(f"weak form value {weak:.6f}")

gaps, hs = [], []
for grid in mac_grid_sequence(3, seed=0):
    tg = TimeGrid.from_max_step(T, 0.4 * grid.min_side)
    sampled, vel, scheme = mac_histories(grid, tg, rho, velocity, rho0)
    lw = lw_functional(sampled, vel, phi, grid, tg)
    mass = np.einsum("nij,ij->n", scheme, grid.cell_areas)
    gaps.append(abs(lw - weak))
    hs.append(grid.h)
    print(f"{grid.nx:3d}^2 cells  quasi-uniformity {quasi_uniformity_ratio(grid):.2f}"
          f"  gap {gaps[-1]:.2e}  scheme LW {lw_functional(scheme, vel, phi, grid, tg):.1e}"
          f"  mass drift {np.ptp(mass) / mass[0]:.1e}")

print("gap orders:", np.round(observed_order(gaps, hs), 2))
