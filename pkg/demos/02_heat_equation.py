"""
Implicit heat equation with Dirichlet walls
===========================================

Backward Euler with two-point fluxes, a tridiagonal solve per step, and the
discrete energy and Poincare inequalities that make it stable.
"""

import math

import numpy as np

from fvlab.harness import observed_order
from fvlab.heat1d import (CellField, dirichlet_mesh, energy_estimate, l2_norm,
                          poincare_ratio, run_heat)
from fvlab.mesh import TimeGrid, random_mesh
from fvlab.problems import heat_manufactured, heat_sine

problem, exact = heat_manufactured(T=1.0)


def l2l2_error(m, dt):
    mesh = dirichlet_mesh(m)
    tg = TimeGrid(problem.T, round(problem.T / dt))
    run = run_heat(problem, mesh, tg)
    err = run.values[1:] - exact(mesh.points[None, :], run.times[1:, None])
    return math.sqrt(tg.dt * np.sum(err**2 @ mesh.widths))


# With dt = h the time error dominates and the order drifts towards 1.
# With dt = h^2 both errors are O(h^2).
for label, rule in (("dt = h  ", lambda h: h), ("dt = h^2", lambda h: h * h)):
    hs = [1 / (16 * 2**k) for k in range(4)]
    errs = [l2l2_error(round(1 / h) - 1, rule(h)) for h in hs]
    print(label, "errors", np.array(errs).round(7), "orders",
          np.round(observed_order(errs, hs), 2))

# Energy: the dissipated H^1 energy never exceeds half the initial L^2 mass.
free = heat_sine(T=1.0)
for m in (15, 63):
    mesh = dirichlet_mesh(m)
    run = run_heat(free, mesh, TimeGrid(1.0, m + 1))
    print(f"m = {m:3d}  energy {energy_estimate(run):.4f}"
          f"  <= {0.5 * l2_norm(run.history[0]) ** 2:.4f}")

# Poincare: ||u|| <= ||u||_1 on [0, 1], even on an irregular mesh.
rng = np.random.default_rng(0)
mesh = random_mesh(0.0, 1.0, 64, 3.0, seed=1)
worst = max(poincare_ratio(CellField(mesh, rng.standard_normal(64))) for _ in range(100))
smooth = poincare_ratio(CellField(mesh, np.sin(np.pi * mesh.points)))
print(f"worst random ratio {worst:.3f}; sine mode {smooth:.4f} (1/pi = {1 / math.pi:.4f})")
