"""Implicit two-point flux scheme for the heat equation on [0, 1].

Homogeneous Dirichlet conditions are imposed through two boundary nodes
``x = 0`` and ``x = 1`` whose values are pinned to zero. Interior unknowns
live at the mesh points; face spacings are ``h_{i+1/2} = x_{i+1} - x_i``
including the two boundary gaps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import CellField, Mesh1D, TimeGrid, history_csv

__all__ = [
    "HeatProblem",
    "HeatRun",
    "TridiagonalSystem",
    "dirichlet_mesh",
    "energy_estimate",
    "face_spacings",
    "h10_norm",
    "heat_flux",
    "implicit_heat_step",
    "l2_norm",
    "mass_balance_defect",
    "poincare_ratio",
    "run_heat",
]


def _zero_source(x, t):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class HeatProblem:
    u_ini: Callable
    T: float
    source: Callable = _zero_source

    def __post_init__(self) -> None:
        ends = np.asarray(self.u_ini(np.array([0.0, 1.0])), dtype=np.float64)
        if np.any(np.abs(ends) > 1e-12):
            raise ValueError("u_ini must vanish at x = 0 and x = 1")
        if not self.T > 0:
            raise ValueError("final time must be positive")


@dataclass(eq=False)
class TridiagonalSystem:
    """``lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[1:] += self.lower[1:] * u[:-1]
        out[:-1] += self.upper[:-1] * u[1:]
        return out

    def solve(self) -> np.ndarray:
        # Thomas elimination; stable without pivoting for diagonally dominant rows
        n = self.diag.size
        c = np.empty(n)
        d = np.empty(n)
        c[0] = self.upper[0] / self.diag[0]
        d[0] = self.rhs[0] / self.diag[0]
        for i in range(1, n):
            m = self.diag[i] - self.lower[i] * c[i - 1]
            c[i] = self.upper[i] / m if i < n - 1 else 0.0
            d[i] = (self.rhs[i] - self.lower[i] * d[i - 1]) / m
        u = np.empty(n)
        u[-1] = d[-1]
        for i in range(n - 2, -1, -1):
            u[i] = d[i] - c[i] * u[i + 1]
        return u


def dirichlet_mesh(m: int) -> Mesh1D:
    """``m`` interior nodes ``x_i = i/(m+1)`` with cells centred on them.

    Every control volume and every face spacing equals ``1/(m+1)``; the
    half cells next to the boundary belong to the Dirichlet nodes.
    """
    if m < 1:
        raise ValueError("need at least one interior node")
    h = 1.0 / (m + 1)
    points = h * np.arange(1, m + 1)
    faces = h * (np.arange(m + 1) + 0.5)
    return Mesh1D(faces, points)


def face_spacings(mesh: Mesh1D) -> np.ndarray:
    """``h_{i+1/2}`` for the ``M + 1`` faces, boundary nodes at 0 and 1."""
    x = np.concatenate([[0.0], mesh.points, [1.0]])
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("mesh points must lie strictly inside ]0, 1[")
    return h


def heat_flux(u_left, u_right, h_half):
    """Two-point diffusive flux ``-(u_right - u_left) / h_half``."""
    h_half = np.asarray(h_half, dtype=np.float64)
    if np.any(h_half <= 0):
        raise ValueError("face spacing must be positive")
    return -(np.asarray(u_right) - np.asarray(u_left)) / h_half


def _padded(u: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], u, [0.0]])


def _face_fluxes(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    p = _padded(u)
    return heat_flux(p[:-1], p[1:], h)


def implicit_heat_step(field: CellField, dt: float, problem: HeatProblem,
                       rtol: float = 1e-12) -> CellField:
    """Advance one backward Euler step of size ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    mesh = field.mesh
    h = face_spacings(mesh)
    vol = mesh.widths
    t_new = field.time + dt
    inv = 1.0 / h
    system = TridiagonalSystem(
        lower=np.concatenate([[0.0], -inv[1:-1]]),
        diag=vol / dt + inv[:-1] + inv[1:],
        upper=np.concatenate([-inv[1:-1], [0.0]]),
        rhs=vol * field.values / dt + vol * problem.source(mesh.points, t_new),
    )
    u = system.solve()
    resid = np.abs(system.matvec(u) - system.rhs).max()
    scale = np.abs(system.diag * u).max() + np.abs(system.rhs).max()
    if resid > rtol * max(scale, 1e-300):
        raise ArithmeticError(f"tridiagonal residual {resid:.3e} too large")
    return CellField(mesh, u, t_new)


@dataclass(eq=False)
class HeatRun:
    mesh: Mesh1D
    values: np.ndarray
    times: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def history(self) -> list[CellField]:
        return [CellField(self.mesh, u, float(t))
                for u, t in zip(self.values, self.times)]

    def to_csv(self) -> str:
        return history_csv(self.mesh, self.values)


def run_heat(problem: HeatProblem, mesh: Mesh1D, tg: TimeGrid) -> HeatRun:
    field = CellField(mesh, problem.u_ini(mesh.points), 0.0)
    values = [field.values]
    for n in range(tg.N):
        field = implicit_heat_step(field, tg.dt, problem)
        values.append(field.values)
    return HeatRun(mesh, np.array(values), tg.times)


def l2_norm(field: CellField) -> float:
    return float(np.sqrt(np.sum(field.mesh.widths * field.values**2)))


def h10_norm(field: CellField) -> float:
    """Discrete H^1_0 norm with zero boundary values."""
    h = face_spacings(field.mesh)
    jumps = np.diff(_padded(field.values))
    return float(np.sqrt(np.sum(h * (jumps / h) ** 2)))


def poincare_ratio(field: CellField) -> float:
    """``||u||_{L^2} / ||u||_{H^1_0,d}``; at most 1 on [0, 1]."""
    denom = h10_norm(field)
    if denom == 0.0:
        raise ValueError("poincare_ratio undefined for the zero field")
    return l2_norm(field) / denom


def energy_estimate(run: HeatRun) -> float:
    """``sum_n dt ||u^{n+1}||^2_{H^1_0,d}``, bounded by ``||u^0||^2_{L^2} / 2``."""
    dt = run.dt
    return float(sum(dt * h10_norm(f) ** 2 for f in run.history[1:]))


def mass_balance_defect(run: HeatRun, problem: HeatProblem) -> float:
    """Largest mismatch between the change of ``sum |K| u`` and the boundary fluxes.

    Interior face fluxes telescope, so each step must satisfy
    ``sum |K| (u^{n+1} - u^n) / dt = F_{1/2} - F_{M+1/2} + sum |K| g``.
    """
    mesh = run.mesh
    h = face_spacings(mesh)
    vol = mesh.widths
    worst = 0.0
    for n in range(run.values.shape[0] - 1):
        u_new = run.values[n + 1]
        F = _face_fluxes(u_new, h)
        change = vol @ (u_new - run.values[n]) / run.dt
        source = vol @ problem.source(mesh.points, run.times[n + 1])
        scale = np.abs(F).max() + np.abs(change) + np.abs(source) + 1e-300
        worst = max(worst, abs(change - (F[0] - F[-1] + source)) / scale)
    return float(worst)
