"""Mass equation ``rho_t + div(rho u) = 0`` on a 2D MAC staggered grid.

Array layout (``nx`` by ``ny`` primal cells):

* ``rho[i, j]``  on cell ``[x_i, x_{i+1}] x [y_j, y_{j+1}]``,
* ``u[i, j]``    on the vertical edge ``x = x_i``, ``y in [y_j, y_{j+1}]``  (shape ``(nx+1, ny)``),
* ``v[i, j]``    on the horizontal edge ``y = y_j``, ``x in [x_i, x_{i+1}]`` (shape ``(nx, ny+1)``).

The domain is closed by impermeable walls: fluxes through boundary edges
vanish whatever the stored boundary velocities are.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .mesh import CFLError, TimeGrid

__all__ = [
    "MacGrid",
    "MacState",
    "TestFunction2D",
    "build_mac_grid",
    "cell_means",
    "edge_density",
    "lw_functional",
    "mass_residual",
    "project_density",
    "quasi_uniformity_ratio",
    "sample_state",
    "separable_test_function",
    "step_mass",
    "weak_form_value",
]

UPWIND = "upwind"
CENTERED = "centered"

_GAUSS3 = np.polynomial.legendre.leggauss(3)
_GAUSS2 = np.polynomial.legendre.leggauss(2)


@dataclass(frozen=True, eq=False)
class MacGrid:
    x_faces: np.ndarray
    y_faces: np.ndarray

    @property
    def nx(self) -> int:
        return self.x_faces.size - 1

    @property
    def ny(self) -> int:
        return self.y_faces.size - 1

    @cached_property
    def dx(self) -> np.ndarray:
        return np.diff(self.x_faces)

    @cached_property
    def dy(self) -> np.ndarray:
        return np.diff(self.y_faces)

    @cached_property
    def cell_areas(self) -> np.ndarray:
        return np.outer(self.dx, self.dy)

    @property
    def area(self) -> float:
        return float((self.x_faces[-1] - self.x_faces[0])
                     * (self.y_faces[-1] - self.y_faces[0]))

    @cached_property
    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xc = 0.5 * (self.x_faces[:-1] + self.x_faces[1:])
        yc = 0.5 * (self.y_faces[:-1] + self.y_faces[1:])
        return np.meshgrid(xc, yc, indexing="ij")

    # vertical edges (first dual mesh)
    @cached_property
    def vertical_lengths(self) -> np.ndarray:
        return np.broadcast_to(self.dy, (self.nx + 1, self.ny)).copy()

    @cached_property
    def vertical_dual_areas(self) -> np.ndarray:
        half = 0.5 * np.concatenate([[0.0], self.dx]) + 0.5 * np.concatenate([self.dx, [0.0]])
        return np.outer(half, self.dy)

    @cached_property
    def vertical_midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        yc = 0.5 * (self.y_faces[:-1] + self.y_faces[1:])
        return np.meshgrid(self.x_faces, yc, indexing="ij")

    # horizontal edges (second dual mesh)
    @cached_property
    def horizontal_lengths(self) -> np.ndarray:
        return np.broadcast_to(self.dx[:, None], (self.nx, self.ny + 1)).copy()

    @cached_property
    def horizontal_dual_areas(self) -> np.ndarray:
        half = 0.5 * np.concatenate([[0.0], self.dy]) + 0.5 * np.concatenate([self.dy, [0.0]])
        return np.outer(self.dx, half)

    @cached_property
    def horizontal_midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        xc = 0.5 * (self.x_faces[:-1] + self.x_faces[1:])
        return np.meshgrid(xc, self.y_faces, indexing="ij")

    @property
    def min_side(self) -> float:
        return float(min(self.dx.min(), self.dy.min()))

    @property
    def h(self) -> float:
        """Largest edge length over both directions."""
        return float(max(self.dx.max(), self.dy.max()))

    def to_json(self) -> str:
        return json.dumps({"x_faces": self.x_faces.tolist(),
                           "y_faces": self.y_faces.tolist()})


def build_mac_grid(x_faces, y_faces) -> MacGrid:
    xs = np.array(x_faces, dtype=np.float64)
    ys = np.array(y_faces, dtype=np.float64)
    for name, f in (("x_faces", xs), ("y_faces", ys)):
        if f.ndim != 1 or f.size < 2:
            raise ValueError(f"{name} needs at least two entries")
        if not np.all(np.isfinite(f)) or np.any(np.diff(f) <= 0):
            raise ValueError(f"{name} must be finite and strictly increasing")
    xs.flags.writeable = False
    ys.flags.writeable = False
    return MacGrid(xs, ys)


def quasi_uniformity_ratio(grid: MacGrid) -> float:
    """``max(hbar1 / hmin2, hbar2 / hmin1)`` over vertical (1) and horizontal (2) edges."""
    h1_max, h1_min = grid.dy.max(), grid.dy.min()
    h2_max, h2_min = grid.dx.max(), grid.dx.min()
    return float(max(h1_max / h2_min, h2_max / h1_min))


@dataclass(frozen=True, eq=False)
class MacState:
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    n: int = 0

    def check(self, grid: MacGrid) -> None:
        nx, ny = grid.nx, grid.ny
        if (self.rho.shape != (nx, ny) or self.u.shape != (nx + 1, ny)
                or self.v.shape != (nx, ny + 1)):
            raise ValueError("state arrays do not match the grid")

    def mass(self, grid: MacGrid) -> float:
        return float(np.sum(grid.cell_areas * self.rho))

    def to_json(self, grid: MacGrid) -> str:
        return json.dumps({"x_faces": grid.x_faces.tolist(),
                           "y_faces": grid.y_faces.tolist(),
                           "rho": self.rho.ravel().tolist(),
                           "u": self.u.ravel().tolist(),
                           "v": self.v.ravel().tolist()})


@dataclass(frozen=True)
class TestFunction2D:
    """Smooth ``phi(x, y, t)`` with its partial derivatives, all vectorised."""

    __test__ = False  # not a pytest class

    phi: Callable
    dt_phi: Callable
    dx_phi: Callable
    dy_phi: Callable


def separable_test_function(center: tuple[float, float], radius: float,
                            t_stop: float, power: int = 4) -> TestFunction2D:
    """``b(x) b(y) c(t)`` with polynomial bumps ``(1 - r^2)^power``.

    ``c(t) = (1 - t/t_stop)^power`` before ``t_stop`` and zero after, so the
    support stays inside the square of half-width ``radius`` and ``[0, t_stop]``.
    """
    cx, cy = center

    def bump(s, c):
        r = (s - c) / radius
        inside = np.abs(r) < 1
        val = np.where(inside, (1 - r * r) ** power, 0.0)
        der = np.where(inside, -2 * power * r * (1 - r * r) ** (power - 1) / radius, 0.0)
        return val, der

    def clock(t):
        t = np.asarray(t, dtype=np.float64)
        s = np.clip(1 - t / t_stop, 0.0, None)
        return s**power, -power * s ** (power - 1) / t_stop

    def phi(x, y, t):
        return bump(x, cx)[0] * bump(y, cy)[0] * clock(t)[0]

    def dt_phi(x, y, t):
        return bump(x, cx)[0] * bump(y, cy)[0] * clock(t)[1]

    def dx_phi(x, y, t):
        return bump(x, cx)[1] * bump(y, cy)[0] * clock(t)[0]

    def dy_phi(x, y, t):
        return bump(x, cx)[0] * bump(y, cy)[1] * clock(t)[0]

    return TestFunction2D(phi, dt_phi, dx_phi, dy_phi)


def _cell_nodes(grid: MacGrid):
    # 3x3 Gauss nodes per cell, arrays of shape (nx, ny, 3, 3)
    s, w = _GAUSS3
    xq = 0.5 * (grid.x_faces[:-1, None] + grid.x_faces[1:, None]) + 0.5 * grid.dx[:, None] * s
    yq = 0.5 * (grid.y_faces[:-1, None] + grid.y_faces[1:, None]) + 0.5 * grid.dy[:, None] * s
    X = np.broadcast_to(xq[:, None, :, None], (grid.nx, grid.ny, 3, 3))
    Y = np.broadcast_to(yq[None, :, None, :], (grid.nx, grid.ny, 3, 3))
    W = 0.25 * np.outer(w, w)
    return X, Y, W


def cell_means(func: Callable, grid: MacGrid) -> np.ndarray:
    """Cell averages of ``func(x, y)`` by 3x3 tensor Gauss quadrature."""
    X, Y, W = _cell_nodes(grid)
    return np.einsum("ijab,ab->ij", func(X, Y), W)


def project_density(rho0: Callable, grid: MacGrid) -> np.ndarray:
    """Initial densities as cell means of ``rho0``."""
    return cell_means(rho0, grid)


def edge_density(rho_K, rho_L, u_edge, mode: str = UPWIND):
    """Density on the edge ``K|L`` whose normal points from K to L.

    Upwind picks the cell the flow leaves; a zero velocity falls back to the
    centred average.
    """
    rho_K = np.asarray(rho_K, dtype=np.float64)
    rho_L = np.asarray(rho_L, dtype=np.float64)
    u_edge = np.asarray(u_edge, dtype=np.float64)
    centred = 0.5 * (rho_K + rho_L)
    if mode == CENTERED:
        return centred
    if mode != UPWIND:
        raise ValueError(f"unknown edge density mode {mode!r}")
    return np.where(u_edge > 0, rho_K, np.where(u_edge < 0, rho_L, centred))


def _edge_fluxes(state: MacState, grid: MacGrid, mode: str):
    """``|sigma| rho_sigma u_sigma`` on every edge; zero on the walls."""
    rho = state.rho
    Fx = np.zeros((grid.nx + 1, grid.ny))
    Fy = np.zeros((grid.nx, grid.ny + 1))
    u_in = state.u[1:-1]
    Fx[1:-1] = grid.vertical_lengths[1:-1] * edge_density(rho[:-1], rho[1:], u_in, mode) * u_in
    v_in = state.v[:, 1:-1]
    Fy[:, 1:-1] = (grid.horizontal_lengths[:, 1:-1]
                   * edge_density(rho[:, :-1], rho[:, 1:], v_in, mode) * v_in)
    return Fx, Fy


def _divergence(state: MacState, grid: MacGrid, mode: str) -> np.ndarray:
    Fx, Fy = _edge_fluxes(state, grid, mode)
    return (Fx[1:] - Fx[:-1] + Fy[:, 1:] - Fy[:, :-1]) / grid.cell_areas


def mass_residual(state_n: MacState, state_np1: MacState, dt: float, grid: MacGrid,
                  mode: str = UPWIND) -> np.ndarray:
    """Discrete mass operator per primal cell, using velocities of ``state_n``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    state_n.check(grid)
    return (state_np1.rho - state_n.rho) / dt + _divergence(state_n, grid, mode)


def _cfl_ratio(state: MacState, dt: float, grid: MacGrid) -> float:
    """``dt * max_K sum_sigma |sigma| (u.n)^+ / |K|`` over interior edges.

    At most 1 means every upwind update is a convex combination.
    """
    out_x = np.zeros((grid.nx + 1, grid.ny))
    out_y = np.zeros((grid.nx, grid.ny + 1))
    out_x[1:-1] = state.u[1:-1]
    out_y[:, 1:-1] = state.v[:, 1:-1]
    Lx, Ly = grid.vertical_lengths, grid.horizontal_lengths
    outflow = (Lx[1:] * np.maximum(out_x[1:], 0) + Lx[:-1] * np.maximum(-out_x[:-1], 0)
               + Ly[:, 1:] * np.maximum(out_y[:, 1:], 0)
               + Ly[:, :-1] * np.maximum(-out_y[:, :-1], 0))
    return float(dt * np.max(outflow / grid.cell_areas))


def step_mass(state: MacState, dt: float, grid: MacGrid, mode: str = UPWIND,
              velocity: tuple[np.ndarray, np.ndarray] | None = None) -> MacState:
    """Explicit step making the mass residual vanish.

    ``velocity`` optionally replaces the edge velocities carried to level n+1.
    """
    state.check(grid)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if mode == UPWIND:
        ratio = _cfl_ratio(state, dt, grid)
        if ratio > 1:
            raise CFLError("upwind mass step", ratio)
    rho = state.rho - dt * _divergence(state, grid, mode)
    u, v = velocity if velocity is not None else (state.u, state.v)
    return MacState(rho, u, v, state.n + 1)


def sample_state(rho: Callable, vel: Callable, grid: MacGrid, t: float, n: int = 0) -> MacState:
    """Cell means of ``rho(., t)`` and edge-midpoint values of ``vel(., t)``."""
    r = cell_means(lambda x, y: rho(x, y, t), grid)
    u = vel(*grid.vertical_midpoints, t)[0]
    v = vel(*grid.horizontal_midpoints, t)[1]
    shape_u = (grid.nx + 1, grid.ny)
    shape_v = (grid.nx, grid.ny + 1)
    return MacState(r, np.broadcast_to(u, shape_u).astype(np.float64),
                    np.broadcast_to(v, shape_v).astype(np.float64), n)


def lw_functional(rho_history: np.ndarray, u_history: Sequence, phi: TestFunction2D,
                  grid: MacGrid, tg: TimeGrid, mode: str = UPWIND) -> float:
    """``sum_n dt sum_K |K| C(rho, u)_K^n phi_K^n`` for ``n = 0 .. N-1``.

    ``u_history[n]`` is the pair ``(u, v)`` of edge velocities at level n and
    ``phi_K^n`` the cell mean of ``phi(., t_n)``.
    """
    rho_history = np.asarray(rho_history)
    if rho_history.shape[0] < tg.N + 1 or len(u_history) < tg.N:
        raise ValueError("histories shorter than the time grid")
    total = 0.0
    for n in range(tg.N):
        t = tg.times[n]
        u, v = u_history[n]
        now = MacState(rho_history[n], np.asarray(u), np.asarray(v), n)
        nxt = MacState(rho_history[n + 1], now.u, now.v, n + 1)
        C = mass_residual(now, nxt, tg.dt, grid, mode)
        phi_K = cell_means(lambda x, y: phi.phi(x, y, t), grid)
        total += tg.dt * float(np.sum(grid.cell_areas * C * phi_K))
    return total


def _space_integral(func: Callable, grid: MacGrid) -> float:
    return float(np.sum(grid.cell_areas * cell_means(func, grid)))


def weak_form_value(rho: Callable, vel: Callable, phi: TestFunction2D, rho0: Callable,
                    grid: MacGrid, tg: TimeGrid) -> float:
    """``-int rho0 phi(., 0) - int int (rho phi_t + rho u . grad phi)``.

    3x3 Gauss per cell of ``grid`` in space, 2-point Gauss per slab of ``tg``.
    """
    value = -_space_integral(lambda x, y: rho0(x, y) * phi.phi(x, y, 0.0), grid)
    s, w = _GAUSS2
    for n in range(tg.N):
        t0 = tg.times[n]
        for sk, wk in zip(s, w):
            t = t0 + 0.5 * tg.dt * (1 + sk)

            def integrand(x, y, t=t):
                r = rho(x, y, t)
                u1, u2 = vel(x, y, t)
                return r * (phi.dt_phi(x, y, t) + u1 * phi.dx_phi(x, y, t)
                            + u2 * phi.dy_phi(x, y, t))

            value -= 0.5 * tg.dt * wk * _space_integral(integrand, grid)
    return value
