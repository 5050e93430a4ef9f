"""Upwind schemes for ``u_t + (a u)_x = 0`` with ``a > 0`` on periodic meshes.

Two schemes share the same update ``u_i <- u_i - a dt (u_i - u_{i-1}) / d_i``:

* ``FD3`` divides by ``h_{i-1/2} = x_i - x_{i-1}`` (upwinded derivative),
* ``FV4`` divides by ``h_i = (x_{i+1} - x_{i-1}) / 2`` (upwinded unknown); this
  is the finite volume scheme on the cells ``](x_{i-1}+x_i)/2, (x_i+x_{i+1})/2[``.

On the alternating mesh ``FV4`` fails the finite difference consistency
test yet still converges; see :func:`truncation_residual` and
:func:`compare_shifted`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import CFLError, Mesh1D, SchemeRun, TimeGrid, midpoint_shift, spacings

__all__ = [
    "FD3",
    "FV4",
    "TransportProblem",
    "compare_shifted",
    "exact_transport",
    "max_derivative",
    "polynomial_bump",
    "run_fd_scheme",
    "run_fv_scheme",
    "shift_bound",
    "sup_error",
    "truncation_residual",
]

FD3 = "FD3"
FV4 = "FV4"

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TransportProblem:
    """Linear transport at speed ``a`` of ``u_ini`` up to time ``T``.

    ``du_ini`` must be the derivative of ``u_ini``. When ``domain`` is given
    the exact solution is wrapped periodically into it.
    """

    a: float
    u_ini: Profile
    du_ini: Profile
    T: float
    domain: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError("advection speed must be positive")
        if not self.T > 0:
            raise ValueError("final time must be positive")


def polynomial_bump(center: float, radius: float, height: float = 1.0,
                    power: int = 4) -> tuple[Profile, Profile]:
    """``height * (1 - r^2)^power`` for ``|r| < 1``, ``r = (x - center) / radius``.

    Returns the profile and its derivative; the profile is C^{power-1}.
    """

    def u(x):
        r = (np.asarray(x, dtype=np.float64) - center) / radius
        return np.where(np.abs(r) < 1, height * (1 - r * r) ** power, 0.0)

    def du(x):
        r = (np.asarray(x, dtype=np.float64) - center) / radius
        inner = -2 * power * height * r * (1 - r * r) ** (power - 1) / radius
        return np.where(np.abs(r) < 1, inner, 0.0)

    return u, du


def _wrap(p: TransportProblem, x):
    x = np.asarray(x, dtype=np.float64)
    if p.domain is None:
        return x
    lo, hi = p.domain
    return lo + np.mod(x - lo, hi - lo)


def exact_transport(p: TransportProblem, x, t):
    """``u_ini(x - a t)`` with periodic wrap."""
    return p.u_ini(_wrap(p, np.asarray(x) - p.a * np.asarray(t)))


def _denominators(scheme_id: str, mesh: Mesh1D) -> np.ndarray:
    h_half, h_center, _ = spacings(mesh)
    if scheme_id == FD3:
        return h_half
    if scheme_id == FV4:
        return h_center
    raise ValueError(f"unknown scheme {scheme_id!r}")


def _march(u0: np.ndarray, a: float, tg: TimeGrid, denom: np.ndarray) -> np.ndarray:
    nu = a * tg.dt / denom
    out = np.empty((tg.N + 1, u0.size))
    out[0] = u0
    u = out[0]
    for n in range(tg.N):
        u = u - nu * (u - np.roll(u, 1))
        out[n + 1] = u
    return out


def _run(scheme_id, p, mesh, tg, u0) -> SchemeRun:
    denom = _denominators(scheme_id, mesh)
    ratio = p.a * tg.dt / float(denom.min())
    if ratio > 1:
        raise CFLError(f"{scheme_id}: a*dt exceeds the smallest denominator", ratio)
    if u0 is None:
        u0 = p.u_ini(mesh.points)
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape != (mesh.ncells,):
        raise ValueError("initial vector must have one entry per point")
    values = _march(u0, p.a, tg, denom)
    return SchemeRun(mesh, values, tg.times, scheme_id, ratio, weights=denom)


def run_fd_scheme(p: TransportProblem, mesh: Mesh1D, tg: TimeGrid,
                  u0=None) -> SchemeRun:
    """Upwind finite difference scheme; ``u0`` defaults to ``u_ini(x_i)``."""
    return _run(FD3, p, mesh, tg, u0)


def run_fv_scheme(p: TransportProblem, mesh: Mesh1D, tg: TimeGrid,
                  u0=None) -> SchemeRun:
    """Upwind finite volume scheme (centred-spacing denominator)."""
    return _run(FV4, p, mesh, tg, u0)


def truncation_residual(scheme_id: str, p: TransportProblem, mesh: Mesh1D,
                        tg: TimeGrid) -> float:
    """Largest value of the scheme stencil applied to the exact solution."""
    denom = _denominators(scheme_id, mesh)
    x = mesh.points
    x_prev = np.concatenate([[x[-1] - mesh.length], x[:-1]])
    t = tg.times
    now = exact_transport(p, x[None, :], t[:-1, None])
    later = exact_transport(p, x[None, :], t[1:, None])
    upwind = exact_transport(p, x_prev[None, :], t[:-1, None])
    res = (later - now) / tg.dt + p.a * (now - upwind) / denom
    return float(np.abs(res).max())


def sup_error(run: SchemeRun, p: TransportProblem) -> float:
    exact = exact_transport(p, run.mesh.points[None, :], run.times[:, None])
    return float(np.abs(run.values - exact).max())


def max_derivative(p: TransportProblem, mesh: Mesh1D, oversample: int = 10) -> float:
    """Sampled ``max |u_ini'|`` at ``oversample`` times the mesh resolution."""
    n = oversample * mesh.ncells + 1
    xs = np.linspace(mesh.faces[0], mesh.faces[-1], n)
    return float(np.abs(p.du_ini(_wrap(p, xs))).max())


def shift_bound(p: TransportProblem, mesh: Mesh1D) -> float:
    """``h * max|u_ini'|`` with ``h`` the largest point spacing."""
    return mesh.h * max_derivative(p, mesh)


def compare_shifted(p: TransportProblem, mesh: Mesh1D, tg: TimeGrid) -> float:
    """``max |u~_i^n - u_i^n|`` between FV4 on ``mesh`` and FD3 on the shifted points.

    Both runs start from ``u_ini`` sampled at their own points.
    """
    fv = run_fv_scheme(p, mesh, tg)
    fd = run_fd_scheme(p, midpoint_shift(mesh), tg)
    return float(np.abs(fd.values - fv.values).max())
