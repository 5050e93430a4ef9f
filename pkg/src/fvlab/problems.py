"""Reference problems shared by the experiment harness, the demos and the tests."""

from __future__ import annotations

import numpy as np

from .heat1d import HeatProblem
from .mac2d import TestFunction2D, separable_test_function
from .transport1d import TransportProblem, polynomial_bump

__all__ = [
    "burgers_riemann_data",
    "burgers_square_wave",
    "heat_manufactured",
    "heat_sine",
    "mac_lw_fields",
    "transport_bump",
]


def transport_bump(T: float = 0.5) -> TransportProblem:
    """Unit-speed transport of a C^3 bump on the periodic interval [0, 2).

    The support [0.2, 0.8] stays clear of the wrap point up to ``T = 1.2``.
    """
    u, du = polynomial_bump(center=0.5, radius=0.3)
    return TransportProblem(1.0, u, du, T, domain=(0.0, 2.0))


def heat_manufactured(T: float = 1.0) -> tuple[HeatProblem, callable]:
    """``u = exp(-t) sin(pi x)`` with the matching source; returns (problem, exact)."""

    def exact(x, t):
        return np.exp(-t) * np.sin(np.pi * x)

    def source(x, t):
        return (np.pi**2 - 1.0) * exact(x, t)

    def u_ini(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > 0) & (x < 1), np.sin(np.pi * x), 0.0)

    return HeatProblem(u_ini, T, source), exact


def heat_sine(T: float = 0.25) -> HeatProblem:
    def u_ini(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > 0) & (x < 1), np.sin(np.pi * x), 0.0)

    return HeatProblem(u_ini, T)


def burgers_riemann_data(u_left: float, u_right: float, x0: float = 0.0):
    def u_ini(x):
        return np.where(np.asarray(x) < x0, u_left, u_right).astype(np.float64)

    return u_ini


def burgers_square_wave(x):
    """1 on [0.1, 0.4), 0 elsewhere: a shock at 0.4 and a fan at 0.1."""
    x = np.asarray(x, dtype=np.float64)
    return np.where((x >= 0.1) & (x < 0.4), 1.0, 0.0)


def mac_lw_fields():
    """Smooth non-solution pair on [0, 1]^2 for the staggered consistency study.

    ``rho = 2 + sin(x + y - 2t) w``, ``u = (w, w)`` with ``w`` an interior
    bump vanishing outside ``[0.1, 0.9]^2``. Returns
    ``(rho, velocity, rho0, test_function)``.
    """

    def bump(s):
        r = (s - 0.5) / 0.4
        return np.where(np.abs(r) < 1, (1 - r * r) ** 4, 0.0)

    def w(x, y):
        return bump(x) * bump(y)

    def rho(x, y, t):
        return 2.0 + np.sin(x + y - 2.0 * t) * w(x, y)

    def velocity(x, y, t):
        ww = w(x, y) + 0.0 * t
        return ww, ww

    def rho0(x, y):
        return rho(x, y, 0.0)

    phi: TestFunction2D = separable_test_function((0.45, 0.55), 0.3, t_stop=0.4)
    return rho, velocity, rho0, phi
