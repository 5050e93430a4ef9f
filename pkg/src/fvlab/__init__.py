"""Finite difference and finite volume scheme laboratory.

Submodules: :mod:`~fvlab.mesh`, :mod:`~fvlab.transport1d`, :mod:`~fvlab.heat1d`,
:mod:`~fvlab.hyperbolic1d`, :mod:`~fvlab.mac2d` and the experiment
:mod:`~fvlab.harness`.
"""

from .harness import ConvergenceReport, ExperimentConfig, observed_order, run_experiment
from .mesh import (CellField, CFLError, Mesh1D, SchemeRun, TimeGrid, alternating_mesh,
                   midpoint_shift, random_mesh, spacings, uniform_mesh)

__version__ = "0.1.0"

__all__ = [
    "CFLError",
    "CellField",
    "ConvergenceReport",
    "ExperimentConfig",
    "Mesh1D",
    "SchemeRun",
    "TimeGrid",
    "alternating_mesh",
    "midpoint_shift",
    "observed_order",
    "random_mesh",
    "run_experiment",
    "spacings",
    "uniform_mesh",
]
