"""One-dimensional meshes, time grids and discrete fields.

All 1D transport and conservation-law experiments run on a periodic interval.
A mesh stores the cell faces ``x_{i+1/2}`` and one collocation point ``x_i``
per cell; the period is ``faces[-1] - faces[0]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = [
    "CFLError",
    "CellField",
    "Mesh1D",
    "SchemeRun",
    "SplitMix64",
    "TimeGrid",
    "alternating_mesh",
    "history_csv",
    "midpoint_shift",
    "random_mesh",
    "spacings",
    "uniform_mesh",
]


class CFLError(ValueError):
    """Raised when a time step violates the stability restriction of a scheme."""

    def __init__(self, message: str, ratio: float):
        super().__init__(f"{message} (ratio {ratio:.6g} > 1)")
        self.ratio = ratio


@dataclass(frozen=True, eq=False)
class Mesh1D:
    faces: np.ndarray
    points: np.ndarray

    def __post_init__(self) -> None:
        faces = np.asarray(self.faces, dtype=np.float64)
        points = np.asarray(self.points, dtype=np.float64)
        if faces.ndim != 1 or faces.size < 2:
            raise ValueError("need at least two faces")
        if points.shape != (faces.size - 1,):
            raise ValueError(
                f"expected {faces.size - 1} points, got {points.size}")
        if not np.all(np.isfinite(faces)) or not np.all(np.isfinite(points)):
            raise ValueError("mesh coordinates must be finite")
        if np.any(np.diff(faces) <= 0):
            raise ValueError("faces must be strictly increasing")
        if np.any(points <= faces[:-1]) or np.any(points >= faces[1:]):
            raise ValueError("every point must lie strictly inside its cell")
        faces.flags.writeable = False
        points.flags.writeable = False
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "points", points)

    @property
    def ncells(self) -> int:
        return self.points.size

    @property
    def length(self) -> float:
        """Period of the domain."""
        return float(self.faces[-1] - self.faces[0])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.faces)

    @property
    def h(self) -> float:
        """Largest distance between consecutive points (periodic)."""
        return float(np.max(spacings(self)[0]))

    def to_json(self) -> str:
        return json.dumps({"faces": self.faces.tolist(),
                           "points": self.points.tolist()})

    @classmethod
    def from_json(cls, text: str) -> Mesh1D:
        doc = json.loads(text)
        return cls(np.array(doc["faces"]), np.array(doc["points"]))


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("final time must be positive")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("step count must be an integer > 1")

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt

    @classmethod
    def from_max_step(cls, T: float, dt_max: float) -> TimeGrid:
        """Smallest uniform grid on [0, T] whose step does not exceed ``dt_max``."""
        N = max(2, math.ceil(T / dt_max * (1 - 1e-12)))
        while T / N > dt_max:
            N += 1
        return cls(T, N)


@dataclass(frozen=True, eq=False)
class CellField:
    mesh: Mesh1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.mesh.ncells,):
            raise ValueError("one value per cell required")
        object.__setattr__(self, "values", values)


@dataclass(eq=False)
class SchemeRun:
    """Full space-time history of an explicit 1D scheme.

    ``values[n, i]`` approximates the solution at ``points[i]`` and
    ``times[n]``. ``weights`` are the control-volume lengths the scheme
    conserves against.
    """

    mesh: Mesh1D
    values: np.ndarray
    times: np.ndarray
    scheme_id: str
    cfl: float
    weights: np.ndarray = field(repr=False)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def history(self) -> list[CellField]:
        return [CellField(self.mesh, u, float(t))
                for u, t in zip(self.values, self.times)]

    def __iter__(self) -> Iterator[CellField]:
        return iter(self.history)

    def mass(self) -> np.ndarray:
        """Discrete mass ``sum_i w_i u_i^n`` at every time level."""
        return self.values @ self.weights

    def mass_drift(self) -> float:
        m = self.mass()
        scale = max(float(np.abs(self.values).max() * self.weights.sum()), 1e-300)
        return float(np.max(np.abs(m - m[0])) / scale)

    def to_csv(self) -> str:
        return history_csv(self.mesh, self.values)


def history_csv(mesh: Mesh1D, values: np.ndarray) -> str:
    """Long-format CSV ``n, i, x_i, value`` of a run history."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "i", "x_i", "value"])
    for n, row in enumerate(values):
        for i, (x, u) in enumerate(zip(mesh.points, row)):
            writer.writerow([n, i, repr(float(x)), repr(float(u))])
    return buf.getvalue()


def uniform_mesh(a: float, b: float, m: int) -> Mesh1D:
    if not a < b:
        raise ValueError("need a < b")
    if int(m) != m or m < 1:
        raise ValueError("need at least one cell")
    faces = np.linspace(a, b, int(m) + 1)
    return Mesh1D(faces, 0.5 * (faces[:-1] + faces[1:]))


def _points_mesh(points: np.ndarray, period: float) -> Mesh1D:
    # faces at midpoints of consecutive points, periodic closure on the left
    left = 0.5 * (points[-1] - period + points[0])
    interior = 0.5 * (points[:-1] + points[1:])
    faces = np.concatenate([[left], interior, [left + period]])
    return Mesh1D(faces, points)


def alternating_mesh(a: float, b: float, h: float) -> Mesh1D:
    """Mesh whose points alternate gaps ``h/2`` and ``h``, starting at ``x_0 = a``.

    Cells are centred on the points: faces sit halfway between neighbouring
    points, so every cell has width ``3h/4``.
    """
    if not h > 0 or not a < b:
        raise ValueError("need h > 0 and a < b")
    pairs = (b - a) / (1.5 * h)
    k = round(pairs)
    if k < 1 or abs(pairs - k) > 1e-9 * max(1.0, pairs):
        raise ValueError(
            f"(b - a) = {b - a!r} is not a multiple of 3h/2 = {1.5 * h!r}")
    gaps = np.tile([0.5 * h, h], k)
    points = a + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
    return _points_mesh(points, b - a)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood), reproducible in any language.

    ``next_float`` returns the top 53 bits of each output scaled into [0, 1).
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def floats(self, n: int) -> np.ndarray:
        return np.array([self.next_float() for _ in range(n)])


def random_mesh(a: float, b: float, m: int, ratio_bound: float, seed: int) -> Mesh1D:
    """Random cell widths in ``[1, ratio_bound]`` (relative), rescaled to fill [a, b].

    Points are cell midpoints. ``ratio_bound == 1`` returns the uniform mesh.
    """
    if ratio_bound < 1:
        raise ValueError("ratio_bound must be >= 1")
    if ratio_bound == 1:
        return uniform_mesh(a, b, m)
    if not a < b or int(m) != m or m < 1:
        raise ValueError("need a < b and m >= 1")
    rel = 1.0 + (ratio_bound - 1.0) * SplitMix64(seed).floats(int(m))
    faces = a + (b - a) * np.concatenate([[0.0], np.cumsum(rel)]) / rel.sum()
    faces[-1] = b
    return Mesh1D(faces, 0.5 * (faces[:-1] + faces[1:]))


def spacings(mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(h_half, h_center, widths)`` with periodic closure.

    ``h_half[i] = x_i - x_{i-1}``, ``h_center[i] = (x_{i+1} - x_{i-1}) / 2``
    and ``widths[i] = x_{i+1/2} - x_{i-1/2}``.

    ``h_center`` is evaluated as the gap between consecutive point midpoints,
    the same floating point operations that give ``h_half`` on the shifted
    mesh, so the two agree bit for bit.
    """
    x = mesh.points
    L = mesh.length
    mid = _midpoints(x, L)
    return _backward_gaps(x, L), _backward_gaps(mid, L), mesh.widths


def _midpoints(x: np.ndarray, period: float) -> np.ndarray:
    nxt = np.concatenate([x[1:], [x[0] + period]])
    return 0.5 * (x + nxt)


def _backward_gaps(x: np.ndarray, period: float) -> np.ndarray:
    return x - np.concatenate([[x[-1] - period], x[:-1]])


def midpoint_shift(mesh: Mesh1D) -> Mesh1D:
    """Mesh built on the points ``(x_i + x_{i+1}) / 2``."""
    return _points_mesh(_midpoints(mesh.points, mesh.length), mesh.length)
