"""Named refinement experiments and their reports.

Each experiment builds a sequence of meshes, runs the schemes, and returns a
:class:`ConvergenceReport` whose ``checks`` hold the built-in pass/fail
thresholds.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import heat1d, hyperbolic1d, mac2d, transport1d
from .mesh import TimeGrid, alternating_mesh, random_mesh, spacings, uniform_mesh
from .problems import (burgers_riemann_data, burgers_square_wave, heat_manufactured,
                       heat_sine, mac_lw_fields, transport_bump)

__all__ = [
    "EXPERIMENTS",
    "ConvergenceReport",
    "ExperimentConfig",
    "observed_order",
    "run_experiment",
]


def observed_order(errors, hs) -> list[float]:
    """``log(e_k / e_{k+1}) / log(h_k / h_{k+1})`` for consecutive pairs."""
    errors = np.asarray(errors, dtype=np.float64)
    hs = np.asarray(hs, dtype=np.float64)
    if errors.shape != hs.shape or errors.size < 2:
        raise ValueError("need equal-length sequences with at least two entries")
    if np.any(errors <= 0) or np.any(hs <= 0):
        raise ValueError("errors and mesh sizes must be positive")
    return (np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])).tolist()


@dataclass
class ExperimentConfig:
    experiment: str
    levels: int | None = None
    mesh_family: str | None = None
    scheme: str | None = None
    cfl: float = 0.9
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.levels is not None and self.levels < 3:
            raise ValueError("at least 3 refinement levels are needed")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl safety factor must lie in (0, 1]")

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls(**json.loads(text))

    def digest(self) -> str:
        doc = asdict(self)
        doc.pop("out")
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ConvergenceReport:
    experiment: str
    config_hash: str
    columns: list[str]
    rows: list[dict]
    checks: dict[str, bool]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns + ["config_hash"])
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in self.columns] + [self.config_hash])
        return buf.getvalue()

    def summary(self) -> dict:
        # wall time is left out so repeated runs give identical files
        return {"experiment": self.experiment, "config_hash": self.config_hash,
                "passed": self.passed, "checks": self.checks,
                "columns": self.columns,
                "rows": [{c: _jsonable(row.get(c)) for c in self.columns}
                         for row in self.rows]}

    def write(self, out: str | Path) -> tuple[Path, Path]:
        out = Path(out)
        csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
        json_path = csv_path.with_suffix(".json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _doubling_steps(T: float, dt_max0: float, k: int) -> TimeGrid:
    """Level-k time grid with ``2^k`` times the level-0 step count.

    Halving dt along with h keeps the Courant number identical on every level.
    """
    return TimeGrid(T, TimeGrid.from_max_step(T, dt_max0).N * 2**k)


def _with_orders(rows: list[dict], value: str, key: str = "order", h: str = "h") -> list[float]:
    orders = observed_order([r[value] for r in rows], [r[h] for r in rows])
    rows[0][key] = None
    for r, p in zip(rows[1:], orders):
        r[key] = float(p)
    return orders


# ---------------------------------------------------------------- transport

def _transport_fd(cfg: ExperimentConfig):
    levels = cfg.levels or 4
    p = transport_bump(cfg.params.get("T", 0.5))
    rows = []
    for k in range(levels):
        m = 48 * 2**k
        if cfg.mesh_family == "random":
            mesh = random_mesh(0.0, 2.0, m, cfg.params.get("ratio_bound", 2.0), cfg.seed + k)
            tg = TimeGrid.from_max_step(p.T, cfg.cfl * spacings(mesh)[0].min() / p.a)
        else:
            mesh = uniform_mesh(0.0, 2.0, m)
            tg = _doubling_steps(p.T, cfg.cfl * 2.0 / 48 / p.a, k)
        run = transport1d.run_fd_scheme(p, mesh, tg)
        rows.append({"h": mesh.h, "dt": tg.dt, "error": transport1d.sup_error(run, p),
                     "residual": transport1d.truncation_residual(transport1d.FD3, p, mesh, tg),
                     "mass_drift": run.mass_drift()})
    orders = _with_orders(rows, "error")
    checks = {"error_order_near_1": all(0.8 <= q <= 1.2 for q in orders),
              "mass_conserved": all(r["mass_drift"] <= 1e-12 for r in rows)}
    return ["h", "dt", "error", "order", "residual", "mass_drift"], rows, checks


def _alternating_levels(cfg, p):
    """Alternating meshes with h = 1/12, 1/24, ... and matching time grids."""
    levels = cfg.levels or 4
    h0 = 1.0 / 12
    for k in range(levels):
        mesh = alternating_mesh(0.0, 2.0, h0 / 2**k)
        yield mesh, _doubling_steps(p.T, cfg.cfl * 0.75 * h0 / p.a, k)


def _transport_counterexample(cfg: ExperimentConfig):
    p = transport_bump(cfg.params.get("T", 0.5))
    rows = []
    for mesh, tg in _alternating_levels(cfg, p):
        run = transport1d.run_fv_scheme(p, mesh, tg)
        rows.append({"h": mesh.h, "dt": tg.dt,
                     "residual": transport1d.truncation_residual(transport1d.FV4, p, mesh, tg),
                     "error": transport1d.sup_error(run, p),
                     "mass_drift": run.mass_drift()})
    orders = _with_orders(rows, "error")
    r0 = rows[0]["residual"]
    checks = {
        "residual_does_not_decay": all(r0 / 2 <= r["residual"] <= 2 * r0 for r in rows),
        "error_order_1_pm_0.2": all(0.8 <= q <= 1.2 for q in orders),
        "mass_conserved": all(r["mass_drift"] <= 1e-12 for r in rows),
    }
    return ["h", "dt", "residual", "error", "order", "mass_drift"], rows, checks


def _shift_bound(cfg: ExperimentConfig):
    p = transport_bump(cfg.params.get("T", 0.5))
    rows = []
    for mesh, tg in _alternating_levels(cfg, p):
        rows.append({"h": mesh.h, "dt": tg.dt,
                     "difference": transport1d.compare_shifted(p, mesh, tg),
                     "bound": transport1d.shift_bound(p, mesh)})
    _with_orders(rows, "difference")
    checks = {"within_bound": all(r["difference"] <= r["bound"] * (1 + 1e-8) for r in rows)}
    return ["h", "dt", "difference", "bound", "order"], rows, checks


# --------------------------------------------------------------------- heat

def _heat_convergence(cfg: ExperimentConfig):
    levels = cfg.levels or 4
    rule = cfg.params.get("dt_rule", "h")
    problem, exact = heat_manufactured(cfg.params.get("T", 1.0))
    free = heat_sine(problem.T)
    rows = []
    for k in range(levels):
        m = 16 * 2**k - 1
        mesh = heat1d.dirichlet_mesh(m)
        h = 1.0 / (m + 1)
        dt = h if rule == "h" else h * h
        tg = TimeGrid(problem.T, round(problem.T / dt))
        run = heat1d.run_heat(problem, mesh, tg)
        err = run.values[1:] - exact(mesh.points[None, :], run.times[1:, None])
        l2l2 = math.sqrt(tg.dt * float(np.sum(err**2 @ mesh.widths)))
        free_run = heat1d.run_heat(free, mesh, tg)
        u0 = heat1d.CellField(mesh, free_run.values[0])
        rows.append({"h": h, "dt": tg.dt, "error": l2l2,
                     "energy": heat1d.energy_estimate(free_run),
                     "energy_bound": 0.5 * heat1d.l2_norm(u0) ** 2,
                     "balance_defect": heat1d.mass_balance_defect(run, problem)})
    orders = _with_orders(rows, "error")
    checks = {"l2l2_order_ge_1.8": all(q >= 1.8 for q in orders),
              "energy_bounded": all(r["energy"] <= r["energy_bound"] for r in rows),
              "flux_balance": all(r["balance_defect"] <= 1e-12 for r in rows)}
    return ["h", "dt", "error", "order", "energy", "energy_bound", "balance_defect"], rows, checks


def _poincare(cfg: ExperimentConfig):
    levels = cfg.levels or 4
    samples = cfg.params.get("samples", 100)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for k in range(levels):
        m = 16 * 2**k
        for family in ("uniform", "random"):
            if family == "uniform":
                mesh = heat1d.dirichlet_mesh(m - 1)
            else:
                mesh = random_mesh(0.0, 1.0, m, 3.0, cfg.seed + k)
            ratios = [heat1d.poincare_ratio(heat1d.CellField(mesh, rng.standard_normal(mesh.ncells)))
                      for _ in range(samples)]
            sine = heat1d.CellField(mesh, np.sin(np.pi * mesh.points))
            rows.append({"h": float(mesh.widths.max()), "family": family,
                         "max_ratio": max(ratios), "sine_ratio": heat1d.poincare_ratio(sine)})
    checks = {"ratio_le_1": all(r["max_ratio"] <= 1.0 for r in rows)}
    return ["h", "family", "max_ratio", "sine_ratio"], rows, checks


# ----------------------------------------------------------- conservation laws

def _flux_for(name: str, law, lo, hi):
    if name == "lax-friedrichs":
        return hyperbolic1d.lax_friedrichs_flux(law, hyperbolic1d.max_speed(law, lo, hi), lo, hi)
    return hyperbolic1d.godunov_flux(law, lo, hi)


def _burgers_shock(cfg: ExperimentConfig):
    levels = cfg.levels or 4
    uL, uR = cfg.params.get("u_left", 1.0), cfg.params.get("u_right", 0.0)
    T = cfg.params.get("T", 0.3)
    law = hyperbolic1d.burgers()
    lo, hi = min(uL, uR), max(uL, uR)
    flux = _flux_for(cfg.scheme or "godunov", law, lo, hi)
    window = (-0.3, 0.6)
    rows = []
    for k in range(levels):
        m = 64 * 2**k
        mesh = uniform_mesh(-1.0, 1.0, m)
        tg = _doubling_steps(T, cfg.cfl * (2.0 / 64) / flux.lipschitz_bound, k)
        run = hyperbolic1d.run_conservation_scheme(law, flux, mesh, tg,
                                                   burgers_riemann_data(uL, uR))
        x = mesh.points
        inside = (x > window[0]) & (x < window[1])
        exact = hyperbolic1d.burgers_riemann(uL, uR, x, T)
        l1 = float(np.sum(mesh.widths[inside] * np.abs(run.values[-1][inside] - exact[inside])))
        row = {"h": float(mesh.widths.max()), "dt": tg.dt, "l1_error": l1,
               "mass_drift": run.mass_drift()}
        if uL > uR:
            row["shock_position"] = _front_position(x[inside], run.values[-1][inside],
                                                    0.5 * (uL + uR))
            row["exact_position"] = (uL + uR) * T
        rows.append(row)
    orders = _with_orders(rows, "l1_error")
    checks = {"l1_converges": all(q >= 0.5 for q in orders),
              "mass_conserved": all(r["mass_drift"] <= 1e-12 for r in rows)}
    cols = ["h", "dt", "l1_error", "order", "mass_drift"]
    if uL > uR:
        cols += ["shock_position", "exact_position"]
        checks["shock_position_O(h)"] = all(
            abs(r["shock_position"] - r["exact_position"]) <= 4 * r["h"] for r in rows)
    return cols, rows, checks


def _front_position(x, u, level):
    # first downward crossing of `level`, linearly interpolated
    idx = np.nonzero((u[:-1] >= level) & (u[1:] < level))[0]
    if idx.size == 0:
        return float("nan")
    i = idx[-1]
    return float(x[i] + (u[i] - level) / (u[i] - u[i + 1]) * (x[i + 1] - x[i]))


def _square_wave_runs(cfg, levels, default_base):
    law = hyperbolic1d.burgers()
    T = cfg.params.get("T", 0.25)
    base = cfg.params.get("base_cells", default_base)
    names = [cfg.scheme] if cfg.scheme else ["godunov", "lax-friedrichs"]
    for name in names:
        flux = _flux_for(name, law, 0.0, 1.0)
        for k in range(levels):
            mesh = uniform_mesh(0.0, 1.0, base * 2**k)
            tg = _doubling_steps(T, cfg.cfl / base / flux.lipschitz_bound, k)
            yield law, flux, mesh, tg, hyperbolic1d.run_conservation_scheme(
                law, flux, mesh, tg, burgers_square_wave)


def _weak_bv(cfg: ExperimentConfig):
    rows = []
    for law, flux, mesh, tg, run in _square_wave_runs(cfg, cfg.levels or 4, 64):
        _, agg = hyperbolic1d.weak_bv_sum(run, law)
        h = float(mesh.widths.max())
        rows.append({"flux": flux.name, "h": h, "dt": tg.dt, "aggregate": agg,
                     "scaled": agg * math.sqrt(h)})
    checks = {}
    for name in sorted({r["flux"] for r in rows}):
        scaled = [r["scaled"] for r in rows if r["flux"] == name]
        checks[f"{name}_scaled_within_factor_3"] = max(scaled) / min(scaled) < 3.0
    return ["flux", "h", "dt", "aggregate", "scaled"], rows, checks


KAPPAS = (-0.5, 0.0, 0.5)


def _entropy(cfg: ExperimentConfig):
    rows = []
    for law, flux, mesh, tg, run in _square_wave_runs(cfg, cfg.levels or 3, 64):
        for kappa in KAPPAS:
            rows.append({"flux": flux.name, "h": float(mesh.widths.max()), "kappa": kappa,
                         "max_residual": hyperbolic1d.entropy_residual(run, flux, kappa)})
    checks = {"entropy_nonpositive": all(r["max_residual"] <= 1e-10 for r in rows)}
    # negative control: Lax-Friedrichs with half the required viscosity
    law = hyperbolic1d.burgers()
    broken = hyperbolic1d.lax_friedrichs_flux(law, 1.0, 0.0, 1.0)
    mesh = uniform_mesh(0.0, 1.0, 128)
    tg = TimeGrid.from_max_step(0.25, cfg.cfl * mesh.widths.min() / broken.lipschitz_bound)
    run = hyperbolic1d.run_conservation_scheme(law, broken, mesh, tg, burgers_square_wave)
    worst = max(hyperbolic1d.entropy_residual(run, broken, k) for k in KAPPAS)
    rows.append({"flux": "broken-lax-friedrichs", "h": float(mesh.widths.max()),
                 "kappa": None, "max_residual": worst})
    checks["negative_control_detected"] = worst > 1e-6
    return ["flux", "h", "kappa", "max_residual"], rows, checks


def _tvd(cfg: ExperimentConfig):
    rows = []
    for law, flux, mesh, tg, run in _square_wave_runs(cfg, cfg.levels or 3, 64):
        tv = np.array([hyperbolic1d.total_variation(u) for u in run.values])
        lo, hi = run.values[0].min(), run.values[0].max()
        rows.append({"flux": flux.name, "h": float(mesh.widths.max()), "dt": tg.dt,
                     "max_tv_increase": float(np.max(np.diff(tv))),
                     "tv0": float(tv[0]),
                     "below_min": float(lo - run.values.min()),
                     "above_max": float(run.values.max() - hi),
                     "mass_drift": run.mass_drift()})
    checks = {
        "tv_nonincreasing": all(r["max_tv_increase"] <= 1e-13 * r["tv0"] for r in rows),
        "invariant_interval": all(r["below_min"] <= 0 and r["above_max"] <= 0 for r in rows),
        "mass_conserved": all(r["mass_drift"] <= 1e-12 for r in rows),
    }
    cols = ["flux", "h", "dt", "tv0", "max_tv_increase", "below_min", "above_max", "mass_drift"]
    return cols, rows, checks


# ---------------------------------------------------------------------- MAC

def mac_grid_sequence(levels: int, seed: int, ratio_bound: float = 1.5):
    """Quasi-uniform grids on [0, 1]^2 with 16 * 2^k cells per direction."""
    grids = []
    for k in range(levels):
        m = 16 * 2**k
        xf = random_mesh(0.0, 1.0, m, ratio_bound, seed + 2 * k).faces
        yf = random_mesh(0.0, 1.0, m, ratio_bound, seed + 2 * k + 1).faces
        grids.append(mac2d.build_mac_grid(xf, yf))
    return grids


def mac_histories(grid, tg, rho, velocity, rho0, mode=mac2d.UPWIND):
    """Sampled histories and the scheme-generated density history on ``grid``."""
    sampled = [mac2d.sample_state(rho, velocity, grid, t, n) for n, t in enumerate(tg.times)]
    vel = [(s.u, s.v) for s in sampled]
    state = mac2d.MacState(mac2d.project_density(rho0, grid), *vel[0])
    scheme = [state.rho]
    for n in range(tg.N):
        state = mac2d.step_mass(state, tg.dt, grid, mode, velocity=vel[n + 1])
        scheme.append(state.rho)
    return np.array([s.rho for s in sampled]), vel, np.array(scheme)


def _mac_lw(cfg: ExperimentConfig):
    levels = cfg.levels or 4
    T = cfg.params.get("T", 0.5)
    mode = cfg.scheme or mac2d.UPWIND
    rho, velocity, rho0, phi = mac_lw_fields()
    ref_grid = mac2d.build_mac_grid(np.linspace(0, 1, 65), np.linspace(0, 1, 65))
    weak = mac2d.weak_form_value(rho, velocity, phi, rho0, ref_grid, TimeGrid(T, 50))
    rows = []
    for grid in mac_grid_sequence(levels, cfg.seed, cfg.params.get("ratio_bound", 1.5)):
        tg = TimeGrid.from_max_step(T, 0.4 * grid.min_side / 1.0)
        sampled, vel, scheme = mac_histories(grid, tg, rho, velocity, rho0, mode)
        lw = mac2d.lw_functional(sampled, vel, phi, grid, tg, mode)
        lw_scheme = mac2d.lw_functional(scheme, vel, phi, grid, tg, mode)
        mass = np.einsum("nij,ij->n", scheme, grid.cell_areas)
        rows.append({"h": grid.h, "dt": tg.dt, "lw_value": lw, "weak_value": weak,
                     "gap": abs(lw - weak), "scheme_lw": lw_scheme,
                     "quasi_uniformity": mac2d.quasi_uniformity_ratio(grid),
                     "mass_drift": float(np.abs(mass - mass[0]).max() / abs(mass[0]))})
    orders = _with_orders(rows, "gap")
    checks = {"gap_order_ge_0.8": all(q >= 0.8 for q in orders),
              "scheme_lw_zero": all(abs(r["scheme_lw"]) <= 1e-12 for r in rows),
              "mass_conserved": all(r["mass_drift"] <= 1e-12 for r in rows)}
    cols = ["h", "dt", "lw_value", "weak_value", "gap", "order", "scheme_lw",
            "quasi_uniformity", "mass_drift"]
    return cols, rows, checks


EXPERIMENTS: dict[str, Callable] = {
    "transport-fd": _transport_fd,
    "transport-fv-counterexample": _transport_counterexample,
    "shift-bound": _shift_bound,
    "heat-convergence": _heat_convergence,
    "poincare": _poincare,
    "burgers-shock": _burgers_shock,
    "weak-bv": _weak_bv,
    "entropy": _entropy,
    "tvd": _tvd,
    "mac-lw": _mac_lw,
}


def run_experiment(config: ExperimentConfig) -> ConvergenceReport:
    try:
        fn = EXPERIMENTS[config.experiment]
    except KeyError:
        raise ValueError(f"unknown experiment {config.experiment!r};"
                         f" choose from {sorted(EXPERIMENTS)}") from None
    start = time.perf_counter()
    columns, rows, checks = fn(config)
    report = ConvergenceReport(config.experiment, config.digest(), columns, rows,
                               {k: bool(v) for k, v in checks.items()},
                               wall_time=time.perf_counter() - start)
    if config.out:
        report.write(config.out)
    return report
