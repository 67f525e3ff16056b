"""Monte Carlo counterparts of the figure curves, with agreement statistics."""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from core import analytic, montecarlo
from core.analytic import ScenarioParams
from core.errors import ConfigError
from core.montecarlo import EmpiricalDistribution, SimConfig
from core.utils.scenario_config import ScenarioConfig
from services.figure_service import (
    DEFAULT_PSI_GRID,
    DEFAULT_Q_GRID,
    FigureCurve,
    capacity_grid,
    mean_capacity_value,
    mean_sinr_value,
    ni_grid,
    outage_value,
    sinr_grid,
)
from utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_COLUMNS = [
    "scenario_id", "kind", "samples", "atom_location", "atom_frequency", "atom_mass",
    "ks_statistic", "mean", "standard_error",
]


@dataclass(frozen=True)
class SimulationResult:
    curves: List[FigureCurve]
    summary: pd.DataFrame


def histogram_frame(emp: EmpiricalDistribution) -> pd.DataFrame:
    return pd.DataFrame({
        "bin_lo": emp.edges[:-1],
        "bin_hi": emp.edges[1:],
        "count": emp.counts,
        "density": emp.histogram_density(),
    })


def ecdf_frame(emp: EmpiricalDistribution, grid: np.ndarray, theory) -> pd.DataFrame:
    return pd.DataFrame({"x": grid, "value": emp.ecdf(grid), "theory": np.asarray(theory(grid), dtype=float)})


def _summary_row(params: ScenarioParams, kind: str, emp: EmpiricalDistribution, theory_cdf, atom_mass: float = math.nan) -> Dict:
    mean, se = montecarlo.mean_estimate(emp)
    return {
        "scenario_id": params.scenario_id,
        "kind": kind,
        "samples": emp.n,
        "atom_location": emp.atom_location if emp.atom_location is not None else math.nan,
        "atom_frequency": montecarlo.atom_frequency(emp) if emp.atom_location is not None else math.nan,
        "atom_mass": atom_mass,
        "ks_statistic": montecarlo.ks_statistic(emp, theory_cdf),
        "mean": mean,
        "standard_error": se,
    }


def _distribution_figure(cfg: ScenarioConfig, sim: SimConfig, figure: int) -> SimulationResult:
    curves, rows = [], []
    su_family = figure in (2, 3, 4)
    for params in cfg.scenarios(su_family=su_family):
        if figure in (2, 3):
            kind = "ni"
            law = analytic.ni_law_multi(params)
            emp = montecarlo.simulate_ni(params, sim)
            theory, grid, atom_mass = law.cdf, ni_grid(params), law.total_atom_mass
        elif figure == 4:
            kind = "sinr"
            emp = montecarlo.simulate_sinr(params, sim)
            theory, grid, atom_mass = analytic.sinr_cdf(params), sinr_grid(), math.nan
        else:
            kind = "capacity"
            emp = montecarlo.simulate_capacity(params, sim)
            theory, grid, atom_mass = analytic.capacity_cdf(params), capacity_grid(), math.nan
        sid = params.scenario_id
        curves.append(FigureCurve(f"figure{figure}_{kind}_histogram_{sid}", histogram_frame(emp)))
        curves.append(FigureCurve(f"figure{figure}_{kind}_ecdf_{sid}", ecdf_frame(emp, grid, theory)))
        rows.append(_summary_row(params, kind, emp, theory, atom_mass))
        logger.info("Simulated %s %s (%d samples)", kind, sid, emp.n)
    return SimulationResult(curves, pd.DataFrame(rows, columns=SUMMARY_COLUMNS))


def _estimate_frame(grid: np.ndarray, estimates: List[float], errors: List[float], theory: List[float]) -> pd.DataFrame:
    return pd.DataFrame({"x": grid, "value": estimates, "standard_error": errors, "theory": theory})


def _q_sweep_figure(cfg: ScenarioConfig, sim: SimConfig, figure: int) -> SimulationResult:
    q_grid = np.asarray(cfg.q_grid or DEFAULT_Q_GRID)
    capacity = figure == 8
    kind = "mean_capacity" if capacity else "mean_sinr"
    curves, rows = [], []
    for p in sorted({p for p, _ in cfg.pairs}):
        estimates, errors, theory = [], [], []
        for q in q_grid:
            params = cfg.scenario(p, float(q))
            emp = montecarlo.simulate_capacity(params, sim) if capacity else montecarlo.simulate_sinr(params, sim)
            mean, se = montecarlo.mean_estimate(emp)
            estimates.append(mean)
            errors.append(se)
            theory.append(mean_capacity_value(params) if capacity else mean_sinr_value(params))
        curves.append(FigureCurve(f"figure{figure}_{kind}_simulated_p{p:g}_n{cfg.n_su}", _estimate_frame(q_grid, estimates, errors, theory)))
        worst = int(np.argmax(np.abs(np.subtract(estimates, theory))))
        rows.append({
            "scenario_id": cfg.scenario(p, float(q_grid[worst])).scenario_id,
            "kind": kind,
            "samples": sim.samples,
            "mean": estimates[worst],
            "standard_error": errors[worst],
        })
    return SimulationResult(curves, pd.DataFrame(rows, columns=SUMMARY_COLUMNS))


def _outage_figure(cfg: ScenarioConfig, sim: SimConfig, figure: int) -> SimulationResult:
    psi_grid = np.asarray(cfg.psi_grid or DEFAULT_PSI_GRID)
    curves, rows = [], []
    for params in cfg.scenarios():
        emp = montecarlo.simulate_sinr(params, sim)
        estimates = [montecarlo.outage_estimate(emp, psi) for psi in psi_grid]
        errors = [math.sqrt(f * (1.0 - f) / emp.n) for f in estimates]
        theory = [outage_value(params, psi) for psi in psi_grid]
        curves.append(FigureCurve(f"figure{figure}_outage_simulated_{params.scenario_id}", _estimate_frame(psi_grid, estimates, errors, theory)))
        rows.append(_summary_row(params, "outage", emp, analytic.sinr_cdf(params)))
    return SimulationResult(curves, pd.DataFrame(rows, columns=SUMMARY_COLUMNS))


def simulate(cfg: ScenarioConfig, samples: Optional[int] = None, workers: Optional[int] = None) -> SimulationResult:
    """Monte Carlo curves and summary statistics for the figure named in ``cfg``."""
    if cfg.figure is None:
        raise ConfigError("simulate needs a figure id", field="figure")
    sim = cfg.sim_config(samples=samples, workers=workers)
    logger.info("Simulating figure %d: %d samples per scenario, seed %d, %d workers", cfg.figure, sim.samples, sim.seed, sim.workers)
    if cfg.figure in (5, 8):
        result = _q_sweep_figure(cfg, sim, cfg.figure)
    elif cfg.figure == 6:
        result = _outage_figure(cfg, sim, cfg.figure)
    else:
        result = _distribution_figure(cfg, sim, cfg.figure)
    result.curves.append(FigureCurve(f"figure{cfg.figure}_simulation_summary", result.summary))
    return result
