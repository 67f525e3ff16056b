"""Theoretical curves for figures 2-8 and parameter sweeps."""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core import analytic
from core.analytic import DensityCurve, ScenarioParams
from core.errors import ConfigError
from core.utils.scenario_config import ScenarioConfig
from utils.logger import get_logger

logger = get_logger(__name__)

FIGURE_KINDS: Dict[int, str] = {
    2: "noise-plus-interference PDF and CDF, p > q",
    3: "noise-plus-interference PDF and CDF, p < q",
    4: "SINR PDF",
    5: "mean SINR vs interference temperature",
    6: "outage probability vs threshold",
    7: "capacity PDF",
    8: "mean capacity vs interference temperature",
}
SWEEP_PARAMS = ("p", "q", "sigma2", "lambda1", "lambda2")

DEFAULT_PSI_GRID = tuple(np.linspace(0.0, 10.0, 51))
DEFAULT_Q_GRID = tuple(np.linspace(0.2, 10.0, 50))
GRID_POINTS = 401
SINR_GRID_MAX = 10.0
CAPACITY_GRID_MAX = 4.0


@dataclass(frozen=True)
class FigureCurve:
    """One CSV worth of curve data."""

    name: str
    frame: pd.DataFrame

    @property
    def filename(self) -> str:
        return f"{self.name}.csv"


def ni_grid(params: ScenarioParams) -> np.ndarray:
    """x grid for noise-plus-interference curves: the support plus one unit past the cap."""
    return np.linspace(params.sigma2, params.sigma2 + params.q + 1.0, GRID_POINTS)


def sinr_grid() -> np.ndarray:
    return np.linspace(0.0, SINR_GRID_MAX, GRID_POINTS)


def capacity_grid() -> np.ndarray:
    return np.linspace(0.0, CAPACITY_GRID_MAX, GRID_POINTS)


def curve_frame(curve: DensityCurve, atom: Optional[Tuple[float, float]] = None) -> pd.DataFrame:
    frame = pd.DataFrame({"x": curve.grid, "value": curve.values})
    if atom is not None:
        frame["atom_location"] = atom[0]
        frame["atom_mass"] = atom[1]
    return frame


# ---------------------------------------------------------------------------
# Scalar metrics with closed-form / quadrature dispatch
# ---------------------------------------------------------------------------

def _has_closed_form(params: ScenarioParams) -> bool:
    return params.is_unit_rate and params.n_su == 1


def mean_sinr_value(params: ScenarioParams) -> float:
    return analytic.mean_sinr(params) if _has_closed_form(params) else analytic.mean_sinr_numeric(params)


def outage_value(params: ScenarioParams, psi: float) -> float:
    if _has_closed_form(params):
        return analytic.outage_probability(params, psi)
    return analytic.outage_numeric(params, psi)


def mean_capacity_value(params: ScenarioParams) -> float:
    return analytic.mean_capacity(params) if _has_closed_form(params) else analytic.mean_capacity_numeric(params)


def capacity_density(params: ScenarioParams):
    if _has_closed_form(params):
        return analytic.capacity_pdf(params)
    return analytic.transform_to_capacity(analytic.sinr_pdf_multi(params))


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def ni_curves(cfg: ScenarioConfig, figure: int) -> List[FigureCurve]:
    curves = []
    for params in cfg.scenarios(su_family=True):
        law = analytic.ni_law_multi(params)
        atom = (law.atoms[0].location, law.atoms[0].mass) if law.atoms else (params.sigma2 + params.q, 0.0)
        grid = ni_grid(params)
        pdf = DensityCurve(grid, law.continuous_pdf_at(grid), f"NI pdf {params.scenario_id}")
        cdf = DensityCurve(grid, law.cdf(grid), f"NI cdf {params.scenario_id}")
        curves.append(FigureCurve(f"figure{figure}_ni_pdf_{params.scenario_id}", curve_frame(pdf, atom)))
        curves.append(FigureCurve(f"figure{figure}_ni_cdf_{params.scenario_id}", curve_frame(cdf)))
    return curves


def sinr_curves(cfg: ScenarioConfig, figure: int = 4) -> List[FigureCurve]:
    curves = []
    grid = sinr_grid()
    for params in cfg.scenarios(su_family=True):
        pdf = DensityCurve.evaluate(analytic.sinr_pdf_multi(params), grid, f"SINR pdf {params.scenario_id}")
        cdf = DensityCurve.evaluate(analytic.sinr_cdf(params), grid, f"SINR cdf {params.scenario_id}")
        curves.append(FigureCurve(f"figure{figure}_sinr_pdf_{params.scenario_id}", curve_frame(pdf)))
        curves.append(FigureCurve(f"figure{figure}_sinr_cdf_{params.scenario_id}", curve_frame(cdf)))
    return curves


def _q_sweep(cfg: ScenarioConfig, figure: int, kind: str, metric: Callable[[ScenarioParams], float]) -> List[FigureCurve]:
    q_grid = np.asarray(cfg.q_grid or DEFAULT_Q_GRID)
    curves = []
    for p in sorted({p for p, _ in cfg.pairs}):
        base = cfg.scenario(p, float(q_grid[0]))
        values = [metric(base.replace(q=float(q))) for q in q_grid]
        curve = DensityCurve(q_grid, values, f"{kind} p{p:g}")
        curves.append(FigureCurve(f"figure{figure}_{kind}_p{p:g}_n{base.n_su}", curve_frame(curve)))
    return curves


def outage_curves(cfg: ScenarioConfig, figure: int = 6) -> List[FigureCurve]:
    psi_grid = np.asarray(cfg.psi_grid or DEFAULT_PSI_GRID)
    curves = []
    for params in cfg.scenarios():
        if _has_closed_form(params):
            values = [analytic.outage_probability(params, psi) for psi in psi_grid]
        else:
            values = analytic.sinr_cdf(params)(psi_grid)
        curve = DensityCurve(psi_grid, values, f"outage {params.scenario_id}")
        curves.append(FigureCurve(f"figure{figure}_outage_{params.scenario_id}", curve_frame(curve)))
    return curves


def capacity_curves(cfg: ScenarioConfig, figure: int = 7) -> List[FigureCurve]:
    grid = capacity_grid()
    curves = []
    for params in cfg.scenarios():
        pdf = DensityCurve.evaluate(capacity_density(params), grid, f"capacity pdf {params.scenario_id}")
        curves.append(FigureCurve(f"figure{figure}_capacity_pdf_{params.scenario_id}", curve_frame(pdf)))
    return curves


def analyze(cfg: ScenarioConfig) -> List[FigureCurve]:
    """All theoretical curves of the figure named in ``cfg``."""
    figure = cfg.figure
    if figure is None:
        raise ConfigError("analyze needs a figure id", field="figure")
    logger.info("Computing figure %d (%s)", figure, FIGURE_KINDS[figure])
    if figure in (2, 3):
        return ni_curves(cfg, figure)
    if figure == 4:
        return sinr_curves(cfg, figure)
    if figure == 5:
        return _q_sweep(cfg, figure, "mean_sinr", mean_sinr_value)
    if figure == 6:
        return outage_curves(cfg, figure)
    if figure == 7:
        return capacity_curves(cfg, figure)
    return _q_sweep(cfg, figure, "mean_capacity", mean_capacity_value)


def sweep(base: ScenarioParams, param: str, values: Sequence[float], psi: float = 1.0) -> pd.DataFrame:
    """performance_metrics along a one-parameter sweep."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep '{param}'; choose one of {list(SWEEP_PARAMS)}", field="param")
    if len(values) == 0:
        raise ConfigError("empty sweep range", field="steps")
    rows = []
    for value in values:
        params = base.replace(**{param: float(value)})
        metrics = analytic.performance_metrics(params, psi)
        rows.append({param: float(value), "psi": psi, **metrics})
    logger.info("Swept %s over %d points", param, len(rows))
    return pd.DataFrame(rows, columns=[param, "psi", "mean_sinr", "outage", "mean_capacity_nats", "method"])
