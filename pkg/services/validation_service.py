"""
Validation grid: closed forms against quadrature oracles and Monte Carlo.

Every check produces exactly one report row.  Closed forms are looked up
through a ClosedForms bundle so that a deliberately perturbed formula can be
pushed through the same grid.
"""
import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from core import analytic, montecarlo, oracle
from core.analytic import ScenarioParams
from core.errors import ConfigError
from core.montecarlo import EmpiricalDistribution, SimConfig
from core.special_functions import exp_integral_gamma0, upper_incomplete_gamma
from core.utils.scenario_config import ScenarioConfig
from services.figure_service import DEFAULT_PSI_GRID, DEFAULT_Q_GRID, ni_grid, sinr_grid
from utils.logger import get_logger

logger = get_logger(__name__)

ORACLE_TOL = 1e-8
REDUCTION_TOL = 1e-10
RECURRENCE_TOL = 1e-10
KS_TOL = 0.005
OUTAGE_MC_TOL = 0.003
SE_MULTIPLIER = 3.0
KS_ALPHA = 1e-3

NORMALIZATION_VALUES = (0.5, 1.0, 2.0, 4.0)
REFERENCE_PAIRS = ((4.0, 2.0), (2.0, 4.0))
DEFAULT_MEAN_PAIRS = ((2.0, 4.0), (4.0, 2.0), (2.0, 2.0), (4.0, 4.0))
DEFAULT_PSI_VALUES = (0.5, 1.0, 2.0, 4.0)
RATIO_GRID = np.linspace(0.0, 50.0, 51)
CROSSING_GRID = np.linspace(0.01, 3.99, 400)
GENERAL_SCENARIO = ScenarioParams(p=4.0, q=2.0, sigma2=1.5, lambda1=2.0, lambda2=0.5)
GAMMA_GRID_A = (0.5, 2.5) + tuple(float(a) for a in range(1, 11))
GAMMA_GRID_X = (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
E1_DRAWS = 1000
DETERMINISM_SAMPLES = 3 * montecarlo.CHUNK_SIZE + 17
DETERMINISM_WORKERS = (1, 4, 16)

GROUPS = (
    "special_functions", "normalization", "density_oracle", "mean_sinr", "outage",
    "mean_capacity", "monte_carlo", "reduction", "determinism",
)

REPORT_COLUMNS = [
    "metric", "scenario_id", "theory", "oracle", "simulation", "simulation_se",
    "discrepancy", "tolerance", "passed",
]


@dataclass(frozen=True)
class ValidationRow:
    metric: str
    scenario_id: str
    theory: float
    oracle: float = math.nan
    simulation: float = math.nan
    simulation_se: float = math.nan
    discrepancy: float = 0.0
    tolerance: float = 0.0
    passed: bool = False


@dataclass(frozen=True)
class ValidationReport:
    rows: Tuple[ValidationRow, ...]

    @property
    def passed_count(self) -> int:
        return sum(1 for row in self.rows if row.passed)

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def all_passed(self) -> bool:
        return self.passed_count == self.total

    @property
    def summary(self) -> str:
        return f"{self.passed_count}/{self.total} checks passed"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=REPORT_COLUMNS)

    def to_dict(self) -> Dict:
        return {
            "summary": {"passed": self.passed_count, "total": self.total, "all_passed": self.all_passed},
            "rows": [asdict(row) for row in self.rows],
        }


@dataclass(frozen=True)
class ClosedForms:
    """The formulas under test."""

    ni_law: Callable = analytic.ni_law_multi
    ni_law_single: Callable = analytic.ni_law_single
    sinr_pdf_unit: Callable = analytic.sinr_pdf_single_unit
    sinr_pdf_general: Callable = analytic.sinr_pdf_single_general
    sinr_pdf_multi: Callable = analytic.sinr_pdf_multi
    sinr_cdf: Callable = analytic.sinr_cdf
    mean_sinr: Callable = analytic.mean_sinr
    outage: Callable = analytic.outage_probability
    mean_capacity: Callable = analytic.mean_capacity
    capacity_pdf: Callable = analytic.capacity_pdf


@dataclass(frozen=True)
class Check:
    group: str
    metric: str
    scenario_id: str
    run: Callable[[ClosedForms], ValidationRow]


class _SampleCache:
    """SINR and NI samples shared between checks of one run."""

    def __init__(self, sim: SimConfig):
        self.sim = sim
        self._sinr: Dict[ScenarioParams, EmpiricalDistribution] = {}
        self._ni: Dict[ScenarioParams, EmpiricalDistribution] = {}

    def sinr(self, params: ScenarioParams) -> EmpiricalDistribution:
        if params not in self._sinr:
            self._sinr[params] = montecarlo.simulate_sinr(params, self.sim)
        return self._sinr[params]

    def ni(self, params: ScenarioParams) -> EmpiricalDistribution:
        if params not in self._ni:
            self._ni[params] = montecarlo.simulate_ni(params, self.sim)
        return self._ni[params]


def _compare(metric: str, params_id: str, theory: float, reference: float, tol: float, simulation: bool = False, se: float = math.nan) -> ValidationRow:
    discrepancy = abs(theory - reference)
    return ValidationRow(
        metric=metric,
        scenario_id=params_id,
        theory=float(theory),
        oracle=math.nan if simulation else float(reference),
        simulation=float(reference) if simulation else math.nan,
        simulation_se=se,
        discrepancy=float(discrepancy),
        tolerance=float(tol),
        passed=bool(discrepancy <= tol),
    )


def _worst_point(f: Callable, g: Callable, grid: Sequence[float]) -> Tuple[float, float]:
    diffs = [(abs(float(f(x)) - float(g(x))), x) for x in grid]
    _, x = max(diffs)
    return float(f(x)), float(g(x))


# ---------------------------------------------------------------------------
# Check factories
# ---------------------------------------------------------------------------

def _special_function_checks() -> List[Check]:
    def recurrence(_: ClosedForms) -> ValidationRow:
        worst = 0.0
        for a, x in itertools.product(GAMMA_GRID_A, GAMMA_GRID_X):
            lhs = upper_incomplete_gamma(a + 1.0, x)
            rhs = a * upper_incomplete_gamma(a, x) + x ** a * math.exp(-x)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        return ValidationRow("gamma_recurrence", "grid", worst, 0.0, discrepancy=worst, tolerance=RECURRENCE_TOL, passed=worst <= RECURRENCE_TOL)

    def e1_bounds(_: ClosedForms) -> ValidationRow:
        xs = np.random.default_rng(config.SEED).exponential(2.0, E1_DRAWS) + 1e-6
        violations = 0
        for x in xs:
            value = exp_integral_gamma0(x)
            if not 0.5 * math.exp(-x) * math.log1p(2.0 / x) < value < math.exp(-x) * math.log1p(1.0 / x):
                violations += 1
        return ValidationRow("e1_bounds", "random", float(violations), 0.0, discrepancy=float(violations), tolerance=0.0, passed=violations == 0)

    return [
        Check("special_functions", "gamma_recurrence", "grid", recurrence),
        Check("special_functions", "e1_bounds", "random", e1_bounds),
    ]


def _normalization_checks() -> List[Check]:
    checks = []
    for p, q, n in itertools.product(NORMALIZATION_VALUES, NORMALIZATION_VALUES, (1, 2, 3)):
        params = ScenarioParams(p=p, q=q, n_su=n)

        def ni_mass(forms: ClosedForms, params=params) -> ValidationRow:
            return _compare("ni_normalization", params.scenario_id, 1.0, oracle.law_normalization(forms.ni_law(params)), ORACLE_TOL)

        def sinr_mass(forms: ClosedForms, params=params) -> ValidationRow:
            return _compare("sinr_normalization", params.scenario_id, 1.0, oracle.density_mass(forms.sinr_pdf_multi(params)).value, ORACLE_TOL)

        checks.append(Check("normalization", "ni_normalization", params.scenario_id, ni_mass))
        checks.append(Check("normalization", "sinr_normalization", params.scenario_id, sinr_mass))
    return checks


def _ratio_check(metric: str, params: ScenarioParams, density: Callable[[ClosedForms], Callable], law: Callable[[ClosedForms], object]) -> Check:
    def run(forms: ClosedForms) -> ValidationRow:
        handle = density(forms)
        denom = law(forms)

        def reference(z: float) -> float:
            return oracle.ratio_density(params.lambda1, params.p, denom, z)

        theory, ref = _worst_point(handle, reference, RATIO_GRID)
        return _compare(metric, params.scenario_id, theory, ref, ORACLE_TOL)

    return Check("density_oracle", metric, params.scenario_id, run)


def _density_oracle_checks() -> List[Check]:
    checks = []
    for p, q in REFERENCE_PAIRS:
        single = ScenarioParams(p=p, q=q)
        checks.append(_ratio_check(
            "sinr_pdf_unit_vs_ratio", single,
            lambda forms, s=single: forms.sinr_pdf_unit(s), lambda forms, s=single: forms.ni_law_single(s),
        ))
        for n in (1, 2, 3):
            multi = single.replace(n_su=n)
            checks.append(_ratio_check(
                "sinr_pdf_multi_vs_ratio", multi,
                lambda forms, m=multi: forms.sinr_pdf_multi(m), lambda forms, m=multi: forms.ni_law(m),
            ))
    general = GENERAL_SCENARIO
    checks.append(_ratio_check(
        "sinr_pdf_general_vs_ratio", general,
        lambda forms: forms.sinr_pdf_general(general), lambda forms: forms.ni_law_single(general),
    ))
    general_multi = general.replace(n_su=2)
    checks.append(_ratio_check(
        "sinr_pdf_multi_vs_ratio", general_multi,
        lambda forms: forms.sinr_pdf_multi(general_multi), lambda forms: forms.ni_law(general_multi),
    ))
    return checks


def _moment_checks(
    group: str,
    pairs: Sequence[Tuple[float, float]],
    closed: Callable[[ClosedForms, ScenarioParams], float],
    weight: oracle.Weight,
    samples: _SampleCache,
    transform: Callable[[np.ndarray], np.ndarray],
) -> List[Check]:
    checks = []
    for p, q in pairs:
        params = ScenarioParams(p=p, q=q)

        def vs_oracle(forms: ClosedForms, params=params) -> ValidationRow:
            reference = oracle.functional_mean(forms.sinr_pdf_multi(params), weight)
            return _compare(group, params.scenario_id, closed(forms, params), reference, ORACLE_TOL)

        def vs_simulation(forms: ClosedForms, params=params) -> ValidationRow:
            values = transform(samples.sinr(params).sorted_samples)
            mean = float(np.mean(values))
            se = float(np.std(values, ddof=1) / math.sqrt(values.size))
            return _compare(f"{group}_simulation", params.scenario_id, closed(forms, params), mean, SE_MULTIPLIER * se, simulation=True, se=se)

        checks.append(Check(group, group, params.scenario_id, vs_oracle))
        checks.append(Check(group, f"{group}_simulation", params.scenario_id, vs_simulation))
    return checks


def _mean_sinr_checks(pairs, samples: _SampleCache) -> List[Check]:
    checks = _moment_checks("mean_sinr", pairs, lambda forms, params: forms.mean_sinr(params), oracle.Weight.IDENTITY, samples, lambda z: z)

    def ordering(forms: ClosedForms) -> ValidationRow:
        q_grid = np.linspace(10.0 / len(DEFAULT_Q_GRID), 10.0, len(DEFAULT_Q_GRID))
        margin = min(
            forms.mean_sinr(ScenarioParams(p=4.0, q=q)) - forms.mean_sinr(ScenarioParams(p=2.0, q=q)) for q in q_grid
        )
        return ValidationRow("mean_sinr_ordering", "p4_vs_p2", margin, 0.0, discrepancy=max(0.0, -margin), tolerance=0.0, passed=margin > 0)

    checks.append(Check("mean_sinr", "mean_sinr_ordering", "p4_vs_p2", ordering))
    return checks


def _mean_capacity_checks(pairs, samples: _SampleCache) -> List[Check]:
    checks = _moment_checks("mean_capacity", pairs, lambda forms, params: forms.mean_capacity(params), oracle.Weight.LOG1P, samples, np.log1p)

    def crossing(forms: ClosedForms) -> ValidationRow:
        low_p = forms.capacity_pdf(ScenarioParams(p=2.0, q=4.0))
        high_p = forms.capacity_pdf(ScenarioParams(p=4.0, q=2.0))
        diff = np.asarray(low_p(CROSSING_GRID)) - np.asarray(high_p(CROSSING_GRID))
        signs = np.sign(diff[diff != 0])
        changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
        return ValidationRow("capacity_pdf_crossing", "p2_q4_vs_p4_q2", float(changes), 1.0, discrepancy=0.0, tolerance=0.0, passed=changes >= 1)

    checks.append(Check("mean_capacity", "capacity_pdf_crossing", "p2_q4_vs_p4_q2", crossing))
    return checks


def _outage_checks(pairs, psi_values: Sequence[float], samples: _SampleCache, mc_tol: float) -> List[Check]:
    checks = []
    for (p, q), psi in itertools.product(pairs, psi_values):
        params = ScenarioParams(p=p, q=q)
        sid = f"{params.scenario_id}_psi{psi:g}"

        def vs_oracle(forms: ClosedForms, params=params, psi=psi, sid=sid) -> ValidationRow:
            reference = oracle.density_cdf(forms.sinr_pdf_multi(params), psi)
            return _compare("outage", sid, forms.outage(params, psi), reference, ORACLE_TOL)

        def vs_simulation(forms: ClosedForms, params=params, psi=psi, sid=sid) -> ValidationRow:
            emp = samples.sinr(params)
            estimate = montecarlo.outage_estimate(emp, psi)
            se = math.sqrt(estimate * (1.0 - estimate) / emp.n)
            return _compare("outage_simulation", sid, forms.outage(params, psi), estimate, mc_tol, simulation=True, se=se)

        checks.append(Check("outage", "outage", sid, vs_oracle))
        checks.append(Check("outage", "outage_simulation", sid, vs_simulation))

    def ordering(forms: ClosedForms) -> ValidationRow:
        margin = min(
            forms.outage(ScenarioParams(p=2.0, q=4.0), psi) - forms.outage(ScenarioParams(p=4.0, q=2.0), psi)
            for psi in DEFAULT_PSI_GRID
        )
        return ValidationRow("outage_ordering", "p2_q4_vs_p4_q2", margin, 0.0, discrepancy=max(0.0, -margin), tolerance=0.0, passed=margin >= 0)

    checks.append(Check("outage", "outage_ordering", "p2_q4_vs_p4_q2", ordering))
    return checks


def _monte_carlo_checks(samples: _SampleCache, ks_tol: float) -> List[Check]:
    checks = []
    for (p, q), n in itertools.product(REFERENCE_PAIRS, (1, 2, 3)):
        params = ScenarioParams(p=p, q=q, n_su=n)

        def ni_ks(forms: ClosedForms, params=params) -> ValidationRow:
            ks = montecarlo.ks_statistic(samples.ni(params), forms.ni_law(params).cdf)
            return ValidationRow("ni_ks", params.scenario_id, ks, discrepancy=ks, tolerance=ks_tol, passed=ks <= ks_tol)

        def atom(forms: ClosedForms, params=params) -> ValidationRow:
            emp = samples.ni(params)
            mass = forms.ni_law(params).total_atom_mass
            tol = montecarlo.binomial_tolerance(mass, emp.n, SE_MULTIPLIER)
            se = montecarlo.binomial_tolerance(mass, emp.n, 1.0)
            return _compare("ni_atom_frequency", params.scenario_id, mass, montecarlo.atom_frequency(emp), tol, simulation=True, se=se)

        def sinr_ks(forms: ClosedForms, params=params) -> ValidationRow:
            ks = montecarlo.ks_statistic(samples.sinr(params), forms.sinr_cdf(params))
            return ValidationRow("sinr_ks", params.scenario_id, ks, discrepancy=ks, tolerance=ks_tol, passed=ks <= ks_tol)

        checks.append(Check("monte_carlo", "ni_ks", params.scenario_id, ni_ks))
        checks.append(Check("monte_carlo", "ni_atom_frequency", params.scenario_id, atom))
        checks.append(Check("monte_carlo", "sinr_ks", params.scenario_id, sinr_ks))
    return checks


def _reduction_checks() -> List[Check]:
    checks = []
    for p, q in REFERENCE_PAIRS:
        params = ScenarioParams(p=p, q=q)
        sid = params.scenario_id

        def ni(forms: ClosedForms, params=params, sid=sid) -> ValidationRow:
            grid = ni_grid(params)
            multi, single = forms.ni_law(params), forms.ni_law_single(params)
            gap = max(
                oracle.vectorized_max_difference(multi.continuous_pdf_at, single.continuous_pdf_at, grid),
                oracle.vectorized_max_difference(multi.cdf, single.cdf, grid),
                abs(multi.total_atom_mass - single.total_atom_mass),
            )
            return ValidationRow("ni_reduction", sid, gap, 0.0, discrepancy=gap, tolerance=REDUCTION_TOL, passed=gap <= REDUCTION_TOL)

        def sinr(forms: ClosedForms, params=params, sid=sid) -> ValidationRow:
            grid = sinr_grid()
            unit = forms.sinr_pdf_unit(params)
            gap = max(
                oracle.vectorized_max_difference(forms.sinr_pdf_multi(params), unit, grid),
                oracle.vectorized_max_difference(forms.sinr_pdf_general(params), unit, grid),
            )
            return ValidationRow("sinr_reduction", sid, gap, 0.0, discrepancy=gap, tolerance=REDUCTION_TOL, passed=gap <= REDUCTION_TOL)

        checks.append(Check("reduction", "ni_reduction", sid, ni))
        checks.append(Check("reduction", "sinr_reduction", sid, sinr))
    return checks


def _determinism_check(seed: int) -> List[Check]:
    params = ScenarioParams(p=4.0, q=2.0, n_su=2)

    def run(_: ClosedForms) -> ValidationRow:
        streams = [
            montecarlo.sinr_samples(params, SimConfig(samples=DETERMINISM_SAMPLES, seed=seed, workers=w))
            for w in DETERMINISM_WORKERS
        ]
        identical = all(np.array_equal(streams[0], other) for other in streams[1:])
        return ValidationRow("worker_determinism", params.scenario_id, float(identical), 1.0, discrepancy=0.0 if identical else 1.0, tolerance=0.0, passed=identical)

    return [Check("determinism", "worker_determinism", params.scenario_id, run)]


def _require_closed_form_scenario(cfg: ScenarioConfig) -> None:
    """The closed forms under test cover one SU with unit rates; anything else in a validation config is an error."""
    for field, unit in (("sigma2", 1.0), ("lambda1", 1.0), ("lambda2", 1.0), ("n_su", 1)):
        value = getattr(cfg, field)
        if value != unit:
            raise ConfigError(f"validation runs the unit-rate single-SU closed forms; got {field}={value:g}", field=field)


def build_checks(
    cfg: Optional[ScenarioConfig] = None,
    quick: bool = False,
    groups: Optional[Sequence[str]] = None,
    samples: Optional[int] = None,
) -> List[Check]:
    """
    The acceptance grid as a flat list of checks.

    Args:
        cfg: validation scenario (pairs for the moment and outage checks, ψ grid, seed, workers);
            rates and SU count must be the unit single-SU defaults
        quick: use the quick sample count and widen Monte Carlo tolerances to match it
        groups: restrict to these check groups (see GROUPS)
        samples: explicit Monte Carlo sample count, overrides ``quick``
    """
    selected = tuple(groups) if groups else GROUPS
    unknown = set(selected) - set(GROUPS)
    if unknown:
        raise ConfigError(f"unknown check groups: {sorted(unknown)}")

    if cfg is not None:
        _require_closed_form_scenario(cfg)
    pairs = cfg.pairs if cfg is not None else DEFAULT_MEAN_PAIRS
    outage_pairs = cfg.pairs if cfg is not None else REFERENCE_PAIRS
    psi_values = cfg.psi_grid if cfg is not None and cfg.psi_grid else DEFAULT_PSI_VALUES
    seed = cfg.seed if cfg is not None else config.SEED
    workers = cfg.workers if cfg is not None else config.WORKERS
    n_samples = samples or (config.QUICK_SAMPLES if quick else (cfg.samples if cfg is not None else config.SAMPLES))
    sim = SimConfig(samples=n_samples, seed=seed, workers=workers)
    cache = _SampleCache(sim)

    ks_tol, outage_tol = KS_TOL, OUTAGE_MC_TOL
    if quick or samples:
        ks_tol = max(KS_TOL, montecarlo.dkw_bound(n_samples, KS_ALPHA))
        outage_tol = max(OUTAGE_MC_TOL, montecarlo.binomial_tolerance(0.5, n_samples, SE_MULTIPLIER))

    factories = {
        "special_functions": _special_function_checks,
        "normalization": _normalization_checks,
        "density_oracle": _density_oracle_checks,
        "mean_sinr": lambda: _mean_sinr_checks(pairs, cache),
        "outage": lambda: _outage_checks(outage_pairs, psi_values, cache, outage_tol),
        "mean_capacity": lambda: _mean_capacity_checks(pairs, cache),
        "monte_carlo": lambda: _monte_carlo_checks(cache, ks_tol),
        "reduction": _reduction_checks,
        "determinism": lambda: _determinism_check(seed),
    }
    checks: List[Check] = []
    for group in GROUPS:
        if group in selected:
            checks.extend(factories[group]())
    logger.debug("Built %d validation checks (%d Monte Carlo samples)", len(checks), n_samples)
    return checks


def run_validation(checks: Sequence[Check], forms: Optional[ClosedForms] = None) -> ValidationReport:
    """Run every check once; one row per check, in order."""
    forms = forms or ClosedForms()
    rows = []
    for check in checks:
        row = check.run(forms)
        if not row.passed:
            logger.warning("Check failed: %s %s (discrepancy %.3g > %.3g)", row.metric, row.scenario_id, row.discrepancy, row.tolerance)
        rows.append(row)
    report = ValidationReport(tuple(rows))
    logger.info("Validation: %s", report.summary)
    return report
