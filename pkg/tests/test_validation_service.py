"""Tests for the validation grid."""
import dataclasses
import math

import pytest

from core import analytic
from core.errors import ConfigError
from core.utils.scenario_config import parse_scenario_config
from services import validation_service
from services.validation_service import ClosedForms, ValidationRow, build_checks, run_validation

SMALL = 20_000


def test_closed_form_groups_pass():
    checks = build_checks(groups=["special_functions", "reduction", "density_oracle"])
    report = run_validation(checks)
    failed = [(r.metric, r.scenario_id, r.discrepancy) for r in report.rows if not r.passed]
    assert not failed
    assert report.all_passed
    assert report.summary == f"{len(checks)}/{len(checks)} checks passed"


def test_one_row_per_check():
    checks = build_checks(groups=["special_functions", "reduction"])
    report = run_validation(checks)
    assert report.total == len(checks)
    assert [r.metric for r in report.rows] == [c.metric for c in checks]


def test_unknown_group_rejected():
    with pytest.raises(ConfigError):
        build_checks(groups=["nope"])


def test_groups_keep_declared_order():
    checks = build_checks(groups=["reduction", "special_functions"])
    assert checks[0].group == "special_functions"
    assert checks[-1].group == "reduction"


def test_perturbed_mean_sinr_is_caught():
    cfg = parse_scenario_config({"p": [2, 4], "q": [4, 2], "samples": SMALL, "workers": 2})
    checks = build_checks(cfg, groups=["mean_sinr"], samples=SMALL)
    perturbed = ClosedForms(mean_sinr=lambda params: 1.01 * analytic.mean_sinr(params))
    report = run_validation(checks, forms=perturbed)
    oracle_rows = [r for r in report.rows if r.metric == "mean_sinr"]
    assert len(oracle_rows) == 2
    assert not any(r.passed for r in oracle_rows)
    assert not report.all_passed
    assert all(r.discrepancy > r.tolerance for r in oracle_rows)


def test_unperturbed_mean_sinr_oracle_rows_pass():
    cfg = parse_scenario_config({"p": [2, 4], "q": [4, 2], "samples": SMALL, "workers": 2})
    report = run_validation(build_checks(cfg, groups=["mean_sinr"], samples=SMALL))
    for row in report.rows:
        if row.metric in ("mean_sinr", "mean_sinr_ordering"):
            assert row.passed, row


def test_perturbed_outage_is_caught():
    cfg = parse_scenario_config({"p": 4, "q": 2, "psi_grid": [1.0], "samples": SMALL, "workers": 2})
    checks = build_checks(cfg, groups=["outage"], samples=SMALL)
    perturbed = ClosedForms(outage=lambda params, psi: min(1.0, analytic.outage_probability(params, psi) + 0.01))
    rows = [r for r in run_validation(checks, forms=perturbed).rows if r.metric == "outage"]
    assert rows and not any(r.passed for r in rows)


def test_simulation_rows_carry_standard_errors():
    cfg = parse_scenario_config({"p": 4, "q": 2, "psi_grid": [1.0], "samples": SMALL, "workers": 2})
    report = run_validation(build_checks(cfg, groups=["outage"], samples=SMALL))
    sim_rows = [r for r in report.rows if r.metric == "outage_simulation"]
    assert sim_rows
    for row in sim_rows:
        assert math.isnan(row.oracle)
        assert row.simulation_se > 0.0
        # small samples widen the tolerance to the binomial band
        assert row.tolerance >= validation_service.OUTAGE_MC_TOL


def test_determinism_check_passes():
    report = run_validation(build_checks(groups=["determinism"]))
    assert report.total == 1
    assert report.all_passed


def test_report_frame_and_dict():
    report = validation_service.ValidationReport((
        ValidationRow("a", "s1", 1.0, 1.0, discrepancy=0.0, tolerance=1e-8, passed=True),
        ValidationRow("b", "s2", 1.0, 2.0, discrepancy=1.0, tolerance=1e-8, passed=False),
    ))
    frame = report.to_frame()
    assert list(frame.columns) == validation_service.REPORT_COLUMNS
    assert len(frame) == 2
    payload = report.to_dict()
    assert payload["summary"] == {"passed": 1, "total": 2, "all_passed": False}
    assert payload["rows"][1]["metric"] == "b"


def test_closed_forms_default_to_analytic():
    forms = ClosedForms()
    assert forms.mean_sinr is analytic.mean_sinr
    assert dataclasses.replace(forms, mean_sinr=abs).mean_sinr is abs


@pytest.mark.parametrize(
    "field, value", [("sigma2", 2), ("lambda1", 3), ("lambda2", 0.5), ("n_su", 2)]
)
def test_config_outside_closed_forms_rejected(field, value):
    cfg = parse_scenario_config({"p": [2], "q": [4], field: value})
    with pytest.raises(ConfigError) as exc:
        build_checks(cfg, groups=["special_functions"])
    assert exc.value.field == field


def test_outage_checks_follow_config_pairs():
    cfg = parse_scenario_config({"p": [2, 3], "q": [4, 1], "psi_grid": [0.5, 2.0], "samples": SMALL, "workers": 2})
    checks = build_checks(cfg, groups=["outage"], samples=SMALL)
    ids = {c.scenario_id for c in checks if c.metric == "outage"}
    assert ids == {"p2_q4_n1_psi0.5", "p2_q4_n1_psi2", "p3_q1_n1_psi0.5", "p3_q1_n1_psi2"}


def test_recurrence_row_covers_integer_shapes_and_wide_x():
    assert set(range(1, 11)) <= set(validation_service.GAMMA_GRID_A)
    assert min(validation_service.GAMMA_GRID_X) <= 0.01
    assert max(validation_service.GAMMA_GRID_X) >= 50.0
    row = run_validation(build_checks(groups=["special_functions"])).rows[0]
    assert row.metric == "gamma_recurrence"
    assert row.passed
