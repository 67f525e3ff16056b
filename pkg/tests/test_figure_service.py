"""Tests for figure curves, sweeps and exports."""
import json
import math

import numpy as np
import pandas as pd
import pytest

from core import analytic
from core.analytic import ScenarioParams
from core.errors import ConfigError
from core.utils.scenario_config import parse_scenario_config
from services import figure_service
from services.export_service import export_csv, export_json, write_export


def test_ni_curves_carry_atom_columns():
    cfg = parse_scenario_config({"figure": 2, "p": 4, "q": 2})
    curves = figure_service.analyze(cfg)
    pdf = curves[0].frame
    assert curves[0].filename == "figure2_ni_pdf_p4_q2_n1.csv"
    assert (pdf["atom_location"] == 3.0).all()
    assert pdf["atom_mass"].iloc[0] == pytest.approx(math.exp(-0.5))
    assert len(pdf) == figure_service.GRID_POINTS


def test_sinr_curves_per_su_count():
    cfg = parse_scenario_config({"figure": 4, "p": 4, "q": 2, "n_su": 2})
    names = [c.name for c in figure_service.analyze(cfg)]
    assert names == [
        "figure4_sinr_pdf_p4_q2_n1", "figure4_sinr_cdf_p4_q2_n1",
        "figure4_sinr_pdf_p4_q2_n2", "figure4_sinr_cdf_p4_q2_n2",
    ]


def test_mean_sinr_sweep_curve():
    cfg = parse_scenario_config({"figure": 5, "p": [2, 4], "q_grid": [1, 2, 4]})
    curves = figure_service.analyze(cfg)
    assert [c.name for c in curves] == ["figure5_mean_sinr_p2_n1", "figure5_mean_sinr_p4_n1"]
    p4 = curves[1].frame
    assert p4["value"].iloc[1] == pytest.approx(analytic.mean_sinr(ScenarioParams(p=4.0, q=2.0)))
    assert (curves[1].frame["value"] > curves[0].frame["value"]).all()


def test_outage_curve_is_a_cdf():
    cfg = parse_scenario_config({"figure": 6, "p": 2, "q": 4, "psi_grid": {"from": 0, "to": 10, "steps": 11}})
    values = figure_service.analyze(cfg)[0].frame["value"].to_numpy()
    assert values[0] == 0.0
    assert np.all(np.diff(values) >= 0.0)
    assert values[-1] < 1.0


def test_multi_su_outage_uses_laplace_cdf():
    cfg = parse_scenario_config({"figure": 6, "p": 4, "q": 2, "n_su": 2, "psi_grid": [1.0]})
    value = figure_service.analyze(cfg)[0].frame["value"].iloc[0]
    params = ScenarioParams(p=4.0, q=2.0, n_su=2)
    assert value == pytest.approx(analytic.outage_numeric(params, 1.0), abs=1e-8)


def test_capacity_curve_for_general_rates_uses_transform():
    cfg = parse_scenario_config({"figure": 7, "p": 4, "q": 2, "lambda1": 2, "sigma2": 1.5})
    frame = figure_service.analyze(cfg)[0].frame
    assert frame["value"].iloc[0] > 0.0
    dx = frame["x"].iloc[1] - frame["x"].iloc[0]
    assert float(np.sum(frame["value"]) * dx) == pytest.approx(1.0, abs=0.02)


def test_analyze_requires_figure():
    with pytest.raises(ConfigError):
        figure_service.analyze(parse_scenario_config({"p": 4, "q": 2}))


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(ConfigError):
        figure_service.sweep(ScenarioParams(p=4.0, q=2.0), "n_su", [1, 2])
    with pytest.raises(ConfigError):
        figure_service.sweep(ScenarioParams(p=4.0, q=2.0), "q", [])


def test_export_csv_round_trips_doubles(tmp_path):
    frame = pd.DataFrame({"x": [0.1, 1.0 / 3.0], "value": [math.pi, 1e-300]})
    path = write_export(export_csv(frame, "table.csv"), tmp_path / "nested")
    back = pd.read_csv(path, float_precision="round_trip")
    assert back["x"].tolist() == frame["x"].tolist()
    assert back["value"].tolist() == frame["value"].tolist()


def test_export_json_replaces_non_finite(tmp_path):
    data, name = export_json({"a": np.float64(math.nan), "b": [np.int64(3), math.inf], "c": True}, "r.json")
    assert name == "r.json"
    assert json.loads(data) == {"a": None, "b": [3, None], "c": True}
