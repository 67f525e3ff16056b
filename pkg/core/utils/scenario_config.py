"""
Scenario configuration files.

A scenario config is a flat JSON object.  Unknown fields are rejected and
every problem is reported as a ConfigError naming the field and, where it
can be found, the line.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import config
from core.analytic import ScenarioParams
from core.errors import ConfigError, DomainError
from core.montecarlo import SimConfig

ALLOWED_FIELDS = (
    "p", "q", "sigma2", "lambda1", "lambda2", "n_su",
    "samples", "seed", "workers", "bins", "figure", "psi_grid", "q_grid",
)
FIGURE_IDS = tuple(range(2, 9))
_GRID_KEYS = {"from", "to", "steps"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario file: one or more (p, q) pairs plus run settings."""

    pairs: Tuple[Tuple[float, float], ...]
    sigma2: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    n_su: int = 1
    samples: int = config.SAMPLES
    seed: int = config.SEED
    workers: int = config.WORKERS
    bins: int = config.BINS
    figure: Optional[int] = None
    psi_grid: Optional[Tuple[float, ...]] = None
    q_grid: Optional[Tuple[float, ...]] = None

    def scenario(self, p: float, q: float, n_su: Optional[int] = None) -> ScenarioParams:
        return ScenarioParams(
            p=p, q=q, sigma2=self.sigma2, lambda1=self.lambda1, lambda2=self.lambda2,
            n_su=self.n_su if n_su is None else n_su,
        )

    def scenarios(self, su_family: bool = False) -> List[ScenarioParams]:
        """One ScenarioParams per (p, q) pair; with ``su_family`` one per n = 1..n_su as well."""
        counts = range(1, self.n_su + 1) if su_family else (self.n_su,)
        return [self.scenario(p, q, n) for p, q in self.pairs for n in counts]

    def sim_config(self, samples: Optional[int] = None, workers: Optional[int] = None) -> SimConfig:
        return SimConfig(
            samples=self.samples if samples is None else samples,
            seed=self.seed,
            workers=self.workers if workers is None else workers,
            bins=self.bins,
        )


def _line_of(text: str, field: str) -> Optional[int]:
    needle = f'"{field}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _number(data: Dict[str, Any], field: str, text: str, default: float) -> float:
    if field not in data:
        return default
    value = data[field]
    if not _is_number(value):
        raise ConfigError(f"expected a number, got {value!r}", field=field, line=_line_of(text, field))
    return float(value)


def _integer(data: Dict[str, Any], field: str, text: str, default: Optional[int], minimum: int = 1) -> Optional[int]:
    if field not in data:
        return default
    value = data[field]
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"expected an integer >= {minimum}, got {value!r}", field=field, line=_line_of(text, field))
    return value


def _number_list(data: Dict[str, Any], field: str, text: str) -> Optional[List[float]]:
    if field not in data:
        return None
    value = data[field]
    values = value if isinstance(value, list) else [value]
    if not values or not all(_is_number(v) for v in values):
        raise ConfigError("expected a number or a nonempty list of numbers", field=field, line=_line_of(text, field))
    return [float(v) for v in values]


def parse_grid(value: Union[Sequence[float], Dict[str, Any]], field: str, line: Optional[int] = None) -> Tuple[float, ...]:
    """A grid is either an explicit list or {"from": a, "to": b, "steps": k}."""
    if isinstance(value, dict):
        if set(value) != _GRID_KEYS:
            raise ConfigError(f"range grid needs exactly the keys {sorted(_GRID_KEYS)}", field=field, line=line)
        start, stop, steps = value["from"], value["to"], value["steps"]
        if not (_is_number(start) and _is_number(stop)):
            raise ConfigError("range bounds must be numbers", field=field, line=line)
        if isinstance(steps, bool) or not isinstance(steps, int):
            raise ConfigError(f"steps must be an integer, got {steps!r}", field=field, line=line)
        if steps < 1:
            raise ConfigError("empty sweep range", field=field, line=line)
        if steps > 1 and not start < stop:
            raise ConfigError("range grid needs from < to", field=field, line=line)
        return tuple(float(v) for v in np.linspace(start, stop, steps))
    if isinstance(value, list):
        if not value:
            raise ConfigError("empty grid", field=field, line=line)
        if not all(_is_number(v) for v in value):
            raise ConfigError("grid entries must be numbers", field=field, line=line)
        grid = tuple(float(v) for v in value)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid must be strictly increasing", field=field, line=line)
        return grid
    raise ConfigError("grid must be a list or a {from, to, steps} object", field=field, line=line)


def _pairs(p_values: List[float], q_values: List[float], text: str) -> Tuple[Tuple[float, float], ...]:
    if len(p_values) == 1:
        p_values = p_values * len(q_values)
    if len(q_values) == 1:
        q_values = q_values * len(p_values)
    if len(p_values) != len(q_values):
        raise ConfigError(
            f"p and q lists must have equal length ({len(p_values)} != {len(q_values)})",
            field="q", line=_line_of(text, "q"),
        )
    return tuple(zip(p_values, q_values))


def parse_scenario_config(data: Any, text: str = "") -> ScenarioConfig:
    """Validate a decoded JSON object; ``text`` is the source, used for line numbers."""
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a JSON object")
    for field in data:
        if field not in ALLOWED_FIELDS:
            raise ConfigError("unknown field", field=field, line=_line_of(text, field))

    p_values = _number_list(data, "p", text)
    q_values = _number_list(data, "q", text)
    figure = _integer(data, "figure", text, None, minimum=2)
    if figure is not None and figure not in FIGURE_IDS:
        raise ConfigError(f"figure must be one of {list(FIGURE_IDS)}", field="figure", line=_line_of(text, "figure"))
    if p_values is None:
        raise ConfigError("missing required field", field="p")
    # sweeps over q need no fixed q
    if q_values is None:
        if "q_grid" not in data:
            raise ConfigError("missing required field", field="q")
        q_values = [1.0]

    grids = {}
    for field in ("psi_grid", "q_grid"):
        grids[field] = parse_grid(data[field], field, _line_of(text, field)) if field in data else None
    if grids["psi_grid"] is not None and min(grids["psi_grid"]) < 0:
        raise ConfigError("thresholds must be nonnegative", field="psi_grid", line=_line_of(text, "psi_grid"))
    if grids["q_grid"] is not None and min(grids["q_grid"]) <= 0:
        raise ConfigError("interference temperatures must be positive", field="q_grid", line=_line_of(text, "q_grid"))

    try:
        parsed = ScenarioConfig(
            pairs=_pairs(p_values, q_values, text),
            sigma2=_number(data, "sigma2", text, 1.0),
            lambda1=_number(data, "lambda1", text, 1.0),
            lambda2=_number(data, "lambda2", text, 1.0),
            n_su=_integer(data, "n_su", text, 1),
            samples=_integer(data, "samples", text, config.SAMPLES),
            seed=_integer(data, "seed", text, config.SEED, minimum=0),
            workers=_integer(data, "workers", text, config.WORKERS),
            bins=_integer(data, "bins", text, config.BINS),
            figure=figure,
            psi_grid=grids["psi_grid"],
            q_grid=grids["q_grid"],
        )
        parsed.scenarios(su_family=True)
        parsed.sim_config()
    except DomainError as e:
        field = next((f for f in ALLOWED_FIELDS if str(e).startswith(f)), None)
        raise ConfigError(str(e), field=field, line=_line_of(text, field) if field else None) from e
    return parsed


def load_scenario_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Read and validate a scenario JSON file.

    Raises:
        ConfigError: unreadable file, malformed JSON, unknown field or invalid value
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno) from e
    return parse_scenario_config(data, text)
