"""Export result tables to CSV and JSON."""
import json
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np
import pandas as pd

from utils.logger import get_logger

logger = get_logger(__name__)

# 17 significant digits round-trip a double exactly
CSV_FLOAT_FORMAT = "%.17g"


def export_csv(frame: pd.DataFrame, filename: str) -> Tuple[bytes, str]:
    """Export a table to CSV ('.' decimal, LF line endings). Returns (bytes, filename)."""
    text = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return text.encode("utf-8"), filename


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def export_json(payload: Union[Dict[str, Any], list], filename: str) -> Tuple[bytes, str]:
    """Export a JSON document. Returns (bytes, filename)."""
    text = json.dumps(_jsonable(payload), indent=2, ensure_ascii=False) + "\n"
    return text.encode("utf-8"), filename


def write_export(exported: Tuple[bytes, str], out_dir: Union[str, Path]) -> Path:
    """Write an export produced by export_csv / export_json into ``out_dir``."""
    data, filename = exported
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    path.write_bytes(data)
    logger.info("Wrote %s (%d bytes)", path, len(data))
    return path
