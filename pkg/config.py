"""
Centralized configuration management
Loads settings from environment variables with defaults from config/settings.yaml
"""
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

# Base directory
BASE_DIR = Path(__file__).parent.absolute()


def _load_yaml_if_present() -> Dict[str, Any]:
    p = BASE_DIR / "config" / "settings.yaml"
    if not p.exists():
        return {}
    try:
        with open(p, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError):
        return {}


_YAML_CONFIG = _load_yaml_if_present()


def _yaml(section: str, key: str, default: Any) -> Any:
    value = (_YAML_CONFIG.get(section) or {}).get(key)
    return default if value is None else value


class Config:
    """Application configuration (env overrides YAML)"""

    APP_NAME: str = os.getenv("APP_NAME", _YAML_CONFIG.get("app_name") or "Underlay CR primary-user analysis")

    # Logging
    LOG_LEVEL: str = os.getenv("CRI_LOG", _yaml("logging", "level", "INFO"))
    LOG_FILE: Optional[str] = os.getenv("CRI_LOG_FILE", _yaml("logging", "file", None))

    # Monte Carlo
    SAMPLES: int = int(os.getenv("CRI_SAMPLES", _yaml("simulation", "samples", 1_000_000)))
    QUICK_SAMPLES: int = int(os.getenv("CRI_QUICK_SAMPLES", _yaml("simulation", "quick_samples", 100_000)))
    SEED: int = int(os.getenv("CRI_SEED", _yaml("simulation", "seed", 20190521)))
    WORKERS: int = int(os.getenv("CRI_WORKERS", _yaml("simulation", "workers", 4)))
    BINS: int = int(os.getenv("CRI_BINS", _yaml("simulation", "bins", 200)))

    # Quadrature
    QUAD_TOL: float = float(os.getenv("CRI_QUAD_TOL", _yaml("quadrature", "tolerance", 1e-10)))

    # Paths
    OUTPUT_DIR: Path = Path(os.getenv("CRI_OUTPUT_DIR", str(BASE_DIR / _yaml("paths", "output_dir", "results"))))
    PRESET_DIR: Path = Path(os.getenv("CRI_PRESET_DIR", str(BASE_DIR / _yaml("paths", "preset_dir", "config/presets"))))

    @classmethod
    def ensure_directories(cls) -> None:
        """Ensure the output directory exists"""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def preset_path(cls, figure: int) -> Path:
        """Path of the shipped preset for a figure id."""
        return cls.PRESET_DIR / f"figure{figure}.json"


# Create global config instance
config = Config()
