"""
Command-line entry point.

    python -m app.main analyze  --config config/presets/figure2.json --out results
    python -m app.main simulate --figure 3 --out results
    python -m app.main validate [--config path] [--quick]
    python -m app.main sweep --param q --from 0.5 --to 10 --steps 20

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 numeric failure.
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from config import config
from core.analytic import ScenarioParams
from core.errors import ConfigError, DomainError, NumericError
from core.utils.scenario_config import ScenarioConfig, load_scenario_config, parse_grid
from services import figure_service, simulation_service, validation_service
from services.export_service import export_csv, export_json, write_export
from utils.logger import configure_logging, get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3

VALIDATE_PRESET = "validate.json"


def _scenario_config(args: argparse.Namespace) -> ScenarioConfig:
    if getattr(args, "config", None):
        return load_scenario_config(args.config)
    if getattr(args, "figure", None) is not None:
        return load_scenario_config(config.preset_path(args.figure))
    raise ConfigError("either --config or --figure is required")


def _output_dir(args: argparse.Namespace) -> Path:
    return Path(args.out) if getattr(args, "out", None) else config.OUTPUT_DIR


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _scenario_config(args)
    out_dir = _output_dir(args)
    curves = figure_service.analyze(cfg)
    for curve in curves:
        write_export(export_csv(curve.frame, curve.filename), out_dir)
    logger.info("Figure %d: %d curves written to %s", cfg.figure, len(curves), out_dir)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _scenario_config(args)
    out_dir = _output_dir(args)
    result = simulation_service.simulate(cfg, samples=args.samples, workers=args.workers)
    for curve in result.curves:
        write_export(export_csv(curve.frame, curve.filename), out_dir)
    print(result.summary.to_string(index=False))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.config) if args.config else config.PRESET_DIR / VALIDATE_PRESET
    cfg = load_scenario_config(path)
    checks = validation_service.build_checks(cfg, quick=args.quick)
    logger.info("Running %d validation checks%s", len(checks), " (quick)" if args.quick else "")
    report = validation_service.run_validation(checks)

    out_dir = _output_dir(args)
    frame = report.to_frame()
    write_export(export_csv(frame, "validation_report.csv"), out_dir)
    write_export(export_json(report.to_dict(), "validation_report.json"), out_dir)
    print(frame.to_string(index=False))
    print(report.summary)
    return EXIT_OK if report.all_passed else EXIT_VALIDATION_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    values = parse_grid({"from": args.start, "to": args.stop, "steps": args.steps}, "steps")
    if args.config:
        base = load_scenario_config(args.config).scenarios()[0]
    else:
        base = ScenarioParams(p=4.0, q=2.0)
    frame = figure_service.sweep(base, args.param, values, psi=args.psi)
    filename = f"sweep_{args.param}_{base.scenario_id}.csv"
    write_export(export_csv(frame, filename), _output_dir(args))
    print(frame.to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cri", description=config.APP_NAME)
    parser.add_argument("--log-level", default=None, help="overrides CRI_LOG (DEBUG, INFO, WARNING, ERROR)")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_source(p: argparse.ArgumentParser) -> None:
        source = p.add_mutually_exclusive_group()
        source.add_argument("--config", help="scenario JSON file")
        source.add_argument("--figure", type=int, choices=range(2, 9), help="use the shipped preset for this figure")
        p.add_argument("--out", help=f"output directory (default {config.OUTPUT_DIR})")

    analyze = sub.add_parser("analyze", help="theoretical curves as CSV")
    scenario_source(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    simulate = sub.add_parser("simulate", help="Monte Carlo histograms, ECDFs and summary as CSV")
    scenario_source(simulate)
    simulate.add_argument("--samples", type=int, default=None, help="override the sample count")
    simulate.add_argument("--workers", type=int, default=None, help="override the worker count")
    simulate.set_defaults(handler=cmd_simulate)

    validate = sub.add_parser("validate", help="run the validation grid")
    validate.add_argument("--config", help=f"validation scenario (default {VALIDATE_PRESET} preset)")
    validate.add_argument("--quick", action="store_true", help=f"use {config.QUICK_SAMPLES} Monte Carlo samples")
    validate.add_argument("--out", help="directory for validation_report.csv/.json")
    validate.set_defaults(handler=cmd_validate)

    sweep = sub.add_parser("sweep", help="performance metrics along a parameter sweep")
    sweep.add_argument("--param", default="q", choices=figure_service.SWEEP_PARAMS)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--psi", type=float, default=1.0, help="outage threshold")
    sweep.add_argument("--config", help="scenario JSON giving the fixed parameters")
    sweep.add_argument("--out", help="output directory")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        configure_logging(args.log_level, config.LOG_FILE)
    try:
        return args.handler(args)
    except (ConfigError, DomainError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG_ERROR
    except NumericError as e:
        logger.error("Numeric failure: %s", e)
        return EXIT_NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
