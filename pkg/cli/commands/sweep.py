"""
sweep: run an experiment config or preset and write the results CSV
"""

import logging
import sys

from cli.output import emit
from core.errors import InputFileError, UsageError
from core.experiments import load_config, run_experiment, write_csv
from core.odt_report import ODTReportGenerator
from core.preset_manager import PresetManager

log = logging.getLogger(__name__)


def register(subparsers, common):
    p = subparsers.add_parser("sweep", parents=[common], help="run a Monte Carlo experiment")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", dest="experiment", metavar="JSON", help="experiment config file")
    source.add_argument("--preset", help="built-in or custom preset key")
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--odt", metavar="PATH", help="also write an ODT report")
    p.set_defaults(handler=run)


def run(args, ctx) -> int:
    if args.preset:
        config = PresetManager.get_preset(args.preset, ctx.config.get_presets_folder())
        if config is None:
            raise InputFileError(f"unknown preset {args.preset!r}")
    else:
        config = load_config(args.experiment)
    if args.seed is not None:
        config = config.model_copy(update={"master_seed": args.seed})
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be at least 1")

    report = run_experiment(config, ctx.settings, workers=args.workers)
    write_csv(report, args.out)
    for err in report.errors:
        where = f"cell {err.cell} (n={err.n}, {err.size_mode}={err.size_param})"
        print(f"warning: {where} {err.property or ''}: {err.message}".replace("  ", " "), file=sys.stderr)

    emit(ctx, f"{len(report.rows)} rows, {len(report.errors)} errors -> {args.out}", {
        "rows": len(report.rows),
        "errors": [e.__dict__ for e in report.errors],
        "out": args.out,
        "wall_ms": report.wall_ms,
    })
    if args.odt and not ODTReportGenerator.create_experiment_report(report, args.odt):
        log.warning("ODT report was not written")
        return 3
    return 0
