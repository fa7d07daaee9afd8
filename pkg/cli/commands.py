"""
Command-line front end: sample, reduce, embed, optimize, report.

Exit codes follow ExitCode: 0 on success, 2 when the input is rejected
(schema, validation, provenance), 1 for any runtime failure.
"""
import argparse
import json
import logging
import os
from typing import List, Optional

import jsonschema

from cli.pipeline import PipelineRunner, config_from_dict, read_document, report
from cli.presets import PRESETS
from config import settings
from config.errors import ValidationError
from optimize.problems import SPACES

logger = logging.getLogger(__name__)


class ExitCode:
    """Process exit codes."""
    SUCCESS = 0
    RUNTIME_ERROR = 1
    VALIDATION_ERROR = 2


def _load(args) -> PipelineRunner:
    if args.config:
        document, base_dir = read_document(args.config)
    elif args.preset:
        document, base_dir = {"preset": args.preset}, "."
    else:
        raise ValidationError("either --config or --preset is required")
    document = dict(document)
    if args.seed is not None:
        document["seed"] = args.seed
    if args.out is not None:
        document["output_dir"] = os.path.abspath(args.out)
    return PipelineRunner(config_from_dict(document, base_dir))


def cmd_sample(args):
    return _load(args).sample()


def cmd_reduce(args):
    return _load(args).reduce(args.confidence)


def cmd_embed(args):
    return _load(args).embed()


def cmd_optimize(args):
    return _load(args).optimize(args.space)


def cmd_report(args):
    return report(args.runs, args.out)


COMMANDS = {
    "sample": cmd_sample,
    "reduce": cmd_reduce,
    "embed": cmd_embed,
    "optimize": cmd_optimize,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pme",
        description="Design-space dimensionality reduction with parametric model embedding",
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    def pipeline_args(p):
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in study instead of --config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="run directory (overrides output_dir)")

    pipeline_args(sub.add_parser("sample", help="draw designs and assemble the snapshot archive"))
    reduce = sub.add_parser("reduce", help="solve the KLE and write the basis archive")
    pipeline_args(reduce)
    reduce.add_argument("--confidence", type=float, help="retained-variance level l in (0, 1]")
    pipeline_args(sub.add_parser("embed", help="compute the design-variable embedding"))
    optimize = sub.add_parser("optimize", help="run the PSO in one or more spaces")
    pipeline_args(optimize)
    optimize.add_argument("--space", action="append", choices=SPACES,
                          help="space to optimize in (repeatable; default from config)")
    rep = sub.add_parser("report", help="compare optimization runs")
    rep.add_argument("runs", nargs="*", help="run directories")
    rep.add_argument("--out", help="directory receiving the comparison tables")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch the command and map errors to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.getLogger().setLevel(args.log_level.upper())
    handler = COMMANDS[args.command]
    try:
        result = handler(args)
        logger.debug(f"{args.command}: {json.dumps(result, default=str)}")
        return ExitCode.SUCCESS
    except (ValidationError, jsonschema.ValidationError) as e:
        logger.error(f"{args.command}: {e}")
        return ExitCode.VALIDATION_ERROR
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return ExitCode.RUNTIME_ERROR
