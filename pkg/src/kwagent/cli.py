"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or configuration, 3 tool failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .ablation import DEFAULT_VARIANTS, render_ablation, run_ablation
from .config import load_run_config, build_toolbox
from .domain import PolicyVariant
from .errors import GenerationFailure, KwAgentError, ToolFailure, ValidationError
from .evaluation import evaluate_methods, read_generated, reports_from_json
from .metrics import render_comparison, render_kpi_table
from .orchestrator import run_campaign
from .simulator import load_dataset, validate_dataset
from .tools import HashEmbedder

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TOOL = 3
MAX_REPORTED_ISSUES = 20

logger = logging.getLogger("kwagent")


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="run configuration file")
    parser.add_argument("--out", type=Path, default=default, help="where to write the JSON result")
    parser.add_argument("--seed", type=int, default=default, help="override the configured seed")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwagent", description="Closed-loop sponsored search keyword generation.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="run a campaign from a config file")
    sub.add_parser("simulate", parents=[common], help="run with offline tools only")
    p = sub.add_parser("ablate", parents=[common], help="compare allocation policies")
    p.add_argument("--variants", default=",".join(DEFAULT_VARIANTS), help="comma-separated, e.g. full,fixed:0.5,wide_only,deep_only")

    p = sub.add_parser("evaluate", parents=[common], help="score generated keyword lists")
    p.add_argument("--generated", type=Path, required=True)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--references", type=Path, required=True, help="search-result text to score relevance against")
    p.add_argument("--product", default=None, help="restrict offline keywords to one product")
    p.add_argument("--json", action="store_true", help="print JSON instead of tables")

    p = sub.add_parser("dataset", help="dataset utilities")
    dsub = p.add_subparsers(dest="dataset_command", required=True)
    v = dsub.add_parser("validate", parents=[common], help="check a dataset CSV")
    v.add_argument("path", type=Path)
    return parser


def _write(path: Optional[Path], text: str):
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _say(args, text: str):
    if not args.quiet:
        print(text)


def _load_run(args):
    if args.config is None:
        raise ValidationError("--config is required for this command")
    return load_run_config(args.config).with_overrides(seed=args.seed, output=args.out)


def cmd_run(args, hermetic_only=False) -> int:
    run = _load_run(args)
    if hermetic_only and not run.hermetic:
        raise ValidationError("simulate requires mock/fixture/hash tools; config selects a remote backend")
    tools = build_toolbox(run)
    try:
        report = run_campaign(run.campaign, tools)
    except ToolFailure as exc:
        if exc.report is not None:
            _write(run.output, exc.report.to_json())
        raise
    finally:
        if run.memory_snapshot is not None:
            tools.memory.snapshot(run.memory_snapshot)
    _write(run.output, report.to_json())
    if run.output is None and not args.quiet:
        sys.stdout.write(report.to_json())
    counts = report.category_counts()
    _say(args, f"steps: {len(report.outcomes) - 1}  keywords: {len(report.state.cumulative)}  "
               f"categories: {' -> '.join(map(str, counts))}  total {run.campaign.kpi_metric.value}: {report.objective_total}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    run = _load_run(args)
    variants = [PolicyVariant.parse(v) for v in args.variants.split(",") if v.strip()]
    data = run_ablation(run, variants)
    _write(args.out, json.dumps(data, ensure_ascii=False, indent=2) + "\n")
    _say(args, render_ablation(data))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    methods = read_generated(args.generated)
    rows = load_dataset(args.dataset, args.product)
    if not rows:
        raise ValidationError(f"{args.dataset}: no offline keywords to compare against")
    reference = args.references.read_text(encoding="utf-8")
    if not reference.strip():
        raise ValidationError(f"{args.references}: reference text is empty")
    embedder = HashEmbedder()
    if args.config is not None:
        from .config import build_embedder
        embedder = build_embedder(load_run_config(args.config))
    data = evaluate_methods(methods, rows, embedder, reference)
    text = json.dumps(data, ensure_ascii=False, indent=2) + "\n"
    _write(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        _say(args, "Keyword performance (normalized)\n" + render_kpi_table(data["kpi"]))
        _say(args, "\n" + render_comparison(reports_from_json(data["comparison"])))
    return EXIT_OK


def cmd_dataset_validate(args) -> int:
    rows, issues = validate_dataset(args.path)
    if issues:
        for line, message in issues[:MAX_REPORTED_ISSUES]:
            print(f"{args.path}:{line}: {message}", file=sys.stderr)
        if len(issues) > MAX_REPORTED_ISSUES:
            print(f"... {len(issues) - MAX_REPORTED_ISSUES} more", file=sys.stderr)
        return EXIT_VALIDATION
    _say(args, f"{args.path}: {len(rows)} valid rows")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("run", "simulate"):
            return cmd_run(args, hermetic_only=args.command == "simulate")
        if args.command == "ablate":
            return cmd_ablate(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        return cmd_dataset_validate(args)
    except (ToolFailure, GenerationFailure) as exc:
        print(f"tool failure: {exc}", file=sys.stderr)
        return EXIT_TOOL
    except (ValidationError, KwAgentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
