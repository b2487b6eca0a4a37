"""Command-line entry points: ``generate``, ``run`` and ``report``.

A single JSON config document drives everything; any section omitted
falls back to the package defaults.  See the README for the schema.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import generate, save_csv
from .experiment import AggregateReport, ExperimentConfig, emit, run_experiment


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def _cmd_generate(args) -> int:
    config = _load_config(args.config)
    data = generate(config.dataset)
    save_csv(data, args.out)
    print(f"wrote {len(data)} observations to {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    overrides = {}
    if args.reps is not None:
        overrides["n_reps"] = args.reps
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.variants is not None:
        overrides["variants"] = tuple(v.strip() for v in args.variants.split(",") if v.strip())
    if overrides:
        d = config.to_dict()
        d.update({k: list(v) if isinstance(v, tuple) else v for k, v in overrides.items()})
        config = ExperimentConfig.from_dict(d)
    report = run_experiment(config, n_workers=args.threads)
    written = emit(report, args.out, fmt="csv")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    report_path = Path(args.in_dir) / "report.json"
    if not report_path.exists():
        raise FileNotFoundError(f"no report.json under {args.in_dir}")
    report = AggregateReport.from_dict(json.loads(report_path.read_text()))
    if args.format == "json":
        print(report.to_json(), end="")
        return 0
    written = emit(report, args.in_dir, fmt="csv")
    for path in written:
        print(f"wrote {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskal",
        description="Risk-based active learning experiments for maintenance decision support.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a synthetic deterioration dataset as CSV")
    p_gen.add_argument("--config", help="JSON config file (defaults used if omitted)")
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.set_defaults(func=_cmd_generate)

    p_run = sub.add_parser("run", help="run the batch experiment and emit reports")
    p_run.add_argument("--config", help="JSON config file (defaults used if omitted)")
    p_run.add_argument("--reps", type=int, help="override repetition count")
    p_run.add_argument("--variants", help="comma-separated subset of plain,em")
    p_run.add_argument("--seed", type=int, help="override master seed")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("report", help="re-emit CSVs (or print JSON) from an existing report")
    p_rep.add_argument("--in", dest="in_dir", required=True, help="directory containing report.json")
    p_rep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
