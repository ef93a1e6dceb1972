"""Command-line entry point: ``run`` experiments, ``certify`` exchange maps, ``check`` property suites."""
from __future__ import annotations

import argparse
import json
import sys

from .experiment import (
    CERTIFY_COLUMNS,
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    certify_maps_command,
    check_command,
    rows_to_csv,
    rows_to_json,
    run_experiment,
)


def _load(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None


def _overrides(args, data: dict) -> dict:
    for key in ("trials", "seed", "out", "format", "threads"):
        v = getattr(args, key)
        if v is not None:
            data[key] = v
    return data


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(rows, fmt, columns, summary=None):
    return rows_to_json(rows, summary) if fmt == "json" else rows_to_csv(rows, columns)


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_dict(_overrides(args, _load(args.config)))
    summary, rows = run_experiment(cfg)
    _emit(_render(rows, cfg.format, CSV_COLUMNS, summary), cfg.out)
    print(f"trials={summary.trials} success={summary.success_probability:.4f} "
          f"threshold={summary.threshold:.4f} mean_ratio={summary.mean_ratio:.4f} "
          f"mean_rounds={summary.mean_rounds:.2f} mean_queries={summary.mean_queries:.2f} "
          f"wall={summary.wall_time:.2f}s", file=sys.stderr)
    return 0


def cmd_certify(args) -> int:
    data = _overrides(args, _load(args.config))
    rows = certify_maps_command(data)
    _emit(_render(rows, data.get("format", "csv"), CERTIFY_COLUMNS), data.get("out"))
    bad = sum(r["violations"] for r in rows)
    return 1 if bad else 0


def cmd_check(args) -> int:
    data = _overrides(args, _load(args.config))
    rows = check_command(data)
    _emit(_render(rows, data.get("format", "csv"), ("check", "instance", "ok", "detail")), data.get("out"))
    return 0 if all(r["ok"] for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochsub", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("run", cmd_run, "run seeded strategy trials and emit one row per trial"),
        ("certify", cmd_certify, "certify exchange-map uniformity on sampled pairs"),
        ("check", cmd_check, "run objective, matroid and path-multiset property checks"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=(name == "run"), help="JSON config file")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads", type=int)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
