"""Command-line interface.

    saddlekit solve --config cfg.ini --out report.json
    saddlekit sweep --config cfg.ini --eps-grid 1e-3:1e-7:log5 --out dir/
    saddlekit verify --suite oracles

``--seed``, ``--budget``, ``--mode``, ``--method``, ``--m`` override the
config file. SADDLEKIT_OUT sets the default output directory. Exit
codes: 0 converged, 2 budget exhausted, 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bench import RunConfig, execute_run, parse_eps_grid, run_sweep
from .errors import ConfigError, SaddlekitError
from .verify import SUITES, run_suite


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return RunConfig.from_ini(text)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.budget is not None:
        over["budget"] = args.budget
    if args.mode is not None:
        over["mode"] = args.mode
    if getattr(args, "method", None) is not None:
        over["method"] = args.method
    if getattr(args, "m", None) is not None:
        over["m"] = args.m
    if getattr(args, "eps", None) is not None:
        over["eps"] = args.eps
    if getattr(args, "no_wall_clock", False):
        over["wall_clock"] = False
    cfg = replace(cfg, **over) if over else cfg
    cfg.validate()
    return cfg


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("SADDLEKIT_OUT", "."))


def cmd_solve(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    report = execute_run(cfg)
    out = Path(args.out) if args.out else _out_dir(args) / "report.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, sort_keys=True, indent=1))
    print(f"{report['status']}  gap={report['final_gap']:.3e}  n_crn={report['ledger']['n_crn']}")
    if report["status"] == "budget_exhausted":
        return 2
    return 0 if report["status"] == "converged" else 2


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    grid = parse_eps_grid(args.eps_grid)
    result = run_sweep(cfg, grid)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"sweep_{cfg.method.replace('-', '_')}"
    (out / f"{stem}.csv").write_text(result.csv())
    (out / f"{stem}.json").write_text(result.json_report())
    if result.slope is not None:
        print(f"slope={result.slope:.4f} +- {result.ci_halfwidth:.4f}")
    else:
        print("slope=unavailable (fewer than 3 successful rows)")
    for row in result.rows:
        print(
            f"  eps={row['eps']:.1e}  n_crn={row['ledger']['n_crn']}"
            f"  gap={row['final_gap']:.3e}  {row['status']}"
        )
    return 0


def cmd_verify(args) -> int:
    ok = run_suite(args.suite)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="saddlekit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured solve")
    p_solve.add_argument("--config", default=None)
    p_solve.add_argument("--out", default=None)
    _common_overrides(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run an accuracy sweep")
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--eps-grid", default="1e-3:1e-5:log3")
    p_sweep.add_argument("--out", default=None)
    _common_overrides(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run a property suite")
    p_verify.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"])
    p_verify.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SaddlekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _common_overrides(p) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--mode", choices=("practical", "theory"), default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--no-wall-clock", action="store_true")


if __name__ == "__main__":
    raise SystemExit(main())
