"""Command line entry point: ``ratiolab <command> ...``.

Exit codes: 0 success, 1 a verdict failed, 2 invalid input or a budget or
truncation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .density import exceptional_density
from .errors import BudgetExceeded, ConfigError, InvalidElement, PreconditionError, TruncationError
from .experiments import (
    OUT_ENV,
    bundled_scenarios,
    default_out_dir,
    evaluate,
    load_config,
    read_ratio_csv,
    run_scenario,
)
from .groups import GROUP_KINDS

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
_INPUT_ERRORS = (ConfigError, InvalidElement, PreconditionError, BudgetExceeded, TruncationError, OSError)


def _cmd_groups(args) -> int:
    if args.action == "list":
        for kind, text in GROUP_KINDS.items():
            print(f"{kind:12s} {text}")
    else:
        for name in bundled_scenarios():
            print(name)
    return EXIT_OK


def _cmd_estimate_r(args) -> int:
    cfg = load_config(args.config)
    if cfg.theorem != "spectral":
        raise ConfigError(f"{cfg.id} is a {cfg.theorem} scenario; estimate-r needs a spectral one")
    rep = evaluate(cfg)
    print(f"scenario {cfg.id} ({cfg.group.name}, uniqueness condition: {cfg.condition_b})")
    print(json.dumps(rep.summary()["info"], indent=2, sort_keys=True))
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    rep = evaluate(cfg)
    for line in rep.lines():
        print(line)
    print(f"{cfg.id}: {'pass' if rep.passed else 'fail'}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _run_one(ref: str, out_dir: str):
    try:
        rep, path = run_scenario(ref, Path(out_dir))
    except _INPUT_ERRORS as exc:
        return ref, EXIT_INPUT, [f"error: {exc}"]
    code = EXIT_OK if rep.passed else EXIT_FAIL
    return ref, code, rep.lines() + [f"{rep.scenario}: {'pass' if rep.passed else 'fail'} -> {path}"]


def _cmd_run(args) -> int:
    out_dir = str(args.out or default_out_dir())
    refs = bundled_scenarios() if args.all else args.config
    if not refs:
        raise ConfigError("name at least one scenario, or pass --all")
    if args.jobs > 1 and len(refs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, refs, [out_dir] * len(refs)))
    else:
        results = [_run_one(r, out_dir) for r in refs]
    worst = EXIT_OK
    for _, code, lines in results:
        for line in lines:
            print(line)
        worst = max(worst, code)
    return worst


def _cmd_density(args) -> int:
    n, values = read_ratio_csv(args.csv)
    flags, dens = exceptional_density(values, args.limit, args.eps, relative=not args.absolute)
    q = int(flags.sum())
    mode = "absolute" if args.absolute else "relative"
    print(f"n_max {int(n[-1])}  exceptional {q}  density {dens[-1]:.6g}  ({mode} eps {args.eps:g}, L {args.limit:.10g})")
    if args.show:
        print("exceptional n:", " ".join(str(int(k)) for k in n[flags]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratiolab", description="Random walks on groups and ratio limit checks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("groups", help="list group kinds or bundled scenarios")
    g.add_argument("action", choices=["list", "scenarios"])
    g.set_defaults(func=_cmd_groups)

    e = sub.add_parser("estimate-r", help="estimate the convergence parameter of a spectral scenario")
    e.add_argument("config", help="scenario JSON path or bundled scenario name")
    e.set_defaults(func=_cmd_estimate_r)

    v = sub.add_parser("verify", help="evaluate a scenario and print its checks, writing nothing")
    v.add_argument("config")
    v.set_defaults(func=_cmd_verify)

    d = sub.add_parser("density", help="exceptional-set density of a ratio CSV")
    d.add_argument("csv")
    d.add_argument("--limit", type=float, required=True, help="target limit L")
    d.add_argument("--eps", type=float, default=1e-2)
    d.add_argument("--absolute", action="store_true", help="compare |r_n - L| with eps, not eps |L|")
    d.add_argument("--show", action="store_true", help="list the exceptional indices")
    d.set_defaults(func=_cmd_density)

    r = sub.add_parser("run", help=f"evaluate scenarios and write reports (output dir from ${OUT_ENV})")
    r.add_argument("config", nargs="*")
    r.add_argument("--all", action="store_true", help="run every bundled scenario")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", type=Path, default=None, help=f"override ${OUT_ENV}")
    r.set_defaults(func=_cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
