"""Command line: run scenario files, list and describe the bundled ones.

Exit codes: 0 when every check passes, 1 when a run finished but a check failed,
2 when a scenario could not be parsed or validated (nothing is written in that case).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .scenario import SCHEMA, ConfigError, bundled, execute, parse_scenario, write_artifacts

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


def _load(ref: str, grid_n, seed):
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(), path.parent, grid_n, seed)
    scenarios = bundled()
    if ref in scenarios:
        return parse_scenario(scenarios[ref], Path("."), grid_n, seed)
    raise ConfigError(f"no scenario file or bundled scenario named {ref!r}")


def cmd_run(args) -> int:
    loaded = []
    for ref in args.scenarios:
        try:
            loaded.append(_load(ref, args.grid_n, args.seed))
        except ConfigError as exc:
            print(f"error: {ref}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    names = [s.name for s in loaded]
    if len(set(names)) != len(names):
        print("error: scenario names in one batch must be distinct", file=sys.stderr)
        return EXIT_CONFIG

    with ThreadPoolExecutor(max(1, min(args.jobs, len(loaded)))) as pool:
        outcomes = list(pool.map(execute, loaded))
    code = EXIT_OK
    for out in outcomes:
        d = write_artifacts(out, Path(args.out))
        failed = out.failures
        status = "ok" if not failed else "FAILED " + ", ".join(failed)
        print(f"{out.scenario.name}: {len(out.checks)} checks, {status} -> {d}")
        if failed:
            code = EXIT_CHECK
    return code


def cmd_list(args) -> int:
    for name, text in bundled().items():
        try:
            desc = parse_scenario(text).description
        except ConfigError as exc:
            desc = f"(invalid: {exc})"
        print(f"{name:28s} {desc}")
    return EXIT_OK


def cmd_describe(args) -> int:
    if args.name is None:
        print(SCHEMA, end="")
        return EXIT_OK
    scenarios = bundled()
    if args.name not in scenarios:
        print(f"error: unknown scenario {args.name!r}; try 'list'", file=sys.stderr)
        return EXIT_CONFIG
    print(scenarios[args.name], end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uncertainty-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one or more scenarios")
    run.add_argument("scenarios", nargs="+", help="TOML file or bundled scenario name")
    run.add_argument("--out", default="out", help="output root (default: ./out)")
    run.add_argument("--seed", type=int, help="override the Monte Carlo seed")
    run.add_argument("--grid-n", type=int, help="override the number of grid nodes")
    run.add_argument("--jobs", type=int, default=4, help="scenarios run concurrently")
    run.set_defaults(fn=cmd_run)
    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(fn=cmd_list)
    desc = sub.add_parser("describe", help="print a bundled scenario, or the config schema")
    desc.add_argument("name", nargs="?")
    desc.set_defaults(fn=cmd_describe)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
