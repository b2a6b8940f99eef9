"""Command line interface: ``llrp {solve,bench,ttt,validate,analyze-edges,convert}``.

Exit codes: 0 success, 1 validation failure, 2 usage or input error,
3 runtime error. ``LLRP_SEED`` in the environment replaces the default seed
(an explicit ``--seed`` still wins).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, SearchConfig
from .engine import run
from .harness import (BENCH_HEADER, TTT_HEADER, bench, csv_text, edge_analysis,
                      load_manifest_entries, ttt, validate_file, write_atomic)
from .instance import FORMATS, InstanceError, parse_instance, read_manifest, write_canonical
from .solution import InvalidSolutionError, format_solution, read_solution

log = logging.getLogger("llrp")

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
SEED_ENV = "LLRP_SEED"


class UsageError(Exception):
    pass


def _common(p):
    g = p.add_argument_group("run options")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0 or $LLRP_SEED)")
    g.add_argument("--threads", type=int, default=1, help="parallel runs in bench/ttt")
    g.add_argument("--time-limit", type=float, default=None, help="wall-clock seconds per run")
    g.add_argument("--generations", type=int, default=None, help="generation budget per run")
    g.add_argument("--out", default=None, help="output file")
    g.add_argument("--config", default=None, help="key = value settings file")
    g.add_argument("--preset", default="rlhea", choices=sorted(PRESETS), help="algorithm variant")
    g.add_argument("--pop-size", type=int, default=None)
    g.add_argument("-v", "--verbose", action="store_true")


def _instance_args(p):
    p.add_argument("instance")
    p.add_argument("--format", default="canonical", choices=FORMATS)
    p.add_argument("--n-vehicles", type=int, default=None)
    p.add_argument("--max-depots", type=int, default=None)
    p.add_argument("--manifest", default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="llrp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the solver once")
    _instance_args(p)
    _common(p)
    p.add_argument("--qtable", default=None, help="dump the final Q/R tables to this CSV")
    p.add_argument("--population-csv", default=None, help="dump the final population (debug)")

    p = sub.add_parser("bench", help="repeated runs over a manifest")
    p.add_argument("manifest")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--no-timing", action="store_true",
                   help="leave t_avg empty so the report is byte-reproducible")
    _common(p)

    p = sub.add_parser("ttt", help="time-to-target runs")
    _instance_args(p)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--budget", type=float, default=60.0, help="seconds per run")
    _common(p)

    p = sub.add_parser("validate", help="check a solution file")
    _instance_args(p)
    p.add_argument("solution")

    p = sub.add_parser("analyze-edges", help="shared-arc statistics of solution files")
    _instance_args(p)
    p.add_argument("directory")
    p.add_argument("--out", default=None, help="output prefix (default: <directory>/edges)")

    p = sub.add_parser("convert", help="raw benchmark file to canonical format")
    _instance_args(p)
    p.add_argument("--out", default=None)
    return parser


def _load(args):
    manifest = read_manifest(args.manifest) if args.manifest else None
    return parse_instance(args.instance, args.format, n_vehicles=args.n_vehicles,
                          max_open_depots=args.max_depots, manifest=manifest)


def make_config(args):
    cfg = SearchConfig.load(args.config) if args.config else SearchConfig()
    overrides = dict(PRESETS[args.preset])
    env = os.environ.get(SEED_ENV)
    if args.seed is not None:
        overrides["seed"] = args.seed
    elif env:
        try:
            overrides["seed"] = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if args.generations is not None:
        overrides["max_generations"] = args.generations
    if args.time_limit is not None:
        overrides["time_limit"] = args.time_limit
    if args.pop_size is not None:
        overrides["pop_size"] = args.pop_size
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    try:
        return cfg.replace(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args):
    inst = _load(args)
    cfg = make_config(args)
    res = run(inst, cfg)
    out = Path(args.out or f"{inst.name}.sol")
    write_atomic(out, format_solution(res.best))
    if args.qtable:
        res.model.to_csv(args.qtable)
    if args.population_csv:
        res.population.to_csv(args.population_csv)
    print(f"{inst.name} f={res.f:.2f} time={res.elapsed:.2f}s found_gen={res.generation_found} "
          f"seed={cfg.seed} out={out}")
    return EXIT_OK


def cmd_bench(args):
    cfg = make_config(args)
    rows = read_manifest(args.manifest)
    report = bench(load_manifest_entries(rows, cfg.delta), cfg, args.runs, args.threads,
                   timing=not args.no_timing)
    text = csv_text(BENCH_HEADER, report)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ttt(args):
    inst = _load(args)
    cfg = make_config(args)
    if args.runs < 1 or not args.target > 0 or not args.budget > 0:
        raise UsageError("need --runs >= 1, --target > 0 and --budget > 0")
    rows = ttt(inst, cfg, args.target, args.runs, args.budget, args.threads)
    text = csv_text(TTT_HEADER, rows)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args):
    inst = _load(args)
    ok, checks = validate_file(inst, args.solution)
    for name, good, detail in checks:
        print(f"{'PASS' if good else 'FAIL'} {name}: {detail}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_analyze_edges(args):
    inst = _load(args)
    folder = Path(args.directory)
    sols, names = [], {}
    for path in sorted(folder.iterdir()):
        if not path.is_file() or path.suffix == ".csv":
            continue
        try:
            s = read_solution(path).to_solution(inst)
        except (ValueError, InvalidSolutionError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            continue
        sols.append(s)
        names[id(s)] = path.name
    if len(sols) < 2:
        raise UsageError("need at least two parseable solution files")
    order, mat, ratios = edge_analysis(sols)
    labels = [names[id(s)] for s in order]
    prefix = args.out or str(folder / "edges")
    write_atomic(f"{prefix}_matrix.csv",
                 csv_text(["solution"] + labels, [[lab] + row for lab, row in zip(labels, mat)]))
    write_atomic(f"{prefix}_ratio.csv",
                 csv_text(["solution", "f", "ratio"],
                          [[lab, f"{s.f:.2f}", f"{r:.6f}"]
                           for lab, s, r in zip(labels, order, ratios)]))
    print(f"{len(order)} solutions; best {labels[0]} f={order[0].f:.2f}; wrote {prefix}_*.csv")
    return EXIT_OK


def cmd_convert(args):
    inst = _load(args)
    text = write_canonical(inst)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "ttt": cmd_ttt, "validate": cmd_validate,
            "analyze-edges": cmd_analyze_edges, "convert": cmd_convert}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"llrp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, InvalidSolutionError, OSError, ValueError) as exc:
        print(f"llrp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"llrp: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
