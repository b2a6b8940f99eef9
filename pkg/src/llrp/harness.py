"""Batch runs, time-to-target experiments, solution checking and edge statistics.

Everything written to disk goes through :func:`write_atomic`; CSV reports
start with a ``# schema_version=N`` line.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import run
from .instance import parse_instance
from .solution import arc_set, evaluate, read_solution

SCHEMA_VERSION = 1
OBJECTIVE_TOL = 1e-2


def write_atomic(path, text):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    tmp.replace(path)


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_report(path):
    """Rows of a report CSV as dicts (schema line skipped)."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def derive_seeds(master, n):
    """``n`` distinct 32-bit run seeds derived from ``master``."""
    seeds = []
    seq = np.random.SeedSequence(master)
    while len(seeds) < n:
        for s in seq.generate_state(2 * n, dtype=np.uint32):
            if int(s) not in seeds:
                seeds.append(int(s))
            if len(seeds) == n:
                break
        seq = seq.spawn(1)[0]
    return seeds


def _fmt(x):
    return f"{x:.2f}"


# ---------------------------------------------------------------------------
# bench


@dataclass
class RunRecord:
    seed: int
    f: float | None
    time_found: float
    error: str = ""


def _one_run(args):
    inst, cfg = args
    try:
        res = run(inst, cfg, record_trace=False)
        # independent re-check before anything reaches a report
        f = evaluate(res.best, inst)
        if abs(f - res.f) > 1e-6 or not res.best.feasible:
            raise RuntimeError("best solution failed re-validation")
        return RunRecord(cfg.seed, f, res.time_found)
    except Exception as exc:  # recorded in the report, the batch goes on
        return RunRecord(cfg.seed, None, math.nan, f"{type(exc).__name__}: {exc}")


def _map(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


BENCH_HEADER = ["name", "runs", "f_best", "f_avg", "t_avg", "seeds", "fingerprint", "bks",
                "gap_pct", "error"]


def bench(entries, cfg, runs, threads=1, timing=True):
    """Run every ``(name, instance, bks)`` entry ``runs`` times; returns report rows.

    With ``timing=False`` the ``t_avg`` column is left empty so that reports
    are byte-reproducible.
    """
    seeds = derive_seeds(cfg.seed, runs)
    rows = []
    for name, inst, bks in entries:
        if inst is None or isinstance(inst, Exception):
            rows.append([name, runs, "", "", "", " ".join(map(str, seeds)), cfg.fingerprint(),
                         "" if bks is None else _fmt(bks), "", f"load failed: {inst}"])
            continue
        recs = _map(_one_run, [(inst, cfg.replace(seed=s)) for s in seeds], threads)
        ok = [r for r in recs if r.f is not None]
        err = "; ".join(r.error for r in recs if r.error)
        if ok:
            fb = min(r.f for r in ok)
            fa = sum(r.f for r in ok) / len(ok)
            ta = sum(r.time_found for r in ok) / len(ok)
            gap = "" if not bks else f"{100.0 * (fb - bks) / bks:.3f}"
            rows.append([name, runs, _fmt(fb), _fmt(fa), f"{ta:.3f}" if timing else "",
                         " ".join(map(str, seeds)), cfg.fingerprint(),
                         "" if bks is None else _fmt(bks), gap, err])
        else:
            rows.append([name, runs, "", "", "", " ".join(map(str, seeds)), cfg.fingerprint(),
                         "" if bks is None else _fmt(bks), "", err])
    return rows


def load_manifest_entries(rows, delta=20):
    entries = []
    for row in rows:
        try:
            inst = parse_instance(row.path, row.format, delta=delta, n_vehicles=row.n_vehicles,
                                  max_open_depots=row.max_open_depots, name=row.name)
        except Exception as exc:
            inst = exc
        entries.append((row.name, inst, row.bks))
    return entries


# ---------------------------------------------------------------------------
# time to target


def ttt_probabilities(n):
    """Plotting positions ``(i - 0.5) / n`` for ``i = 1..n``."""
    if n < 1:
        raise ValueError("need at least one run")
    return [(i - 0.5) / n for i in range(1, n + 1)]


TTT_HEADER = ["i", "time", "rho", "censored", "seed", "f"]


def ttt(inst, cfg, target, runs, budget, threads=1):
    """Independent runs stopping at ``target`` or after ``budget`` seconds.

    Missed targets are kept as censored rows with ``time = budget``.
    Returns rows sorted by ascending time.
    """
    if not target > 0:
        raise ValueError("target must be positive")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    seeds = derive_seeds(cfg.seed, runs)
    jobs = [(inst, cfg.replace(seed=s, target=target, time_limit=budget)) for s in seeds]
    results = _map(_ttt_run, jobs, threads)
    timed = []
    for seed, (f, t, hit) in zip(seeds, results):
        timed.append((t if hit else budget, not hit, seed, f))
    timed.sort(key=lambda x: (x[0], x[1], x[2]))
    rho = ttt_probabilities(runs)
    return [[i + 1, f"{t:.6f}", repr(rho[i]), int(c), s, _fmt(f)]
            for i, (t, c, s, f) in enumerate(timed)]


def _ttt_run(args):
    inst, cfg = args
    res = run(inst, cfg, record_trace=False)
    return res.f, res.time_found, res.f <= cfg.target + 1e-6


# ---------------------------------------------------------------------------
# validation


def validate_record(inst, rec):
    """Independent feasibility and objective checks of a parsed solution file.

    Returns ``(all_ok, checks)`` with ``checks`` a list of ``(name, ok, detail)``.
    """
    checks = []
    d = inst.d
    depot_idx = {e: i for i, e in enumerate(inst.depot_ids)}
    cust_idx = {e: inst.n_depots + i for i, e in enumerate(inst.customer_ids)}

    unknown = [c for _, seq in rec.routes for c in seq if c not in cust_idx]
    unknown += [dp for dp, _ in rec.routes if dp not in depot_idx]
    unknown += [dp for dp in rec.open_depots if dp not in depot_idx]
    checks.append(("ids", not unknown, f"unknown ids {sorted(set(unknown))}" if unknown else "ok"))

    counts = {}
    for _, seq in rec.routes:
        for c in seq:
            counts[c] = counts.get(c, 0) + 1
    dup = sorted(c for c, k in counts.items() if k > 1)
    miss = sorted(set(inst.customer_ids) - set(counts))
    detail = []
    if dup:
        detail.append(f"customer {', '.join(map(str, dup))} visited more than once")
    if miss:
        detail.append(f"customer {', '.join(map(str, miss))} not visited")
    checks.append(("customers", not dup and not miss, "; ".join(detail) or "ok"))

    nr = len(rec.routes)
    empty = [k for k, (_, seq) in enumerate(rec.routes) if not seq]
    checks.append(("routes", nr <= inst.n_vehicles and not empty,
                   f"{nr} routes (max {inst.n_vehicles})"
                   + (f", empty routes {empty}" if empty else "")))

    used = {dp for dp, _ in rec.routes}
    open_ = set(rec.open_depots) | used
    closed_used = sorted(used - set(rec.open_depots))
    checks.append(("depots", len(open_) <= inst.max_open_depots and not closed_used,
                   f"{len(open_)} open (max {inst.max_open_depots})"
                   + (f", routes use undeclared depots {closed_used}" if closed_used else "")))

    over = []
    f = 0.0
    if not unknown:
        q = inst.demand_of
        for k, (dp, seq) in enumerate(rec.routes):
            load = sum(q[cust_idx[c]] for c in seq)
            if load > inst.capacity + 1e-9:
                over.append(f"route {k + 1} load {load:g} > {inst.capacity:g}")
            time = 0.0
            prev = depot_idx[dp]
            for c in seq:
                v = cust_idx[c]
                time += d[prev][v]
                f += time
                prev = v
    checks.append(("capacity", not over and not unknown, "; ".join(over) or "ok"))
    if rec.objective is None:
        checks.append(("objective", False, "no OBJECTIVE line"))
    else:
        ok = not unknown and abs(f - rec.objective) <= OBJECTIVE_TOL
        checks.append(("objective", ok, f"recomputed {f:.4f}, declared {rec.objective:.2f}"))
    return all(ok for _, ok, _ in checks), checks


def validate_file(inst, path):
    return validate_record(inst, read_solution(path))


# ---------------------------------------------------------------------------
# shared edges


def edge_analysis(solutions):
    """Common-arc matrix and sharing ratio with the best, solutions sorted by f.

    Returns ``(ordered solutions, matrix, ratios)``.
    """
    if len(solutions) < 2:
        raise ValueError("need at least two solutions")
    order = sorted(solutions, key=lambda s: evaluate(s))
    arcs = [arc_set(s) for s in order]
    n = len(order)
    mat = [[len(arcs[i] & arcs[j]) for j in range(n)] for i in range(n)]
    ratios = [len(arcs[0] & a) / len(a) for a in arcs]
    return order, mat, ratios
