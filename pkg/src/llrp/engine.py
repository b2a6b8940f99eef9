"""Main loop of the hybrid evolutionary search."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SearchConfig
from .crossover import mpeax3
from .population import construct, initialize
from .qlearn import QModel
from .solution import OBJ_TOL, evaluate
from .sovnd import rl_sovnd
from .variation import DepotFrequency, mutate, repair

STREAMS = ("init", "select", "crossover", "variation", "sovnd", "restart")


def rng_streams(seed):
    """Independent ``random.Random`` generators per component, derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: random.Random(int(c.generate_state(1, dtype=np.uint64)[0]))
            for name, c in zip(STREAMS, children)}


@dataclass
class RunResult:
    best: object
    f: float
    generation_found: int
    time_found: float
    generations: int
    elapsed: float
    seed: int
    fingerprint: str
    trace: list = field(default_factory=list)  # (generation, best f, offspring f)
    model: object = None
    population: object = None
    stop_reason: str = "generations"

    @property
    def reached_target(self):
        return self.stop_reason == "target"


def _select(pop, cfg, rng):
    members = pop.members
    if len(members) == 1:
        return members[0], members[0], members[0]
    if cfg.parent_selection == "random":
        if len(members) >= 3:
            return tuple(rng.sample(members, 3))
        return members[0], members[1], rng.choice(members)
    newest = pop.newest()
    others = [m for m in members if m is not newest]
    if len(others) >= 2:
        sa, sb = rng.sample(others, 2)
    else:
        sa, sb = others[0], newest
    return sa, sb, newest


def run(inst, cfg=None, *, record_trace=True, callback=None):
    """Run the search on ``inst`` and return a :class:`RunResult`.

    Stops after ``cfg.max_generations`` generations, when the wall-clock
    limit is hit, or when the best objective reaches ``cfg.target``.
    ``callback(generation, population, best)`` is called after every
    generation if given.
    """
    cfg = SearchConfig() if cfg is None else cfg.validate()
    if inst.delta != cfg.delta:
        inst = inst.with_delta(cfg.delta)
    rngs = rng_streams(cfg.seed)
    t0 = time.perf_counter()
    model = QModel(cfg.alpha, cfg.gamma, cfg.epsilon)
    freq = DepotFrequency(inst.n_depots)
    state = {"best": None}

    def improve(sol):
        best_f = state["best"].f if state["best"] is not None else None
        out = rl_sovnd(sol, model, cfg, rngs["sovnd"], best_f)
        freq.record(out.final_current)
        s = out.best_feasible
        if s is None:
            s = repair(out.final_current, freq, rngs["variation"])
            if not s.feasible:
                return None
        if not s.depot_feasible:
            return None
        if state["best"] is None or s.f < state["best"].f - OBJ_TOL:
            state["best"] = s
        return s

    pop = initialize(inst, rngs["init"], improve, cfg.pop_size, cfg.psi,
                     cfg.memory_size, cfg.init_attempts_factor)
    best = state["best"]
    result = RunResult(best, best.f, 0, time.perf_counter() - t0, 0, 0.0, cfg.seed,
                       cfg.fingerprint(), model=model)
    if record_trace:
        result.trace.append((0, best.f, best.f))

    def done():
        if cfg.target is not None and state["best"].f <= cfg.target + OBJ_TOL:
            return "target"
        if cfg.time_limit is not None and time.perf_counter() - t0 >= cfg.time_limit:
            return "time"
        return None

    def fresh():
        return improve(construct(inst, rngs["restart"]))

    gen = 0
    seen_best = best
    stop = done()
    while stop is None and gen < cfg.max_generations:
        gen += 1
        sa, sb, sc = _select(pop, cfg, rngs["select"])
        child = mpeax3(sa, sb, sc, rngs["crossover"], cfg.crossover)
        if not (child.feasible and child.depot_feasible):
            child = repair(child, freq, rngs["variation"])
        child = mutate(child, cfg, rngs["variation"])
        s = improve(child)
        if s is not None:
            pop.remember(s)
            pop.update(s)
        if state["best"] is not seen_best:
            seen_best = state["best"]
            result.generation_found = gen
            result.time_found = time.perf_counter() - t0
            pop.stagnation = 0
        else:
            pop.stagnation += 1
        if pop.stagnation > cfg.replace_threshold:
            pop.replace_on_stagnation(rngs["restart"], fresh, cfg.init_attempts_factor)
            if state["best"] is not seen_best:
                seen_best = state["best"]
                result.generation_found = gen
                result.time_found = time.perf_counter() - t0
        if record_trace:
            result.trace.append((gen, state["best"].f, s.f if s is not None else float("nan")))
        if callback is not None:
            callback(gen, pop, state["best"])
        stop = done()

    best = state["best"]
    result.best = best
    result.f = evaluate(best)
    if abs(result.f - best.f) > OBJ_TOL:
        raise RuntimeError("cached objective disagrees with re-evaluation")
    if not (best.feasible and best.depot_feasible):
        raise RuntimeError("best solution is not feasible")
    result.generations = gen
    result.population = pop
    result.elapsed = time.perf_counter() - t0
    result.stop_reason = stop or "generations"
    return result
