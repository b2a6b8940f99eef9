"""Infeasibility repair and mutation of offspring."""
from __future__ import annotations

from .neighborhoods import apply_move, explore_two_opt_star

REPAIR_BETA_SCALE = 1000.0
MAX_REPAIR_MOVES = 10_000


class DepotFrequency:
    """How often each depot was open in local-search output solutions."""

    def __init__(self, n_depots):
        self.counts = [0] * n_depots

    def record(self, sol):
        for dp in sol.open_depots:
            self.counts[dp] += 1

    def __getitem__(self, dp):
        return self.counts[dp]

    def ranked(self, depots):
        """``depots`` by decreasing frequency, ties by index."""
        return sorted(depots, key=lambda dp: (-self.counts[dp], dp))


def _nearest(inst, candidates, v):
    d = inst.d
    return min(candidates, key=lambda dp: (d[dp][v], dp))


def repair_depots(s, freq, rng):
    """Bring the number of open depots to ``N_d``; modifies ``s`` in place."""
    inst = s.inst
    nd = inst.max_open_depots
    open_ = sorted(s.open_depots)
    if len(open_) > nd:
        if rng.random() < 0.5:
            keep = freq.ranked(open_)[:nd]
        else:
            keep = rng.sample(open_, nd)
        keep = set(keep)
        for r, dp in enumerate(s.depots):
            if dp not in keep:
                s.depots[r] = _nearest(inst, sorted(keep), s.routes[r][0])
                s.refresh(r)
        s.open_depots = keep
    elif len(open_) < nd:
        closed = [dp for dp in inst.depots if dp not in s.open_depots]
        s.open_depots |= set(freq.ranked(closed)[:nd - len(open_)])
    return s


def repair(s, freq, rng, max_moves=MAX_REPAIR_MOVES):
    """Return a copy of ``s`` with ``N_d`` open depots and, if possible, no overload.

    Capacity is repaired by first-improvement tail exchanges under a large
    penalty weight; the result may still be infeasible when no improving
    exchange is left.
    """
    out = s.copy()
    repair_depots(out, freq, rng)
    if out.feasible:
        return out
    total = out.inst.total_demand
    beta = REPAIR_BETA_SCALE * out.f / total if total > 0 and out.f > 0 else REPAIR_BETA_SCALE
    for _ in range(max_moves):
        if out.feasible:
            break
        mv = explore_two_opt_star(out, beta, rng)
        if mv is None:
            break
        apply_move(out, mv)
    return out


def depot_swap(s, rng):
    """Replace a random open depot by a random closed one, in place.

    Returns False when every depot is open.
    """
    inst = s.inst
    closed = [dp for dp in inst.depots if dp not in s.open_depots]
    if not closed:
        return False
    old = rng.choice(sorted(s.open_depots))
    new = rng.choice(closed)
    s.open_depots.discard(old)
    s.open_depots.add(new)
    for r, dp in enumerate(s.depots):
        if dp == old:
            s.depots[r] = new
            s.refresh(r)
    return True


def ejection_chain(s, rng):
    """Cyclically move three customers of three distinct routes, in place.

    The customer picked in route ``a`` takes the slot of the one in ``b``,
    that one goes to ``c`` and the customer of ``c`` ends up in ``a``.
    Returns False when there are fewer than three routes.
    """
    if len(s.routes) < 3:
        return False
    ra, rb, rc = rng.sample(range(len(s.routes)), 3)
    pa, pb, pc = (rng.randrange(len(s.routes[r])) for r in (ra, rb, rc))
    ca, cb, cc = s.routes[ra][pa], s.routes[rb][pb], s.routes[rc][pc]
    s.routes[rb][pb] = ca
    s.routes[rc][pc] = cb
    s.routes[ra][pa] = cc
    for r in (ra, rb, rc):
        s.refresh(r)
    return True


def mutate(s, cfg, rng):
    """With probability ``cfg.mutation_prob`` apply ``cfg.mutation_length`` mutation steps.

    A step is a depot swap or an ejection chain picked uniformly, or both
    when ``cfg.mutation_mode == "both"``. Returns a new solution (or ``s``
    itself when nothing happens).
    """
    if cfg.mutation_prob <= 0 or rng.random() >= cfg.mutation_prob:
        return s
    out = s.copy()
    for _ in range(cfg.mutation_length):
        if cfg.mutation_mode == "both":
            depot_swap(out, rng)
            ejection_chain(out, rng)
        elif rng.random() < 0.5:
            depot_swap(out, rng)
        else:
            ejection_chain(out, rng)
    return out
