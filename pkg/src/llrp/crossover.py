"""Multi-parent edge assembly crossover and an order-crossover baseline.

Solutions are viewed as directed graphs in which every depot is merged into a
single supernode (``-1``). The symmetric difference of two such graphs splits
into closed alternating walks (AB-sequences); a central walk plus every walk
sharing a customer with it forms the E-set, whose arcs are swapped from the
donor into the base. The resulting arc set may contain customer-only cycles
and routes that start and end at different depots; both are fixed here.
Depot-count and capacity problems are left to :mod:`llrp.variation`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .neighborhoods import _Ctx, free_segment
from .solution import SUPERNODE, Solution, initial_beta

PARENT_A, PARENT_B = 0, 1
OUT, IN = 0, 1


@dataclass
class ABSequence:
    """Closed alternating walk; ``arcs`` holds ``(tail, head, parent)``."""

    arcs: list

    @property
    def nodes(self):
        out = set()
        for u, v, _ in self.arcs:
            out.add(u)
            out.add(v)
        return out

    @property
    def customer_nodes(self):
        return self.nodes - {SUPERNODE}

    def __len__(self):
        return len(self.arcs)


@dataclass
class CrossoverTrace:
    """Provenance record filled in by :func:`mpeax_pair` when requested."""

    sequences: list = field(default_factory=list)
    eset: list = field(default_factory=list)
    intermediate_arcs: set = field(default_factory=set)
    n_subtours: int = 0
    n_depot_fixes: int = 0
    reconnection_arcs: list = field(default_factory=list)


def annotated_arcs(sol):
    """Map each supernode arc of ``sol`` to the real depot it touches.

    Customer-to-customer arcs map to None.
    """
    arcs = {}
    for dp, route in zip(sol.depots, sol.routes):
        prev = SUPERNODE
        for v in route:
            arcs[prev, v] = dp if prev == SUPERNODE else None
            prev = v
        arcs[prev, SUPERNODE] = dp
    return arcs


def build_ab_sequences(a, b, rng):
    """Partition the symmetric difference of ``a`` and ``b`` into AB-sequences.

    A-arcs are walked forward and B-arcs backward, alternating parents. A walk
    closes when it comes back to its start node in the same role (tail or
    head) as the first arc. The supernode keeps every node balanced, so a walk
    can always be continued until it closes.
    """
    if a.inst is not b.inst and a.inst != b.inst:
        raise ValueError("parents belong to different instances")
    ea, eb = set(annotated_arcs(a)), set(annotated_arcs(b))
    pools = {}  # (parent, role, node) -> list of arcs where node plays role
    remaining = {}  # node -> count of unused incident arcs
    for parent, arcs in ((PARENT_A, sorted(ea - eb)), (PARENT_B, sorted(eb - ea))):
        for u, v in arcs:
            pools.setdefault((parent, OUT, u), []).append((u, v))
            pools.setdefault((parent, IN, v), []).append((u, v))
            remaining[u] = remaining.get(u, 0) + 1
            remaining[v] = remaining.get(v, 0) + 1

    def take(parent, arc):
        u, v = arc
        pools[parent, OUT, u].remove(arc)
        pools[parent, IN, v].remove(arc)
        remaining[u] -= 1
        remaining[v] -= 1

    def give_back(parent, arc):
        u, v = arc
        pools[parent, OUT, u].append(arc)
        pools[parent, IN, v].append(arc)
        pools[parent, OUT, u].sort()
        pools[parent, IN, v].sort()
        remaining[u] += 1
        remaining[v] += 1

    seqs = []
    stalls = 0
    while True:
        starts = sorted(v for v, c in remaining.items() if c > 0)
        if not starts:
            break
        start = rng.choice(starts)
        first = [(p, role, arc) for p in (PARENT_A, PARENT_B) for role in (OUT, IN)
                 for arc in pools.get((p, role, start), ())]
        parent, role0, arc = rng.choice(first)
        walk = [(arc, parent)]
        take(parent, arc)
        node = arc[1] if role0 == OUT else arc[0]
        # role of the arriving arc at ``node``
        role = IN if role0 == OUT else OUT
        while not (node == start and role == role0):
            parent = 1 - parent
            cand = pools.get((parent, role, node), ())
            if not cand:
                break
            arc = rng.choice(cand)
            take(parent, arc)
            walk.append((arc, parent))
            if role == OUT:
                node = arc[1]
                role = IN
            else:
                node = arc[0]
                role = OUT
        else:
            seqs.append(ABSequence([(u, v, p) for (u, v), p in walk]))
            continue
        # walk got stuck: return its arcs and start over elsewhere
        for arc, p in walk:
            give_back(p, arc)
        stalls += 1
        if stalls > 1000:
            raise RuntimeError("AB-sequence construction failed to close a walk")
    return seqs


def select_eset(seqs, rng):
    """Random central sequence plus every sequence sharing a customer with it."""
    if not seqs:
        return []
    center = rng.choice(seqs)
    nodes = center.customer_nodes
    return [center] + [s for s in seqs if s is not center and s.customer_nodes & nodes]


def intermediate_arcs(base, donor, eset):
    """Arc dict of the base with the E-set exchanged (annotated as in :func:`annotated_arcs`)."""
    arcs = annotated_arcs(base)
    donor_arcs = annotated_arcs(donor)
    for seq in eset:
        for u, v, p in seq.arcs:
            if p == PARENT_A:
                del arcs[u, v]
    for seq in eset:
        for u, v, p in seq.arcs:
            if p == PARENT_B:
                arcs[u, v] = donor_arcs[u, v]
    return arcs


def decode(inst, arcs):
    """Split an exchanged arc set into routes and customer-only cycles.

    Returns ``(routes, subtours)`` with routes as ``(start depot, end depot,
    customers)`` in order of their first customer.
    """
    succ = {}
    starts = []
    end_depot = {}
    for (u, v), dp in arcs.items():
        if u == SUPERNODE:
            starts.append((v, dp))
        elif v == SUPERNODE:
            end_depot[u] = dp
        else:
            succ[u] = v
    starts.sort()
    seen = set()
    routes = []
    for first, dp in starts:
        seq = [first]
        seen.add(first)
        v = first
        while v in succ:
            v = succ[v]
            seq.append(v)
            seen.add(v)
        routes.append((dp, end_depot[v], seq))
    subtours = []
    for c in inst.customers:
        if c in seen:
            continue
        cyc = [c]
        seen.add(c)
        v = succ[c]
        while v != c:
            cyc.append(v)
            seen.add(v)
            v = succ[v]
        subtours.append(cyc)
    return routes, subtours


def _granular(inst, a, b):
    return b in inst.neighbor_sets[a] or a in inst.neighbor_sets[b]


def _reconnect(sol, cycle, beta, trace):
    """Open ``cycle`` at one arc and splice it into a route at the cheapest place."""
    inst = sol.inst
    k = len(cycle)
    openings = []
    for s in range(k):
        # drop arc cycle[s-1] -> cycle[s]; the path runs cycle[s] .. cycle[s-1]
        path = cycle[s:] + cycle[:s]
        openings.append(free_segment(inst, path))
    ctx = _Ctx(sol, beta, False)
    best = None
    fallback = None
    for r, route in enumerate(sol.routes):
        n = len(route)
        dp = sol.depots[r]
        for p in range(n + 1):
            a = dp if p == 0 else route[p - 1]
            b = route[p] if p < n else None
            for piece in openings:
                first, last = piece[1][0], piece[1][1]
                plan = []
                if p:
                    plan.append((r, 1, p, False))
                plan.append(piece)
                if p < n:
                    plan.append((r, p + 1, n, False))
                dF, _, _ = ctx.delta([(r, dp, plan)])
                cand = (dF, r, p, piece)
                ok = _granular(inst, a, first) or (b is not None and _granular(inst, last, b))
                if ok:
                    if best is None or dF < best[0]:
                        best = cand
                elif fallback is None or dF < fallback[0]:
                    fallback = cand
    if best is None:
        best = fallback
    _, r, p, piece = best
    path = piece[1][6]
    route = sol.routes[r]
    sol.routes[r] = route[:p] + path + route[p:]
    sol.refresh(r)
    if trace is not None:
        a = sol.depots[r] if p == 0 else route[p - 1]
        trace.reconnection_arcs.append((SUPERNODE if p == 0 else a, path[0]))
        trace.reconnection_arcs.append((path[-1], route[p] if p < len(route) else SUPERNODE))


def mpeax_pair(base, donor, rng, beta=None, trace=None):
    """Recombine ``base`` with arcs of ``donor``; returns a new solution.

    Sub-tours are spliced into routes at the minimum increase of the
    penalized objective (``beta`` defaults to ``f(base) / total demand``),
    preferring reconnections whose new arcs are granular. Routes whose ends
    carry different depots are anchored at the depot closer to their first
    customer. The result may open more or fewer than ``N_d`` depots.
    """
    inst = base.inst
    seqs = build_ab_sequences(base, donor, rng)
    if trace is not None:
        trace.sequences = seqs
    if not seqs:
        if trace is not None:
            trace.intermediate_arcs = set(annotated_arcs(base))
        return base.copy()
    eset = select_eset(seqs, rng)
    arcs = intermediate_arcs(base, donor, eset)
    routes, subtours = decode(inst, arcs)
    if trace is not None:
        trace.eset = eset
        trace.intermediate_arcs = set(arcs)
        trace.n_subtours = len(subtours)
    d = inst.d
    depots = []
    for start, end, seq in routes:
        if start != end:
            start = start if d[start][seq[0]] <= d[end][seq[0]] else end
            if trace is not None:
                trace.n_depot_fixes += 1
        depots.append(start)
    child = Solution(inst, [seq for _, _, seq in routes], depots, check=False)
    if beta is None:
        beta = initial_beta(base)
    for cycle in subtours:
        _reconnect(child, cycle, beta, trace)
    child.check()
    return child


def mpeax3(sa, sb, sc, rng, mode="mpeax3", trace=None):
    """Offspring of the configured crossover (``mpeax3``, ``mpeax2`` or ``ox``)."""
    if mode == "mpeax3":
        return mpeax_pair(mpeax_pair(sa, sb, rng, trace=trace), sc, rng)
    if mode == "mpeax2":
        return mpeax_pair(sa, sb, rng, trace=trace)
    if mode == "ox":
        return order_crossover(sa, sb, rng)
    raise ValueError(f"unknown crossover {mode!r}")


# ---------------------------------------------------------------------------
# order crossover baseline


def giant_tour(sol):
    return [v for route in sol.routes for v in route]


def ox_tour(p1, p2, i, j):
    """Classic OX: keep ``p1[i..j]`` and fill the rest in ``p2`` order from ``j+1``."""
    n = len(p1)
    if sorted(p1) != sorted(p2):
        raise ValueError("parents must be permutations of the same items")
    if not 0 <= i <= j < n:
        raise ValueError("cut points out of range")
    child = [None] * n
    child[i:j + 1] = p1[i:j + 1]
    kept = set(p1[i:j + 1])
    fill = [p2[(j + 1 + k) % n] for k in range(n)]
    fill = [v for v in fill if v not in kept]
    pos = (j + 1) % n
    for v in fill:
        child[pos] = v
        pos = (pos + 1) % n
    return child


def order_crossover(sa, sb, rng):
    """OX on giant tours, re-split cyclically into ``N_v`` routes.

    Each route is anchored at the open depot of ``sa`` nearest its first
    customer.
    """
    inst = sa.inst
    t1, t2 = giant_tour(sa), giant_tour(sb)
    n = len(t1)
    i, j = sorted((rng.randrange(n), rng.randrange(n)))
    tour = ox_tour(t1, t2, i, j)
    nv = inst.n_vehicles
    routes = [tour[k::nv] for k in range(nv)]
    open_ = sorted(sa.open_depots)
    d = inst.d
    depots = [min(open_, key=lambda dp: (d[dp][r[0]], dp)) for r in routes]
    return Solution(inst, routes, depots, open_depots=set(open_))


def arc_origin_ok(trace, base, donor):
    """True when every intermediate arc comes from one of the two parents."""
    union = set(annotated_arcs(base)) | set(annotated_arcs(donor))
    return trace.intermediate_arcs <= union


__all__ = [
    "ABSequence", "CrossoverTrace", "annotated_arcs", "build_ab_sequences", "select_eset",
    "intermediate_arcs", "decode", "mpeax_pair", "mpeax3", "giant_tour", "ox_tour",
    "order_crossover", "arc_origin_ok",
]
