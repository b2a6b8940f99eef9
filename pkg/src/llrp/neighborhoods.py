"""The seven move operators used by the local search.

Every candidate is described by a *plan* per touched route: a list of pieces
``(r, i, j, reversed)`` meaning positions ``i..j`` of current route ``r``
(1-based, position 0 is the depot), or ``(-1, v, v, False)`` for a single
customer ``v``, or ``(-2, seg, 0, False)`` for a path of customers not
currently routed (see :func:`free_segment`). A plan is evaluated in O(number of pieces) from the prefix
data cached on :class:`~llrp.solution.Solution`, and the same plan
materialises the new customer list once a move is accepted.

Candidate generation is granular: a move is only looked at if it creates an
arc between a customer and one of its ``delta`` nearest vertices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

RELOCATE, SWAP, TWO_OPT, TWO_RELOCATE, NODE_ARC_SWAP, ARC_ARC_SWAP, SWAP_STAR = range(1, 8)
NAMES = {
    RELOCATE: "relocate",
    SWAP: "swap",
    TWO_OPT: "2-opt",
    TWO_RELOCATE: "2-relocate",
    NODE_ARC_SWAP: "node-arc-swap",
    ARC_ARC_SWAP: "arc-arc-swap",
    SWAP_STAR: "swap*",
}
IMPROVEMENT_EPS = 1e-9


@dataclass
class Move:
    kind: int
    changes: list  # (route index, new depot, new customer list)
    delta_F: float
    delta_f: float
    delta_load: dict
    new_open: frozenset | None = None
    _undo: list = field(default=None, repr=False)
    _undo_open: set = field(default=None, repr=False)

    @property
    def name(self):
        return NAMES[self.kind]


def apply_move(sol, move):
    """Apply ``move`` in place; remembers what is needed by :func:`undo_move`."""
    move._undo = [(r, sol.depots[r], sol.routes[r]) for r, _, _ in move.changes]
    move._undo_open = set(sol.open_depots)
    for r, dp, seq in move.changes:
        sol.depots[r] = dp
        sol.routes[r] = list(seq)
    for r, _, _ in move.changes:
        sol.refresh(r)
    if move.new_open is not None:
        sol.open_depots = set(move.new_open)
    return sol


def undo_move(sol, move):
    if move._undo is None:
        raise ValueError("move was never applied")
    for r, dp, seq in move._undo:
        sol.depots[r] = dp
        sol.routes[r] = seq
    for r, _, _ in move._undo:
        sol.refresh(r)
    sol.open_depots = move._undo_open
    move._undo = None
    return sol


class _Ctx:
    """Per-call view of a solution used by the move evaluators."""

    def __init__(self, sol, beta, strict_capacity):
        inst = sol.inst
        self.sol = sol
        self.inst = inst
        self.d = inst.d
        self.q = inst.demand_of
        self.nb = inst.neighbor_of
        self.nd = inst.n_depots
        self.cap = inst.capacity
        self.beta = beta
        self.strict = strict_capacity
        self.audit = None
        self.routes = sol.routes
        self.T = sol.t
        self.LL = sol.L
        self.QQ = sol.Q
        self.route_of = sol.route_of
        self.pos_of = sol.pos_of
        self.depots = sol.depots
        cap = self.cap
        self.excess = [x - cap if x > cap else 0.0 for x in sol.load]
        self.routes_at = [[] for _ in range(inst.n_depots)]
        for r, dp in enumerate(sol.depots):
            self.routes_at[dp].append(r)

    def route_cost(self, depot, plan):
        d = self.d
        time = lat = load = 0.0
        last = depot
        for r, i, j, rev in plan:
            if r == -1:
                time += d[last][i]
                lat += time
                load += self.q[i]
                last = i
                continue
            if r == -2:  # free segment: (first, last, cnt, dur, lat, load, nodes)
                first, end, cnt, dur, slat, sload, _ = i
                arrive = time + d[last][first]
                lat += slat + cnt * arrive
                time = arrive + dur
                load += sload
                last = end
                continue
            R = self.routes[r]
            t = self.T[r]
            cnt = j - i + 1
            dur = t[j] - t[i]
            slat = self.LL[r][j] - self.LL[r][i - 1] - cnt * t[i]
            if rev:
                first, end = R[j - 1], R[i - 1]
                slat = cnt * dur - slat
            else:
                first, end = R[i - 1], R[j - 1]
            arrive = time + d[last][first]
            lat += slat + cnt * arrive
            time = arrive + dur
            last = end
            Q = self.QQ[r]
            load += Q[j] - Q[i - 1]
        return lat, load

    def delta(self, changes):
        """Return (dF, df, new loads) for a list of (r, depot, plan)."""
        sol = self.sol
        cap = self.cap
        df = dpen = 0.0
        loads = []
        for r, dp, plan in changes:
            lat, load = self.route_cost(dp, plan)
            df += lat - sol.lat[r]
            dpen += (load - cap if load > cap else 0.0) - self.excess[r]
            loads.append(load)
        if self.strict and dpen > 1e-12:
            return math.inf, df, loads
        return df + self.beta * dpen, df, loads

    def materialize(self, plan):
        out = []
        for r, i, j, rev in plan:
            if r == -1:
                out.append(i)
            elif r == -2:
                out.extend(i[6])
            elif rev:
                out.extend(reversed(self.routes[r][i - 1:j]))
            else:
                out.extend(self.routes[r][i - 1:j])
        return out

    def make_move(self, kind, changes, dF, df, loads, new_open=None):
        sol = self.sol
        return Move(
            kind=kind,
            changes=[(r, dp, self.materialize(plan)) for r, dp, plan in changes],
            delta_F=dF,
            delta_f=df,
            delta_load={r: loads[k] - sol.load[r] for k, (r, _, _) in enumerate(changes)},
            new_open=frozenset(new_open) if new_open is not None else None,
        )

    def attempt(self, kind, changes, new_open=None):
        dF, df, loads = self.delta(changes)
        if self.audit is not None:
            self.audit(kind, [(r, dp, self.materialize(plan)) for r, dp, plan in changes],
                       dF, new_open)
        if dF < -IMPROVEMENT_EPS:
            return self.make_move(kind, changes, dF, df, loads, new_open)
        return None

    def whole(self, r):
        return [(r, 1, len(self.routes[r]), False)]


def _fwd(plan, r, i, j):
    if i <= j:
        plan.append((r, i, j, False))
    return plan


def _remove_block(r, n, a, b):
    """Plan for route ``r`` of length ``n`` with positions ``a..b`` removed."""
    plan = []
    _fwd(plan, r, 1, a - 1)
    _fwd(plan, r, b + 1, n)
    return plan


def _insert_block(r, m, p, block):
    """Plan for route ``r`` of length ``m`` with ``block`` pieces inserted after ``p``."""
    plan = []
    _fwd(plan, r, 1, p)
    plan.extend(block)
    _fwd(plan, r, p + 1, m)
    return plan


def _move_block_intra(r, n, a, b, p):
    """Plan for moving positions ``a..b`` of route ``r`` to just after ``p``."""
    block = [(r, a, b, False)]
    plan = []
    if p < a - 1:
        _fwd(plan, r, 1, p)
        plan.extend(block)
        _fwd(plan, r, p + 1, a - 1)
        _fwd(plan, r, b + 1, n)
    else:
        _fwd(plan, r, 1, a - 1)
        _fwd(plan, r, b + 1, p)
        plan.extend(block)
        _fwd(plan, r, p + 1, n)
    return plan


def _swap_blocks_intra(r, n, a1, a2, b1, b2):
    """Plan for exchanging disjoint blocks ``a1..a2`` and ``b1..b2`` (any order)."""
    if a1 > b1:
        a1, a2, b1, b2 = b1, b2, a1, a2
    plan = []
    _fwd(plan, r, 1, a1 - 1)
    plan.append((r, b1, b2, False))
    _fwd(plan, r, a2 + 1, b1 - 1)
    plan.append((r, a1, a2, False))
    _fwd(plan, r, b2 + 1, n)
    return plan


def _swap_blocks(ctx, kind, r1, a1, a2, r2, b1, b2):
    """Exchange block ``a1..a2`` of ``r1`` with block ``b1..b2`` of ``r2``."""
    routes = ctx.routes
    if r1 == r2:
        if not (a2 < b1 or b2 < a1):
            return None
        n = len(routes[r1])
        return ctx.attempt(kind, [(r1, ctx.depots[r1], _swap_blocks_intra(r1, n, a1, a2, b1, b2))])
    n1, n2 = len(routes[r1]), len(routes[r2])
    plan1 = []
    _fwd(plan1, r1, 1, a1 - 1)
    plan1.append((r2, b1, b2, False))
    _fwd(plan1, r1, a2 + 1, n1)
    plan2 = []
    _fwd(plan2, r2, 1, b1 - 1)
    plan2.append((r1, a1, a2, False))
    _fwd(plan2, r2, b2 + 1, n2)
    return ctx.attempt(kind, [(r1, ctx.depots[r1], plan1), (r2, ctx.depots[r2], plan2)])


def _relocate_block(ctx, kind, r1, a, b, r2, p):
    """Move positions ``a..b`` of ``r1`` after position ``p`` of ``r2``."""
    routes = ctx.routes
    n1 = len(routes[r1])
    if r1 == r2:
        if a - 1 <= p <= b:
            return None
        return ctx.attempt(kind, [(r1, ctx.depots[r1], _move_block_intra(r1, n1, a, b, p))])
    if b - a + 1 >= n1:
        return None  # would empty the source route
    n2 = len(routes[r2])
    return ctx.attempt(kind, [
        (r1, ctx.depots[r1], _remove_block(r1, n1, a, b)),
        (r2, ctx.depots[r2], _insert_block(r2, n2, p, [(r1, a, b, False)])),
    ])


# ---------------------------------------------------------------------------
# N1 relocate


def _relocate(ctx, order):
    nd, nb, route_of, pos_of = ctx.nd, ctx.nb, ctx.route_of, ctx.pos_of
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        for w in nb[u]:
            if w < nd:
                targets = [(r, 0) for r in ctx.routes_at[w]]
            else:
                rw, pw = route_of[w], pos_of[w]
                targets = ((rw, pw), (rw, pw - 1))
            for r2, p in targets:
                mv = _relocate_block(ctx, RELOCATE, ru, pu, pu, r2, p)
                if mv is not None:
                    return mv
    return None


# ---------------------------------------------------------------------------
# N2 swap (customers and depots)


def _swap(ctx, order):
    nd, nb, route_of, pos_of, routes = ctx.nd, ctx.nb, ctx.route_of, ctx.pos_of, ctx.routes
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        for w in nb[u]:
            if w < nd:
                if pu == 1:
                    mv = _depot_moves(ctx, ru, w)
                    if mv is not None:
                        return mv
                partners = [(r, 1) for r in ctx.routes_at[w]]
            else:
                rw, pw = route_of[w], pos_of[w]
                partners = []
                if pw < len(routes[rw]):
                    partners.append((rw, pw + 1))
                if pw > 1:
                    partners.append((rw, pw - 1))
            for rx, px in partners:
                if rx == ru and px == pu:
                    continue
                mv = _swap_blocks(ctx, SWAP, ru, pu, pu, rx, px, px)
                if mv is not None:
                    return mv
    return None


def _depot_moves(ctx, ru, w):
    """Depot-node swaps that make ``w`` the depot of route ``ru``."""
    sol = ctx.sol
    cur = ctx.depots[ru]
    if w == cur:
        return None
    if w in sol.open_depots:
        # exchange depots with each route anchored at w
        for r2 in ctx.routes_at[w]:
            mv = ctx.attempt(SWAP, [(ru, w, ctx.whole(ru)), (r2, cur, ctx.whole(r2))])
            if mv is not None:
                return mv
        # move this route alone onto w
        return ctx.attempt(SWAP, [(ru, w, ctx.whole(ru))])
    # w is closed: it replaces the current depot on all of that depot's routes
    changes = [(r, w, ctx.whole(r)) for r in ctx.routes_at[cur]]
    new_open = (sol.open_depots - {cur}) | {w}
    return ctx.attempt(SWAP, changes, new_open)


# ---------------------------------------------------------------------------
# N3 2-opt and 2-opt*


def _two_opt(ctx, order, inter_only=False):
    nd, nb, route_of, pos_of = ctx.nd, ctx.nb, ctx.route_of, ctx.pos_of
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        for w in nb[u]:
            if w < nd:
                if w == ctx.depots[ru] and not inter_only and pu >= 2:
                    mv = _reverse(ctx, ru, 1, pu)
                    if mv is not None:
                        return mv
                for r2 in ctx.routes_at[w]:
                    if r2 != ru:
                        mv = _tail_exchange(ctx, r2, 0, ru, pu - 1)
                        if mv is not None:
                            return mv
                continue
            rw, pw = route_of[w], pos_of[w]
            if rw == ru:
                if inter_only:
                    continue
                if pw < pu - 1:
                    mv = _reverse(ctx, ru, pw + 1, pu)
                elif pw > pu + 1:
                    mv = _reverse(ctx, ru, pu, pw - 1)
                else:
                    mv = None
                if mv is not None:
                    return mv
                continue
            # arc u -> w, then arc w -> u
            mv = _tail_exchange(ctx, ru, pu, rw, pw - 1)
            if mv is not None:
                return mv
            mv = _tail_exchange(ctx, rw, pw, ru, pu - 1)
            if mv is not None:
                return mv
    return None


def _reverse(ctx, r, i, j):
    n = len(ctx.routes[r])
    plan = []
    _fwd(plan, r, 1, i - 1)
    plan.append((r, i, j, True))
    _fwd(plan, r, j + 1, n)
    return ctx.attempt(TWO_OPT, [(r, ctx.depots[r], plan)])


def _tail_exchange(ctx, r1, c1, r2, c2):
    """2-opt*: route r1 keeps 1..c1 then takes r2's tail after c2, and vice versa."""
    n1, n2 = len(ctx.routes[r1]), len(ctx.routes[r2])
    if c1 + (n2 - c2) < 1 or c2 + (n1 - c1) < 1:
        return None
    if c1 == n1 and c2 == n2:
        return None
    if c1 == 0 and c2 == 0 and ctx.depots[r1] == ctx.depots[r2]:
        return None
    plan1 = _fwd([], r1, 1, c1)
    _fwd(plan1, r2, c2 + 1, n2)
    plan2 = _fwd([], r2, 1, c2)
    _fwd(plan2, r1, c1 + 1, n1)
    return ctx.attempt(TWO_OPT, [(r1, ctx.depots[r1], plan1), (r2, ctx.depots[r2], plan2)])


# ---------------------------------------------------------------------------
# N4 2-relocate


def _two_relocate(ctx, order):
    nd, nb, route_of, pos_of, routes = ctx.nd, ctx.nb, ctx.route_of, ctx.pos_of, ctx.routes
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        nu = len(routes[ru])
        for w in nb[u]:
            if w < nd:
                if pu < nu:
                    for r2 in ctx.routes_at[w]:
                        mv = _relocate_block(ctx, TWO_RELOCATE, ru, pu, pu + 1, r2, 0)
                        if mv is not None:
                            return mv
                continue
            rw, pw = route_of[w], pos_of[w]
            if pu < nu:  # pair (u, succ u) after w
                mv = _relocate_block(ctx, TWO_RELOCATE, ru, pu, pu + 1, rw, pw)
                if mv is not None:
                    return mv
            if pu > 1:  # pair (pred u, u) before w
                mv = _relocate_block(ctx, TWO_RELOCATE, ru, pu - 1, pu, rw, pw - 1)
                if mv is not None:
                    return mv
    return None


# ---------------------------------------------------------------------------
# N5 node-arc swap, N6 arc-arc swap


def _slots_after(ctx, w, size):
    """Blocks of ``size`` customers that start right after vertex ``w``."""
    if w < ctx.nd:
        return [(r, 1) for r in ctx.routes_at[w] if len(ctx.routes[r]) >= size]
    rw, pw = ctx.route_of[w], ctx.pos_of[w]
    if pw + size <= len(ctx.routes[rw]):
        return [(rw, pw + 1)]
    return []


def _node_arc_swap(ctx, order):
    nb, route_of, pos_of, routes = ctx.nb, ctx.route_of, ctx.pos_of, ctx.routes
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        nu = len(routes[ru])
        for w in nb[u]:
            if w == u:
                continue
            # node u takes the place of the pair following w
            for r2, b in _slots_after(ctx, w, 2):
                mv = _swap_blocks(ctx, NODE_ARC_SWAP, ru, pu, pu, r2, b, b + 1)
                if mv is not None:
                    return mv
            # pair (u, succ u) takes the place of the node following w
            if pu < nu:
                for r2, b in _slots_after(ctx, w, 1):
                    mv = _swap_blocks(ctx, NODE_ARC_SWAP, ru, pu, pu + 1, r2, b, b)
                    if mv is not None:
                        return mv
    return None


def _arc_arc_swap(ctx, order):
    nb, route_of, pos_of, routes = ctx.nb, ctx.route_of, ctx.pos_of, ctx.routes
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        if pu >= len(routes[ru]):
            continue
        for w in nb[u]:
            for r2, b in _slots_after(ctx, w, 2):
                mv = _swap_blocks(ctx, ARC_ARC_SWAP, ru, pu, pu + 1, r2, b, b + 1)
                if mv is not None:
                    return mv
    return None


# ---------------------------------------------------------------------------
# N7 swap*


def route_circles(sol):
    """Centroid and radius of the customers of each route."""
    inst = sol.inst
    xy = inst.customer_xy
    nd = inst.n_depots
    out = []
    for route in sol.routes:
        pts = [xy[v - nd] for v in route]
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        rad = max(math.hypot(p[0] - cx, p[1] - cy) for p in pts)
        out.append((cx, cy, rad))
    return out


def routes_overlap(c1, c2):
    return math.hypot(c1[0] - c2[0], c1[1] - c2[1]) <= c1[2] + c2[2] + 1e-9


def _best_reinsertion(ctx, r, removed, x):
    """Cheapest plan for route ``r`` with position ``removed`` dropped and ``x`` inserted."""
    m = len(ctx.routes[r])
    dp = ctx.depots[r]
    best = None
    node = (-1, x, x, False)
    for p in range(m + 1):
        if p == removed:
            continue
        plan = []
        if p < removed:
            _fwd(plan, r, 1, p)
            plan.append(node)
            _fwd(plan, r, p + 1, removed - 1)
            _fwd(plan, r, removed + 1, m)
        else:
            _fwd(plan, r, 1, removed - 1)
            _fwd(plan, r, removed + 1, p)
            plan.append(node)
            _fwd(plan, r, p + 1, m)
        lat, _ = ctx.route_cost(dp, plan)
        if best is None or lat < best[0] - 1e-12:
            best = (lat, plan)
    return best[1]


def _swap_star(ctx, order):
    nd, nb, route_of, pos_of = ctx.nd, ctx.nb, ctx.route_of, ctx.pos_of
    circles = route_circles(ctx.sol)
    for u in order:
        ru, pu = route_of[u], pos_of[u]
        for v in nb[u]:
            if v < nd:
                continue
            rv = route_of[v]
            if rv == ru or not routes_overlap(circles[ru], circles[rv]):
                continue
            pv = pos_of[v]
            plan_u = _best_reinsertion(ctx, ru, pu, v)
            plan_v = _best_reinsertion(ctx, rv, pv, u)
            mv = ctx.attempt(SWAP_STAR, [(ru, ctx.depots[ru], plan_u), (rv, ctx.depots[rv], plan_v)])
            if mv is not None:
                return mv
    return None


_EXPLORERS = {
    RELOCATE: _relocate,
    SWAP: _swap,
    TWO_OPT: _two_opt,
    TWO_RELOCATE: _two_relocate,
    NODE_ARC_SWAP: _node_arc_swap,
    ARC_ARC_SWAP: _arc_arc_swap,
    SWAP_STAR: _swap_star,
}


def explore(sol, k, beta, rng, *, strict_capacity=False, audit=None):
    """First-improvement scan of neighborhood ``k`` under ``F = f + beta * excess``.

    Anchor customers are visited in a random order drawn from ``rng`` (a
    :class:`random.Random`). Returns the first :class:`Move` whose ``delta_F``
    is below ``-1e-9``, or None. With ``strict_capacity`` moves that increase
    the total capacity excess are never returned.

    ``audit(kind, changes, delta_F, new_open)``, if given, sees every
    evaluated candidate with materialised customer lists.
    """
    if k not in _EXPLORERS:
        raise ValueError(f"invalid neighborhood id {k!r}; expected 1..7")
    ctx = _Ctx(sol, beta, strict_capacity)
    ctx.audit = audit
    order = list(sol.inst.customers)
    rng.shuffle(order)
    return _EXPLORERS[k](ctx, order)


def explore_two_opt_star(sol, beta, rng):
    """First-improvement scan restricted to inter-route tail exchanges."""
    ctx = _Ctx(sol, beta, False)
    order = list(sol.inst.customers)
    rng.shuffle(order)
    return _two_opt(ctx, order, inter_only=True)


def free_segment(inst, nodes):
    """Plan piece for a path of customers that is not part of any route."""
    d = inst.d
    q = inst.demand_of
    time = lat = 0.0
    load = q[nodes[0]]
    for a, b in zip(nodes, nodes[1:]):
        time += d[a][b]
        lat += time
        load += q[b]
    return (-2, (nodes[0], nodes[-1], len(nodes), time, lat, load, list(nodes)), 0, False)
