"""Solution representation, objectives, penalty control and solution distances.

A route is stored as its anchoring depot plus the ordered customers. For each
route we cache prefix arrays over positions ``0..n`` (position 0 is the
depot): arrival time ``t``, running latency sum ``L`` and running load ``Q``.
Any sub-sequence of a route can then be summarised in O(1), which is what the
move evaluators in :mod:`llrp.neighborhoods` rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

SUPERNODE = -1
BETA_MIN = 1e-9
BETA_MAX = 1e12
OBJ_TOL = 1e-6


class InvalidSolutionError(ValueError):
    pass


class Solution:
    __slots__ = ("inst", "routes", "depots", "open_depots", "t", "L", "Q",
                 "lat", "load", "route_of", "pos_of")

    def __init__(self, inst, routes, depots, open_depots=None, check=True):
        self.inst = inst
        self.routes = [list(r) for r in routes]
        self.depots = list(depots)
        if open_depots is None:
            open_depots = set(self.depots)
        self.open_depots = set(open_depots)
        n = inst.n_vertices
        self.route_of = [-1] * n
        self.pos_of = [-1] * n
        nr = len(self.routes)
        self.t = [None] * nr
        self.L = [None] * nr
        self.Q = [None] * nr
        self.lat = [0.0] * nr
        self.load = [0.0] * nr
        for r in range(nr):
            self.refresh(r)
        if check:
            self.check()

    def refresh(self, r):
        """Recompute the cached prefix data of route ``r``."""
        d = self.inst.d
        q = self.inst.demand_of
        route = self.routes[r]
        prev = self.depots[r]
        t = [0.0]
        L = [0.0]
        Q = [0.0]
        time = lat = load = 0.0
        route_of, pos_of = self.route_of, self.pos_of
        for k, v in enumerate(route, 1):
            time += d[prev][v]
            lat += time
            load += q[v]
            t.append(time)
            L.append(lat)
            Q.append(load)
            route_of[v] = r
            pos_of[v] = k
            prev = v
        self.t[r] = t
        self.L[r] = L
        self.Q[r] = Q
        self.lat[r] = lat
        self.load[r] = load

    # -- objective -------------------------------------------------------
    @property
    def f(self):
        return sum(self.lat)

    @property
    def violation(self):
        cap = self.inst.capacity
        return sum(x - cap for x in self.load if x > cap)

    def F(self, beta):
        return self.f + beta * self.violation

    @property
    def feasible(self):
        cap = self.inst.capacity + 1e-9
        return all(x <= cap for x in self.load)

    @property
    def depot_feasible(self):
        return (len(self.open_depots) == self.inst.max_open_depots
                and all(dp in self.open_depots for dp in self.depots))

    # -- structure -------------------------------------------------------
    def check(self):
        """Raise :class:`InvalidSolutionError` on structural violations."""
        inst = self.inst
        if len(self.routes) != inst.n_vehicles:
            raise InvalidSolutionError(f"{len(self.routes)} routes, expected N_v={inst.n_vehicles}")
        if len(self.depots) != len(self.routes):
            raise InvalidSolutionError("one depot per route required")
        seen = set()
        for r, route in enumerate(self.routes):
            if not route:
                raise InvalidSolutionError(f"route {r} is empty")
            if not 0 <= self.depots[r] < inst.n_depots:
                raise InvalidSolutionError(f"route {r} anchored at non-depot vertex {self.depots[r]}")
            for v in route:
                if not inst.n_depots <= v < inst.n_vertices:
                    raise InvalidSolutionError(f"route {r} visits non-customer vertex {v}")
                if v in seen:
                    raise InvalidSolutionError(f"customer {inst.external_id(v)} visited twice")
                seen.add(v)
        if len(seen) != inst.n_customers:
            missing = sorted(set(inst.customers) - seen)
            raise InvalidSolutionError(
                f"customers not visited: {[inst.external_id(v) for v in missing[:10]]}")
        if any(not 0 <= dp < inst.n_depots for dp in self.open_depots):
            raise InvalidSolutionError("open depot set contains a non-depot vertex")
        if not all(dp in self.open_depots for dp in self.depots):
            raise InvalidSolutionError("a route is anchored at a closed depot")

    def copy(self):
        new = object.__new__(Solution)
        new.inst = self.inst
        new.routes = [r[:] for r in self.routes]
        new.depots = self.depots[:]
        new.open_depots = set(self.open_depots)
        new.route_of = self.route_of[:]
        new.pos_of = self.pos_of[:]
        new.t = [x[:] for x in self.t]
        new.L = [x[:] for x in self.L]
        new.Q = [x[:] for x in self.Q]
        new.lat = self.lat[:]
        new.load = self.load[:]
        return new

    def key(self):
        return (tuple(sorted(self.open_depots)),
                tuple((dp, tuple(r)) for dp, r in zip(self.depots, self.routes)))

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return self.inst is other.inst and self.key() == other.key()

    __hash__ = None

    def __repr__(self):
        return (f"Solution(f={self.f:.2f}, routes={len(self.routes)}, "
                f"open={sorted(self.open_depots)}, feasible={self.feasible})")


# ---------------------------------------------------------------------------
# objectives


def evaluate(sol, inst=None):
    """Sum of customer arrival times, recomputed from scratch."""
    inst = inst or sol.inst
    if len(sol.routes) != len(sol.depots):
        raise InvalidSolutionError("one depot per route required")
    d = inst.d
    total = 0.0
    for dp, route in zip(sol.depots, sol.routes):
        time = 0.0
        prev = dp
        for v in route:
            time += d[prev][v]
            total += time
            prev = v
    return total


def route_loads(sol, inst=None):
    inst = inst or sol.inst
    q = inst.demand_of
    return [sum(q[v] for v in route) for route in sol.routes]


def evaluate_extended(sol, inst=None, beta=0.0):
    """Penalized objective ``f + beta * total capacity excess``."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    inst = inst or sol.inst
    excess = sum(max(0.0, x - inst.capacity) for x in route_loads(sol, inst))
    return evaluate(sol, inst) + beta * excess


def initial_beta(sol):
    total = sol.inst.total_demand
    f = sol.f
    if total <= 0 or f <= 0:
        return 1.0
    return f / total


# ---------------------------------------------------------------------------
# penalty control


@dataclass
class PenaltyState:
    """Penalty weight plus the consecutive feasible/infeasible acceptance counters."""

    beta: float
    window: int = 4
    n_feasible: int = 0
    n_infeasible: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    @property
    def saturated(self):
        return self.n_feasible >= self.window or self.n_infeasible >= self.window

    def record(self, feasible, rng=None):
        """Count one accepted solution; adjusts beta when a counter saturates.

        Returns True when beta changed.
        """
        if feasible:
            self.n_feasible += 1
            self.n_infeasible = 0
        else:
            self.n_infeasible += 1
            self.n_feasible = 0
        if self.saturated:
            adjust_beta(self, rng)
            return True
        return False


def adjust_beta(ps, rng):
    """Scale beta up after ``window`` infeasible acceptances, down after feasible ones.

    The factor is ``1.5 + coin`` with ``coin`` a fair 0/1 draw from ``rng``
    (anything with ``getrandbits`` or ``random``). The triggering counter is
    reset and beta is clamped to ``[1e-9, 1e12]``. Mutates and returns ``ps``.
    """
    coin = _coin(rng)
    if ps.n_infeasible >= ps.window:
        ps.beta *= 1.5 + coin
        ps.n_infeasible = 0
    elif ps.n_feasible >= ps.window:
        ps.beta /= 1.5 + coin
        ps.n_feasible = 0
    else:
        raise ValueError("adjust_beta called before either counter reached the window length")
    ps.beta = min(max(ps.beta, BETA_MIN), BETA_MAX)
    return ps


def _coin(rng):
    if isinstance(rng, int):
        return rng & 1
    if hasattr(rng, "getrandbits"):
        return rng.getrandbits(1)
    return int(rng.random() < 0.5)


# ---------------------------------------------------------------------------
# distances


def arc_set(sol):
    """Directed arcs of ``sol`` with every depot mapped to one supernode."""
    arcs = set()
    for route in sol.routes:
        prev = SUPERNODE
        for v in route:
            arcs.add((prev, v))
            prev = v
        arcs.add((prev, SUPERNODE))
    return arcs


def solution_distance(a, b):
    """Number of arcs of ``a`` that ``b`` does not use."""
    if a.inst is not b.inst and a.inst != b.inst:
        raise ValueError("solutions belong to different instances")
    ea = arc_set(a)
    return len(ea) - len(ea & arc_set(b))


def population_distance(s, members):
    """Minimum distance from ``s`` to the other members (``s`` itself excluded by identity)."""
    others = [m for m in members if m is not s]
    if not others:
        raise ValueError("population distance needs at least one other member")
    es = arc_set(s)
    n = len(es)
    return min(n - len(es & arc_set(m)) for m in others)


# ---------------------------------------------------------------------------
# solution files


@dataclass
class SolutionRecord:
    """Solution file contents in external ids, not yet checked against an instance."""

    instance: str
    objective: float | None
    open_depots: list
    routes: list  # (depot id, [customer ids])

    def to_solution(self, inst, check=True):
        try:
            depots = [inst.depot_index(dp) for dp, _ in self.routes]
            routes = [[inst.customer_index(c) for c in seq] for _, seq in self.routes]
            open_ = {inst.depot_index(dp) for dp in self.open_depots}
        except KeyError as exc:
            raise InvalidSolutionError(str(exc)) from None
        return Solution(inst, routes, depots, open_, check=check)


def format_solution(sol):
    inst = sol.inst
    lines = [f"INSTANCE {inst.name}",
             f"OBJECTIVE {sol.f:.2f}",
             "OPEN_DEPOTS " + " ".join(str(inst.depot_ids[dp]) for dp in sorted(sol.open_depots))]
    for dp, route in zip(sol.depots, sol.routes):
        lines.append(f"ROUTE {inst.depot_ids[dp]} : "
                     + " ".join(str(inst.external_id(v)) for v in route))
    return "\n".join(lines) + "\n"


def write_solution(sol, path):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(format_solution(sol))
    tmp.replace(path)


def parse_solution_text(text):
    name, objective, open_depots, routes = None, None, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "INSTANCE":
                name = rest.strip()
            elif key == "OBJECTIVE":
                objective = float(rest)
            elif key == "OPEN_DEPOTS":
                open_depots = [int(x) for x in rest.split()]
            elif key == "ROUTE":
                head, sep, tail = rest.partition(":")
                if not sep:
                    raise ValueError("ROUTE line needs ':'")
                routes.append((int(head), [int(x) for x in tail.split()]))
            else:
                raise ValueError(f"unknown keyword {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return SolutionRecord(name, objective, open_depots, routes)


def read_solution(path):
    return parse_solution_text(Path(path).read_text())
