"""Population management: construction, quality-and-distance updating, restarts.

The population only ever holds feasible, pairwise distinct solutions. Each
member carries an insertion stamp; the member with the largest stamp is the
one with the shortest life.
"""
from __future__ import annotations

import csv
from collections import deque

from .solution import Solution, arc_set

DEGENERATE_TERM = 0.5


# ---------------------------------------------------------------------------
# construction


def greedy_solution(inst, rng):
    """Nearest-neighbour construction on ``N_d`` random depots.

    Routes are seeded with the globally shortest depot-customer edges, then
    grown round-robin by appending the nearest unvisited customer to each
    route's last node. Capacity is ignored.
    """
    d = inst.d
    open_ = sorted(rng.sample(list(inst.depots), inst.max_open_depots))
    left = set(inst.customers)
    routes, depots = [], []
    for _ in range(inst.n_vehicles):
        dp, c = min(((dp, c) for dp in open_ for c in left), key=lambda e: (d[e[0]][e[1]], e))
        routes.append([c])
        depots.append(dp)
        left.discard(c)
    while left:
        for route in routes:
            if not left:
                break
            last = route[-1]
            c = min(left, key=lambda v: (d[last][v], v))
            route.append(c)
            left.discard(c)
    return Solution(inst, routes, depots, set(open_))


def random_solution(inst, rng):
    """Random depots, random route seeds and a random round-robin assignment."""
    open_ = sorted(rng.sample(list(inst.depots), inst.max_open_depots))
    order = list(inst.customers)
    rng.shuffle(order)
    nv = inst.n_vehicles
    routes = [order[k::nv] for k in range(nv)]
    depots = [rng.choice(open_) for _ in range(nv)]
    return Solution(inst, routes, depots, set(open_))


def construct(inst, rng):
    if inst.n_customers < inst.n_vehicles:
        raise ValueError("fewer customers than vehicles: cannot form non-empty routes")
    if rng.random() < 0.5:
        return greedy_solution(inst, rng)
    return random_solution(inst, rng)


# ---------------------------------------------------------------------------
# fitness


def fitness(fs, pds, psi=0.55):
    """Weighted sum of normalised quality and normalised distance."""
    fmax, fmin = max(fs), min(fs)
    pmax, pmin = max(pds), min(pds)
    out = []
    for f, pd in zip(fs, pds):
        q = (fmax - f) / (fmax - fmin) if fmax > fmin else DEGENERATE_TERM
        p = (pd - pmin) / (pmax - pmin) if pmax > pmin else DEGENERATE_TERM
        out.append(psi * q + (1 - psi) * p)
    return out


def _distances(arcsets):
    """Minimum arc distance of each set to all the others."""
    n = len(arcsets)
    best = [None] * n
    for i in range(n):
        ai = arcsets[i]
        for j in range(i + 1, n):
            shared = len(ai & arcsets[j])
            dij = len(ai) - shared
            dji = len(arcsets[j]) - shared
            if best[i] is None or dij < best[i]:
                best[i] = dij
            if best[j] is None or dji < best[j]:
                best[j] = dji
    return [0 if b is None else b for b in best]


class Population:
    """Members with insertion stamps, an adaptive memory and a stagnation counter."""

    def __init__(self, inst, size=20, psi=0.55, memory_size=3000):
        if size < 1:
            raise ValueError("population size must be >= 1")
        self.inst = inst
        self.size = size
        self.psi = psi
        self.members = []
        self.stamps = []
        self._arcs = []
        self._next = 0
        self.memory = deque(maxlen=memory_size)
        self.stagnation = 0

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def _push(self, sol, arcs):
        self.members.append(sol)
        self._arcs.append(arcs)
        self.stamps.append(self._next)
        self._next += 1

    def _pop(self, i):
        del self.members[i], self._arcs[i], self.stamps[i]

    def is_clone(self, sol, arcs=None):
        arcs = arc_set(sol) if arcs is None else arcs
        return any(len(arcs - other) == 0 for other in self._arcs)

    def add(self, sol):
        """Append ``sol`` (feasible, not a clone) without eviction; True if added."""
        if not sol.feasible or len(self.members) >= self.size:
            return False
        arcs = arc_set(sol)
        if self.is_clone(sol, arcs):
            return False
        self._push(sol, arcs)
        return True

    def best(self):
        return min(zip(self.members, self.stamps), key=lambda x: (x[0].f, x[1]))[0]

    def best_index(self):
        return min(range(len(self.members)), key=lambda i: (self.members[i].f, self.stamps[i]))

    def newest(self):
        return self.members[max(range(len(self.members)), key=self.stamps.__getitem__)]

    def fitness(self):
        return fitness([m.f for m in self.members], _distances(self._arcs), self.psi)

    def update(self, sol):
        """Insert ``sol`` and evict the least fit member; returns True if ``sol`` stays."""
        if not sol.feasible:
            raise ValueError("only feasible solutions enter the population")
        arcs = arc_set(sol)
        if self.is_clone(sol, arcs):
            return False
        self._push(sol, arcs)
        if len(self.members) <= self.size:
            return True
        fit = self.fitness()
        worst = min(range(len(fit)), key=lambda i: (fit[i], self.stamps[i]))
        survived = worst != len(self.members) - 1
        self._pop(worst)
        return survived

    def remember(self, sol):
        self.memory.append(sol)

    def replace_on_stagnation(self, rng, fresh, attempts=10):
        """Drop half of the members (never the best) and refill.

        Each vacancy is filled either by ``fresh()`` (a new improved solution
        or None) or by a random pick from the older half of the memory.
        """
        n = len(self.members)
        keep = self.best_index()
        others = [i for i in range(n) if i != keep]
        drop = sorted(rng.sample(others, min(len(others), self.size // 2)), reverse=True)
        for i in drop:
            self._pop(i)
        older = list(self.memory)[:len(self.memory) // 2]
        for _ in range(len(drop)):
            for _ in range(attempts):
                if older and rng.random() < 0.5:
                    cand = rng.choice(older)
                else:
                    cand = fresh()
                if cand is not None and self.add(cand):
                    break
        self.stagnation = 0
        return self

    def to_csv(self, path):
        pds = _distances(self._arcs)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["member", "f", "pdist", "age"])
            for m, pd, st in zip(self.members, pds, self.stamps):
                w.writerow([st, f"{m.f:.6f}", pd, self._next - st])


def initialize(inst, rng, improve, size=20, psi=0.55, memory_size=3000, attempts_factor=10):
    """Build a population of up to ``size`` distinct improved solutions.

    ``improve(sol)`` returns a feasible solution or None. At most
    ``attempts_factor * size`` constructions are made; tiny instances may not
    admit ``size`` distinct local optima, so a smaller population is returned
    then. Raises RuntimeError if not even one feasible solution is found.
    """
    pop = Population(inst, size, psi, memory_size)
    tries = 0
    limit = attempts_factor * size
    while len(pop) < size and (tries < limit or (len(pop) == 0 and tries < 10 * limit)):
        tries += 1
        sol = improve(construct(inst, rng))
        if sol is not None:
            pop.add(sol)
    if not len(pop):
        raise RuntimeError("could not build any feasible solution")
    return pop
