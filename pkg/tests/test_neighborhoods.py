import random
from collections import Counter

import pytest

from llrp import Instance, Solution, random_instance
from llrp.neighborhoods import (NAMES, RELOCATE, SWAP, SWAP_STAR, TWO_OPT, apply_move, explore,
                                explore_two_opt_star, route_circles, routes_overlap, undo_move)
from llrp.population import random_solution
from oracles import extended


def fuzz_candidates(n_instances, seed, per_solution_steps=8):
    """Yield (instance, solution, beta, kind, changes, delta_F, new_open) for many candidates."""
    rng = random.Random(seed)
    for s in range(n_instances):
        m = rng.randint(4, 18)
        nd = rng.randint(1, 4)
        inst = random_instance(seed * 1000 + s, m, nd, n_vehicles=rng.randint(1, min(4, m)),
                               max_open_depots=rng.randint(1, nd), delta=rng.choice([3, 6, 30]))
        sol = random_solution(inst, rng)
        beta = rng.choice([0.0, 0.7, 25.0])
        for _ in range(per_solution_steps):
            found = []
            for k in range(1, 8):
                explore(sol, k, beta, rng,
                        audit=lambda kind, ch, dF, no: found.append((kind, ch, dF, no)))
            for item in found:
                yield (inst, sol, beta) + item
            mv = explore(sol, rng.randint(1, 7), beta, rng)
            if mv is not None:
                apply_move(sol, mv)


def check_candidate(inst, sol, beta, kind, changes, dF, new_open):
    routes = [list(r) for r in sol.routes]
    depots = list(sol.depots)
    for r, dp, seq in changes:
        routes[r] = list(seq)
        depots[r] = dp
    open_ = set(new_open) if new_open is not None else sol.open_depots
    before = extended(inst, sol.depots, sol.routes, beta)
    after = extended(inst, depots, routes, beta)
    assert sorted(v for r in routes for v in r) == list(inst.customers), NAMES[kind]
    assert all(routes), NAMES[kind]
    assert len(open_) == len(sol.open_depots)
    assert all(dp in open_ for dp in depots)
    assert after - before == pytest.approx(dF, abs=1e-6), NAMES[kind]


def test_delta_matches_recomputation_all_operators():
    seen = Counter()
    for cand in fuzz_candidates(60, 1):
        check_candidate(*cand)
        seen[cand[3]] += 1
    assert set(seen) == set(range(1, 8))
    assert min(seen.values()) >= 500


def test_swap_example():
    # depot at 0, a at 10, b at 1: serving b first saves 18
    inst = Instance("sw", [[0, 0]], [[10, 0], [1, 0]], [1, 1], 10, 1, 1)
    sol = Solution(inst, [[1, 2]], [0])
    mv = explore(sol, SWAP, 0.0, random.Random(0))
    assert mv is not None and mv.kind == SWAP
    before = sol.f
    apply_move(sol, mv)
    assert sol.routes == [[2, 1]]
    assert mv.delta_F == pytest.approx(sol.f - before) == pytest.approx(-18.0)


def exhaustive_best_relocation(inst, sol, beta):
    best = 0.0
    base = extended(inst, sol.depots, sol.routes, beta)
    for r1, route in enumerate(sol.routes):
        for i, u in enumerate(route):
            rest = route[:i] + route[i + 1:]
            if not rest and len(sol.routes) > 1:
                continue  # would empty a route
            for r2 in range(len(sol.routes)):
                target = rest if r2 == r1 else sol.routes[r2]
                for p in range(len(target) + 1):
                    new = [list(x) for x in sol.routes]
                    new[r1] = rest
                    new[r2] = target[:p] + [u] + target[p:]
                    if not all(new):
                        continue
                    best = min(best, extended(inst, sol.depots, new, beta) - base)
    return best


def test_relocate_local_optimum_matches_exhaustive():
    rng = random.Random(4)
    for s in range(15):
        inst = random_instance(100 + s, 7, 2, n_vehicles=2, max_open_depots=2, delta=50)
        sol = random_solution(inst, rng)
        while (mv := explore(sol, RELOCATE, 1.0, rng)) is not None:
            apply_move(sol, mv)
        assert exhaustive_best_relocation(inst, sol, 1.0) >= -1e-9


def test_full_descent_beats_single_step_oracle():
    rng = random.Random(8)
    for s in range(10):
        inst = random_instance(200 + s, 7, 2, n_vehicles=2, max_open_depots=1, delta=50)
        sol = random_solution(inst, rng)
        start = sol.copy()
        improved = True
        while improved:
            improved = False
            for k in range(1, 8):
                mv = explore(sol, k, 1.0, rng)
                if mv is not None:
                    apply_move(sol, mv)
                    improved = True
                    break
        best_step = exhaustive_best_relocation(inst, start, 1.0)
        assert sol.F(1.0) <= start.F(1.0) + best_step + 1e-9


def test_single_customer_route_has_no_two_opt():
    inst = Instance("one", [[0, 0]], [[3, 4]], [1], 10, 1, 1)
    sol = Solution(inst, [[1]], [0])
    for k in range(1, 8):
        assert explore(sol, k, 1.0, random.Random(0)) is None


def test_two_opt_fixes_crossing():
    inst = Instance("x", [[0, 0]], [[1, 0], [3, 0], [2, 0], [4, 0]], [1] * 4, 10, 1, 1)
    # vertices 2 and 3 sit at x=3 and x=2, so this visits x = 1, 3, 2, 4
    sol = Solution(inst, [[1, 2, 3, 4]], [0])
    mv = explore(sol, TWO_OPT, 0.0, random.Random(0))
    assert mv is not None
    apply_move(sol, mv)
    assert sol.routes == [[1, 3, 2, 4]]


def test_closed_depot_replacement():
    # the open depot is far away, a closed one sits next to the customers
    inst = Instance("dep", [[100, 100], [0, 0]], [[1, 0], [2, 0]], [1, 1], 10, 1, 1)
    sol = Solution(inst, [[2, 3]], [0], open_depots={0})
    mv = explore(sol, SWAP, 0.0, random.Random(0))
    assert mv is not None and mv.new_open == frozenset({1})
    apply_move(sol, mv)
    assert sol.depots == [1] and sol.open_depots == {1}
    sol.check()


def test_undo_restores_solution():
    rng = random.Random(2)
    inst = random_instance(3, 12, 3, n_vehicles=3, max_open_depots=2)
    for _ in range(30):
        sol = random_solution(inst, rng)
        ref = sol.copy()
        mv = explore(sol, rng.randint(1, 7), 5.0, rng)
        if mv is None:
            continue
        apply_move(sol, mv)
        undo_move(sol, mv)
        assert sol == ref and sol.f == pytest.approx(ref.f)
        apply_move(sol, mv)
        assert sol != ref


def test_undo_without_apply():
    rng = random.Random(0)
    inst = random_instance(3, 12, 3, n_vehicles=3, max_open_depots=2)
    sol = random_solution(inst, rng)
    mv = explore(sol, 1, 1.0, rng)
    with pytest.raises(ValueError):
        undo_move(sol, mv)


def test_strict_capacity_never_adds_excess():
    rng = random.Random(9)
    inst = random_instance(4, 14, 2, n_vehicles=3, max_open_depots=1, capacity=40)
    for _ in range(40):
        sol = random_solution(inst, rng)
        for k in range(1, 8):
            mv = explore(sol, k, 0.0, rng, strict_capacity=True)
            if mv is not None:
                before = sol.violation
                apply_move(sol, mv)
                assert sol.violation <= before + 1e-9


def test_two_opt_star_is_inter_route():
    rng = random.Random(3)
    inst = random_instance(5, 12, 2, n_vehicles=3, max_open_depots=2)
    for _ in range(20):
        sol = random_solution(inst, rng)
        mv = explore_two_opt_star(sol, 1.0, rng)
        if mv is not None:
            assert len(mv.changes) == 2


def test_route_overlap():
    inst = Instance("o", [[0, 0]], [[0, 0], [2, 0], [10, 0], [12, 0]], [1] * 4, 10, 2, 1)
    sol = Solution(inst, [[1, 2], [3, 4]], [0, 0])
    c = route_circles(sol)
    assert not routes_overlap(c[0], c[1])
    sol2 = Solution(inst, [[1, 3], [2, 4]], [0, 0])
    c2 = route_circles(sol2)
    assert routes_overlap(c2[0], c2[1])


def test_swap_star_only_between_routes():
    rng = random.Random(6)
    inst = random_instance(6, 12, 2, n_vehicles=3, max_open_depots=2)
    for _ in range(20):
        sol = random_solution(inst, rng)
        mv = explore(sol, SWAP_STAR, 0.0, rng)
        if mv is not None:
            assert len({r for r, _, _ in mv.changes}) == 2


def test_invalid_neighborhood():
    inst = random_instance(0, 5, 1, n_vehicles=1, max_open_depots=1)
    sol = random_solution(inst, random.Random(0))
    with pytest.raises(ValueError):
        explore(sol, 8, 1.0, random.Random(0))
