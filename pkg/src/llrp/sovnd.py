"""Variable neighborhood descent ordered by Q-learning, with strategic oscillation.

The descent works on the penalized objective ``F = f + beta * excess``. Each
pass asks the controller for an untried neighborhood, takes the first
improving move it offers, and restarts the pass after every acceptance. The
penalty weight ``beta`` reacts to runs of ``window`` consecutive feasible or
infeasible acceptances.
"""
from __future__ import annotations

from dataclasses import dataclass

from .neighborhoods import apply_move, explore
from .qlearn import ALL_MASK, untried
from .solution import PenaltyState, initial_beta

MAX_ACCEPTED_MOVES = 10**6


class MoveCapExceeded(RuntimeError):
    pass


@dataclass
class SovndOutcome:
    best_feasible: object  # Solution or None
    final_current: object
    model: object
    moves_accepted: int = 0
    feasible_accepted: int = 0
    infeasible_accepted: int = 0
    beta_changes: int = 0
    beta_final: float = 0.0


def _pick(model, order, mask, rng):
    if order == "qlearning":
        return model.select_action(mask, rng)
    if order == "random":
        return rng.choice(untried(mask))
    return untried(mask)[0]


def rl_sovnd(sol, model, cfg, rng, best_f=None, max_moves=MAX_ACCEPTED_MOVES):
    """Improve ``sol`` (left untouched) and return a :class:`SovndOutcome`.

    ``best_f`` is the objective of the best feasible solution of the whole
    run, used for the reward bonus; None disables the bonus.
    """
    s = sol.copy()
    s.check()
    ps = PenaltyState(initial_beta(s), cfg.window)
    adaptive = cfg.oscillation == "adaptive"
    strict = cfg.oscillation == "feasible_only"
    learn = cfg.vnd_order == "qlearning"
    best = s.copy() if s.feasible else None
    out = SovndOutcome(None, s, model)

    improve = True
    while improve:
        improve = False
        mask = 0
        while mask != ALL_MASK:
            k = _pick(model, cfg.vnd_order, mask, rng)
            mv = explore(s, k, ps.beta, rng, strict_capacity=strict)
            if mv is not None:
                apply_move(s, mv)
            if learn:
                gain = -mv.delta_F if mv is not None else 0.0
                best_gain = 0.0
                if best_f is not None and mv is not None and s.feasible:
                    best_gain = best_f - s.f
                model.update_reward(mask, k, gain, best_gain)
                model.update_q(mask, k)
            mask |= 1 << (k - 1)
            if mv is None:
                continue
            out.moves_accepted += 1
            if out.moves_accepted > max_moves:
                raise MoveCapExceeded(f"local search accepted more than {max_moves} moves")
            feasible = s.feasible
            if feasible:
                out.feasible_accepted += 1
                if best is None or s.f < best.f:
                    best = s.copy()
            else:
                out.infeasible_accepted += 1
            if adaptive and ps.record(feasible, rng):
                out.beta_changes += 1
            improve = True
            break

    out.best_feasible = best
    out.final_current = s
    out.beta_final = ps.beta
    return out
