"""Q-learning controller that orders the neighborhoods of the local search.

A state is the set of neighborhoods already tried in the current descent
pass, stored as a 7-bit mask (bit ``k-1`` for neighborhood ``k``). Actions
are the untried neighborhoods, so the table holds one entry for every pair
with ``action not in state``: 448 entries in total.
"""
from __future__ import annotations

import csv
import math

N_ACTIONS = 7
ALL_MASK = (1 << N_ACTIONS) - 1
REWARD_DECAY = 0.95
_CLAMP = 1e300


def state_mask(tried):
    """Bit mask for an iterable of tried neighborhood ids (1..7)."""
    mask = 0
    for k in tried:
        if not 1 <= k <= N_ACTIONS:
            raise ValueError(f"invalid neighborhood id {k}")
        mask |= 1 << (k - 1)
    return mask


def untried(mask):
    return [k for k in range(1, N_ACTIONS + 1) if not mask >> (k - 1) & 1]


def _finite(x):
    if math.isnan(x):
        return 0.0
    return min(max(x, -_CLAMP), _CLAMP)


class QModel:
    """Q-table and reward table over (tried-set, next neighborhood) pairs.

    Parameters
    ----------
    alpha : float
        Learning rate.
    gamma : float
        Discount factor of the Q update.
    epsilon : float
        Probability of the greedy choice; a uniform random untried
        neighborhood is picked otherwise.
    xi : float
        Decay applied to the stored reward before each update.
    """

    def __init__(self, alpha=0.2, gamma=0.85, epsilon=0.7, xi=REWARD_DECAY):
        for name, val in (("alpha", alpha), ("gamma", gamma), ("epsilon", epsilon), ("xi", xi)):
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.xi = xi
        self.q = {}
        self.r = {}
        for mask in range(ALL_MASK + 1):
            for a in untried(mask):
                self.q[mask, a] = 0.0
                self.r[mask, a] = 0.0

    def __len__(self):
        return len(self.q)

    def _check(self, mask, action):
        if (mask, action) not in self.q:
            raise ValueError(f"action {action} is not available in state {mask:07b}")

    def select_action(self, mask, rng):
        """Epsilon-greedy choice among the untried neighborhoods of ``mask``."""
        actions = untried(mask)
        if not actions:
            raise ValueError("all neighborhoods already tried")
        if len(actions) == 1:
            return actions[0]
        if rng.random() < self.epsilon:
            best = max(self.q[mask, a] for a in actions)
            ties = [a for a in actions if self.q[mask, a] == best]
            return ties[0] if len(ties) == 1 else rng.choice(ties)
        return rng.choice(actions)

    def max_q(self, mask):
        actions = untried(mask)
        if not actions:
            return 0.0
        return max(self.q[mask, a] for a in actions)

    def update_q(self, mask, action):
        """Q(st,a) <- (1-alpha) Q(st,a) + alpha [R(st,a) + gamma max Q(st', .)]."""
        self._check(mask, action)
        nxt = mask | (1 << (action - 1))
        old = self.q[mask, action]
        target = self.r[mask, action] + self.gamma * self.max_q(nxt)
        self.q[mask, action] = _finite((1 - self.alpha) * old + self.alpha * target)
        return self.q[mask, action]

    def update_reward(self, mask, action, gain, best_gain, n_untried=None):
        """Decay the stored reward and add the outcome of the last exploration.

        ``gain`` is the improvement over the solution the neighborhood started
        from, ``best_gain`` the improvement over the global best. The bonus
        ``max(0, best_gain) * exp(7 - n_untried)`` is only paid when ``gain``
        is positive; ``n_untried`` defaults to the number of untried
        neighborhoods in ``mask``.
        """
        self._check(mask, action)
        if n_untried is None:
            n_untried = len(untried(mask))
        gain = _finite(gain)
        val = self.xi * self.r[mask, action] + gain
        if gain > 0:
            val += max(0.0, _finite(best_gain)) * math.exp(N_ACTIONS - n_untried)
        self.r[mask, action] = _finite(val)
        return self.r[mask, action]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["state_mask", "action", "q", "r"])
            for (mask, a), qv in sorted(self.q.items()):
                w.writerow([mask, a, repr(qv), repr(self.r[mask, a])])
