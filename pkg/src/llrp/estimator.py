"""scikit-learn style facade over :func:`llrp.engine.run`."""
from __future__ import annotations

from os import PathLike

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import SearchConfig
from .engine import run
from .instance import Instance, parse_instance


def check_instance(X, **kwargs):
    """Accept an :class:`Instance` or a path to an instance file."""
    if isinstance(X, Instance):
        return X
    if isinstance(X, (str, PathLike)):
        return parse_instance(X, **kwargs)
    raise TypeError(f"expected an Instance or a path, got {type(X).__name__}")


class RLHEA(BaseEstimator):
    """Solver with the usual ``get_params`` / ``set_params`` / ``fit`` surface.

    All constructor arguments mirror :class:`~llrp.config.SearchConfig`.
    After ``fit`` the best solution is in ``best_solution_`` and its
    objective in ``objective_``.

    Examples
    --------
    >>> from llrp import random_instance
    >>> est = RLHEA(max_generations=5, pop_size=4).fit(random_instance(0, 8, 2))
    >>> est.objective_ > 0
    True
    """

    def __init__(self, mutation_prob=0.1, mutation_length=2, alpha=0.2, gamma=0.85,
                 epsilon=0.7, window=4, delta=20, pop_size=20, replace_threshold=1000,
                 max_generations=5000, memory_size=3000, psi=0.55, seed=0,
                 crossover="mpeax3", vnd_order="qlearning", oscillation="adaptive",
                 parent_selection="shortest_life", mutation_mode="one", time_limit=None,
                 target=None):
        self.mutation_prob = mutation_prob
        self.mutation_length = mutation_length
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.window = window
        self.delta = delta
        self.pop_size = pop_size
        self.replace_threshold = replace_threshold
        self.max_generations = max_generations
        self.memory_size = memory_size
        self.psi = psi
        self.seed = seed
        self.crossover = crossover
        self.vnd_order = vnd_order
        self.oscillation = oscillation
        self.parent_selection = parent_selection
        self.mutation_mode = mutation_mode
        self.time_limit = time_limit
        self.target = target

    def to_config(self):
        return SearchConfig(**self.get_params())

    def fit(self, X, y=None, **parse_kwargs):
        inst = check_instance(X, **parse_kwargs)
        self.result_ = run(inst, self.to_config())
        self.best_solution_ = self.result_.best
        self.objective_ = self.result_.f
        self.n_generations_ = self.result_.generations
        return self

    def score(self, X=None, y=None):
        """Negative objective of the fitted solution (higher is better)."""
        check_is_fitted(self, "best_solution_")
        return -self.objective_
