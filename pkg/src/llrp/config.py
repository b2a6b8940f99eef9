"""Search configuration, ablation presets and a plain ``key = value`` format."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

CROSSOVERS = ("mpeax3", "mpeax2", "ox")
VND_ORDERS = ("qlearning", "random", "fixed")
OSCILLATIONS = ("adaptive", "feasible_only", "fixed_beta")
PARENT_SELECTIONS = ("shortest_life", "random")
MUTATION_MODES = ("one", "both")
SWITCHES = ("crossover", "vnd_order", "oscillation", "parent_selection", "mutation_mode")


@dataclass
class SearchConfig:
    """All tunables of a run; defaults are the tuned values of the method."""

    mutation_prob: float = 0.1
    mutation_length: int = 2
    alpha: float = 0.2
    gamma: float = 0.85
    epsilon: float = 0.7
    window: int = 4
    delta: int = 20
    pop_size: int = 20
    replace_threshold: int = 1000
    max_generations: int = 5000
    memory_size: int = 3000
    psi: float = 0.55
    seed: int = 0
    crossover: str = "mpeax3"
    vnd_order: str = "qlearning"
    oscillation: str = "adaptive"
    parent_selection: str = "shortest_life"
    mutation_mode: str = "one"
    time_limit: float | None = None
    target: float | None = None
    init_attempts_factor: int = 10

    def __post_init__(self):
        self.validate()

    def validate(self):
        choices = {"crossover": CROSSOVERS, "vnd_order": VND_ORDERS, "oscillation": OSCILLATIONS,
                   "parent_selection": PARENT_SELECTIONS, "mutation_mode": MUTATION_MODES}
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        for name in ("mutation_prob", "alpha", "gamma", "epsilon", "psi"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("mutation_length", "replace_threshold", "max_generations"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("window", "delta", "pop_size", "memory_size", "init_attempts_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    def dumps(self):
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())

    @classmethod
    def loads(cls, text):
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in types:
                raise ValueError(f"line {lineno}: unknown setting {key!r}")
            kwargs[key] = _coerce(types[key], value)
        return cls(**kwargs)

    @classmethod
    def load(cls, path):
        return cls.loads(Path(path).read_text())

    def fingerprint(self):
        """Readable variant switches plus a short hash of every setting except the seed.

        Example: ``crossover=mpeax3;vnd_order=fixed;...;h=3f2a9c01b7de``.
        """
        items = {k: v for k, v in self.to_dict().items() if k != "seed"}
        text = ";".join(f"{k}={v}" for k, v in sorted(items.items()))
        switches = ";".join(f"{k}={items[k]}" for k in SWITCHES)
        return f"{switches};h={hashlib.sha256(text.encode()).hexdigest()[:12]}"


def _coerce(typ, value):
    typ = str(typ)
    if value in ("None", "") and "None" in typ:
        return None
    if typ.startswith("int"):
        return int(value)
    if typ.startswith("float"):
        return float(value)
    return value


PRESETS = {
    "rlhea": {},
    "rlhea1": {"crossover": "ox"},
    "rlhea2": {"crossover": "mpeax2"},
    "rlhea3": {"vnd_order": "random"},
    "rlhea4": {"vnd_order": "fixed"},
    "rlhea5": {"oscillation": "feasible_only"},
    "rlhea6": {"oscillation": "fixed_beta"},
}


def preset(name, **overrides):
    try:
        base = PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return SearchConfig(**{**base, **overrides})
