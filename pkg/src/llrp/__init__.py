"""Hybrid evolutionary solver for the latency location routing problem."""
from .config import PRESETS, SearchConfig, preset
from .engine import RunResult, run
from .instance import Instance, parse_instance, random_instance
from .solution import Solution, evaluate, evaluate_extended, read_solution, write_solution

__version__ = "0.1.0"

__all__ = [
    "Instance", "parse_instance", "random_instance", "Solution", "evaluate",
    "evaluate_extended", "read_solution", "write_solution", "SearchConfig", "PRESETS",
    "preset", "RunResult", "run",
]
