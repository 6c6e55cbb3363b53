"""Job runner and report export."""

from .build import build_barrier_problem, build_control_problem, mu_candidate
from .export import export_to_csv, print_summary, to_jsonable, write_json_atomic
from .jobs import EXIT_CODES, combine_outcomes, load_config, run

__all__ = [
    "build_barrier_problem",
    "build_control_problem",
    "mu_candidate",
    "export_to_csv",
    "print_summary",
    "to_jsonable",
    "write_json_atomic",
    "EXIT_CODES",
    "combine_outcomes",
    "load_config",
    "run",
]
