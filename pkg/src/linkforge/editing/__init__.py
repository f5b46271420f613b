"""Exact weighted cluster editing over connected components.

Probabilities become log-odds weights, each component becomes a
complete weighted instance, and an exact branch-and-bound search (with
safe kernelization) finds the partition maximizing the sum of
intra-cluster weights. A compiled search engine is used when available;
:func:`active_engine` says which one this process selected.
"""

from .errors import BudgetExceededError
from .instance import (
    DomainError,
    EditingInstance,
    KernelResult,
    build_instance,
    kernelize,
    pair_weight,
    pair_weights,
    partition_objective,
)
from .solver import (
    DEFAULT_NODE_BUDGET,
    ComponentReport,
    EditingSolution,
    RepairResult,
    active_engine,
    brute_force_oracle,
    repair,
    solve_exact,
)

__all__ = [
    "BudgetExceededError",
    "ComponentReport",
    "DEFAULT_NODE_BUDGET",
    "DomainError",
    "EditingInstance",
    "EditingSolution",
    "KernelResult",
    "RepairResult",
    "active_engine",
    "brute_force_oracle",
    "build_instance",
    "kernelize",
    "pair_weight",
    "pair_weights",
    "partition_objective",
    "repair",
    "solve_exact",
]
