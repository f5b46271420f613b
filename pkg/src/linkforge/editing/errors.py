"""Errors shared by the search engines and the solver front-end."""

from __future__ import annotations

from ..model import LinkforgeError


class BudgetExceededError(LinkforgeError, RuntimeError):
    """The branch-and-bound node budget ran out before the instance was
    certified optimal. Carries the best objective found so far (a valid
    lower bound) and the node count at abort."""

    def __init__(self, best_objective: float, nodes: int):
        super().__init__(
            f"node budget exhausted after {nodes} nodes "
            f"(best objective found: {best_objective!r})"
        )
        self.best_objective = best_objective
        self.nodes = nodes
