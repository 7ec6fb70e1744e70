"""Search budgets, overridable through the LATINLAB_BUDGET environment variable."""

import os

DEFAULT_NODE_BUDGET = 10**8


def node_budget(default: int = DEFAULT_NODE_BUDGET) -> int:
    value = os.environ.get("LATINLAB_BUDGET")
    if value:
        return int(float(value))
    return default
