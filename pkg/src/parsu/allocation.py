"""Assign conflict groups to cores, balancing total update cost.

The cost of a group is the sum of its items' update costs; an update's
cost is modeled as its degree in the bipartite graph times a constant
per-edge factor ``kappa``.  Groups are placed heaviest-first onto the
currently least-loaded core (the classic sorted greedy rule, a 4/3
approximation of the optimal makespan).  Ties are broken deterministically
so that repeated runs produce identical schedules: equal weights order by
smallest first label, equal loads prefer the lowest core ID.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import UpdateVariableGraph
from .grouping import ConflictGroups


@dataclass(frozen=True)
class Allocation:
    """Result of placing ``num_groups`` groups on ``num_cores`` cores.

    ``group_core[gi]`` is the core of group ``gi``; ``assign_order`` lists
    group indices in placement (descending weight) order; ``core_loads``
    are total per-core weights.
    """

    group_core: np.ndarray    # int64 (num_groups,)
    core_loads: np.ndarray    # float64 (num_cores,)
    assign_order: np.ndarray  # int64 (num_groups,)
    num_cores: int

    @property
    def max_load(self) -> float:
        return float(self.core_loads.max()) if self.core_loads.size else 0.0


def group_weights(groups: ConflictGroups, g: UpdateVariableGraph,
                  kappa: float = 1.0) -> np.ndarray:
    """Per-group cost: sum of item degrees times ``kappa``."""
    if groups.num_groups == 0:
        return np.empty(0, dtype=np.float64)
    degs = np.diff(g.update_ptr)
    item_deg = degs[groups.batch.update_ids[groups.item_order]].astype(np.float64)
    return np.add.reduceat(item_deg, groups.group_ptr[:-1]) * kappa


def greedy_allocate(groups: ConflictGroups, g: UpdateVariableGraph,
                    cores: int, kappa: float = 1.0) -> Allocation:
    if cores < 1:
        raise ValueError("cores must be >= 1")
    ng = groups.num_groups
    if ng == 0:
        return Allocation(group_core=np.empty(0, np.int64),
                          core_loads=np.zeros(cores),
                          assign_order=np.empty(0, np.int64),
                          num_cores=cores)
    weights = group_weights(groups, g, kappa)
    first_labels = groups.batch.labels[groups.item_order[groups.group_ptr[:-1]]]
    order = np.lexsort((first_labels, -weights)).astype(np.int64)
    placed, loads = _assign_least_loaded(weights[order], cores)
    group_core = np.empty(ng, dtype=np.int64)
    group_core[order] = placed
    return Allocation(group_core=group_core, core_loads=loads,
                      assign_order=order, num_cores=cores)


@njit(cache=True)
def _assign_least_loaded(sorted_weights, cores):
    ng = sorted_weights.size
    placed = np.empty(ng, dtype=np.int64)
    loads = np.zeros(cores, dtype=np.float64)
    for t in range(ng):
        best = 0
        for c in range(1, cores):
            if loads[c] < loads[best]:
                best = c
        placed[t] = best
        loads[best] += sorted_weights[t]
    return placed, loads
