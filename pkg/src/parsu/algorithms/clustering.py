"""Greedy pivot clustering of a graph (also maximal independent set).

Vertices start unlabeled (+inf).  Visiting vertex v in stream order, if v
is still unlabeled it becomes a pivot and stamps its closed neighborhood
with min(current label, v).  One pass over a vertex permutation labels
everything; later passes are no-ops.  The update for v reads and writes
only the closed neighborhood, so the variable set of update v is N(v)+{v}.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..graph import InputError, UpdateVariableGraph
from .base import ModelState, SUAlgorithm


class GreedyClustering(SUAlgorithm):
    name = "clustering"

    def __init__(self, graph: UpdateVariableGraph):
        super().__init__(graph)
        if graph.num_updates != graph.num_variables:
            raise InputError("clustering expects one variable per vertex")
        for v in range(graph.num_updates):
            sup = graph.support(v)
            if np.searchsorted(sup, v) >= sup.size or sup[np.searchsorted(sup, v)] != v:
                raise InputError(f"support of vertex {v} must contain itself")

    def init_state(self, seed: int = 0) -> ModelState:
        return ModelState(x=np.full(self.graph.num_variables, np.inf))

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        _cluster_slice(self.graph.update_ptr, self.graph.update_vars,
                       state.x, ids)

    def objective(self, state) -> float:
        """Number of still-unlabeled vertices (0 once clustering is done)."""
        return float(np.isinf(state.x).sum())

    def cluster_labels(self, state) -> np.ndarray:
        return state.x.astype(np.int64)


@njit(nogil=True, cache=True)
def _cluster_slice(ptr, idx, x, ids):
    for k in range(ids.size):
        v = ids[k]
        if x[v] == np.inf:
            fv = float(v)
            for p in range(ptr[v], ptr[v + 1]):
                j = idx[p]
                if fv < x[j]:
                    x[j] = fv
