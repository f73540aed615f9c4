"""Bipartite incidence structure between updates and model variables.

Each update touches (reads and writes) a small set of variables, its
support.  Both directions of the incidence are stored in compressed
jagged form (offsets + flat ID array) so that traversals during batch
partitioning are cache friendly.  The derived conflict structure between
updates (two updates conflict when their supports intersect) is never
materialized; its maximum degree is computed on demand by scanning the
right adjacency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


class InputError(ValueError):
    """Raised when caller-supplied data violates a documented precondition."""


@dataclass(frozen=True)
class UpdateVariableGraph:
    """Bipartite graph between ``num_updates`` updates and ``num_variables`` variables.

    ``update_ptr``/``update_vars`` hold, per update, the sorted duplicate-free
    variable IDs it touches; ``var_ptr``/``var_updates`` hold the inverse
    adjacency.  Immutable after construction and safe for concurrent reads.
    """

    num_updates: int
    num_variables: int
    update_ptr: np.ndarray      # int64, shape (num_updates + 1,)
    update_vars: np.ndarray     # int64, shape (num_edges,)
    var_ptr: np.ndarray         # int64, shape (num_variables + 1,)
    var_updates: np.ndarray     # int64, shape (num_edges,)

    @property
    def num_edges(self) -> int:
        return int(self.update_ptr[-1])

    def support(self, i: int) -> np.ndarray:
        """Sorted variable IDs touched by update ``i``."""
        return self.update_vars[self.update_ptr[i]:self.update_ptr[i + 1]]

    def updates_on(self, j: int) -> np.ndarray:
        """Sorted update IDs incident to variable ``j``."""
        return self.var_updates[self.var_ptr[j]:self.var_ptr[j + 1]]

    def degrees(self) -> np.ndarray:
        """Left (per-update) degrees, int64."""
        return np.diff(self.update_ptr)


@dataclass(frozen=True)
class GraphStats:
    max_left_degree: int
    avg_left_degree: float
    conflict_degree: int
    ratio_ok: bool


def build_graph(supports, num_variables: int) -> UpdateVariableGraph:
    """Build the bipartite graph from per-update variable-ID lists.

    Duplicate IDs within a support are dropped silently; IDs must lie in
    ``[0, num_variables)``.  Empty supports are legal.
    """
    if num_variables < 0:
        raise InputError("num_variables must be nonnegative")
    cleaned = []
    for i, sup in enumerate(supports):
        arr = np.unique(np.asarray(sup, dtype=np.int64))
        if arr.size:
            if arr[0] < 0 or arr[-1] >= num_variables:
                raise InputError(
                    f"update {i}: variable ID out of range [0, {num_variables})"
                )
        cleaned.append(arr)
    n = len(cleaned)
    lengths = np.fromiter((a.size for a in cleaned), dtype=np.int64, count=n)
    update_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=update_ptr[1:])
    update_vars = (
        np.concatenate(cleaned) if n and update_ptr[-1] else np.empty(0, np.int64)
    )
    var_ptr, var_updates = _invert_adjacency(update_ptr, update_vars, num_variables)
    return UpdateVariableGraph(
        num_updates=n,
        num_variables=num_variables,
        update_ptr=update_ptr,
        update_vars=update_vars,
        var_ptr=var_ptr,
        var_updates=var_updates,
    )


def graph_from_csr(update_ptr: np.ndarray, update_vars: np.ndarray,
                   num_variables: int) -> UpdateVariableGraph:
    """Build from an already clean CSR layout (sorted, deduplicated rows)."""
    update_ptr = np.ascontiguousarray(update_ptr, dtype=np.int64)
    update_vars = np.ascontiguousarray(update_vars, dtype=np.int64)
    if update_vars.size and (update_vars.min() < 0 or update_vars.max() >= num_variables):
        raise InputError("variable ID out of range")
    var_ptr, var_updates = _invert_adjacency(update_ptr, update_vars, num_variables)
    return UpdateVariableGraph(
        num_updates=update_ptr.size - 1,
        num_variables=num_variables,
        update_ptr=update_ptr,
        update_vars=update_vars,
        var_ptr=var_ptr,
        var_updates=var_updates,
    )


def _invert_adjacency(update_ptr, update_vars, num_variables):
    counts = np.bincount(update_vars, minlength=num_variables).astype(np.int64)
    var_ptr = np.zeros(num_variables + 1, dtype=np.int64)
    np.cumsum(counts, out=var_ptr[1:])
    var_updates = np.empty(update_vars.size, dtype=np.int64)
    _fill_inverse(update_ptr, update_vars, var_ptr, var_updates)
    return var_ptr, var_updates


@njit(cache=True)
def _fill_inverse(update_ptr, update_vars, var_ptr, var_updates):
    cursor = var_ptr[:-1].copy()
    for i in range(update_ptr.size - 1):
        for p in range(update_ptr[i], update_ptr[i + 1]):
            j = update_vars[p]
            var_updates[cursor[j]] = i
            cursor[j] += 1


@njit(cache=True)
def _conflict_degree(update_ptr, update_vars, var_ptr, var_updates):
    n = update_ptr.size - 1
    seen = np.full(n, -1, dtype=np.int64)
    best = 0
    for i in range(n):
        cnt = 0
        for p in range(update_ptr[i], update_ptr[i + 1]):
            j = update_vars[p]
            for q in range(var_ptr[j], var_ptr[j + 1]):
                k = var_updates[q]
                if k != i and seen[k] != i:
                    seen[k] = i
                    cnt += 1
        if cnt > best:
            best = cnt
    return best


def compute_conflict_degree(g: UpdateVariableGraph) -> int:
    """Max over updates of the number of other updates sharing a variable.

    Computed by unioning the right adjacency over each support; the
    conflict structure itself is never stored.
    """
    if g.num_updates == 0:
        return 0
    return int(_conflict_degree(g.update_ptr, g.update_vars,
                                g.var_ptr, g.var_updates))


def compute_stats(g: UpdateVariableGraph) -> GraphStats:
    """Exact degree statistics plus the max-to-average left-degree check."""
    n = g.num_updates
    if n == 0:
        return GraphStats(0, 0.0, 0, True)
    degs = g.degrees()
    max_left = int(degs.max())
    avg_left = g.num_edges / n
    delta = compute_conflict_degree(g)
    ratio_ok = avg_left == 0.0 or (max_left / avg_left) <= math.sqrt(n)
    return GraphStats(max_left, avg_left, delta, ratio_ok)
