"""Partition a sampled batch into variable-disjoint groups.

A group is a connected component of the bipartite subgraph induced by the
batch's items: walk update -> variables -> updates, restricted to sampled
items.  Updates in different groups touch disjoint variable sets, which is
what later allows the executor to run groups on different threads with no
locks.  Two equivalent strategies are provided: sequential BFS per batch
(the default; distinct batches can be partitioned on distinct threads) and
a round-based min-label propagation that parallelizes inside one batch.

Duplicate update IDs in a with-replacement batch are distinct items; they
share their variables and therefore land in the same group, where they
execute in label order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numba import njit

from .graph import UpdateVariableGraph
from .sampling import Batch


class GroupingError(RuntimeError):
    """Internal invariant violation during batch partitioning."""


@dataclass(frozen=True)
class ConflictGroups:
    """A batch's partition into variable-disjoint groups.

    ``item_order`` lists batch item indices arranged group by group
    (``group_ptr`` delimits them), ascending within each group so labels
    stay in serial order.  ``comp[k]`` is the group index of item ``k``.
    Groups are numbered by their smallest item index.  ``induced_edges``
    counts bipartite edges over sampled items (each occurrence of an
    update contributes its full degree).
    """

    batch: Batch
    comp: np.ndarray        # int64 (m,)
    group_ptr: np.ndarray   # int64 (num_groups + 1,)
    item_order: np.ndarray  # int64 (m,)
    induced_edges: int

    @property
    def num_groups(self) -> int:
        return self.group_ptr.size - 1

    @property
    def batch_index(self) -> int:
        return self.batch.batch_index

    def group_sizes(self) -> np.ndarray:
        return np.diff(self.group_ptr)

    def group_items(self, gi: int) -> np.ndarray:
        return self.item_order[self.group_ptr[gi]:self.group_ptr[gi + 1]]

    def groups(self) -> Iterator[list[tuple[int, int]]]:
        """Yield each group as a list of (label, update_id), ascending labels."""
        labels, ids = self.batch.labels, self.batch.update_ids
        for gi in range(self.num_groups):
            items = self.group_items(gi)
            yield list(zip(labels[items].tolist(), ids[items].tolist()))


class GroupingScratch:
    """Reusable per-graph work arrays so batch partitioning never reallocates
    the variable-indexed maps (stamp versioning avoids clearing them)."""

    def __init__(self, num_variables: int):
        self.var_stamp = np.zeros(num_variables, dtype=np.int64)
        self.var_local = np.zeros(num_variables, dtype=np.int64)
        self.stamp = 0

    def next_stamp(self) -> int:
        self.stamp += 1
        return self.stamp


def find_groups_bfs(g: UpdateVariableGraph, batch: Batch,
                    scratch: GroupingScratch | None = None) -> ConflictGroups:
    """Sequential traversal of the induced bipartite subgraph, O(induced edges)."""
    if scratch is None:
        scratch = GroupingScratch(g.num_variables)
    m = len(batch)
    if m == 0:
        return _empty_groups(batch)
    comp, ngroups, edges = _bfs_components(
        g.update_ptr, g.update_vars, batch.update_ids,
        scratch.var_stamp, scratch.var_local, scratch.next_stamp())
    return _pack_groups(batch, comp, ngroups, edges)


def find_groups_push_label(g: UpdateVariableGraph, batch: Batch, threads: int = 1,
                           scratch: GroupingScratch | None = None,
                           pool=None) -> ConflictGroups:
    """Min-label propagation over shared label cells.

    Each round every item pulls the minimum label of its variables and
    pushes its own back; labels only ever decrease, so lost concurrent
    writes are re-applied in a later round and the fixed point equals the
    BFS partition.  ``pool`` may be a ThreadPoolExecutor used to split the
    item range across ``threads`` workers; without one the chunks run
    sequentially (same result by monotonicity).
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if scratch is None:
        scratch = GroupingScratch(g.num_variables)
    m = len(batch)
    if m == 0:
        return _empty_groups(batch)

    item_adj_ptr, item_adj, nv, edges = _local_adjacency(
        g.update_ptr, g.update_vars, batch.update_ids,
        scratch.var_stamp, scratch.var_local, scratch.next_stamp())
    item_label = np.arange(m, dtype=np.int64)
    var_label = np.full(nv, m, dtype=np.int64)

    bounds = np.linspace(0, m, threads + 1).astype(np.int64)
    changed = np.zeros(threads, dtype=np.int64)
    rounds = 0
    while True:
        changed[:] = 0
        if pool is not None and threads > 1:
            futs = [pool.submit(_push_label_round, item_adj_ptr, item_adj,
                                item_label, var_label,
                                bounds[t], bounds[t + 1], changed, t)
                    for t in range(threads) if bounds[t] < bounds[t + 1]]
            for f in futs:
                f.result()
        else:
            for t in range(threads):
                _push_label_round(item_adj_ptr, item_adj, item_label, var_label,
                                  bounds[t], bounds[t + 1], changed, t)
        rounds += 1
        if not changed.any():
            break
        if rounds > m:
            raise GroupingError(
                f"push-label failed to converge within {m} rounds")

    comp, ngroups = _renumber_labels(item_label)
    return _pack_groups(batch, comp, ngroups, edges)


def verify_variable_disjoint(g: UpdateVariableGraph, groups: ConflictGroups) -> None:
    """Raise :class:`GroupingError` if two groups touch a common variable."""
    owner = {}
    ids = groups.batch.update_ids
    for gi in range(groups.num_groups):
        for k in groups.group_items(gi):
            for j in g.support(int(ids[k])):
                j = int(j)
                if owner.setdefault(j, gi) != gi:
                    raise GroupingError(
                        f"variable {j} shared by groups {owner[j]} and {gi} "
                        f"in batch {groups.batch_index}")
    # partition sanity: every item in exactly one group
    seen = np.zeros(len(groups.batch), dtype=bool)
    seen[groups.item_order] = True
    if not seen.all() or groups.item_order.size != len(groups.batch):
        raise GroupingError("groups do not partition the batch")


def _empty_groups(batch: Batch) -> ConflictGroups:
    return ConflictGroups(batch=batch,
                          comp=np.empty(0, np.int64),
                          group_ptr=np.zeros(1, np.int64),
                          item_order=np.empty(0, np.int64),
                          induced_edges=0)


def _pack_groups(batch: Batch, comp: np.ndarray, ngroups: int,
                 edges: int) -> ConflictGroups:
    order = np.argsort(comp, kind="stable")
    sizes = np.bincount(comp, minlength=ngroups)
    group_ptr = np.zeros(ngroups + 1, dtype=np.int64)
    np.cumsum(sizes, out=group_ptr[1:])
    return ConflictGroups(batch=batch, comp=comp, group_ptr=group_ptr,
                          item_order=order, induced_edges=int(edges))


@njit(cache=True)
def _bfs_components(update_ptr, update_vars, ids, var_stamp, var_local, stamp):
    m = ids.size
    total_edges = 0
    for k in range(m):
        i = ids[k]
        total_edges += update_ptr[i + 1] - update_ptr[i]

    # local CSR from touched variables to batch items
    nv = 0
    var_counts = np.zeros(total_edges if total_edges > 0 else 1, dtype=np.int64)
    for k in range(m):
        i = ids[k]
        for p in range(update_ptr[i], update_ptr[i + 1]):
            j = update_vars[p]
            if var_stamp[j] != stamp:
                var_stamp[j] = stamp
                var_local[j] = nv
                nv += 1
            var_counts[var_local[j]] += 1
    vptr = np.zeros(nv + 1, dtype=np.int64)
    for v in range(nv):
        vptr[v + 1] = vptr[v] + var_counts[v]
    vitems = np.empty(total_edges, dtype=np.int64)
    cur = vptr[:nv].copy()
    for k in range(m):
        i = ids[k]
        for p in range(update_ptr[i], update_ptr[i + 1]):
            v = var_local[update_vars[p]]
            vitems[cur[v]] = k
            cur[v] += 1

    comp = np.full(m, -1, dtype=np.int64)
    var_done = np.zeros(nv if nv > 0 else 1, dtype=np.uint8)
    queue = np.empty(m, dtype=np.int64)
    ngroups = 0
    for root in range(m):
        if comp[root] >= 0:
            continue
        comp[root] = ngroups
        queue[0] = root
        head, tail = 0, 1
        while head < tail:
            k = queue[head]
            head += 1
            i = ids[k]
            for p in range(update_ptr[i], update_ptr[i + 1]):
                v = var_local[update_vars[p]]
                if var_done[v]:
                    continue
                var_done[v] = 1
                for q in range(vptr[v], vptr[v + 1]):
                    k2 = vitems[q]
                    if comp[k2] < 0:
                        comp[k2] = ngroups
                        queue[tail] = k2
                        tail += 1
        ngroups += 1
    return comp, ngroups, total_edges


@njit(cache=True)
def _local_adjacency(update_ptr, update_vars, ids, var_stamp, var_local, stamp):
    m = ids.size
    total_edges = 0
    for k in range(m):
        i = ids[k]
        total_edges += update_ptr[i + 1] - update_ptr[i]
    item_adj_ptr = np.zeros(m + 1, dtype=np.int64)
    item_adj = np.empty(total_edges, dtype=np.int64)
    nv = 0
    pos = 0
    for k in range(m):
        i = ids[k]
        for p in range(update_ptr[i], update_ptr[i + 1]):
            j = update_vars[p]
            if var_stamp[j] != stamp:
                var_stamp[j] = stamp
                var_local[j] = nv
                nv += 1
            item_adj[pos] = var_local[j]
            pos += 1
        item_adj_ptr[k + 1] = pos
    return item_adj_ptr, item_adj, nv, total_edges


@njit(nogil=True, cache=True)
def _push_label_round(item_adj_ptr, item_adj, item_label, var_label,
                      lo, hi, changed, slot):
    # Shared int64 cells are read/written without locks; writes are
    # word-atomic and labels only decrease, so a lost minimum is simply
    # rediscovered in a later round.
    c = 0
    for k in range(lo, hi):
        lbl = item_label[k]
        for p in range(item_adj_ptr[k], item_adj_ptr[k + 1]):
            v = item_adj[p]
            if var_label[v] < lbl:
                lbl = var_label[v]
        if lbl < item_label[k]:
            item_label[k] = lbl
            c += 1
        for p in range(item_adj_ptr[k], item_adj_ptr[k + 1]):
            v = item_adj[p]
            if lbl < var_label[v]:
                var_label[v] = lbl
                c += 1
    changed[slot] = c


@njit(cache=True)
def _renumber_labels(item_label):
    m = item_label.size
    mapping = np.full(m, -1, dtype=np.int64)
    comp = np.empty(m, dtype=np.int64)
    ngroups = 0
    for k in range(m):
        lbl = item_label[k]
        if mapping[lbl] < 0:
            mapping[lbl] = ngroups
            ngroups += 1
        comp[k] = mapping[lbl]
    return comp, ngroups
