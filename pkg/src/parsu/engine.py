"""Execution engine: serial, conflict-grouped parallel, and racy parallel.

All three modes consume the same deterministic sample stream and drive the
same compiled update kernels, so the conflict-grouped mode reproduces the
serial model bit for bit: within a batch each thread owns whole groups,
groups touch disjoint variables, and items inside a group run in label
order, which pins every coordinate's operation sequence to the serial one.
The racy mode splits the stream contiguously across threads and lets them
write with no ordering guarantees beyond word-level atomicity.

Timing is split per epoch into coordination (sampling + component search +
allocation, the partition phase) and update work (kernel execution plus
epoch-boundary hooks); objective evaluation is excluded from both.
"""

from __future__ import annotations

import itertools
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .allocation import Allocation, greedy_allocate
from .algorithms.base import ModelState, SUAlgorithm
from .graph import UpdateVariableGraph
from .grouping import (ConflictGroups, GroupingScratch, find_groups_bfs,
                       find_groups_push_label, verify_variable_disjoint)
from .sampling import SamplePlan, SampleStream

MODES = ("serial", "cyclades", "hogwild")
CC_METHODS = ("bfs_batches", "push_label")


class EngineError(RuntimeError):
    """Internal execution invariant violated."""


@dataclass
class RunRecord:
    """Per-epoch measurements of one run."""

    mode: str
    algorithm: str
    dataset: str
    threads: int
    seed: int
    stepsize: float
    objectives: list[float] = field(default_factory=list)
    partition_times: list[float] = field(default_factory=list)
    update_times: list[float] = field(default_factory=list)
    cumulative_times: list[float] = field(default_factory=list)
    initial_objective: float = float("nan")
    diverged: bool = False

    @property
    def epochs(self) -> int:
        return len(self.objectives)


def make_pool(threads: int, pin: bool = False) -> ThreadPoolExecutor:
    """Worker pool; with ``pin`` each worker is bound to a distinct core
    (best effort, round-robin over the allowed CPU set)."""
    if not pin:
        return ThreadPoolExecutor(max_workers=threads)
    counter = itertools.count()
    try:
        cpus = sorted(os.sched_getaffinity(0))
    except AttributeError:
        cpus = []

    def _pin_worker():
        if not cpus:
            return
        try:
            os.sched_setaffinity(0, {cpus[next(counter) % len(cpus)]})
        except OSError:
            pass

    return ThreadPoolExecutor(max_workers=threads, initializer=_pin_worker)


def run_serial(alg: SUAlgorithm, plan: SamplePlan, state: ModelState | None = None,
               gamma: float = 0.0, gamma_decay: float = 1.0,
               dataset_name: str = "") -> tuple[RunRecord, ModelState]:
    """Apply the stream strictly in label order on one thread.

    This is the ground truth the parallel modes are compared against.
    """
    if state is None:
        state = alg.init_state(plan.seed)
    _warm_algorithm(alg, state, gamma)
    stream = SampleStream(plan)
    rec = _new_record("serial", alg, plan, 1, gamma, dataset_name, state)
    n = plan.num_updates
    for epoch in range(plan.epochs):
        g_e = gamma * gamma_decay ** epoch
        _check_anchor(state, epoch)
        t_end = (epoch + 1) * n
        pt = ut = 0.0
        while stream.cursor < t_end:
            t0 = time.perf_counter()
            batch = stream.next_batch()
            t1 = time.perf_counter()
            alg.apply_slice(state, batch.labels, batch.update_ids, g_e)
            t2 = time.perf_counter()
            pt += t1 - t0
            ut += t2 - t1
        t3 = time.perf_counter()
        alg.epoch_end(state, t_end, g_e)
        ut += time.perf_counter() - t3
        state.epoch_clock = t_end
        _close_epoch(rec, alg, state, pt, ut)
    return rec, state


def run_cyclades(alg: SUAlgorithm, plan: SamplePlan, state: ModelState | None = None,
                 threads: int = 1, gamma: float = 0.0, gamma_decay: float = 1.0,
                 cc_method: str = "bfs_batches", pipeline: bool = False,
                 debug_checks: bool = False, pin: bool = False,
                 dataset_name: str = "") -> tuple[RunRecord, ModelState]:
    """Partition each batch into variable-disjoint groups, spread the groups
    over ``threads`` workers, and run them with no locks inside the batch.

    A barrier separates batches (joining the batch's futures); epoch hooks
    run single-threaded after the epoch's last barrier.  With ``pipeline``
    the next batch is partitioned while the current one executes (timing
    attribution then overlaps, so it is off by default).
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if cc_method not in CC_METHODS:
        raise ValueError(f"cc_method must be one of {CC_METHODS}")
    if state is None:
        state = alg.init_state(plan.seed)
    graph = alg.graph
    stream = SampleStream(plan)
    scratch = GroupingScratch(graph.num_variables)
    _warm_algorithm(alg, state, gamma)
    _warm_partition(graph, scratch, threads, cc_method)
    rec = _new_record("cyclades", alg, plan, threads, gamma, dataset_name, state)
    n = plan.num_updates

    def partition_next(limit: int):
        if stream.cursor >= limit:
            return None
        t0 = time.perf_counter()
        batch = stream.next_batch()
        if cc_method == "push_label":
            groups = find_groups_push_label(graph, batch, threads=threads,
                                            scratch=scratch, pool=pool)
        else:
            groups = find_groups_bfs(graph, batch, scratch=scratch)
        alloc = greedy_allocate(groups, graph, threads)
        core_ptr, core_items = _core_streams(
            groups.group_ptr, groups.item_order, alloc.assign_order,
            alloc.group_core, threads)
        dt = time.perf_counter() - t0
        return batch, groups, alloc, core_ptr, core_items, dt

    pool = make_pool(threads, pin)
    try:
        for epoch in range(plan.epochs):
            g_e = gamma * gamma_decay ** epoch
            _check_anchor(state, epoch)
            t_end = (epoch + 1) * n
            pt = ut = 0.0
            work = partition_next(t_end)
            while work is not None:
                batch, groups, alloc, core_ptr, core_items, dt = work
                pt += dt
                if debug_checks:
                    _debug_check_batch(graph, groups, alloc)
                t1 = time.perf_counter()
                futures = []
                for c in range(threads):
                    lo, hi = core_ptr[c], core_ptr[c + 1]
                    if lo == hi:
                        continue
                    items = core_items[lo:hi]
                    futures.append(pool.submit(
                        alg.apply_slice, state, batch.labels[items],
                        batch.update_ids[items], g_e))
                work = partition_next(t_end) if pipeline else None
                for f in futures:
                    f.result()
                ut += time.perf_counter() - t1
                if not pipeline:
                    work = partition_next(t_end)
            t3 = time.perf_counter()
            alg.epoch_end(state, t_end, g_e)
            ut += time.perf_counter() - t3
            state.epoch_clock = t_end
            _close_epoch(rec, alg, state, pt, ut)
    finally:
        pool.shutdown(wait=True)
    return rec, state


def run_hogwild(alg: SUAlgorithm, plan: SamplePlan, state: ModelState | None = None,
                threads: int = 1, gamma: float = 0.0, gamma_decay: float = 1.0,
                pin: bool = False,
                dataset_name: str = "") -> tuple[RunRecord, ModelState]:
    """Split each epoch's sampled stream contiguously across threads and let
    them run with no synchronization; shared coordinates race (word-atomic
    reads/writes), and deferred-update clocks are thresholded at zero.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if state is None:
        state = alg.init_state(plan.seed)
    _warm_algorithm(alg, state, gamma)
    stream = SampleStream(plan)
    rec = _new_record("hogwild", alg, plan, threads, gamma, dataset_name, state)
    n = plan.num_updates
    pool = make_pool(threads, pin)
    try:
        for epoch in range(plan.epochs):
            g_e = gamma * gamma_decay ** epoch
            _check_anchor(state, epoch)
            t_end = (epoch + 1) * n
            t0 = time.perf_counter()
            labels_parts, ids_parts = [], []
            while stream.cursor < t_end:
                batch = stream.next_batch()
                labels_parts.append(batch.labels)
                ids_parts.append(batch.update_ids)
            labels = np.concatenate(labels_parts)
            ids = np.concatenate(ids_parts)
            t1 = time.perf_counter()
            bounds = np.linspace(0, labels.size, threads + 1).astype(np.int64)
            futures = [
                pool.submit(alg.apply_slice, state,
                            labels[bounds[c]:bounds[c + 1]],
                            ids[bounds[c]:bounds[c + 1]], g_e, True)
                for c in range(threads) if bounds[c] < bounds[c + 1]
            ]
            for f in futures:
                f.result()
            alg.epoch_end(state, t_end, g_e)
            t2 = time.perf_counter()
            state.epoch_clock = t_end
            _close_epoch(rec, alg, state, t1 - t0, t2 - t1)
    finally:
        pool.shutdown(wait=True)
    return rec, state


def measure_speedup(records: list[RunRecord]) -> list[dict]:
    """Time-to-target table per the convergence-threshold convention.

    The target objective is the worst best-objective over all non-diverged
    runs (so every surviving run attains it); a run's time-to-target is the
    cumulative time at the first epoch reaching it.  Speedups are relative
    to the 1-thread serial run; the updates-only column ignores partition
    time.  Runs that never reach the target (diverged) are dropped with a
    warning.
    """
    usable = [r for r in records if not r.diverged and r.epochs > 0]
    dropped = [r for r in records if r.diverged or r.epochs == 0]
    for r in dropped:
        warnings.warn(
            f"run {r.mode}/t{r.threads}/seed{r.seed} diverged or empty; "
            "excluded from speedup table", stacklevel=2)
    if not usable:
        raise ValueError("no usable runs")
    eps = max(min(r.objectives) for r in usable)

    def times_to_eps(r: RunRecord) -> tuple[float, float]:
        for e, obj in enumerate(r.objectives):
            if obj <= eps:
                return r.cumulative_times[e], float(np.sum(r.update_times[:e + 1]))
        raise AssertionError("unreachable: eps is attained by construction")

    base = [r for r in usable if r.mode == "serial" and r.threads == 1]
    if not base:
        raise ValueError("speedup table requires a 1-thread serial baseline")
    base_total = float(np.mean([times_to_eps(r)[0] for r in base]))
    base_upd = float(np.mean([times_to_eps(r)[1] for r in base]))

    groups: dict[tuple[str, int], list[RunRecord]] = {}
    for r in usable:
        groups.setdefault((r.mode, r.threads), []).append(r)
    rows = []
    for (mode, threads), rs in sorted(groups.items()):
        pairs = [times_to_eps(r) for r in rs]
        total = float(np.mean([p[0] for p in pairs]))
        upd = float(np.mean([p[1] for p in pairs]))
        rows.append({
            "mode": mode,
            "threads": threads,
            "epsilon": eps,
            "time_to_eps_s": total,
            "updates_time_to_eps_s": upd,
            "speedup": base_total / total if total > 0 else float("inf"),
            "updates_speedup": base_upd / upd if upd > 0 else float("inf"),
            "runs": len(rs),
        })
    return rows


_EMPTY_I64 = np.empty(0, dtype=np.int64)


def _warm_algorithm(alg: SUAlgorithm, state: ModelState, gamma: float) -> None:
    """Trigger JIT compilation outside the timed region (an empty slice and
    a no-op flush exercise every kernel an epoch will call)."""
    alg.apply_slice(state, _EMPTY_I64, _EMPTY_I64, gamma)
    alg.flush(state, state.epoch_clock, gamma)


def _warm_partition(graph, scratch, threads, cc_method) -> None:
    if graph.num_updates == 0:
        return
    from .sampling import Batch
    batch = Batch(labels=np.zeros(1, np.int64), update_ids=np.zeros(1, np.int64),
                  batch_index=0, epoch=0)
    if cc_method == "push_label":
        groups = find_groups_push_label(graph, batch, threads=1, scratch=scratch)
    else:
        groups = find_groups_bfs(graph, batch, scratch=scratch)
    alloc = greedy_allocate(groups, graph, threads)
    _core_streams(groups.group_ptr, groups.item_order, alloc.assign_order,
                  alloc.group_core, threads)


def _new_record(mode, alg, plan, threads, gamma, dataset_name, state):
    rec = RunRecord(mode=mode, algorithm=alg.name, dataset=dataset_name,
                    threads=threads, seed=plan.seed, stepsize=gamma)
    rec.initial_objective = alg.objective(state)
    return rec


def _close_epoch(rec: RunRecord, alg, state, pt: float, ut: float) -> None:
    obj = alg.objective(state)
    if not np.isfinite(obj) or abs(obj) > 1e3 * (abs(rec.initial_objective) + 1.0):
        rec.diverged = True
        state.diverged = True
    rec.objectives.append(float(obj))
    rec.partition_times.append(pt)
    rec.update_times.append(ut)
    prev = rec.cumulative_times[-1] if rec.cumulative_times else 0.0
    rec.cumulative_times.append(prev + pt + ut)


def _check_anchor(state: ModelState, epoch: int) -> None:
    anchor_epoch = state.aux.get("anchor_epoch")
    if anchor_epoch is not None and anchor_epoch != epoch:
        raise EngineError(
            f"stale anchor: at epoch {epoch} but anchor refreshed {anchor_epoch} times")


def _debug_check_batch(graph: UpdateVariableGraph, groups: ConflictGroups,
                       alloc: Allocation) -> None:
    try:
        verify_variable_disjoint(graph, groups)
    except Exception as exc:
        raise EngineError(str(exc)) from exc
    order = np.sort(alloc.assign_order)
    if not np.array_equal(order, np.arange(groups.num_groups)):
        raise EngineError("allocation does not place every group exactly once")
    if alloc.group_core.size and (alloc.group_core.min() < 0
                                  or alloc.group_core.max() >= alloc.num_cores):
        raise EngineError("allocation assigned an invalid core")


@njit(cache=True)
def _core_streams(group_ptr, item_order, assign_order, group_core, cores):
    """Concatenate each core's groups (in placement order) into one item
    stream; items inside a group stay in ascending label order."""
    ngroups = assign_order.size
    core_sizes = np.zeros(cores, dtype=np.int64)
    for t in range(ngroups):
        gi = assign_order[t]
        core_sizes[group_core[gi]] += group_ptr[gi + 1] - group_ptr[gi]
    core_ptr = np.zeros(cores + 1, dtype=np.int64)
    for c in range(cores):
        core_ptr[c + 1] = core_ptr[c] + core_sizes[c]
    out = np.empty(item_order.size, dtype=np.int64)
    cursor = core_ptr[:cores].copy()
    for t in range(ngroups):
        gi = assign_order[t]
        c = group_core[gi]
        for p in range(group_ptr[gi], group_ptr[gi + 1]):
            out[cursor[c]] = item_order[p]
            cursor[c] += 1
    return core_ptr, out
