"""Acceptance suite: one test per gate, printing a PASS/FAIL line each.

Gates (tolerances fixed here, nothing deferred):
 1. bit-identical parallel execution across algorithms/threads/seeds, < 5 min
 2. sampled-batch component sizes stay logarithmic at B = (1-eps)n/Delta
 3. push-label == BFS == union-find on random batches
 4. greedy allocation within 4/3 of the load lower bound / exact optimum
 5. deferred updates match dense eager references within 1e-9 relative
 6. analytic gradients match centered finite differences within 1e-6
 7. optimization quality: SAGA to the direct solution, eigenvector
    recovery, completion objective reduction
 8. scaled parallel benchmark with partition/update decomposition
    (the >=2x-at-4-threads gate applies on >=4 physical cores)
 9. dense-feature filtering lowers the conflict degree and raises the
    updates-only speedup ratio

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from parsu import (SamplePlan, build_graph, compute_conflict_degree,
                   find_groups_bfs, find_groups_push_label, greedy_allocate,
                   run_cyclades, run_serial)
from parsu.algorithms import build_algorithm, shift_invert_top_eigenvector
from parsu.algorithms.completion import MatrixCompletionSGD
from parsu.algorithms.graph_eigen import GraphEigenSVRG
from parsu.datasets import (Dataset, conflict_dataset_from_edges,
                            eigen_from_edges, filter_dense_features,
                            neighborhoods_from_edges, ratings_dataset,
                            synth_dense_head_rows, synth_er_edges,
                            synth_least_squares, synth_matrix_completion,
                            synth_powerlaw_rows, synth_regular_edges)
from parsu.sampling import (Batch, SampleStream, WITH_REPLACEMENT,
                            WITHOUT_REPLACEMENT, prescribed_batch_size)

import oracles
from test_algorithms import assert_gradient_matches


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"\n[ACCEPTANCE {criterion}] {'PASS' if ok else 'FAIL'} — {detail}",
          flush=True)
    assert ok, f"criterion {criterion}: {detail}"


def physical_cores() -> int:
    try:
        import psutil
        n = psutil.cpu_count(logical=False)
        if n:
            return n
    except ImportError:
        pass
    try:
        pairs = set()
        phys = core = None
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.startswith("physical id"):
                    phys = line.split(":", 1)[1].strip()
                elif line.startswith("core id"):
                    core = line.split(":", 1)[1].strip()
                elif not line.strip():
                    if phys is not None and core is not None:
                        pairs.add((phys, core))
                    phys = core = None
        if pairs:
            return len(pairs)
    except OSError:
        pass
    return os.cpu_count() or 1


def auto_plan(graph, seed, epochs, scheme=WITHOUT_REPLACEMENT):
    delta = compute_conflict_degree(graph)
    bs = prescribed_batch_size(graph.num_updates, delta, 0.1)
    return SamplePlan(num_updates=graph.num_updates, batch_size=bs,
                      epochs=epochs, seed=seed, scheme=scheme)


def test_criterion_1_serial_equivalence():
    t0 = time.perf_counter()
    mc = synth_matrix_completion(60, 60, 4, 3000, seed=5)
    ls = synth_least_squares(2000, 500, 5, seed=6)
    eig = eigen_from_edges(synth_er_edges(300, 6.0, seed=7), "eig300")
    clu = neighborhoods_from_edges(synth_er_edges(2000, 5.0, seed=8), "er2000")
    logi = synth_powerlaw_rows(3000, 2000, 5, exponent=1.2, seed=9)
    cases = [
        ("mc-sgd", mc, 1e-5),        # plain SGD
        ("mc-wsgd", mc, 1e-5),       # weight-decayed SGD
        ("saga", ls, 0.005),
        ("svrg", ls, 0.005),         # sparse-gradient variance reduction
        ("eigen-svrg", eig, None),   # dense-linear variance reduction
        ("clustering", clu, 0.0),
        ("logistic", logi, 0.1),
    ]
    checked = 0
    for name, ds, gamma in cases:
        if gamma is None:
            alg_probe = build_algorithm(name, ds)
            gamma = 0.3 / (alg_probe.shift * ds.graph.num_updates)
        for seed in (0, 1, 2):
            plan = auto_plan(ds.graph, seed, epochs=2)
            _, ref = run_serial(build_algorithm(name, ds), plan, gamma=gamma)
            for threads in (1, 2, 4, 8):
                _, got = run_cyclades(build_algorithm(name, ds), plan,
                                      threads=threads, gamma=gamma)
                assert np.array_equal(ref.x, got.x), (name, seed, threads)
                checked += 1
    elapsed = time.perf_counter() - t0
    report("1", elapsed < 300.0,
           f"{checked} parallel runs over 7 algorithms x 3 seeds x "
           f"threads {{1,2,4,8}} all bit-identical to serial "
           f"({elapsed:.1f}s < 300s)")


def _max_group_size(graph, ids):
    batch = Batch(labels=np.arange(len(ids), dtype=np.int64),
                  update_ids=np.asarray(ids, dtype=np.int64),
                  batch_index=0, epoch=0)
    groups = find_groups_bfs(graph, batch)
    rep = oracles.grouping_oracle(graph, batch.update_ids)
    assert np.array_equal(oracles.groups_to_rep(groups), rep)
    return int(groups.group_sizes().max())


def test_criterion_2_component_phase_transition():
    n, eps = 10_000, 0.5
    ds = conflict_dataset_from_edges(synth_regular_edges(n, 20, seed=0), "reg")
    delta = compute_conflict_degree(ds.graph)
    B = prescribed_batch_size(n, delta, eps)
    bound = (4.0 / eps ** 2) * math.log(n)
    rng = np.random.default_rng(42)
    trials = 200
    results = {}
    for scheme in ("without_replacement", "with_replacement"):
        hits = 0
        for _ in range(trials):
            if scheme == "without_replacement":
                ids = rng.permutation(n)[:B]
            else:
                ids = rng.integers(0, n, size=B)
            if _max_group_size(ds.graph, ids) <= bound:
                hits += 1
        results[scheme] = hits
    ok = all(h >= 0.99 * trials for h in results.values())
    report("2", ok,
           f"Delta={delta}, B={B}, bound={bound:.1f}: max group size within "
           f"bound in {results['without_replacement']}/200 (w/o repl) and "
           f"{results['with_replacement']}/200 (w/ repl) trials, "
           "all partitions union-find-verified")


def test_criterion_3_push_label_equals_bfs_equals_union_find():
    rng = np.random.default_rng(7)
    pool = ThreadPoolExecutor(4)
    try:
        for trial in range(200):
            n = int(rng.integers(10, 2001))
            d = int(rng.integers(2, max(3, n)))
            supports = [rng.choice(d, size=rng.integers(0, min(5, d) + 1),
                                   replace=False) for _ in range(n)]
            g = build_graph(supports, d)
            m = int(rng.integers(1, min(n, 300)))
            ids = (rng.permutation(n)[:m] if trial % 2 == 0
                   else rng.integers(0, n, size=m))
            batch = Batch(labels=np.arange(m, dtype=np.int64),
                          update_ids=ids.astype(np.int64),
                          batch_index=0, epoch=0)
            ref = oracles.grouping_oracle(g, batch.update_ids)
            bfs = find_groups_bfs(g, batch)
            assert np.array_equal(oracles.groups_to_rep(bfs), ref)
            for threads in (1, 4):
                pl = find_groups_push_label(g, batch, threads=threads,
                                            pool=pool if threads > 1 else None)
                assert np.array_equal(oracles.groups_to_rep(pl), ref)
                assert np.array_equal(pl.item_order, bfs.item_order)
                assert np.array_equal(pl.group_ptr, bfs.group_ptr)
    finally:
        pool.shutdown()
    report("3", True,
           "push-label == BFS == union-find on 200 random batches "
           "(n <= 2000), threads {1,4}")


def _weight_groups(weights):
    supports = []
    var = 0
    for w in weights:
        supports.append(list(range(var, var + w)))
        var += w
    g = build_graph(supports, max(var, 1))
    ids = np.arange(len(weights), dtype=np.int64)
    batch = Batch(labels=ids.copy(), update_ids=ids, batch_index=0, epoch=0)
    return g, find_groups_bfs(g, batch)


def test_criterion_4_allocation_bound():
    rng = np.random.default_rng(0)
    checked_small = 0
    for k in range(1000):
        if k < 200:
            p = int(rng.integers(1, 4))
            m = int(rng.integers(4 * p, 13))
        else:
            p = int(rng.integers(1, 9))
            m = int(rng.integers(4 * p, 201))
        ws = rng.integers(1, 50, size=m).tolist()
        g, groups = _weight_groups(ws)
        alloc = greedy_allocate(groups, g, cores=p)
        bound = max(max(ws), math.ceil(sum(ws) / p))
        assert alloc.max_load <= (4.0 / 3.0) * bound + 1e-9, (ws, p)
        if m <= 12:
            opt = oracles.exact_makespan(ws, p)
            assert alloc.max_load <= (4.0 / 3.0) * opt + 1e-9, (ws, p)
            checked_small += 1
    report("4", True,
           f"1000 random weight sets within 4/3 of max(w_max, ceil(sum/P)); "
           f"{checked_small} sets with <= 12 groups also within 4/3 of the "
           "exhaustive optimum")


def test_criterion_5_lazy_equals_eager():
    worst = 0.0
    for seed in range(5):
        ls = synth_least_squares(30, 50, 4, seed=seed)
        plan = SamplePlan(num_updates=30, batch_size=8, epochs=3, seed=seed)

        saga = build_algorithm("saga", ls)
        _, st = run_serial(saga, plan, gamma=0.01)
        dev = _rel_dev(st.x, oracles.eager_saga(saga, plan, 0.01))
        worst = max(worst, dev)

        svrg = build_algorithm("svrg", ls)
        _, st = run_serial(svrg, plan, gamma=0.01)
        dev = _rel_dev(st.x, oracles.eager_svrg_sparse(svrg, plan, 0.01))
        worst = max(worst, dev)

        rng = np.random.default_rng(seed)
        eig = GraphEigenSVRG(ls.graph, ls.payload.values,
                             b=rng.standard_normal(50), shift=5.0)
        _, st = run_serial(eig, plan, gamma=0.002)
        dev = _rel_dev(st.x, oracles.eager_svrg_dense_linear(eig, plan, 0.002))
        worst = max(worst, dev)

        mc = synth_matrix_completion(8, 8, 2, 30, seed=seed)
        wsgd = MatrixCompletionSGD(mc.graph, mc.payload.rows, mc.payload.cols,
                                   mc.payload.vals, 8, 8, rank=3, lam=0.05)
        plan_mc = SamplePlan(num_updates=30, batch_size=8, epochs=3, seed=seed)
        state = wsgd.init_state(seed=plan_mc.seed)
        _, st = run_serial(wsgd, plan_mc, state=state, gamma=1e-3)
        dev = _rel_dev(st.x, oracles.eager_weighted_completion(
            wsgd, plan_mc, 1e-3, seed=plan_mc.seed))
        worst = max(worst, dev)
    report("5", worst <= 1e-9,
           f"weighted SGD / SAGA / both variance-reduction variants, "
           f"d <= 50, 3 epochs, 5 seeds: max relative deviation {worst:.2e} "
           "<= 1e-9")


def _rel_dev(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def test_criterion_6_gradient_checks():
    from parsu.algorithms.least_squares import LeastSquaresSGD
    from parsu.algorithms.embeddings import WordEmbeddingSGD
    from parsu.algorithms.logistic import LogisticSGD
    from parsu.datasets import synth_cooccurrence

    rng = np.random.default_rng(1)
    ls = synth_least_squares(12, 9, 3, seed=1)
    ls_alg = LeastSquaresSGD(ls.graph, ls.payload.values, ls.payload.b)
    eig_ds = synth_least_squares(10, 8, 3, seed=2)
    eig = GraphEigenSVRG(eig_ds.graph, eig_ds.payload.values,
                         b=rng.standard_normal(8), shift=3.0)
    mc = synth_matrix_completion(5, 6, 2, 17, seed=3)
    mc_alg = MatrixCompletionSGD(mc.graph, mc.payload.rows, mc.payload.cols,
                                 mc.payload.vals, 5, 6, rank=3, lam=0.3)
    w2 = synth_cooccurrence(7, 12, seed=4)
    w2_alg = WordEmbeddingSGD(w2.graph, w2.payload.left, w2.payload.right,
                              w2.payload.counts, 7, rank=3)
    pw = synth_powerlaw_rows(15, 10, 3, seed=5)
    lg = LogisticSGD(pw.graph, pw.payload.values, pw.payload.labels01)

    points = 0
    for _ in range(20):
        i = int(rng.integers(0, 12))
        assert_gradient_matches(lambda v: ls_alg.row_objective(i, v),
                                lambda v: ls_alg.row_gradient(i, v),
                                rng.standard_normal(9))
        i = int(rng.integers(0, 10))
        assert_gradient_matches(lambda v: eig.row_objective(i, v),
                                lambda v: eig.row_gradient(i, v),
                                rng.standard_normal(8))
        k = int(rng.integers(0, 17))
        assert_gradient_matches(lambda v: mc_alg.entry_objective(k, v),
                                lambda v: mc_alg.entry_gradient(k, v),
                                rng.standard_normal(33) * 0.5)
        k = int(rng.integers(0, 12))
        assert_gradient_matches(lambda v: w2_alg.entry_objective(k, v, 0.7),
                                lambda v: w2_alg.entry_gradient(k, v, 0.7),
                                rng.standard_normal(21) * 0.5)
        i = int(rng.integers(0, 15))
        assert_gradient_matches(lambda v: lg.row_objective(i, v),
                                lambda v: lg.row_gradient(i, v),
                                rng.standard_normal(10) * 0.8)
        points += 5
    report("6", True,
           f"5 objectives x 20 random points ({points} checks) within 1e-6 "
           "relative of centered finite differences")


def test_criterion_7a_saga_reaches_direct_solution():
    ds = synth_least_squares(200, 100, 10, seed=0)
    g = ds.graph
    dense = np.zeros((200, 100))
    for i in range(200):
        dense[i, g.support(i)] = ds.payload.values[g.update_ptr[i]:g.update_ptr[i + 1]]
    xstar, *_ = np.linalg.lstsq(dense, ds.payload.b, rcond=None)
    fstar = float(np.mean((dense @ xstar - ds.payload.b) ** 2))
    lmax = 2.0 * max(float(np.sum(ds.payload.values[g.update_ptr[i]:g.update_ptr[i + 1]] ** 2))
                     for i in range(200))
    gamma = 1.0 / (3.0 * lmax)
    alg = build_algorithm("saga", ds)
    plan = SamplePlan(num_updates=200, batch_size=200, epochs=500, seed=1)
    rec, _ = run_serial(alg, plan, gamma=gamma)
    rel = (rec.objectives[-1] - fstar) / fstar
    report("7a", rel <= 1e-6,
           f"SAGA on 200x100 synthetic least squares: relative objective gap "
           f"{rel:.2e} <= 1e-6 after {rec.epochs} epochs (gamma={gamma:.2e})")


def test_criterion_7b_eigenvector_recovery():
    ds = eigen_from_edges(synth_er_edges(50, 6.0, seed=0), "eig50")
    g = ds.graph
    dense = np.zeros((50, 50))
    for i in range(50):
        dense[i, g.support(i)] = ds.payload.values[g.update_ptr[i]:g.update_ptr[i + 1]]
    _, vecs = np.linalg.eigh(dense.T @ dense)
    top = vecs[:, -1]
    v = shift_invert_top_eigenvector(g, ds.payload.values, seed=0)
    cos = abs(float(v @ top))
    report("7b", cos >= 0.99,
           f"shift-invert variance-reduced solver vs dense eigensolver on a "
           f"50-node graph: cosine {cos:.6f} >= 0.99")


def test_criterion_7c_completion_objective_reduction():
    mc = synth_matrix_completion(50, 50, 4, 1000, seed=1, noise=0.01)
    alg = build_algorithm("mc-sgd", mc, rank=4)
    gamma = 0.05 / alg.num_observed
    plan = SamplePlan(num_updates=1000, batch_size=200, epochs=200, seed=2)
    rec, _ = run_serial(alg, plan, gamma=gamma)
    reduction = 1.0 - rec.objectives[-1] / rec.initial_objective
    report("7c", reduction >= 0.9 and not rec.diverged,
           f"rank-4 50x50 completion: objective reduced by "
           f"{100 * reduction:.2f}% (>= 90%) over {rec.epochs} epochs")


def _big_completion_dataset():
    rng = np.random.default_rng(0)
    m = 50_000
    n = 1_000_000
    rows = rng.integers(0, m, n)
    cols = rng.integers(0, m, n)
    u = rng.standard_normal((m, 4)) / 4 ** 0.25
    v = rng.standard_normal((m, 4)) / 4 ** 0.25
    vals = np.einsum("ij,ij->i", u[rows], v[cols]) + 0.01 * rng.standard_normal(n)
    return ratings_dataset(rows, cols, vals, m, m, "mc-1m")


def test_criterion_8_scaled_speedup():
    cores = physical_cores()
    ds = _big_completion_dataset()
    delta = compute_conflict_degree(ds.graph)
    n = ds.graph.num_updates
    stats_ok = delta < n // 100 and int(np.diff(ds.graph.update_ptr).max()) <= 10
    B = prescribed_batch_size(n, delta, 0.1)
    threads_hi = min(4, cores) if cores >= 2 else 1
    times = {}
    for threads in (1, threads_hi):
        alg = build_algorithm("mc-sgd", ds, rank=32)
        plan = SamplePlan(num_updates=n, batch_size=B, epochs=3, seed=1)
        rec, _ = run_cyclades(alg, plan, threads=threads, gamma=1e-9, pin=True)
        times[threads] = (float(np.mean(rec.update_times)),
                          float(np.mean(rec.partition_times)))
        print(f"\n[criterion 8] threads={threads}: "
              f"update={times[threads][0] * 1e3:.1f} ms/epoch, "
              f"partition={times[threads][1] * 1e3:.1f} ms/epoch "
              f"(n={n}, Delta={delta}, B={B})", flush=True)
    ratio = times[1][0] / times[threads_hi][0]
    assert stats_ok, "dataset must satisfy max left degree <= 10, Delta << n"
    if cores >= 4:
        report("8", ratio >= 2.0,
               f"updates-only epoch time at 4 threads {ratio:.2f}x faster "
               f"than 1 thread (>= 2x) on {cores} physical cores")
    else:
        print(f"\n[ACCEPTANCE 8] SKIP — machine has {cores} physical cores; "
              f"the >=2x gate is scoped to >=4-core machines. Measured "
              f"{ratio:.2f}x at {threads_hi} threads; partition/update "
              "decomposition reported above.", flush=True)
        pytest.skip(f"criterion 8 gate needs >= 4 physical cores, have {cores}")


def _updates_only_ratio(ds: Dataset, threads_hi: int, seed: int) -> float:
    delta = compute_conflict_degree(ds.graph)
    B = prescribed_batch_size(ds.graph.num_updates, delta, 0.1)
    times = {}
    for threads in (1, threads_hi):
        alg = build_algorithm("logistic", ds)
        plan = SamplePlan(num_updates=ds.graph.num_updates, batch_size=B,
                          epochs=3, seed=seed)
        rec, _ = run_cyclades(alg, plan, threads=threads, gamma=0.1, pin=True)
        times[threads] = float(np.mean(rec.update_times))
    return times[1] / times[threads_hi]


def test_criterion_9_dense_feature_filtering():
    threads_hi = min(4, physical_cores())
    if threads_hi < 2:
        pytest.skip("needs at least 2 cores to compare thread counts")
    ds = synth_dense_head_rows(200_000, 399_800, 4, 200, 2, seed=0)
    delta_before = compute_conflict_degree(ds.graph)
    filtered, removed, _ = filter_dense_features(ds, 0.0005)
    delta_after = compute_conflict_degree(filtered.graph)
    ratio_before = _updates_only_ratio(ds, threads_hi, seed=3)
    ratio_after = _updates_only_ratio(filtered, threads_hi, seed=3)
    ok = delta_after < delta_before and ratio_after > ratio_before
    report("9", ok,
           f"filtering densest 0.05% ({removed} variables): Delta "
           f"{delta_before} -> {delta_after} (strictly reduced), "
           f"updates-only speedup at {threads_hi} threads "
           f"{ratio_before:.2f}x -> {ratio_after:.2f}x (strictly increased)")
