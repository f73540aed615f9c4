import numpy as np
import pytest
from scipy import stats as sps

from parsu import (EndOfStream, InputError, SamplePlan, SampleStream,
                   next_batch, prescribed_batch_size)
from parsu.sampling import WITH_REPLACEMENT, WITHOUT_REPLACEMENT


def collect(plan):
    return list(SampleStream(plan))


def test_prescribed_batch_size_formula():
    assert prescribed_batch_size(1000, 9, 0.1) == 100
    assert prescribed_batch_size(1000, 0, 0.5) == 1000
    assert prescribed_batch_size(10, 1000, 0.5) == 1  # clamped low
    assert prescribed_batch_size(48838, 9999999, 0.9) == 1


def test_prescribed_batch_size_errors():
    with pytest.raises(InputError):
        prescribed_batch_size(10, 2, 0.0)
    with pytest.raises(InputError):
        prescribed_batch_size(10, 2, 1.0)
    with pytest.raises(InputError):
        prescribed_batch_size(10, -1, 0.5)


def test_plan_validation():
    with pytest.raises(InputError):
        SamplePlan(num_updates=5, batch_size=6)
    with pytest.raises(InputError):
        SamplePlan(num_updates=5, batch_size=0)
    with pytest.raises(InputError):
        SamplePlan(num_updates=5, batch_size=2, scheme="bogus")
    plan = SamplePlan(num_updates=5, batch_size=2, epochs=3)
    assert plan.total_updates == 15
    assert plan.batches_per_epoch == 3


def test_determinism_same_seed():
    plan = SamplePlan(num_updates=50, batch_size=7, epochs=2, seed=9,
                      scheme=WITH_REPLACEMENT)
    a = collect(plan)
    b = collect(plan)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.labels, y.labels)
        assert np.array_equal(x.update_ids, y.update_ids)


def test_epoch_permutation_and_remainder():
    plan = SamplePlan(num_updates=4, batch_size=3, epochs=1, seed=0)
    batches = collect(plan)
    assert [len(b) for b in batches] == [3, 1]
    ids = np.concatenate([b.update_ids for b in batches])
    assert sorted(ids.tolist()) == [0, 1, 2, 3]


def test_every_id_once_per_epoch():
    plan = SamplePlan(num_updates=101, batch_size=8, epochs=3, seed=5)
    per_epoch = {}
    for b in SampleStream(plan):
        per_epoch.setdefault(b.epoch, []).append(b.update_ids)
    for epoch, parts in per_epoch.items():
        ids = np.concatenate(parts)
        assert sorted(ids.tolist()) == list(range(101))


def test_labels_contiguous_and_serial_order():
    plan = SamplePlan(num_updates=30, batch_size=7, epochs=2, seed=3,
                      scheme=WITH_REPLACEMENT)
    batches = collect(plan)
    labels = np.concatenate([b.labels for b in batches])
    assert np.array_equal(labels, np.arange(plan.total_updates))
    # label order reconstructs the stream exactly
    ids = np.concatenate([b.update_ids for b in batches])
    order = np.argsort(labels)
    assert np.array_equal(ids[order], ids)


def test_end_of_stream():
    stream = SampleStream(SamplePlan(num_updates=4, batch_size=2, epochs=1))
    stream.next_batch()
    next_batch(stream)
    with pytest.raises(EndOfStream):
        stream.next_batch()


def test_with_replacement_uniform_chisquare():
    plan = SamplePlan(num_updates=100, batch_size=100, epochs=10_000, seed=11,
                      scheme=WITH_REPLACEMENT)
    counts = np.zeros(100, dtype=np.int64)
    for b in SampleStream(plan):
        counts += np.bincount(b.update_ids, minlength=100)
    assert counts.sum() == 1_000_000
    p = sps.chisquare(counts).pvalue
    assert p > 0.01


def test_without_replacement_maxcc_tail_vs_iid_bound():
    """Empirical tails of the max-group size under epoch-permutation
    sampling stay below n times the i.i.d.-sampling tails."""
    from parsu import build_graph, find_groups_bfs
    from parsu.datasets import synth_regular_edges, conflict_dataset_from_edges
    from parsu.sampling import Batch

    n, deg, eps = 2000, 20, 0.5
    ds = conflict_dataset_from_edges(synth_regular_edges(n, deg, seed=2), "t")
    g = ds.graph
    B = prescribed_batch_size(n, deg, eps)
    rng = np.random.default_rng(7)
    trials = 200

    def max_cc(ids):
        batch = Batch(labels=np.arange(len(ids), dtype=np.int64),
                      update_ids=np.asarray(ids, dtype=np.int64),
                      batch_index=0, epoch=0)
        groups = find_groups_bfs(g, batch)
        return int(groups.group_sizes().max())

    wo = np.array([max_cc(rng.permutation(n)[:B]) for _ in range(trials)])
    p = B / n
    iid = np.array([max_cc(np.flatnonzero(rng.random(n) < p))
                    for _ in range(trials)])
    for c in range(1, wo.max() + 1):
        tail_wo = float((wo > c).mean())
        tail_iid = float((iid > c).mean())
        assert tail_wo <= n * tail_iid + 3.0 / trials
