"""Deterministic generation of the sampled update stream.

The stream is produced single-threaded from a seeded generator and carved
into batches; every sampled item carries a global serial label (its
position in the stream), so any parallel schedule can be compared against
the order the one-threaded algorithm would have used.  Identical
(seed, scheme, batch size) always yield bit-identical streams, regardless
of how many threads later consume them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .graph import InputError

WITH_REPLACEMENT = "with_replacement"
WITHOUT_REPLACEMENT = "without_replacement"
SCHEMES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT)


class EndOfStream(Exception):
    """Signal that the sample stream is exhausted."""


def prescribed_batch_size(n: int, delta: int, epsilon: float) -> int:
    """Batch size floor((1 - epsilon) * n / delta), clamped to [1, n].

    ``delta`` is the maximum conflict degree; a conflict-free structure
    (delta == 0) admits the whole pass as one batch.
    """
    if not (0.0 < epsilon < 1.0):
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if n < 1:
        raise InputError("n must be positive")
    if delta == 0:
        return n
    return max(1, min(n, math.floor((1.0 - epsilon) * n / delta)))


@dataclass(frozen=True)
class SamplePlan:
    """How many updates to draw, in what order, and how to chop them up.

    ``total_updates`` is epochs * n for both schemes: one "epoch" is one
    n-sample pass over the data (a permutation without replacement, n
    i.i.d. draws with replacement).
    """

    num_updates: int
    batch_size: int
    epochs: int = 1
    seed: int = 0
    scheme: str = WITHOUT_REPLACEMENT

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown sampling scheme {self.scheme!r}")
        if not (1 <= self.batch_size <= self.num_updates):
            raise InputError(
                f"batch_size must lie in [1, {self.num_updates}], got {self.batch_size}"
            )
        if self.epochs < 1:
            raise InputError("epochs must be positive")

    @property
    def total_updates(self) -> int:
        return self.epochs * self.num_updates

    @property
    def batches_per_epoch(self) -> int:
        return -(-self.num_updates // self.batch_size)


@dataclass(frozen=True)
class Batch:
    """An ordered slice of the sampled stream.

    ``labels[k]`` is the global serial index of item ``k``; labels are
    contiguous across consecutive batches.  Arrays are treated as
    immutable once handed out.
    """

    labels: np.ndarray      # int64
    update_ids: np.ndarray  # int64
    batch_index: int
    epoch: int

    def __len__(self) -> int:
        return self.labels.size

    @property
    def items(self):
        return list(zip(self.labels.tolist(), self.update_ids.tolist()))


@dataclass
class SampleStream:
    """Sequential batch producer for a plan.  Single-threaded by contract."""

    plan: SamplePlan
    _rng: np.random.Generator = field(init=False, repr=False)
    _cursor: int = field(default=0, init=False)
    _batch_index: int = field(default=0, init=False)
    _epoch_ids: np.ndarray | None = field(default=None, init=False, repr=False)
    _epoch: int = field(default=-1, init=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.plan.seed)

    @property
    def cursor(self) -> int:
        return self._cursor

    def next_batch(self) -> Batch:
        plan = self.plan
        if self._cursor >= plan.total_updates:
            raise EndOfStream(f"stream exhausted after {plan.total_updates} items")
        n = plan.num_updates
        epoch, offset = divmod(self._cursor, n)
        if epoch != self._epoch:
            self._epoch_ids = self._draw_epoch()
            self._epoch = epoch
        take = min(plan.batch_size, n - offset)
        ids = self._epoch_ids[offset:offset + take]
        labels = np.arange(self._cursor, self._cursor + take, dtype=np.int64)
        batch = Batch(labels=labels, update_ids=ids,
                      batch_index=self._batch_index, epoch=epoch)
        self._cursor += take
        self._batch_index += 1
        return batch

    def _draw_epoch(self) -> np.ndarray:
        n = self.plan.num_updates
        if self.plan.scheme == WITHOUT_REPLACEMENT:
            return self._rng.permutation(n).astype(np.int64)
        return self._rng.integers(0, n, size=n, dtype=np.int64)

    def __iter__(self) -> Iterator[Batch]:
        while True:
            try:
                yield self.next_batch()
            except EndOfStream:
                return


def next_batch(stream: SampleStream) -> Batch:
    """Functional alias for :meth:`SampleStream.next_batch`."""
    return stream.next_batch()
