"""Word embeddings from co-occurrence counts.

Minimizes  sum_{w,w'} A_ww' (log A_ww' - |v_w + v_w'|^2 - C)^2  over rank-r
vectors v_w and the shared offset C.  Sampling a nonzero count (w, w')
moves both vectors along (v_w + v_w'); the offset is held fixed during an
epoch and reset to its closed-form optimum at every epoch boundary.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..graph import UpdateVariableGraph
from .base import ModelState, SUAlgorithm


class WordEmbeddingSGD(SUAlgorithm):
    name = "word2vec"

    def __init__(self, graph: UpdateVariableGraph, left: np.ndarray,
                 right: np.ndarray, counts: np.ndarray, vocab: int,
                 rank: int, init_scale: float = 0.1):
        super().__init__(graph)
        self.left = np.ascontiguousarray(left, dtype=np.int64)
        self.right = np.ascontiguousarray(right, dtype=np.int64)
        self.counts = np.ascontiguousarray(counts, dtype=np.float64)
        if np.any(self.counts <= 0):
            raise ValueError("only positive co-occurrence counts are updates")
        self.log_counts = np.log(self.counts)
        self.vocab = int(vocab)
        self.rank = int(rank)
        self.init_scale = float(init_scale)

    def init_state(self, seed: int = 0) -> ModelState:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(self.vocab * self.rank) * self.init_scale
        c0 = _optimal_offset(x, self.left, self.right, self.counts,
                             self.log_counts, self.rank)
        return ModelState(x=x, aux={"offset": c0})

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        _embed_slice(state.x, self.left, self.right, self.counts,
                     self.log_counts, ids, gamma, state.aux["offset"],
                     self.rank)

    def epoch_end(self, state, t_end, gamma):
        state.aux["offset"] = _optimal_offset(
            state.x, self.left, self.right, self.counts, self.log_counts,
            self.rank)

    def refresh_offset(self, state) -> float:
        state.aux["offset"] = _optimal_offset(
            state.x, self.left, self.right, self.counts, self.log_counts,
            self.rank)
        return state.aux["offset"]

    def objective(self, state) -> float:
        return _embed_objective(state.x, self.left, self.right, self.counts,
                                self.log_counts, state.aux["offset"],
                                self.rank)

    def entry_objective(self, k: int, x: np.ndarray, offset: float) -> float:
        r = self.rank
        s = x[self.left[k] * r:(self.left[k] + 1) * r] \
            + x[self.right[k] * r:(self.right[k] + 1) * r]
        miss = self.log_counts[k] - float(s @ s) - offset
        return float(self.counts[k] * miss * miss)

    def entry_gradient(self, k: int, x: np.ndarray, offset: float) -> np.ndarray:
        r = self.rank
        ow = self.left[k] * r
        ov = self.right[k] * r
        s = x[ow:ow + r] + x[ov:ov + r]
        miss = self.log_counts[k] - float(s @ s) - offset
        g = np.zeros_like(x)
        g[ow:ow + r] += -4.0 * self.counts[k] * miss * s
        g[ov:ov + r] += -4.0 * self.counts[k] * miss * s
        return g


@njit(cache=True)
def _optimal_offset(x, left, right, counts, log_counts, r):
    num = 0.0
    den = 0.0
    for u in range(left.size):
        ow = left[u] * r
        ov = right[u] * r
        ss = 0.0
        for q in range(r):
            s = x[ow + q] + x[ov + q]
            ss += s * s
        num += counts[u] * (log_counts[u] - ss)
        den += counts[u]
    return num / den


@njit(cache=True)
def _embed_objective(x, left, right, counts, log_counts, offset, r):
    tot = 0.0
    for u in range(left.size):
        ow = left[u] * r
        ov = right[u] * r
        ss = 0.0
        for q in range(r):
            s = x[ow + q] + x[ov + q]
            ss += s * s
        miss = log_counts[u] - ss - offset
        tot += counts[u] * miss * miss
    return tot


@njit(nogil=True, cache=True)
def _embed_slice(x, left, right, counts, log_counts, ids, gamma, offset, r):
    for k in range(ids.size):
        u = ids[k]
        ow = left[u] * r
        ov = right[u] * r
        ss = 0.0
        for q in range(r):
            s = x[ow + q] + x[ov + q]
            ss += s * s
        coef = 4.0 * gamma * counts[u] * (log_counts[u] - ss - offset)
        for q in range(r):
            s = x[ow + q] + x[ov + q]
            x[ow + q] += coef * s
            x[ov + q] += coef * s
