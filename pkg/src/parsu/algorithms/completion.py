"""Low-rank matrix completion by (optionally weight-decayed) SGD.

Each observed entry (i, j, M_ij) is one update touching two rank-r blocks
of the flat model vector: row i of the left factor and column j of the
right factor.  The sampled step is

    U_i <- (1 - gamma*lam) U_i - gamma * nobs * 2 (U_i . V_j - M_ij) V_j

(and symmetrically for V_j); with lam > 0 every other block decays by
(1 - gamma*lam) per step, which is deferred per block and applied as a
power when the block is next touched.  lam = 0 reduces bit-exactly to
plain SGD.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..graph import UpdateVariableGraph
from .base import ModelState, SUAlgorithm


class MatrixCompletionSGD(SUAlgorithm):
    name = "mc-sgd"

    def __init__(self, graph: UpdateVariableGraph, rows: np.ndarray,
                 cols: np.ndarray, vals: np.ndarray, num_row_blocks: int,
                 num_col_blocks: int, rank: int, lam: float = 0.0,
                 init_scale: float = 0.1):
        super().__init__(graph)
        self.rows = np.ascontiguousarray(rows, dtype=np.int64)
        self.cols = np.ascontiguousarray(cols, dtype=np.int64)
        self.vals = np.ascontiguousarray(vals, dtype=np.float64)
        self.m1 = int(num_row_blocks)
        self.m2 = int(num_col_blocks)
        self.rank = int(rank)
        self.lam = float(lam)
        self.init_scale = float(init_scale)
        if lam != 0.0:
            self.name = "mc-wsgd"

    @property
    def num_observed(self) -> int:
        return self.vals.size

    def init_state(self, seed: int = 0) -> ModelState:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((self.m1 + self.m2) * self.rank) * self.init_scale
        return ModelState(x=x, aux={
            "rho": np.zeros(self.m1 + self.m2, dtype=np.int64)})

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        _mc_slice(state.x, state.aux["rho"], self.rows, self.cols, self.vals,
                  labels, ids, gamma, self.lam, float(self.num_observed),
                  self.m1, self.rank, threshold_tau)

    def flush(self, state, t_end, gamma):
        _decay_flush(state.x, state.aux["rho"], t_end, gamma * self.lam,
                     self.rank)

    def objective(self, state) -> float:
        return _mc_objective(state.x, self.rows, self.cols, self.vals,
                             self.m1, self.rank, self.lam)

    def factors(self, state) -> tuple[np.ndarray, np.ndarray]:
        r = self.rank
        u = state.x[:self.m1 * r].reshape(self.m1, r)
        v = state.x[self.m1 * r:].reshape(self.m2, r)
        return u, v

    def entry_objective(self, k: int, x: np.ndarray) -> float:
        """Per-entry objective whose (dense) gradient one step descends:
        nobs * (U_i . V_j - M)^2 + lam/2 * |x|^2."""
        r = self.rank
        u = x[self.rows[k] * r:(self.rows[k] + 1) * r]
        v = x[(self.m1 + self.cols[k]) * r:(self.m1 + self.cols[k] + 1) * r]
        err = float(u @ v - self.vals[k])
        return self.num_observed * err * err + 0.5 * self.lam * float(x @ x)

    def entry_gradient(self, k: int, x: np.ndarray) -> np.ndarray:
        r = self.rank
        oi = self.rows[k] * r
        oj = (self.m1 + self.cols[k]) * r
        u = x[oi:oi + r].copy()
        v = x[oj:oj + r].copy()
        g = self.lam * x.copy()
        c = 2.0 * self.num_observed * float(u @ v - self.vals[k])
        g[oi:oi + r] += c * v
        g[oj:oj + r] += c * u
        return g


@njit(nogil=True, cache=True)
def _mc_slice(x, rho, rows, cols, vals, labels, ids, gamma, lam, nobs, m1, r,
              threshold_tau):
    mu = gamma * lam
    for k in range(ids.size):
        u = ids[k]
        t = labels[k]
        bi = rows[u]
        bj = m1 + cols[u]
        if mu != 0.0:
            tau = t - rho[bi]
            if threshold_tau and tau < 0:
                tau = 0
            if tau > 0:
                w = (1.0 - mu) ** tau
                for q in range(bi * r, bi * r + r):
                    x[q] *= w
            rho[bi] = t + 1
            tau = t - rho[bj]
            if threshold_tau and tau < 0:
                tau = 0
            if tau > 0:
                w = (1.0 - mu) ** tau
                for q in range(bj * r, bj * r + r):
                    x[q] *= w
            rho[bj] = t + 1
        oi = bi * r
        oj = bj * r
        dot = 0.0
        for q in range(r):
            dot += x[oi + q] * x[oj + q]
        c = gamma * nobs * 2.0 * (dot - vals[u])
        for q in range(r):
            ui = x[oi + q]
            vj = x[oj + q]
            x[oi + q] = (1.0 - mu) * ui - c * vj
            x[oj + q] = (1.0 - mu) * vj - c * ui


@njit(cache=True)
def _decay_flush(x, rho, t_end, mu, r):
    if mu != 0.0:
        for blk in range(rho.size):
            tau = t_end - rho[blk]
            if tau > 0:
                w = (1.0 - mu) ** tau
                for q in range(blk * r, blk * r + r):
                    x[q] *= w
    rho[:] = t_end


@njit(cache=True)
def _mc_objective(x, rows, cols, vals, m1, r, lam):
    s = 0.0
    for u in range(rows.size):
        oi = rows[u] * r
        oj = (m1 + cols[u]) * r
        dot = 0.0
        for q in range(r):
            dot += x[oi + q] * x[oj + q]
        e = dot - vals[u]
        s += e * e
    if lam != 0.0:
        xx = 0.0
        for j in range(x.size):
            xx += x[j] * x[j]
        s += 0.5 * lam * xx
    return s
