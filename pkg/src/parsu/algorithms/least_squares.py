"""Least-squares workloads over a sparse design matrix.

The objective is ``(1/n) * sum_i (a_i . x - b_i)^2`` with per-row gradient
``2 (a_i . x - b_i) a_i``, so every stored gradient is a scalar multiple of
its row; gradient memory is kept as one coefficient per row.  Three
solvers share the data layout: plain SGD, SAGA (per-row gradient memory
plus an incrementally maintained mean gradient), and anchored variance
reduction (SVRG) whose mean-gradient correction is dense but identical at
every step and therefore applied to each coordinate only when touched.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..graph import UpdateVariableGraph
from .base import ModelState, SUAlgorithm


class LeastSquaresSGD(SUAlgorithm):
    name = "ls-sgd"

    def __init__(self, graph: UpdateVariableGraph, values: np.ndarray,
                 b: np.ndarray):
        super().__init__(graph)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)

    def init_state(self, seed: int = 0) -> ModelState:
        return ModelState(x=np.zeros(self.graph.num_variables))

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        _sgd_slice(self.graph.update_ptr, self.graph.update_vars, self.values,
                   self.b, state.x, ids, gamma)

    def objective(self, state) -> float:
        return _ls_objective(self.graph.update_ptr, self.graph.update_vars,
                             self.values, self.b, state.x)

    def row_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        """Dense gradient of f_i(x) = (a_i . x - b_i)^2 (reference path)."""
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        g = np.zeros_like(x)
        g[sup] = 2.0 * (vals @ x[sup] - self.b[i]) * vals
        return g

    def row_objective(self, i: int, x: np.ndarray) -> float:
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        return float((vals @ x[sup] - self.b[i]) ** 2)


class LeastSquaresSAGA(LeastSquaresSGD):
    """SAGA: x -= gamma * (grad_i(x) - stored_i + mean(stored)).

    The mean-gradient term is deferred per coordinate; stored gradients and
    the running mean change only on coordinates inside the sampled row's
    support, so the deferred drift of a coordinate is constant between its
    touches and the catch-up is exact.
    """

    name = "saga"

    def __init__(self, graph, values, b, init_grad: bool = True):
        super().__init__(graph, values, b)
        self.init_grad = init_grad

    def init_state(self, seed: int = 0) -> ModelState:
        d = self.graph.num_variables
        n = self.graph.num_updates
        x = np.zeros(d)
        coef = np.zeros(n)
        gsum = np.zeros(d)
        if self.init_grad:
            _row_coefs_and_mean(self.graph.update_ptr, self.graph.update_vars,
                                self.values, self.b, x, coef, gsum)
        return ModelState(x=x, aux={
            "coef": coef, "gsum": gsum, "rho": np.zeros(d, dtype=np.int64)})

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        a = state.aux
        _saga_slice(self.graph.update_ptr, self.graph.update_vars, self.values,
                    self.b, state.x, a["coef"], a["gsum"], a["rho"],
                    labels, ids, gamma, 1.0 / self.graph.num_updates,
                    threshold_tau)

    def flush(self, state, t_end, gamma):
        a = state.aux
        _mean_drift_flush(state.x, a["gsum"], a["rho"], t_end, gamma)

    def mean_from_memory(self, state) -> np.ndarray:
        """Recompute mean stored gradient from scratch (consistency checks)."""
        g = self.graph
        coef = state.aux["coef"]
        out = np.zeros(g.num_variables)
        for i in range(g.num_updates):
            sup = g.support(i)
            vals = self.values[g.update_ptr[i]:g.update_ptr[i + 1]]
            out[sup] += coef[i] * vals
        return out / g.num_updates


class LeastSquaresSVRG(LeastSquaresSGD):
    """Anchored variance reduction with sparse per-row gradients.

    x -= gamma * (grad_i(x) - grad_i(anchor) + mean_grad(anchor)); the
    anchor and its exactly recomputed mean gradient refresh each epoch.
    """

    name = "svrg"

    def init_state(self, seed: int = 0) -> ModelState:
        d = self.graph.num_variables
        n = self.graph.num_updates
        x = np.zeros(d)
        coef_y = np.zeros(n)
        gsum = np.zeros(d)
        _row_coefs_and_mean(self.graph.update_ptr, self.graph.update_vars,
                            self.values, self.b, x, coef_y, gsum)
        return ModelState(x=x, aux={
            "anchor": x.copy(), "coef_y": coef_y, "gsum": gsum,
            "rho": np.zeros(d, dtype=np.int64), "anchor_epoch": 0})

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        a = state.aux
        _svrg_slice(self.graph.update_ptr, self.graph.update_vars, self.values,
                    self.b, state.x, a["coef_y"], a["gsum"], a["rho"],
                    labels, ids, gamma, threshold_tau)

    def flush(self, state, t_end, gamma):
        a = state.aux
        _mean_drift_flush(state.x, a["gsum"], a["rho"], t_end, gamma)

    def epoch_end(self, state, t_end, gamma):
        self.flush(state, t_end, gamma)
        a = state.aux
        a["anchor"] = state.x.copy()
        _row_coefs_and_mean(self.graph.update_ptr, self.graph.update_vars,
                            self.values, self.b, a["anchor"], a["coef_y"],
                            a["gsum"])
        a["anchor_epoch"] += 1


@njit(nogil=True, cache=True)
def _sgd_slice(ptr, idx, val, b, x, ids, gamma):
    for k in range(ids.size):
        i = ids[k]
        lo, hi = ptr[i], ptr[i + 1]
        dot = 0.0
        for p in range(lo, hi):
            dot += val[p] * x[idx[p]]
        c = gamma * 2.0 * (dot - b[i])
        for p in range(lo, hi):
            x[idx[p]] -= c * val[p]


@njit(nogil=True, cache=True)
def _saga_slice(ptr, idx, val, b, x, coef, gsum, rho, labels, ids, gamma,
                inv_n, threshold_tau):
    for k in range(ids.size):
        i = ids[k]
        t = labels[k]
        lo, hi = ptr[i], ptr[i + 1]
        for p in range(lo, hi):
            j = idx[p]
            tau = t - rho[j]
            if threshold_tau and tau < 0:
                tau = 0
            x[j] -= gamma * tau * gsum[j]
            rho[j] = t + 1
        dot = 0.0
        for p in range(lo, hi):
            dot += val[p] * x[idx[p]]
        c_new = 2.0 * (dot - b[i])
        dc = c_new - coef[i]
        for p in range(lo, hi):
            j = idx[p]
            x[j] -= gamma * (dc * val[p] + gsum[j])
            gsum[j] += dc * val[p] * inv_n
        coef[i] = c_new


@njit(nogil=True, cache=True)
def _svrg_slice(ptr, idx, val, b, x, coef_y, gsum, rho, labels, ids, gamma,
                threshold_tau):
    for k in range(ids.size):
        i = ids[k]
        t = labels[k]
        lo, hi = ptr[i], ptr[i + 1]
        for p in range(lo, hi):
            j = idx[p]
            tau = t - rho[j]
            if threshold_tau and tau < 0:
                tau = 0
            x[j] -= gamma * tau * gsum[j]
            rho[j] = t + 1
        dot = 0.0
        for p in range(lo, hi):
            dot += val[p] * x[idx[p]]
        dc = 2.0 * (dot - b[i]) - coef_y[i]
        for p in range(lo, hi):
            j = idx[p]
            x[j] -= gamma * (dc * val[p] + gsum[j])


@njit(cache=True)
def _mean_drift_flush(x, gsum, rho, t_end, gamma):
    for j in range(x.size):
        tau = t_end - rho[j]
        if tau > 0:
            x[j] -= gamma * tau * gsum[j]
        rho[j] = t_end


@njit(cache=True)
def _row_coefs_and_mean(ptr, idx, val, b, x, coef, gsum):
    gsum[:] = 0.0
    n = b.size
    inv_n = 1.0 / n
    for i in range(n):
        dot = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            dot += val[p] * x[idx[p]]
        c = 2.0 * (dot - b[i])
        coef[i] = c
        for p in range(ptr[i], ptr[i + 1]):
            gsum[idx[p]] += c * val[p] * inv_n


@njit(cache=True)
def _ls_objective(ptr, idx, val, b, x):
    n = b.size
    s = 0.0
    for i in range(n):
        dot = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            dot += val[p] * x[idx[p]]
        r = dot - b[i]
        s += r * r
    return s / n
