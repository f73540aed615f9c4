"""Top-eigenvector estimation via anchored variance reduction.

For a row-normalized matrix A, the top eigenvector of ``A' A`` is obtained
by inverse power iterations: repeatedly (approximately) minimize
``0.5 x'(shift*I - A'A)x - b'x`` and renormalize.  The inner solver is a
variance-reduced stochastic method over per-row objectives

    f_i(x) = 0.5 x'(shift/n * I - a_i a_i')x - (1/n) b'x.

The per-row gradient has a dense linear part (the uniform ``shift/n * x``
and the constant ``b/n``), so each step conceptually rescales every
coordinate; per coordinate the step is

    x_j <- (1 - gamma*shift) x_j - gamma*g_j
           - gamma*(h_ij(x) - h_ij(anchor)),   h_ij(x) = -n a_ij (a_i . x)

with ``g`` the exact full gradient at the anchor.  Off-support coordinates
receive only the first two (update-independent) terms, which are deferred
and applied in closed form when the coordinate is next touched.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..graph import UpdateVariableGraph
from .base import ModelState, SUAlgorithm
from .lazy import geometric_catchup


class GraphEigenSVRG(SUAlgorithm):
    name = "eigen-svrg"

    def __init__(self, graph: UpdateVariableGraph, values: np.ndarray,
                 b: np.ndarray, shift: float, x0: np.ndarray | None = None):
        super().__init__(graph)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)
        self.shift = float(shift)
        self.x0 = None if x0 is None else np.asarray(x0, dtype=np.float64)

    def init_state(self, seed: int = 0) -> ModelState:
        d = self.graph.num_variables
        x = np.zeros(d) if self.x0 is None else self.x0.copy()
        anchor = x.copy()
        ay = np.empty(self.graph.num_updates)
        g = np.empty(d)
        _full_gradient(self.graph.update_ptr, self.graph.update_vars,
                       self.values, anchor, self.b, self.shift, ay, g)
        return ModelState(x=x, aux={
            "anchor": anchor, "anchor_dots": ay, "g": g,
            "rho": np.zeros(d, dtype=np.int64), "anchor_epoch": 0})

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        a = state.aux
        _eigen_slice(self.graph.update_ptr, self.graph.update_vars, self.values,
                     state.x, a["g"], a["anchor_dots"], a["rho"], labels, ids,
                     gamma, self.shift, self.graph.num_updates, threshold_tau)

    def flush(self, state, t_end, gamma):
        a = state.aux
        _decay_drift_flush(state.x, a["g"], a["rho"], t_end, gamma, self.shift)

    def epoch_end(self, state, t_end, gamma):
        self.flush(state, t_end, gamma)
        a = state.aux
        a["anchor"] = state.x.copy()
        _full_gradient(self.graph.update_ptr, self.graph.update_vars,
                       self.values, a["anchor"], self.b, self.shift,
                       a["anchor_dots"], a["g"])
        a["anchor_epoch"] += 1

    def objective(self, state) -> float:
        return _eigen_objective(self.graph.update_ptr, self.graph.update_vars,
                                self.values, state.x, self.b, self.shift)

    def row_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        """Dense gradient of f_i (reference path for checks)."""
        n = self.graph.num_updates
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        g = (self.shift / n) * x - self.b / n
        g[sup] -= (vals @ x[sup]) * vals
        return g

    def row_objective(self, i: int, x: np.ndarray) -> float:
        n = self.graph.num_updates
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        quad = (self.shift / n) * (x @ x) - (vals @ x[sup]) ** 2
        return float(0.5 * quad - (self.b @ x) / n)


def matvec(graph: UpdateVariableGraph, values: np.ndarray,
           x: np.ndarray) -> np.ndarray:
    """A @ x over the CSR layout."""
    out = np.empty(graph.num_updates)
    _matvec(graph.update_ptr, graph.update_vars, values, x, out)
    return out


def rmatvec(graph: UpdateVariableGraph, values: np.ndarray,
            r: np.ndarray) -> np.ndarray:
    """A' @ r over the CSR layout."""
    out = np.zeros(graph.num_variables)
    _rmatvec(graph.update_ptr, graph.update_vars, values, r, out)
    return out


def estimate_operator_norm(graph: UpdateVariableGraph, values: np.ndarray,
                           iters: int = 60, seed: int = 0) -> float:
    """Power-iteration estimate of the top eigenvalue of A' A."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(graph.num_variables)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = rmatvec(graph, values, matvec(graph, values, v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = nw
        v = w / nw
    return float(est)


def default_shift(graph: UpdateVariableGraph, values: np.ndarray,
                  seed: int = 0) -> float:
    """Shift 1.1 times the estimated top eigenvalue of A' A."""
    return 1.1 * estimate_operator_norm(graph, values, seed=seed)


def shift_invert_top_eigenvector(graph: UpdateVariableGraph,
                                 values: np.ndarray,
                                 shift: float | None = None,
                                 gamma: float | None = None,
                                 outer_iters: int = 20,
                                 inner_epochs: int = 8,
                                 batch_epsilon: float = 0.1,
                                 mode: str = "serial",
                                 threads: int = 1,
                                 seed: int = 0) -> np.ndarray:
    """Outer inverse-iteration loop around the stochastic inner solver.

    Each outer round (approximately) solves the shifted system with the
    current direction as right-hand side, then renormalizes.  The inner
    solver runs through the execution engine in the requested mode.
    """
    from .. import engine as _engine
    from ..graph import compute_conflict_degree
    from ..sampling import SamplePlan, prescribed_batch_size

    n = graph.num_updates
    d = graph.num_variables
    if shift is None:
        shift = default_shift(graph, values, seed=seed)
    if gamma is None:
        gamma = 0.35 / (shift * n)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    delta = compute_conflict_degree(graph)
    bsize = prescribed_batch_size(n, delta, batch_epsilon)
    for outer in range(outer_iters):
        alg = GraphEigenSVRG(graph, values, b=v, shift=shift, x0=v / shift)
        state = alg.init_state()
        plan = SamplePlan(num_updates=n, batch_size=bsize,
                          epochs=inner_epochs, seed=seed + outer)
        if mode == "serial":
            _engine.run_serial(alg, plan, state, gamma=gamma)
        elif mode == "cyclades":
            _engine.run_cyclades(alg, plan, state, threads=threads,
                                 gamma=gamma)
        else:
            raise ValueError(f"unsupported mode {mode!r}")
        nx = np.linalg.norm(state.x)
        if nx == 0.0 or not np.isfinite(nx):
            raise RuntimeError("inverse iteration collapsed; adjust gamma/shift")
        v = state.x / nx
    return v


@njit(cache=True)
def _matvec(ptr, idx, val, x, out):
    for i in range(ptr.size - 1):
        dot = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            dot += val[p] * x[idx[p]]
        out[i] = dot


@njit(cache=True)
def _rmatvec(ptr, idx, val, r, out):
    for i in range(ptr.size - 1):
        for p in range(ptr[i], ptr[i + 1]):
            out[idx[p]] += val[p] * r[i]


@njit(cache=True)
def _full_gradient(ptr, idx, val, y, b, shift, ay, g):
    # g = shift*y - A'(A y) - b, with the row dots saved for reuse
    for j in range(y.size):
        g[j] = shift * y[j] - b[j]
    for i in range(ptr.size - 1):
        dot = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            dot += val[p] * y[idx[p]]
        ay[i] = dot
        for p in range(ptr[i], ptr[i + 1]):
            g[idx[p]] -= val[p] * dot


@njit(nogil=True, cache=True)
def _eigen_slice(ptr, idx, val, x, g, anchor_dots, rho, labels, ids, gamma,
                 shift, nrows, threshold_tau):
    mu = gamma * shift
    for k in range(ids.size):
        i = ids[k]
        t = labels[k]
        lo, hi = ptr[i], ptr[i + 1]
        for p in range(lo, hi):
            j = idx[p]
            tau = t - rho[j]
            if threshold_tau and tau < 0:
                tau = 0
            x[j] = geometric_catchup(x[j], mu, gamma * g[j], tau)
            rho[j] = t + 1
        dot = 0.0
        for p in range(lo, hi):
            dot += val[p] * x[idx[p]]
        dd = nrows * (dot - anchor_dots[i])
        for p in range(lo, hi):
            j = idx[p]
            x[j] = (1.0 - mu) * x[j] - gamma * g[j] + gamma * val[p] * dd



@njit(cache=True)
def _decay_drift_flush(x, g, rho, t_end, gamma, shift):
    mu = gamma * shift
    for j in range(x.size):
        tau = t_end - rho[j]
        if tau > 0:
            x[j] = geometric_catchup(x[j], mu, gamma * g[j], tau)
        rho[j] = t_end


@njit(cache=True)
def _eigen_objective(ptr, idx, val, x, b, shift):
    sq = 0.0
    for i in range(ptr.size - 1):
        dot = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            dot += val[p] * x[idx[p]]
        sq += dot * dot
    xx = 0.0
    bx = 0.0
    for j in range(x.size):
        xx += x[j] * x[j]
        bx += b[j] * x[j]
    return 0.5 * (shift * xx - sq) - bx
