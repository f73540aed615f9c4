"""Binary logistic regression over sparse labeled rows, trained by SGD."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..graph import UpdateVariableGraph
from .base import ModelState, SUAlgorithm


class LogisticSGD(SUAlgorithm):
    name = "logistic"

    def __init__(self, graph: UpdateVariableGraph, values: np.ndarray,
                 labels01: np.ndarray):
        super().__init__(graph)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.labels01 = np.ascontiguousarray(labels01, dtype=np.float64)

    def init_state(self, seed: int = 0) -> ModelState:
        return ModelState(x=np.zeros(self.graph.num_variables))

    def apply_slice(self, state, labels, ids, gamma, threshold_tau=False):
        _logistic_slice(self.graph.update_ptr, self.graph.update_vars,
                        self.values, self.labels01, state.x, ids, gamma)

    def objective(self, state) -> float:
        return _logistic_objective(self.graph.update_ptr, self.graph.update_vars,
                                   self.values, self.labels01, state.x)

    def row_objective(self, i: int, x: np.ndarray) -> float:
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        z = float(vals @ x[sup])
        # log(1 + e^z) - y z, in overflow-safe form
        return max(z, 0.0) + math.log1p(math.exp(-abs(z))) - self.labels01[i] * z

    def row_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        sup = self.graph.support(i)
        vals = self.values[self.graph.update_ptr[i]:self.graph.update_ptr[i + 1]]
        z = float(vals @ x[sup])
        g = np.zeros_like(x)
        g[sup] = (_sigmoid_py(z) - self.labels01[i]) * vals
        return g


def _sigmoid_py(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(nogil=True, cache=True)
def _logistic_slice(ptr, idx, val, y, x, ids, gamma):
    for k in range(ids.size):
        i = ids[k]
        lo, hi = ptr[i], ptr[i + 1]
        z = 0.0
        for p in range(lo, hi):
            z += val[p] * x[idx[p]]
        if z >= 0.0:
            sig = 1.0 / (1.0 + np.exp(-z))
        else:
            e = np.exp(z)
            sig = e / (1.0 + e)
        c = gamma * (sig - y[i])
        for p in range(lo, hi):
            x[idx[p]] -= c * val[p]


@njit(cache=True)
def _logistic_objective(ptr, idx, val, y, x):
    n = y.size
    s = 0.0
    for i in range(n):
        z = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            z += val[p] * x[idx[p]]
        if z > 0.0:
            s += z + np.log1p(np.exp(-z)) - y[i] * z
        else:
            s += np.log1p(np.exp(z)) - y[i] * z
    return s / n
