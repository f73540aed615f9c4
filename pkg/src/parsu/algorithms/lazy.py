"""Closed forms for deferred per-coordinate updates.

Many nominally dense updates factor into a sparse part plus an identical
per-coordinate transform ``x <- (1 - mu) * x - nu`` applied at every step.
Instead of writing every coordinate on every step, each coordinate stores
the last step it was reconciled at and applies the composed transform for
the skipped steps when next touched (or at a flush point).

Both helpers evaluate the geometric series through expm1/log1p; the naive
``(1 - (1-mu)**tau) / mu`` form loses all precision once ``mu*tau``
approaches the rounding unit.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


def lazy_catchup(x: float, mu: float, nu: float, tau: int) -> float:
    """Apply ``tau`` deferred steps to one coordinate.

    Returns ``(1 - mu)**tau * x - nu * sum_{k=1..tau} (1 - mu)**k``; the
    ``mu == 0`` branch reduces to ``x - nu * tau`` and is division free.
    ``tau`` must be nonnegative (racy executors threshold it first).
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0:
        return x
    if mu == 0.0:
        return x - nu * tau
    log_decay = tau * math.log1p(-mu) if mu < 1.0 else -math.inf
    decay = math.exp(log_decay)
    series = -math.expm1(log_decay) / mu  # sum_{k=0..tau-1} (1-mu)^k
    return decay * x - nu * (1.0 - mu) * series


@njit(inline="always", cache=True)
def geometric_catchup(x, mu, nu, tau):
    """Exact composition of ``tau`` applications of ``x <- (1-mu)*x - nu``.

    Equals ``(1-mu)**tau * x - nu * sum_{k=0..tau-1} (1-mu)**k``; note the
    additive series starts one step earlier than in :func:`lazy_catchup`,
    so the deferred path reproduces the dense recurrence exactly (up to
    closed-form roundoff).
    """
    if tau <= 0:
        return x
    if mu == 0.0:
        return x - nu * tau
    if mu < 1.0:
        log_decay = tau * np.log1p(-mu)
    else:
        log_decay = -np.inf
    decay = np.exp(log_decay)
    return decay * x - nu * (-np.expm1(log_decay) / mu)
