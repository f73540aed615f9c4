"""Shared model-state container and the update-algorithm interface."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..graph import UpdateVariableGraph


@dataclass
class ModelState:
    """Shared model vector plus algorithm-owned auxiliary state.

    ``epoch_clock`` counts labeled updates applied so far (equivalently
    the stream cursor).  ``aux`` holds per-algorithm arrays and scalars
    (gradient memory, anchors, per-coordinate reconciliation clocks); the
    executor never inspects it.
    """

    x: np.ndarray
    aux: dict[str, Any] = field(default_factory=dict)
    epoch_clock: int = 0
    diverged: bool = False


class SUAlgorithm:
    """A stochastic-updates algorithm bound to a graph and its payload.

    Subclasses implement ``init_state``, ``apply_slice`` and ``objective``
    and may override ``flush``/``epoch_end`` when they defer writes or
    refresh epoch-global quantities.  ``apply_slice`` must touch only the
    supports of the updates it is handed (plus per-coordinate bookkeeping
    for those same coordinates); the executor relies on this to run
    variable-disjoint groups concurrently without locks.
    """

    name: str = "su"

    def __init__(self, graph: UpdateVariableGraph):
        self.graph = graph

    def support(self, i: int) -> np.ndarray:
        return self.graph.support(i)

    def init_state(self, seed: int = 0) -> ModelState:
        raise NotImplementedError

    def apply_slice(self, state: ModelState, labels: np.ndarray,
                    ids: np.ndarray, gamma: float,
                    threshold_tau: bool = False) -> None:
        """Apply the given labeled items, in array order, in place."""
        raise NotImplementedError

    def flush(self, state: ModelState, t_end: int, gamma: float) -> None:
        """Reconcile deferred per-coordinate updates up to stream position
        ``t_end``.  Default: nothing deferred."""

    def epoch_end(self, state: ModelState, t_end: int, gamma: float) -> None:
        """Single-threaded hook at an epoch boundary (after the last batch)."""
        self.flush(state, t_end, gamma)

    def objective(self, state: ModelState) -> float:
        raise NotImplementedError
