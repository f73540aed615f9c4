"""parsu: conflict-free shared-memory parallel execution of sparse
stochastic-update algorithms, with exact serial semantics.

A sampled batch of updates is partitioned into variable-disjoint groups
(connected components of the induced update-variable subgraph), groups are
spread across cores by a sorted greedy rule, and cores then apply their
updates with no locks; the result is bit-identical to the one-threaded
run over the same sampled stream.
"""

from .allocation import Allocation, greedy_allocate
from .engine import (RunRecord, measure_speedup, run_cyclades, run_hogwild,
                     run_serial)
from .graph import (GraphStats, InputError, UpdateVariableGraph, build_graph,
                    compute_conflict_degree, compute_stats, graph_from_csr)
from .grouping import (ConflictGroups, GroupingError, find_groups_bfs,
                       find_groups_push_label, verify_variable_disjoint)
from .sampling import (Batch, EndOfStream, SamplePlan, SampleStream,
                       next_batch, prescribed_batch_size)

__version__ = "0.1.0"

__all__ = [
    "Allocation", "Batch", "ConflictGroups", "EndOfStream", "GraphStats",
    "GroupingError", "InputError", "RunRecord", "SamplePlan", "SampleStream",
    "UpdateVariableGraph", "build_graph", "compute_conflict_degree",
    "compute_stats", "find_groups_bfs", "find_groups_push_label",
    "graph_from_csr", "greedy_allocate", "measure_speedup", "next_batch",
    "prescribed_batch_size", "run_cyclades", "run_hogwild", "run_serial",
    "verify_variable_disjoint", "__version__",
]
