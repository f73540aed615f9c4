"""Stochastic-update algorithm instantiations and a name registry."""

from __future__ import annotations

from ..datasets import Dataset
from ..graph import InputError
from .base import ModelState, SUAlgorithm
from .clustering import GreedyClustering
from .completion import MatrixCompletionSGD
from .embeddings import WordEmbeddingSGD
from .graph_eigen import (GraphEigenSVRG, default_shift,
                          shift_invert_top_eigenvector)
from .lazy import lazy_catchup
from .least_squares import LeastSquaresSAGA, LeastSquaresSGD, LeastSquaresSVRG
from .logistic import LogisticSGD

ALGORITHM_NAMES = ("ls-sgd", "saga", "svrg", "eigen-svrg", "mc-sgd",
                   "mc-wsgd", "word2vec", "clustering", "logistic")

_KIND_FOR = {
    "ls-sgd": "least_squares",
    "saga": "least_squares",
    "svrg": "least_squares",
    "eigen-svrg": "eigen",
    "mc-sgd": "ratings",
    "mc-wsgd": "ratings",
    "word2vec": "cooccurrence",
    "clustering": "neighborhoods",
    "logistic": "labeled_rows",
}


def build_algorithm(name: str, dataset: Dataset, *, rank: int = 8,
                    lam: float = 1e-3, shift: float | None = None,
                    saga_zero_init: bool = False,
                    init_scale: float = 0.1) -> SUAlgorithm:
    """Instantiate an algorithm over a compatible dataset.

    ``rank`` is the model rank for factorization/embedding tasks, ``lam``
    the weight-decay strength for mc-wsgd, ``shift`` the spectral shift for
    eigen-svrg (estimated from the data when omitted).
    """
    if name not in ALGORITHM_NAMES:
        raise InputError(f"unknown algorithm {name!r}; pick from {ALGORITHM_NAMES}")
    want = _KIND_FOR[name]
    if dataset.kind != want:
        raise InputError(
            f"algorithm {name!r} needs a {want!r} dataset, got {dataset.kind!r}")
    g = dataset.graph
    p = dataset.payload
    if name == "ls-sgd":
        return LeastSquaresSGD(g, p.values, p.b)
    if name == "saga":
        return LeastSquaresSAGA(g, p.values, p.b, init_grad=not saga_zero_init)
    if name == "svrg":
        return LeastSquaresSVRG(g, p.values, p.b)
    if name == "eigen-svrg":
        s = default_shift(g, p.values) if shift is None else shift
        return GraphEigenSVRG(g, p.values, p.b, shift=s)
    if name == "mc-sgd":
        return MatrixCompletionSGD(g, p.rows, p.cols, p.vals, p.num_row_blocks,
                                   p.num_col_blocks, rank, lam=0.0,
                                   init_scale=init_scale)
    if name == "mc-wsgd":
        return MatrixCompletionSGD(g, p.rows, p.cols, p.vals, p.num_row_blocks,
                                   p.num_col_blocks, rank, lam=lam,
                                   init_scale=init_scale)
    if name == "word2vec":
        return WordEmbeddingSGD(g, p.left, p.right, p.counts, p.vocab, rank,
                                init_scale=init_scale)
    if name == "clustering":
        return GreedyClustering(g)
    return LogisticSGD(g, p.values, p.labels01)


__all__ = [
    "ALGORITHM_NAMES", "ModelState", "SUAlgorithm", "build_algorithm",
    "GreedyClustering", "MatrixCompletionSGD", "WordEmbeddingSGD",
    "GraphEigenSVRG", "LeastSquaresSAGA", "LeastSquaresSGD",
    "LeastSquaresSVRG", "LogisticSGD", "lazy_catchup", "default_shift",
    "shift_invert_top_eigenvector",
]
