"""Dataset loading, synthesis, and preprocessing.

File formats are whitespace-separated text:

* edge lists: ``src dst [weight]`` (undirected; duplicates merge)
* triples:    ``row col value`` (ratings, co-occurrence counts)
* labeled rows: ``label idx:val idx:val ...`` (labels 0/1 or +-1)

A loaded or generated dataset bundles the update-variable graph with the
per-update payload the algorithms consume; supports are derived per task
(matrix rows, rating block pairs, co-occurring word pairs, closed
neighborhoods, feature indices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .graph import InputError, UpdateVariableGraph, graph_from_csr


class ParseError(ValueError):
    """Malformed dataset file (message carries the line number)."""


@dataclass(frozen=True)
class EdgesPayload:
    edges: np.ndarray      # int64 (m, 2)
    weights: np.ndarray    # float64 (m,)
    num_nodes: int


@dataclass(frozen=True)
class LeastSquaresPayload:
    values: np.ndarray     # float64, aligned with graph.update_vars
    b: np.ndarray          # float64 (num_updates,)


@dataclass(frozen=True)
class EigenPayload:
    values: np.ndarray     # float64, aligned with graph.update_vars
    b: np.ndarray          # float64 (num_variables,)


@dataclass(frozen=True)
class RatingsPayload:
    rows: np.ndarray       # int64 (num_ratings,)
    cols: np.ndarray       # int64 (num_ratings,)
    vals: np.ndarray       # float64 (num_ratings,)
    num_row_blocks: int
    num_col_blocks: int


@dataclass(frozen=True)
class CoocPayload:
    left: np.ndarray       # int64 (nnz,)
    right: np.ndarray      # int64 (nnz,)
    counts: np.ndarray     # float64 (nnz,)
    vocab: int


@dataclass(frozen=True)
class LabeledRowsPayload:
    values: np.ndarray     # float64, aligned with graph.update_vars
    labels01: np.ndarray   # float64 (num_updates,)


@dataclass(frozen=True)
class Dataset:
    kind: str
    name: str
    graph: UpdateVariableGraph
    payload: Any


# ---------------------------------------------------------------------------
# parsing and serialization


def _tokenized_lines(path):
    with open(path) as fh:
        lines = fh.readlines()
    out = []
    for ln, raw in enumerate(lines, start=1):
        toks = raw.split()
        if toks:
            out.append((ln, toks))
    if not out:
        raise ParseError(f"{path}: empty dataset file")
    return out


def load_edge_list(path) -> EdgesPayload:
    src, dst, w = [], [], []
    for ln, toks in _tokenized_lines(path):
        if len(toks) not in (2, 3):
            raise ParseError(f"{path}:{ln}: expected 'src dst [weight]'")
        try:
            src.append(int(toks[0]))
            dst.append(int(toks[1]))
            w.append(float(toks[2]) if len(toks) == 3 else 1.0)
        except ValueError as exc:
            raise ParseError(f"{path}:{ln}: {exc}") from None
    edges = np.column_stack([np.asarray(src, np.int64), np.asarray(dst, np.int64)])
    if edges.min() < 0:
        raise ParseError(f"{path}: negative node ID")
    return EdgesPayload(edges=edges, weights=np.asarray(w),
                        num_nodes=int(edges.max()) + 1)


def load_triples(path):
    r, c, v = [], [], []
    for ln, toks in _tokenized_lines(path):
        if len(toks) != 3:
            raise ParseError(f"{path}:{ln}: expected 'row col value'")
        try:
            r.append(int(toks[0]))
            c.append(int(toks[1]))
            v.append(float(toks[2]))
        except ValueError as exc:
            raise ParseError(f"{path}:{ln}: {exc}") from None
    return (np.asarray(r, np.int64), np.asarray(c, np.int64), np.asarray(v))


def load_labeled_rows_file(path):
    labels, rows = [], []
    for ln, toks in _tokenized_lines(path):
        try:
            y = float(toks[0])
        except ValueError:
            raise ParseError(f"{path}:{ln}: bad label {toks[0]!r}") from None
        if y not in (-1.0, 0.0, 1.0):
            raise ParseError(f"{path}:{ln}: label must be 0/1 or +-1")
        feats = []
        for tok in toks[1:]:
            try:
                idx, val = tok.split(":")
                feats.append((int(idx), float(val)))
            except ValueError:
                raise ParseError(f"{path}:{ln}: bad feature {tok!r}") from None
        labels.append(1.0 if y == 1.0 else 0.0)
        rows.append(feats)
    return labels, rows


def save_edge_list(path, edges: np.ndarray, weights=None) -> None:
    with open(path, "w") as fh:
        for k in range(len(edges)):
            if weights is None:
                fh.write(f"{edges[k, 0]} {edges[k, 1]}\n")
            else:
                fh.write(f"{edges[k, 0]} {edges[k, 1]} {float(weights[k])!r}\n")


def save_triples(path, rows, cols, vals) -> None:
    with open(path, "w") as fh:
        for k in range(len(rows)):
            fh.write(f"{rows[k]} {cols[k]} {float(vals[k])!r}\n")


def save_labeled_rows(path, dataset: Dataset) -> None:
    g = dataset.graph
    p: LabeledRowsPayload = dataset.payload
    with open(path, "w") as fh:
        for i in range(g.num_updates):
            lo, hi = g.update_ptr[i], g.update_ptr[i + 1]
            feats = " ".join(f"{g.update_vars[q]}:{float(p.values[q])!r}"
                             for q in range(lo, hi))
            fh.write(f"{int(p.labels01[i])} {feats}\n".rstrip() + "\n")


# ---------------------------------------------------------------------------
# CSR assembly


def csr_from_coo(rows, cols, vals, num_rows: int, num_cols: int):
    """Sort by (row, col), merge duplicate entries by summing their values."""
    rows = np.asarray(rows, np.int64)
    cols = np.asarray(cols, np.int64)
    vals = np.asarray(vals, np.float64)
    if rows.size:
        if rows.min() < 0 or rows.max() >= num_rows:
            raise InputError("row index out of range")
        if cols.min() < 0 or cols.max() >= num_cols:
            raise InputError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        key = rows * num_cols + cols
        new = np.empty(rows.size, bool)
        new[0] = True
        new[1:] = key[1:] != key[:-1]
        starts = np.flatnonzero(new)
        rows, cols = rows[starts], cols[starts]
        vals = np.add.reduceat(vals, starts)
    counts = np.bincount(rows, minlength=num_rows)
    ptr = np.zeros(num_rows + 1, np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, cols, vals


def rows_dataset_from_csr(ptr, cols, vals, num_cols, labels01, name,
                          kind="labeled_rows") -> Dataset:
    graph = graph_from_csr(ptr, cols, num_cols)
    return Dataset(kind=kind, name=name, graph=graph,
                   payload=LabeledRowsPayload(values=np.asarray(vals, np.float64),
                                              labels01=np.asarray(labels01, np.float64)))


# ---------------------------------------------------------------------------
# task datasets from files / edge arrays


def least_squares_from_edges(e: EdgesPayload, name: str, b=None,
                             b_seed: int = 0, noise: float = 0.1) -> Dataset:
    """Rows of the (symmetrized) adjacency matrix as data points.  Without an
    explicit right-hand side, b = A x~ + noise * z~ with seeded normals."""
    n = e.num_nodes
    ri = np.concatenate([e.edges[:, 0], e.edges[:, 1]])
    ci = np.concatenate([e.edges[:, 1], e.edges[:, 0]])
    vv = np.concatenate([e.weights, e.weights])
    ptr, cols, vals = csr_from_coo(ri, ci, vv, n, n)
    graph = graph_from_csr(ptr, cols, n)
    if b is None:
        rng = np.random.default_rng(b_seed)
        xt = rng.standard_normal(n)
        b = _csr_matvec(ptr, cols, vals, xt) + noise * rng.standard_normal(n)
    return Dataset(kind="least_squares", name=name, graph=graph,
                   payload=LeastSquaresPayload(values=vals, b=np.asarray(b, np.float64)))


def eigen_from_edges(e: EdgesPayload, name: str) -> Dataset:
    """Row-normalized adjacency rows; the right-hand side is refreshed by the
    inverse-iteration driver, a normalized all-ones vector stands in for
    standalone runs."""
    n = e.num_nodes
    ri = np.concatenate([e.edges[:, 0], e.edges[:, 1]])
    ci = np.concatenate([e.edges[:, 1], e.edges[:, 0]])
    vv = np.concatenate([e.weights, e.weights])
    ptr, cols, vals = csr_from_coo(ri, ci, vv, n, n)
    for i in range(n):
        lo, hi = ptr[i], ptr[i + 1]
        nrm = math.sqrt(float(np.sum(vals[lo:hi] ** 2)))
        if nrm > 0:
            vals[lo:hi] /= nrm
    graph = graph_from_csr(ptr, cols, n)
    b = np.full(n, 1.0 / math.sqrt(n))
    return Dataset(kind="eigen", name=name, graph=graph,
                   payload=EigenPayload(values=vals, b=b))


def neighborhoods_from_edges(e: EdgesPayload, name: str) -> Dataset:
    """Closed neighborhoods: update v touches v and every neighbor."""
    n = e.num_nodes
    ri = np.concatenate([e.edges[:, 0], e.edges[:, 1], np.arange(n)])
    ci = np.concatenate([e.edges[:, 1], e.edges[:, 0], np.arange(n)])
    ptr, cols, _ = csr_from_coo(ri, ci, np.ones(ri.size), n, n)
    graph = graph_from_csr(ptr, cols, n)
    return Dataset(kind="neighborhoods", name=name, graph=graph, payload=None)


def ratings_dataset(rows, cols, vals, m1, m2, name: str) -> Dataset:
    rows = np.asarray(rows, np.int64)
    cols = np.asarray(cols, np.int64)
    if rows.size and (rows.max() >= m1 or cols.max() >= m2
                      or rows.min() < 0 or cols.min() < 0):
        raise InputError("rating index out of range")
    n = rows.size
    ptr = np.arange(0, 2 * n + 1, 2, dtype=np.int64)
    sup = np.empty(2 * n, np.int64)
    sup[0::2] = rows
    sup[1::2] = m1 + cols
    graph = graph_from_csr(ptr, sup, m1 + m2)
    return Dataset(kind="ratings", name=name, graph=graph,
                   payload=RatingsPayload(rows=rows, cols=cols,
                                          vals=np.asarray(vals, np.float64),
                                          num_row_blocks=int(m1),
                                          num_col_blocks=int(m2)))


def cooccurrence_dataset(left, right, counts, vocab, name: str) -> Dataset:
    left = np.asarray(left, np.int64)
    right = np.asarray(right, np.int64)
    counts = np.asarray(counts, np.float64)
    if np.any(counts <= 0):
        raise InputError("co-occurrence counts must be positive")
    n = left.size
    supports = [sorted({int(left[k]), int(right[k])}) for k in range(n)]
    lengths = np.fromiter((len(s) for s in supports), np.int64, count=n)
    ptr = np.zeros(n + 1, np.int64)
    np.cumsum(lengths, out=ptr[1:])
    flat = np.fromiter((j for s in supports for j in s), np.int64,
                       count=int(ptr[-1]))
    graph = graph_from_csr(ptr, flat, vocab)
    return Dataset(kind="cooccurrence", name=name, graph=graph,
                   payload=CoocPayload(left=left, right=right, counts=counts,
                                       vocab=int(vocab)))


# ---------------------------------------------------------------------------
# synthetic generators


def synth_least_squares(rows: int, cols: int, nnz_per_row: int, seed: int = 0,
                        noise: float = 0.1, name: str | None = None) -> Dataset:
    """Sparse design with uniform random supports of exactly nnz_per_row,
    normal values, and b = A x~ + noise * z~."""
    if nnz_per_row > cols:
        raise InputError("nnz_per_row cannot exceed cols")
    rng = np.random.default_rng(seed)
    sup = _uniform_supports(rng, rows, cols, nnz_per_row)
    vals = rng.standard_normal(rows * nnz_per_row)
    ptr = np.arange(0, rows * nnz_per_row + 1, nnz_per_row, dtype=np.int64)
    # per-row sort of column indices keeps values aligned
    order = np.argsort(sup.reshape(rows, nnz_per_row), axis=1, kind="stable")
    sup = np.take_along_axis(sup.reshape(rows, nnz_per_row), order, axis=1).ravel()
    vals = np.take_along_axis(vals.reshape(rows, nnz_per_row), order, axis=1).ravel()
    xt = rng.standard_normal(cols)
    b = _csr_matvec(ptr, sup, vals, xt) + noise * rng.standard_normal(rows)
    graph = graph_from_csr(ptr, sup, cols)
    return Dataset(kind="least_squares",
                   name=name or f"synth-ls:{rows}x{cols}", graph=graph,
                   payload=LeastSquaresPayload(values=vals, b=b))


def synth_matrix_completion(m1: int, m2: int, rank_true: int, ratings: int,
                            seed: int = 0, noise: float = 0.01,
                            name: str | None = None) -> Dataset:
    """Observed entries of a planted rank-``rank_true`` matrix plus noise."""
    rng = np.random.default_rng(seed)
    if ratings > m1 * m2:
        raise InputError("more ratings than matrix entries")
    flat = rng.choice(m1 * m2, size=ratings, replace=False)
    rows, cols = np.divmod(flat.astype(np.int64), m2)
    u = rng.standard_normal((m1, rank_true)) / rank_true ** 0.25
    v = rng.standard_normal((m2, rank_true)) / rank_true ** 0.25
    vals = np.einsum("ij,ij->i", u[rows], v[cols]) + noise * rng.standard_normal(ratings)
    return ratings_dataset(rows, cols, vals, m1, m2,
                           name or f"synth-mc:{m1}x{m2}r{rank_true}")


def synth_cooccurrence(vocab: int, pairs: int, seed: int = 0,
                       name: str | None = None) -> Dataset:
    rng = np.random.default_rng(seed)
    if pairs > vocab * (vocab - 1) // 2:
        raise InputError("too many distinct pairs requested")
    seen = set()
    left, right = [], []
    while len(left) < pairs:
        a, b = rng.integers(0, vocab, 2)
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        left.append(key[0])
        right.append(key[1])
    counts = rng.integers(1, 64, size=pairs).astype(np.float64)
    return cooccurrence_dataset(np.asarray(left), np.asarray(right), counts,
                                vocab, name or f"synth-cooc:v{vocab}")


def synth_powerlaw_rows(rows: int, features: int, nnz_per_row: int,
                        exponent: float = 1.1, seed: int = 0,
                        name: str | None = None) -> Dataset:
    """Bag-of-words-style labeled rows whose feature frequencies follow a
    power law, so a few features appear in a large share of the rows."""
    rng = np.random.default_rng(seed)
    weights = (np.arange(1, features + 1, dtype=np.float64)) ** (-exponent)
    cdf = np.cumsum(weights / weights.sum())
    cols = np.searchsorted(cdf, rng.random(rows * nnz_per_row)).astype(np.int64)
    cols = np.minimum(cols, features - 1)
    ri = np.repeat(np.arange(rows, dtype=np.int64), nnz_per_row)
    ptr, cols2, vals2 = csr_from_coo(ri, cols, np.ones(cols.size), rows, features)
    vals2 = np.ones_like(vals2)  # presence, not multiplicity
    w_true = rng.standard_normal(features)
    z = np.zeros(rows)
    np.add.at(z, np.repeat(np.arange(rows), np.diff(ptr)), w_true[cols2])
    prob = 1.0 / (1.0 + np.exp(-z))
    labels = (rng.random(rows) < prob).astype(np.float64)
    return rows_dataset_from_csr(ptr, cols2, vals2, features, labels,
                                 name or f"synth-powerlaw:{rows}x{features}")


def synth_dense_head_rows(rows: int, sparse_features: int, nnz_sparse: int,
                          dense_features: int, dense_per_row: int,
                          seed: int = 0, name: str | None = None) -> Dataset:
    """Labeled rows with a heavy head: a small pool of features appears in a
    large share of rows (IDs 0..dense_features-1, the degree-sorted head of
    a power-law profile), the bulk is uniform-sparse.  Dropping the head is
    what the dense-feature filter is for."""
    rng = np.random.default_rng(seed)
    d = dense_features + sparse_features
    head = rng.integers(0, dense_features, size=(rows, dense_per_row))
    bulk = rng.integers(dense_features, d, size=(rows, nnz_sparse))
    cols = np.concatenate([head, bulk], axis=1).ravel()
    ri = np.repeat(np.arange(rows, dtype=np.int64), nnz_sparse + dense_per_row)
    ptr, cols2, vals2 = csr_from_coo(ri, cols, np.ones(cols.size), rows, d)
    vals2 = np.ones_like(vals2)
    w_true = rng.standard_normal(d) * 0.5
    z = np.zeros(rows)
    np.add.at(z, np.repeat(np.arange(rows), np.diff(ptr)), w_true[cols2])
    labels = (rng.random(rows) < 1.0 / (1.0 + np.exp(-z))).astype(np.float64)
    return rows_dataset_from_csr(ptr, cols2, vals2, d, labels,
                                 name or f"synth-headbulk:{rows}x{d}")


def synth_er_edges(n: int, avg_degree: float, seed: int = 0) -> EdgesPayload:
    """Sparse random graph with the requested mean degree (pair sampling
    with duplicate removal)."""
    rng = np.random.default_rng(seed)
    target = int(n * avg_degree / 2)
    seen = set()
    acc = []
    while len(acc) < target:
        cand = rng.integers(0, n, size=(2 * (target - len(acc)) + 8, 2))
        for a, b in cand:
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            acc.append(key)
            if len(acc) == target:
                break
    edges = np.asarray(acc, dtype=np.int64).reshape(target, 2)
    return EdgesPayload(edges=edges, weights=np.ones(target), num_nodes=n)


def synth_regular_edges(n: int, degree: int, seed: int = 0,
                        repair_rounds: int = 60) -> EdgesPayload:
    """Near-regular random graph via the configuration model: pair stubs,
    reshuffle offenders a few rounds, then drop leftover self/multi edges
    (max degree stays <= degree; almost all nodes hit it exactly)."""
    if (n * degree) % 2 != 0:
        raise InputError("n * degree must be even")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), degree)
    rng.shuffle(stubs)
    for _ in range(repair_rounds):
        a, b = stubs[0::2], stubs[1::2]
        key = np.minimum(a, b) * n + np.maximum(a, b)
        order = np.argsort(key, kind="stable")
        ks = key[order]
        dup = np.zeros(ks.size, dtype=bool)
        dup[1:] = ks[1:] == ks[:-1]
        bad = (a == b)
        bad[order] |= dup
        if not bad.any():
            break
        bad_pairs = np.flatnonzero(bad)
        pool = np.concatenate([stubs[2 * bad_pairs], stubs[2 * bad_pairs + 1]])
        rng.shuffle(pool)
        stubs[2 * bad_pairs] = pool[:bad_pairs.size]
        stubs[2 * bad_pairs + 1] = pool[bad_pairs.size:]
    a, b = stubs[0::2], stubs[1::2]
    keep = a != b
    a, b = a[keep], b[keep]
    key = np.minimum(a, b) * n + np.maximum(a, b)
    _, first = np.unique(key, return_index=True)
    edges = np.column_stack([a[first], b[first]])
    return EdgesPayload(edges=edges, weights=np.ones(len(edges)),
                        num_nodes=n)


def conflict_dataset_from_edges(e: EdgesPayload, name: str) -> Dataset:
    """Turn an explicit conflict graph into a bipartite instance by giving
    every edge its own shared variable, so the derived conflict structure
    is exactly the input graph (partitioning benchmarks and checks)."""
    m = len(e.edges)
    ri = np.concatenate([e.edges[:, 0], e.edges[:, 1]])
    ci = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
    ptr, cols, _ = csr_from_coo(ri, ci, np.ones(2 * m), e.num_nodes, m)
    graph = graph_from_csr(ptr, cols, max(m, 1))
    return Dataset(kind="conflict", name=name, graph=graph, payload=None)


# ---------------------------------------------------------------------------
# dense-feature filtering


def filter_dense_features(dataset: Dataset, top_fraction: float):
    """Drop the ceil(top_fraction * d) highest-degree variables and every
    incidence on them.  Returns (filtered dataset, removed, remaining);
    updates may end up with empty supports.  Only row-structured kinds
    carry per-edge values and are supported here.
    """
    if not (0.0 <= top_fraction < 1.0):
        raise InputError("top_fraction must lie in [0, 1)")
    if dataset.kind not in ("least_squares", "labeled_rows"):
        raise InputError(f"cannot filter dataset of kind {dataset.kind!r}")
    g = dataset.graph
    d = g.num_variables
    k = math.ceil(top_fraction * d)
    if k == 0:
        return dataset, 0, d
    degree = np.diff(g.var_ptr)
    order = np.lexsort((np.arange(d), -degree))
    removed = order[:k]
    keep = np.ones(d, dtype=bool)
    keep[removed] = False
    new_id = np.cumsum(keep) - 1
    edge_keep = keep[g.update_vars]
    new_vars = new_id[g.update_vars[edge_keep]]
    row_idx = np.repeat(np.arange(g.num_updates), np.diff(g.update_ptr))[edge_keep]
    counts = np.bincount(row_idx, minlength=g.num_updates)
    new_ptr = np.zeros(g.num_updates + 1, np.int64)
    np.cumsum(counts, out=new_ptr[1:])
    new_graph = graph_from_csr(new_ptr, new_vars, d - k)
    if dataset.kind == "least_squares":
        p: LeastSquaresPayload = dataset.payload
        payload = LeastSquaresPayload(values=p.values[edge_keep], b=p.b)
    else:
        p2: LabeledRowsPayload = dataset.payload
        payload = LabeledRowsPayload(values=p2.values[edge_keep],
                                     labels01=p2.labels01)
    out = Dataset(kind=dataset.kind, name=f"{dataset.name}|filtered{top_fraction}",
                  graph=new_graph, payload=payload)
    return out, int(k), int(d - k)


# ---------------------------------------------------------------------------
# CLI dataset spec strings


def parse_dataset_spec(spec: str, algorithm: str | None = None) -> Dataset:
    """Build a dataset from a compact ``kind:key=value,...`` description.

    Synthetic kinds: synth-ls, synth-mc, synth-cooc, synth-powerlaw,
    synth-er, synth-regular.  File kinds: edges:PATH, ratings:PATH,
    cooc:PATH, rows:PATH.  Graph-shaped inputs (edges/er/regular) are
    adapted to the requesting algorithm's task.
    """
    kind, _, rest = spec.partition(":")
    kv = {}
    path = rest
    if "=" in rest:
        for part in rest.split(","):
            if not part:
                continue
            key, _, val = part.partition("=")
            kv[key] = val

    def geti(key, default=None):
        if key in kv:
            return int(kv[key])
        if default is None:
            raise InputError(f"dataset spec {spec!r} missing {key}=")
        return default

    def getf(key, default):
        return float(kv[key]) if key in kv else default

    if kind == "synth-ls":
        return synth_least_squares(geti("rows"), geti("cols"), geti("nnz"),
                                   seed=geti("seed", 0), noise=getf("noise", 0.1),
                                   name=spec)
    if kind == "synth-mc":
        return synth_matrix_completion(geti("rows"), geti("cols"), geti("rank"),
                                       geti("ratings"), seed=geti("seed", 0),
                                       noise=getf("noise", 0.01), name=spec)
    if kind == "synth-cooc":
        return synth_cooccurrence(geti("vocab"), geti("pairs"),
                                  seed=geti("seed", 0), name=spec)
    if kind == "synth-powerlaw":
        return synth_powerlaw_rows(geti("rows"), geti("features"), geti("nnz"),
                                   exponent=getf("exponent", 1.1),
                                   seed=geti("seed", 0), name=spec)
    if kind == "synth-headbulk":
        return synth_dense_head_rows(geti("rows"), geti("sparse"), geti("nnz"),
                                     geti("dense"), geti("perrow", 2),
                                     seed=geti("seed", 0), name=spec)
    if kind in ("synth-er", "synth-regular", "edges"):
        if kind == "synth-er":
            e = synth_er_edges(geti("n"), getf("deg", 4.0), seed=geti("seed", 0))
        elif kind == "synth-regular":
            e = synth_regular_edges(geti("n"), geti("deg"), seed=geti("seed", 0))
        else:
            e = load_edge_list(path)
        return _adapt_edges(e, spec, algorithm, b_seed=geti("seed", 0)
                            if kind != "edges" else 0)
    if kind == "ratings":
        rows, cols, vals = load_triples(path)
        return ratings_dataset(rows, cols, vals, int(rows.max()) + 1,
                               int(cols.max()) + 1, name=spec)
    if kind == "cooc":
        left, right, counts = load_triples(path)
        return cooccurrence_dataset(left, right, counts,
                                    int(max(left.max(), right.max())) + 1,
                                    name=spec)
    if kind == "rows":
        labels, rows = load_labeled_rows_file(path)
        ri = np.concatenate([np.full(len(feats), i, dtype=np.int64)
                             for i, feats in enumerate(rows)]) \
            if rows else np.empty(0, np.int64)
        ci = np.asarray([f[0] for feats in rows for f in feats], np.int64)
        vv = np.asarray([f[1] for feats in rows for f in feats], np.float64)
        d = int(ci.max()) + 1 if ci.size else 1
        ptr, cols, vals = csr_from_coo(ri, ci, vv, len(rows), d)
        return rows_dataset_from_csr(ptr, cols, vals, d, np.asarray(labels), spec)
    raise InputError(f"unknown dataset kind {kind!r} in {spec!r}")


def _adapt_edges(e: EdgesPayload, name: str, algorithm: str | None,
                 b_seed: int = 0) -> Dataset:
    if algorithm in (None, "partition", "clustering"):
        return neighborhoods_from_edges(e, name) if algorithm == "clustering" \
            else conflict_dataset_from_edges(e, name)
    if algorithm in ("ls-sgd", "saga", "svrg"):
        return least_squares_from_edges(e, name, b_seed=b_seed)
    if algorithm == "eigen-svrg":
        return eigen_from_edges(e, name)
    raise InputError(
        f"graph-shaped dataset {name!r} cannot drive algorithm {algorithm!r}")


def _csr_matvec(ptr, idx, val, x):
    out = np.zeros(ptr.size - 1)
    for i in range(ptr.size - 1):
        lo, hi = ptr[i], ptr[i + 1]
        out[i] = val[lo:hi] @ x[idx[lo:hi]]
    return out


def _uniform_supports(rng, rows, cols, nnz):
    """Row supports of exactly ``nnz`` distinct columns, vectorized with a
    resample loop for the (rare) rows that drew duplicates."""
    sup = rng.integers(0, cols, size=(rows, nnz), dtype=np.int64)
    while True:
        s = np.sort(sup, axis=1)
        bad = (np.diff(s, axis=1) == 0).any(axis=1) if nnz > 1 else np.zeros(rows, bool)
        if not bad.any():
            break
        sup[bad] = rng.integers(0, cols, size=(int(bad.sum()), nnz))
    return sup.ravel()
