"""Line-graph projection of a hypergraph and shortest-path betweenness of hyperedges."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import sparse

from .characterization import omega_purity
from .errors import LineGraphOverflow
from .hypergraph import Hypergraph
from .lexicon import word_counts


@dataclass(frozen=True)
class LineGraph:
    """Vertices are hyperedge ids; two are adjacent when the hyperedges share >= s nodes."""

    edge_ids: Tuple[int, ...]
    adjacency: sparse.csr_matrix
    s: int = 1

    @property
    def n_vertices(self) -> int:
        return len(self.edge_ids)

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    def edges(self) -> Set[Tuple[int, int]]:
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        ids = self.edge_ids
        return {tuple(sorted((ids[i], ids[j]))) for i, j in zip(coo.row, coo.col)}

    def neighbors(self, edge_id: int) -> List[int]:
        i = self.edge_ids.index(edge_id)
        row = self.adjacency.indices[self.adjacency.indptr[i]:self.adjacency.indptr[i + 1]]
        return sorted(self.edge_ids[j] for j in row)


def build_line_graph(
    h: Hypergraph,
    s: int = 1,
    max_incidence: Optional[int] = None,
    max_pairs: Optional[int] = None,
) -> LineGraph:
    """Join hyperedges through each node's incidence list (B^T B), keep pairs sharing >= s nodes.

    ``max_incidence`` caps a single node's hyperdegree and ``max_pairs`` the total
    number of incidence pairs the join would enumerate; exceeding either raises
    :class:`LineGraphOverflow`.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    hdeg = h.hyperdegrees()
    if max_incidence is not None and hdeg.size and hdeg.max() > max_incidence:
        worst = h.nodes[int(hdeg.argmax())]
        raise LineGraphOverflow(
            f"node {worst!r} belongs to {int(hdeg.max())} hyperedges (cap {max_incidence})"
        )
    if max_pairs is not None:
        pairs = int((hdeg * (hdeg - 1) // 2).sum())
        if pairs > max_pairs:
            raise LineGraphOverflow(f"incidence join would enumerate {pairs} pairs (cap {max_pairs})")
    B = h.incidence_matrix().astype(np.int32)
    shared = (B.T @ B).tocsr()
    shared.setdiag(0)
    shared.data[shared.data < s] = 0
    shared.eliminate_zeros()
    adj = sparse.csr_matrix(
        (np.ones(shared.nnz, dtype=np.float64), shared.indices, shared.indptr), shape=shared.shape
    )
    adj.sort_indices()
    return LineGraph(tuple(e.id for e in h.hyperedges), adj, s)


def _batch_dependencies(A, sources: np.ndarray, n: int) -> np.ndarray:
    """Brandes dependency sums for a batch of sources, as level-synchronous matrix products."""
    b = sources.size
    rows = np.arange(b)
    sigma = np.zeros((b, n))
    depth = np.full((b, n), -1, dtype=np.int64)
    sigma[rows, sources] = 1.0
    depth[rows, sources] = 0
    frontier = np.zeros((b, n))
    frontier[rows, sources] = 1.0
    d = 0
    while True:
        reach = np.asarray(frontier @ A)
        new = (reach > 0) & (depth < 0)
        if not new.any():
            break
        d += 1
        sigma[new] = reach[new]
        depth[new] = d
        frontier = np.where(new, sigma, 0.0)
    delta = np.zeros((b, n))
    for level in range(d, 0, -1):
        at = depth == level
        coeff = np.where(at, (1.0 + delta) / np.where(at, sigma, 1.0), 0.0)
        back = np.asarray(coeff @ A)
        prev = depth == level - 1
        delta += np.where(prev, sigma * back, 0.0)
    delta[rows, sources] = 0.0
    return delta.sum(axis=0)


def _operator(lg: LineGraph, dense_threshold: float):
    n = lg.n_vertices
    if n and lg.adjacency.nnz / (n * n) >= dense_threshold:
        return lg.adjacency.toarray()
    return lg.adjacency


def hyperedge_betweenness(
    lg: LineGraph,
    batch_size: int = 128,
    n_jobs: int = 1,
    dense_threshold: float = 0.05,
) -> Dict[int, float]:
    """Exact unnormalised betweenness of every line-graph vertex (hyperedge id -> value).

    Sources are processed in batches; batches are independent and their partial
    score vectors are summed, so ``n_jobs`` never changes the result beyond
    floating-point summation order (which is fixed here: batches reduce in order).
    """
    n = lg.n_vertices
    if n == 0:
        return {}
    A = _operator(lg, dense_threshold)
    batches = [np.arange(i, min(i + batch_size, n)) for i in range(0, n, batch_size)]
    if n_jobs > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda src: _batch_dependencies(A, src, n), batches))
    else:
        parts = [_batch_dependencies(A, src, n) for src in batches]
    total = np.zeros(n)
    for p in parts:
        total += p
    total /= 2.0  # undirected: each unordered pair was counted from both ends
    return {eid: float(v) for eid, v in zip(lg.edge_ids, total)}


def approximate_betweenness(
    lg: LineGraph,
    n_pivots: int,
    seed: int = 0,
    batch_size: int = 128,
) -> Dict[int, float]:
    """Pivot-sampling estimate: dependencies from ``n_pivots`` uniform sources, scaled by n / n_pivots.

    Unbiased for the exact unnormalised betweenness; falls back to the exact
    computation when ``n_pivots >= n``.
    """
    n = lg.n_vertices
    if n_pivots >= n:
        return hyperedge_betweenness(lg, batch_size)
    rng = np.random.default_rng(seed)
    pivots = np.sort(rng.choice(n, size=n_pivots, replace=False))
    A = _operator(lg, 0.05)
    total = np.zeros(n)
    for i in range(0, n_pivots, batch_size):
        total += _batch_dependencies(A, pivots[i:i + batch_size], n)
    total *= n / n_pivots / 2.0
    return {eid: float(v) for eid, v in zip(lg.edge_ids, total)}


def rank_hyperedges(scores: Mapping[int, float], k: Optional[int] = None) -> List[Tuple[int, float]]:
    """(id, score) by descending score, ties by ascending id; the first ``k`` entries."""
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked if k is None else ranked[:k]


def top_k_central(h: Hypergraph, s: int = 1, k: int = 50, **kwargs) -> List[Tuple[int, float]]:
    if k < 1:
        raise ValueError("k must be >= 1")
    return rank_hyperedges(hyperedge_betweenness(build_line_graph(h, s), **kwargs), k)


@dataclass(frozen=True)
class DiscussionRecord:
    hyperedge_id: int
    avg_word_count: Optional[float]
    avg_unique_word_count: Optional[float]
    avg_subjectivity: Optional[float]
    archetype_purity: Optional[float]
    empty: bool


def characterize_discussions(
    h: Hypergraph,
    top: Sequence[int],
    texts: Mapping[int, Sequence[Tuple[Hashable, str, Optional[float]]]],
    archetypes: Mapping[Hashable, str],
    average_over: str = "texts",
) -> List[DiscussionRecord]:
    """Word-count, subjectivity and archetype-purity summaries for the given hyperedges.

    ``texts`` maps hyperedge id -> [(author, text, subjectivity or None)].
    ``average_over="users"`` first averages each author's texts, then averages authors.
    Purity is taken over members that have an archetype label.
    """
    out = []
    for eid in top:
        edge = h.edge(eid)
        items = list(texts.get(eid, ()))
        labelled = {u: archetypes[u] for u in edge.members if u in archetypes}
        purity = omega_purity(list(labelled), labelled) if labelled else None
        if not items:
            out.append(DiscussionRecord(eid, None, None, None, purity, True))
            continue
        per_text = [(u, *word_counts(t), subj) for u, t, subj in items]
        if average_over == "users":
            grouped: Dict[Hashable, List] = {}
            for u, wc, uwc, subj in per_text:
                grouped.setdefault(u, []).append((wc, uwc, subj))
            units = []
            for rows in grouped.values():
                subs = [r[2] for r in rows if r[2] is not None]
                units.append((
                    float(np.mean([r[0] for r in rows])),
                    float(np.mean([r[1] for r in rows])),
                    float(np.mean(subs)) if subs else None,
                ))
        elif average_over == "texts":
            units = [(float(wc), float(uwc), subj) for _, wc, uwc, subj in per_text]
        else:
            raise ValueError(f"unknown averaging unit {average_over!r}")
        subs = [u[2] for u in units if u[2] is not None]
        out.append(DiscussionRecord(
            eid,
            float(np.mean([u[0] for u in units])),
            float(np.mean([u[1] for u in units])),
            float(np.mean(subs)) if subs else None,
            purity,
            False,
        ))
    return out
