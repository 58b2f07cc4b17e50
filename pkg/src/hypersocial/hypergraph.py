"""Immutable hypergraph with an incidence index, basic metrics and snapshot series.

Nodes are opaque hashables (dense ints after interning at ingestion). A hyperedge
is a set of nodes; duplicates inside one raw member list collapse.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import EmptyInput, InputError, NodeNotFound

NodeId = Hashable


@dataclass(frozen=True)
class Hyperedge:
    id: int
    members: frozenset
    community: Optional[str] = None
    year: Optional[int] = None
    month: Optional[int] = None
    key: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise InputError(f"hyperedge {self.id} has no members")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members

    def __iter__(self):
        return iter(self.members)


class Interner:
    """Bijection between external identifiers (e.g. username hashes) and dense ints."""

    def __init__(self, names: Iterable[str] = ()):
        self._ids: Dict[str, int] = {}
        self._names: List[str] = []
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        i = self._ids.get(name)
        if i is None:
            i = len(self._names)
            self._ids[name] = i
            self._names.append(name)
        return i

    def get(self, name: str) -> Optional[int]:
        return self._ids.get(name)

    def lookup(self, i: int) -> str:
        return self._names[i]

    def __contains__(self, name) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def names(self) -> List[str]:
        return list(self._names)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    m: int
    max_edge_size: int
    mean_hyperdegree: float
    mean_degree: float


class Hypergraph:
    """H = (V, E) with E_v available in O(1) through the incidence index.

    ``hyperedges`` may be :class:`Hyperedge` instances or plain member iterables
    (ids are then assigned by position). Extra isolated ``nodes`` are allowed.
    """

    def __init__(self, hyperedges: Iterable = (), nodes: Iterable[NodeId] = ()):
        edges: List[Hyperedge] = []
        for pos, e in enumerate(hyperedges):
            edges.append(e if isinstance(e, Hyperedge) else Hyperedge(pos, frozenset(e)))
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate hyperedge ids")
        self._edges: Tuple[Hyperedge, ...] = tuple(edges)
        self._pos: Dict[int, int] = {e.id: p for p, e in enumerate(edges)}

        incidence: Dict[NodeId, List[int]] = {v: [] for v in nodes}
        for e in edges:
            for v in e.members:
                incidence.setdefault(v, []).append(e.id)
        self._incidence: Dict[NodeId, Tuple[int, ...]] = {v: tuple(l) for v, l in incidence.items()}
        try:
            self._nodes: Tuple[NodeId, ...] = tuple(sorted(self._incidence))
        except TypeError:
            self._nodes = tuple(sorted(self._incidence, key=repr))
        self._node_pos: Dict[NodeId, int] = {v: i for i, v in enumerate(self._nodes)}
        self._B: Optional[sparse.csr_matrix] = None

    # -- basic accessors -------------------------------------------------

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._nodes

    @property
    def hyperedges(self) -> Tuple[Hyperedge, ...]:
        return self._edges

    @property
    def order(self) -> int:
        return len(self._nodes)

    @property
    def size(self) -> int:
        return len(self._edges)

    def __len__(self) -> int:
        return len(self._edges)

    def __iter__(self) -> Iterator[Hyperedge]:
        return iter(self._edges)

    def __contains__(self, v) -> bool:
        return v in self._incidence

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.order}, m={self.size})"

    def edge(self, edge_id: int) -> Hyperedge:
        try:
            return self._edges[self._pos[edge_id]]
        except KeyError:
            raise KeyError(f"unknown hyperedge id {edge_id}") from None

    def incidence(self, v: NodeId) -> Tuple[int, ...]:
        """Ids of the hyperedges containing ``v`` (E_v)."""
        try:
            return self._incidence[v]
        except KeyError:
            raise NodeNotFound(v) from None

    def node_index(self, v: NodeId) -> int:
        return self._node_pos[v]

    def edge_index(self, edge_id: int) -> int:
        return self._pos[edge_id]

    def neighbors(self, v: NodeId, exclude_edge: Optional[int] = None) -> set:
        out = set()
        for eid in self.incidence(v):
            if eid != exclude_edge:
                out.update(self.edge(eid).members)
        out.discard(v)
        return out

    # -- metrics ---------------------------------------------------------

    def degree(self, v: NodeId) -> int:
        """Number of distinct co-members of ``v`` across all its hyperedges."""
        return len(self.neighbors(v))

    def hyperdegree(self, v: NodeId) -> int:
        return len(self.incidence(v))

    def incidence_matrix(self) -> sparse.csr_matrix:
        """Boolean node x hyperedge matrix, rows in ``nodes`` order, columns in hyperedge order."""
        if self._B is None:
            rows, cols = [], []
            for j, e in enumerate(self._edges):
                for v in e.members:
                    rows.append(self._node_pos[v])
                    cols.append(j)
            data = np.ones(len(rows), dtype=bool)
            self._B = sparse.csr_matrix(
                (data, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
                shape=(self.order, self.size),
                dtype=bool,
            )
        return self._B

    def hyperdegrees(self) -> np.ndarray:
        return np.array([len(self._incidence[v]) for v in self._nodes], dtype=np.int64)

    def degrees(self, block: int = 2048) -> np.ndarray:
        """Unique-neighbour counts for every node, computed blockwise as nnz(B B^T) - 1."""
        B = self.incidence_matrix()
        Bt = B.T.tocsr()
        out = np.zeros(self.order, dtype=np.int64)
        for start in range(0, self.order, block):
            stop = min(start + block, self.order)
            prod = B[start:stop] @ Bt
            counts = np.diff(prod.indptr)
            # isolated nodes have no diagonal entry
            hdeg = np.diff(B.indptr[start:stop + 1])
            out[start:stop] = counts - (hdeg > 0)
        return out

    def edge_sizes(self) -> np.ndarray:
        return np.array([len(e) for e in self._edges], dtype=np.int64)

    def summary_stats(self) -> SummaryStats:
        if self.order == 0 or self.size == 0:
            raise EmptyInput("summary statistics need a non-empty hypergraph")
        return SummaryStats(
            n=self.order,
            m=self.size,
            max_edge_size=int(self.edge_sizes().max()),
            mean_hyperdegree=float(self.hyperdegrees().mean()),
            mean_degree=float(self.degrees().mean()),
        )

    def distributions(self) -> Tuple[Dict[int, int], Dict[int, int]]:
        """(hyperdegree histogram, hyperedge-size histogram) as exact integer counts."""
        if self.order == 0 or self.size == 0:
            raise EmptyInput("distributions need a non-empty hypergraph")
        hdeg = Counter(int(x) for x in self.hyperdegrees())
        sizes = Counter(int(x) for x in self.edge_sizes())
        return dict(sorted(hdeg.items())), dict(sorted(sizes.items()))

    def filter_min_size(self, k: int) -> "Hypergraph":
        """Keep hyperedges with at least ``k`` members; nodes left without incidences go."""
        if k < 1:
            raise ValueError("k must be >= 1")
        return Hypergraph(e for e in self._edges if len(e) >= k)

    def restrict(self, edge_ids: Iterable[int]) -> "Hypergraph":
        keep = set(edge_ids)
        return Hypergraph(e for e in self._edges if e.id in keep)


def degree(h: Hypergraph, v: NodeId) -> int:
    return h.degree(v)


def hyperdegree(h: Hypergraph, v: NodeId) -> int:
    return h.hyperdegree(v)


def summary_stats(h: Hypergraph) -> SummaryStats:
    return h.summary_stats()


def distributions(h: Hypergraph) -> Tuple[Dict[int, int], Dict[int, int]]:
    return h.distributions()


def filter_min_size(h: Hypergraph, k: int) -> Hypergraph:
    return h.filter_min_size(k)


def jaccard_overlap(a: Iterable, b: Iterable) -> float:
    """|a & b| / |a | b|; two empty sets compare as identical (1.0)."""
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def tail_fractions(size_hist: Mapping[int, int], cutoffs: Sequence[int] = (5, 10, 50)) -> Dict[int, float]:
    """Fraction of hyperedges with size >= each cutoff."""
    total = sum(size_hist.values())
    if total == 0:
        raise EmptyInput("empty size histogram")
    return {c: sum(n for s, n in size_hist.items() if s >= c) / total for c in cutoffs}


@dataclass
class SnapshotSeries:
    """Monthly hypergraphs H_1..H_T plus the optional aggregate H."""

    timestamps: List[int]
    snapshots: List[Hypergraph]
    periods: List[Tuple[int, int]] = field(default_factory=list)
    aggregate: Optional[Hypergraph] = None
    interner: Optional[Interner] = None

    def __post_init__(self):
        if len(self.timestamps) != len(self.snapshots):
            raise InputError("timestamps and snapshots differ in length")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise InputError("snapshot timestamps must be strictly increasing")
        if self.periods and len(self.periods) != len(self.timestamps):
            raise InputError("periods and timestamps differ in length")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Tuple[int, Hypergraph]]:
        return iter(zip(self.timestamps, self.snapshots))

    def __getitem__(self, t: int) -> Hypergraph:
        return self.snapshots[self.timestamps.index(t)]

    def adjacent_jaccard(self) -> List[Optional[float]]:
        """Node-set Jaccard between t and t+1; the last timestamp has no successor (None)."""
        out: List[Optional[float]] = []
        for a, b in zip(self.snapshots, self.snapshots[1:]):
            out.append(jaccard_overlap(a.nodes, b.nodes))
        if self.snapshots:
            out.append(None)
        return out


def toy_hypergraph() -> Hypergraph:
    """Toy hypergraph: {A,B,C,D}, {C,E}, {D,E}, {D,F}, {E,F} with ids 0..4."""
    return Hypergraph([
        {"A", "B", "C", "D"},
        {"C", "E"},
        {"D", "E"},
        {"D", "F"},
        {"E", "F"},
    ])
