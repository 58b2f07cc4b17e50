"""Hyperedge characterisation functions (omega): numeric, categorical and structural.

Feature values are looked up through ``values``, a mapping node -> value. Every
function treats the hyperedge as a set, so member order never matters.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputError, MissingFeature, Undefined
from .hypergraph import Hyperedge, Hypergraph

Members = Union[Hyperedge, Iterable[Hashable]]

NUMERIC_KINDS = ("mean", "median", "mode", "variance", "std", "mad", "gini")
CATEGORICAL_KINDS = ("entropy", "gini_impurity")
STRUCTURAL_KINDS = ("size", "purity", "cohesion", "interaction_potential")
KINDS = NUMERIC_KINDS + CATEGORICAL_KINDS + STRUCTURAL_KINDS


def _members(e: Members) -> List[Hashable]:
    if isinstance(e, Hyperedge):
        return list(e.members)
    return list(dict.fromkeys(e))


def _gather(e: Members, values: Mapping) -> list:
    out = []
    for u in _members(e):
        try:
            out.append(values[u])
        except KeyError:
            raise MissingFeature(f"member {u!r} has no value for the feature") from None
    return out


def _numeric(e: Members, values: Mapping) -> np.ndarray:
    arr = np.asarray(_gather(e, values), dtype=float)
    if arr.size == 0:
        raise Undefined("empty hyperedge")
    return arr


def _mean(x: np.ndarray) -> float:
    # exact for constant inputs so dispersion measures come out as 0.0
    lo, hi = x.min(), x.max()
    if lo == hi:
        return float(lo)
    return min(max(math.fsum(x.tolist()) / x.size, lo), hi)


def omega_stats(e: Members, values: Mapping, kind: str = "mean") -> float:
    """mean | median | mode | variance | std of the members' values (population moments)."""
    x = _numeric(e, values)
    if kind == "mean":
        return _mean(x)
    if kind == "median":
        return float(np.median(x))
    if kind == "mode":
        # smallest of the most frequent values
        counts = Counter(x.tolist())
        top = max(counts.values())
        return float(min(v for v, c in counts.items() if c == top))
    if kind == "variance":
        return float(np.mean((x - _mean(x)) ** 2))
    if kind == "std":
        return math.sqrt(float(np.mean((x - _mean(x)) ** 2)))
    raise ValueError(f"unknown statistics descriptor {kind!r}")


def omega_mad(e: Members, values: Mapping) -> float:
    x = _numeric(e, values)
    return float(np.abs(x - _mean(x)).sum() / x.size)


def omega_gini(e: Members, values: Mapping) -> float:
    """Gini coefficient; an all-zero hyperedge is perfectly equal (0)."""
    x = np.sort(_numeric(e, values))
    n = x.size
    mean = _mean(x)
    if mean == 0:
        return 0.0
    # sum over ordered pairs |x_u - x_v| from the sorted order statistics
    ranks = np.arange(1, n + 1)
    pair_sum = 2.0 * float(((2 * ranks - n - 1) * x).sum())
    return pair_sum / (2.0 * mean * n * n)


def _proportions(e: Members, values: Mapping) -> Tuple[Dict[Hashable, float], List[Hashable]]:
    cats = _gather(e, values)
    if not cats:
        raise Undefined("empty hyperedge")
    counts = Counter(cats)
    n = len(cats)
    return {c: k / n for c, k in counts.items()}, cats


def omega_entropy(e: Members, values: Mapping, by: str = "category") -> float:
    """Shannon entropy (natural log) of the category shares.

    ``by="node"`` sums the term once per member instead of once per category.
    """
    r, cats = _proportions(e, values)
    items = [r[c] for c in cats] if by == "node" else list(r.values())
    h = -sum(p * math.log(p) for p in items)
    return h + 0.0


def omega_gini_impurity(e: Members, values: Mapping, by: str = "category") -> float:
    r, cats = _proportions(e, values)
    items = [r[c] for c in cats] if by == "node" else list(r.values())
    return 1.0 - sum(p * p for p in items)


def omega_size(e: Members) -> int:
    return len(_members(e))


def omega_purity(e: Members, values: Mapping) -> float:
    cats = _gather(e, values)
    if not cats:
        raise Undefined("empty hyperedge")
    return max(Counter(cats).values()) / len(cats)


def similarity_abs(a: float, b: float) -> float:
    return 1.0 - abs(a - b)


def similarity_equal(a, b) -> float:
    return 1.0 if a == b else 0.0


def omega_cohesion(e: Members, values: Mapping, sim: Callable = similarity_abs) -> float:
    """Mean similarity over unordered member pairs."""
    vals = _gather(e, values)
    n = len(vals)
    if n < 2:
        raise Undefined("cohesion needs at least two members")
    total = 0.0
    for i in range(n):
        vi = vals[i]
        for j in range(i + 1, n):
            total += sim(vi, vals[j])
    return 2.0 * total / (n * (n - 1))


def omega_interaction_potential(h: Hypergraph, e: Union[Hyperedge, int], denom: str = "members") -> float:
    """External nodes reachable from e's members through other hyperedges, over |e| or |V \\ e|."""
    edge = h.edge(e) if isinstance(e, int) else e
    try:
        known = h.edge(edge.id).members == edge.members
    except KeyError:
        known = False
    if not known:
        raise InputError(f"hyperedge {edge.id} is not part of the hypergraph")
    members = edge.members
    external = set()
    for u in members:
        for eid in h.incidence(u):
            if eid == edge.id:
                continue
            external.update(h.edge(eid).members)
    external -= members
    if denom == "members":
        return len(external) / len(members)
    if denom == "complement":
        rest = h.order - len(members)
        if rest == 0:
            raise Undefined("complement mode needs nodes outside the hyperedge")
        return len(external) / rest
    raise ValueError(f"unknown denominator mode {denom!r}")


@dataclass(frozen=True)
class OmegaSpec:
    kind: str
    feature: Optional[str] = None
    options: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown omega kind {self.kind!r}")
        if self.kind not in ("size", "interaction_potential") and self.feature is None:
            raise InputError(f"omega {self.kind!r} needs a target feature")

    @property
    def label(self) -> str:
        parts = [self.kind]
        if self.feature:
            parts.append(self.feature)
        parts.extend(f"{k}={v}" for k, v in sorted(self.options.items()) if isinstance(v, (str, int, float)))
        return ":".join(parts)

    @classmethod
    def parse(cls, text: str) -> "OmegaSpec":
        """``kind[:feature][:opt=value...]``, e.g. ``gini:toxicity`` or ``interaction_potential::denom=complement``."""
        parts = text.split(":")
        kind = parts[0]
        feature = parts[1] if len(parts) > 1 and parts[1] else None
        options = {}
        for p in parts[2:]:
            if "=" not in p:
                raise InputError(f"bad omega option {p!r} in {text!r}")
            k, v = p.split("=", 1)
            options[k] = v
        return cls(kind, feature, options)


_SIMS = {"abs": similarity_abs, "equal": similarity_equal}


def evaluate(spec: OmegaSpec, h: Hypergraph, e: Hyperedge, features: Mapping[str, Mapping]) -> float:
    """Dispatch one OmegaSpec on one hyperedge; ``features`` maps feature name -> node -> value."""
    kind = spec.kind
    if kind == "size":
        return float(omega_size(e))
    if kind == "interaction_potential":
        return omega_interaction_potential(h, e, str(spec.options.get("denom", "members")))
    try:
        values = features[spec.feature]
    except KeyError:
        raise MissingFeature(f"feature {spec.feature!r} not available") from None
    if kind in ("mean", "median", "mode", "variance", "std"):
        return omega_stats(e, values, kind)
    if kind == "mad":
        return omega_mad(e, values)
    if kind == "gini":
        return omega_gini(e, values)
    if kind == "entropy":
        return omega_entropy(e, values, str(spec.options.get("by", "category")))
    if kind == "gini_impurity":
        return omega_gini_impurity(e, values, str(spec.options.get("by", "category")))
    if kind == "purity":
        return omega_purity(e, values)
    if kind == "cohesion":
        sim = spec.options.get("sim", "abs")
        return omega_cohesion(e, values, _SIMS[sim] if isinstance(sim, str) else sim)
    raise AssertionError(kind)


def evaluate_batch(
    specs: Sequence[OmegaSpec],
    h: Hypergraph,
    features: Mapping[str, Mapping],
    on_error: str = "nan",
) -> List[Tuple[int, str, float]]:
    """Rows (hyperedge id, omega label, value) for every hyperedge x spec.

    Undefined or missing-feature cases become NaN unless ``on_error="raise"``.
    """
    rows = []
    for e in h.hyperedges:
        for spec in specs:
            try:
                v = evaluate(spec, h, e, features)
            except (Undefined, MissingFeature):
                if on_error == "raise":
                    raise
                v = float("nan")
            rows.append((e.id, spec.label, v))
    return rows
