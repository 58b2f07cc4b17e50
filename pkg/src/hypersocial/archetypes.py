"""Archetype catalogues, assignment, distance matching and typicality ranking."""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputError, InvalidValue, NoMatchingArchetype, PrototypeUnavailable, SchemaMismatch
from .features import (
    BINARY_LABELS,
    DEFAULT_THRESHOLDS,
    HIGH,
    LOW,
    FeatureVector,
    ThresholdVector,
    abbreviate,
    labeled_vector,
    parse_label,
)


@dataclass(frozen=True)
class Archetype:
    name: str
    features: Tuple[str, ...]
    labels: Tuple[str, ...]
    prototype: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.features):
            raise SchemaMismatch(f"archetype {self.name!r}: label tuple length != feature count")
        if self.prototype is not None:
            proto = tuple(float(x) for x in self.prototype)
            if len(proto) != len(self.features):
                raise SchemaMismatch(f"archetype {self.name!r}: prototype length != feature count")
            object.__setattr__(self, "prototype", proto)

    @property
    def code(self) -> str:
        return "".join(abbreviate(l) for l in self.labels)

    def corner(self) -> Tuple[float, ...]:
        """Extremal feature corner: 1 for high-labelled features, 0 for low ones."""
        return tuple(1.0 if l == HIGH else 0.0 for l in self.labels)


class ArchetypeCatalog:
    def __init__(self, archetypes: Sequence[Archetype], exhaustive: bool = True):
        archetypes = list(archetypes)
        if not archetypes:
            raise InputError("empty archetype catalog")
        features = archetypes[0].features
        names = [a.name for a in archetypes]
        if len(set(names)) != len(names):
            raise InputError("archetype names must be unique")
        for a in archetypes:
            if a.features != features:
                raise SchemaMismatch("all archetypes in a catalog must share one feature subset")
        tuples = [a.labels for a in archetypes]
        if len(set(tuples)) != len(tuples):
            raise InputError("archetype label tuples must be pairwise distinct")
        self.archetypes: Tuple[Archetype, ...] = tuple(archetypes)
        self.features: Tuple[str, ...] = tuple(features)
        self._by_labels = {a.labels: a for a in archetypes}
        self._by_name = {a.name: a for a in archetypes}
        if exhaustive:
            label_set = sorted({l for t in tuples for l in t}) or list(BINARY_LABELS)
            if len(label_set) < 2:
                label_set = list(BINARY_LABELS)
            expected = len(label_set) ** len(features)
            if len(tuples) != expected:
                raise InputError(
                    f"catalog declared exhaustive but has {len(tuples)} of {expected} label combinations"
                )
        self.exhaustive = exhaustive

    def __iter__(self):
        return iter(self.archetypes)

    def __len__(self) -> int:
        return len(self.archetypes)

    def __getitem__(self, name: str) -> Archetype:
        return self._by_name[name]

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.archetypes]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def lookup(self, labels: Tuple[str, ...]) -> Archetype:
        try:
            return self._by_labels[tuple(labels)]
        except KeyError:
            raise NoMatchingArchetype(f"no archetype with labels {labels}") from None

    def code_table(self) -> np.ndarray:
        """Index array mapping a packed high/low bit code (first feature = MSB) to catalog position, -1 when absent."""
        p = len(self.features)
        table = np.full(2 ** p, -1, dtype=np.int64)
        for i, a in enumerate(self.archetypes):
            if set(a.labels) <= {LOW, HIGH}:
                code = 0
                for l in a.labels:
                    code = (code << 1) | (l == HIGH)
                table[code] = i
        return table

    @classmethod
    def from_config(cls, source: Union[str, Path, Mapping]) -> "ArchetypeCatalog":
        """Load ``{"features": [...], "archetypes": [{"name", "labels": "HHL", "prototype"?}]}``."""
        if isinstance(source, Mapping):
            cfg = source
        else:
            cfg = json.loads(Path(source).read_text())
        try:
            features = tuple(cfg["features"])
            entries = cfg["archetypes"]
        except KeyError as exc:
            raise InputError(f"catalog config missing key {exc}") from None
        archetypes = []
        for entry in entries:
            raw = entry["labels"]
            tokens = raw.split(",") if isinstance(raw, str) and "," in raw else list(raw)
            archetypes.append(Archetype(
                entry["name"], features, tuple(parse_label(t) for t in tokens), entry.get("prototype")
            ))
        return cls(archetypes, exhaustive=cfg.get("exhaustive", True))

    def to_config(self) -> dict:
        return {
            "features": list(self.features),
            "exhaustive": self.exhaustive,
            "archetypes": [
                {"name": a.name, "labels": a.code, **({"prototype": list(a.prototype)} if a.prototype else {})}
                for a in self.archetypes
            ],
        }


_TABLE2 = [
    ("Community Hero", "HHL"),
    ("Controversial Star", "HHH"),
    ("Respected Critic", "HLL"),
    ("Infamous Celebrity", "HLH"),
    ("Benevolent Underdog", "LHL"),
    ("Positive Provoker", "LHH"),
    ("Quiet Critic", "LLL"),
    ("Malcontent", "LLH"),
]

DEFAULT_FEATURES = ("score", "sentiment", "toxicity")


def default_catalog() -> ArchetypeCatalog:
    """The eight score/sentiment/toxicity archetypes, in their canonical order."""
    return ArchetypeCatalog([
        Archetype(name, DEFAULT_FEATURES, tuple(parse_label(c) for c in code))
        for name, code in _TABLE2
    ])


def assign(fv: FeatureVector, catalog: ArchetypeCatalog, tv: ThresholdVector = DEFAULT_THRESHOLDS) -> Archetype:
    if tuple(tv.features) != catalog.features:
        raise SchemaMismatch(f"thresholds over {tv.features} but catalog over {catalog.features}")
    return catalog.lookup(labeled_vector(fv, tv))


def assign_codes(values: np.ndarray, catalog: ArchetypeCatalog, thresholds: Sequence[float]) -> np.ndarray:
    """Vectorised assign over an (n, p) array of normalised values; returns catalog indices."""
    values = np.asarray(values, dtype=float)
    high = values > np.asarray(thresholds, dtype=float)
    weights = 1 << np.arange(high.shape[1] - 1, -1, -1)
    codes = (high * weights).sum(axis=1)
    idx = catalog.code_table()[codes]
    if np.any(idx < 0):
        raise NoMatchingArchetype("some label tuples have no archetype in the catalog")
    return idx


# -- distances -----------------------------------------------------------------

def euclidean(x: Sequence[float], y: Sequence[float]) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))


def cosine_distance(x: Sequence[float], y: Sequence[float]) -> float:
    nx = math.sqrt(sum(a * a for a in x))
    ny = math.sqrt(sum(b * b for b in y))
    if nx == 0 or ny == 0:
        return 0.0 if nx == ny else 1.0
    return 1.0 - sum(a * b for a, b in zip(x, y)) / (nx * ny)


def max_abs(x: Sequence[float], y: Sequence[float]) -> float:
    return max(abs(a - b) for a, b in zip(x, y))


DISTANCES: Dict[str, Callable[[Sequence[float], Sequence[float]], float]] = {
    "euclidean": euclidean,
    "cosine": cosine_distance,
    "max_abs": max_abs,
}


def match_by_distance(
    fv: FeatureVector,
    a: Archetype,
    d: Union[str, Callable] = "euclidean",
    eps: float = 0.0,
) -> bool:
    if a.prototype is None:
        raise PrototypeUnavailable(f"archetype {a.name!r} has no prototype values")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    dist = DISTANCES[d] if isinstance(d, str) else d
    x = fv.subset(a.features)
    if eps == 0:
        # exact equality, immune to rounding in the distance function
        return tuple(float(v) for v in x) == a.prototype
    return dist(x, a.prototype) <= eps


# -- typicality ----------------------------------------------------------------

def _checked_values(fv: FeatureVector, a: Archetype) -> Tuple[float, ...]:
    vals = tuple(float(v) for v in fv.subset(a.features))
    for name, v in zip(a.features, vals):
        if not (0.0 <= v <= 1.0) or math.isnan(v):
            raise InvalidValue(f"feature {name!r}={v} is not normalised to [0, 1]")
    return vals


def typicality(fv: FeatureVector, a: Archetype, rule: str = "contribution") -> float:
    """How representative ``fv`` is of ``a``.

    ``contribution`` multiplies f(u) for high-labelled features and 1 - f(u) for
    low-labelled ones, so the archetype's extremal corner scores exactly 1.
    ``literal`` is the signed product prod(alpha_f * f(u)) with alpha = +1/-1.
    """
    vals = _checked_values(fv, a)
    out = 1.0
    if rule == "contribution":
        for v, l in zip(vals, a.labels):
            out *= v if l == HIGH else 1.0 - v
    elif rule == "literal":
        for v, l in zip(vals, a.labels):
            out *= v if l == HIGH else -v
    else:
        raise ValueError(f"unknown typicality rule {rule!r}")
    return out


def typicality_array(values: np.ndarray, a: Archetype) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any((values < 0) | (values > 1)) or np.any(np.isnan(values)):
        raise InvalidValue("typicality needs values normalised to [0, 1]")
    high = np.array([l == HIGH for l in a.labels])
    contrib = np.where(high, values, 1.0 - values)
    return contrib.prod(axis=1)


@dataclass(frozen=True)
class TypicalityScore:
    user: Hashable
    archetype: str
    value: float


class Ranking(NamedTuple):
    scores: List[TypicalityScore]
    short: bool


def top_k_typical(users: Iterable[FeatureVector], a: Archetype, k: int = 10) -> Ranking:
    """k most typical members, descending; ties broken by ascending user id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [TypicalityScore(fv.user, a.name, typicality(fv, a)) for fv in users]
    scored.sort(key=lambda s: (-s.value, s.user))
    return Ranking(scored[:k], len(scored) < k)


def archetype_census(
    assignments: Union[Mapping[Hashable, Union[Archetype, str]], Iterable[Union[Archetype, str]]],
    catalog: Optional[ArchetypeCatalog] = None,
) -> Dict[str, int]:
    """Members per archetype; catalog entries with no members are listed with 0."""
    values = assignments.values() if isinstance(assignments, Mapping) else assignments
    counts = Counter(v.name if isinstance(v, Archetype) else v for v in values)
    if catalog is None:
        return dict(counts)
    out = {name: counts.pop(name, 0) for name in catalog.names}
    if counts:
        raise NoMatchingArchetype(f"assignments outside catalog: {sorted(counts)}")
    return out


def all_label_tuples(p: int, labels: Sequence[str] = BINARY_LABELS) -> List[Tuple[str, ...]]:
    return list(itertools.product(labels, repeat=p))
