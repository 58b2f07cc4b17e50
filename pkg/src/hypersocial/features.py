"""Per-user feature vectors, min-max normalisation and the threshold labelling function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, InvalidValue, SchemaMismatch

LOW = "low"
HIGH = "high"
BINARY_LABELS = (LOW, HIGH)

_ABBREV = {LOW: "L", HIGH: "H"}
_FROM_ABBREV = {"L": LOW, "H": HIGH, "LOW": LOW, "HIGH": HIGH}


def abbreviate(label: str) -> str:
    return _ABBREV.get(label, label)


def parse_label(token: str) -> str:
    try:
        return _FROM_ABBREV[token.strip().upper()]
    except KeyError:
        raise InputError(f"unknown label {token!r}; expected H/L or high/low") from None


@dataclass(frozen=True)
class FeatureSchema:
    names: Tuple[str, ...]
    kinds: Tuple[str, ...] = ()
    ranges: Tuple[Optional[Tuple[float, float]], ...] = ()

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise SchemaMismatch(f"duplicate feature names in {names}")
        kinds = tuple(self.kinds) or ("numeric",) * len(names)
        ranges = tuple(self.ranges) or tuple((0.0, 1.0) if k == "numeric" else None for k in kinds)
        if len(kinds) != len(names) or len(ranges) != len(names):
            raise SchemaMismatch("kinds/ranges must align with names")
        for name, kind, rng in zip(names, kinds, ranges):
            if kind not in ("numeric", "categorical"):
                raise SchemaMismatch(f"feature {name!r}: unknown kind {kind!r}")
            if kind == "numeric":
                if rng is None or not all(math.isfinite(x) for x in rng) or rng[0] > rng[1]:
                    raise SchemaMismatch(f"feature {name!r}: numeric range must be a finite interval")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "ranges", ranges)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaMismatch(f"feature {name!r} not in schema {self.names}") from None

    def kind(self, name: str) -> str:
        return self.kinds[self.index(name)]

    def __len__(self) -> int:
        return len(self.names)


DEFAULT_SCHEMA = FeatureSchema(("score", "sentiment", "toxicity"))


@dataclass(frozen=True)
class FeatureVector:
    user: Hashable
    values: Tuple
    schema: FeatureSchema = DEFAULT_SCHEMA
    timestamp: Optional[int] = None

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.schema):
            raise SchemaMismatch(f"expected {len(self.schema)} values, got {len(values)}")

    def __getitem__(self, name: str):
        return self.values[self.schema.index(name)]

    def subset(self, names: Sequence[str]) -> Tuple:
        return tuple(self[n] for n in names)

    def as_dict(self) -> Dict[str, object]:
        return dict(zip(self.schema.names, self.values))


@dataclass(frozen=True)
class ThresholdVector:
    """Thresholds T over a feature subset F_A with label set L (binary by default)."""

    features: Tuple[str, ...]
    thresholds: Tuple[float, ...]
    labels: Tuple[str, ...] = BINARY_LABELS

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if len(self.features) != len(self.thresholds):
            raise SchemaMismatch("one threshold per feature required")
        if len(self.labels) < 2:
            raise InputError("label set needs at least two labels")

    @classmethod
    def uniform(cls, features: Sequence[str], t: float = 0.5) -> "ThresholdVector":
        return cls(tuple(features), (t,) * len(features))


DEFAULT_THRESHOLDS = ThresholdVector.uniform(DEFAULT_SCHEMA.names, 0.5)


def normalize(values: Iterable[float], method: str = "minmax") -> List[float]:
    """Min-max rescale to [0, 1]; a constant input maps to 0.5 everywhere."""
    if method != "minmax":
        raise ValueError(f"unsupported normalisation {method!r}")
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise InvalidValue("normalize needs at least one value")
    if not np.all(np.isfinite(arr)):
        raise InvalidValue("normalize received NaN or infinite values")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return [0.5] * arr.size
    return list((arr - lo) / (hi - lo))


@dataclass(frozen=True)
class MinMaxScaler:
    """Min-max bounds fitted once over a whole population, reusable across snapshots."""

    lows: Tuple[float, ...]
    highs: Tuple[float, ...]

    @classmethod
    def fit(cls, rows: np.ndarray) -> "MinMaxScaler":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise InvalidValue("scaler needs a non-empty 2-D array")
        if not np.all(np.isfinite(rows)):
            raise InvalidValue("non-finite feature values")
        return cls(tuple(rows.min(axis=0)), tuple(rows.max(axis=0)))

    def transform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        lo = np.asarray(self.lows)
        hi = np.asarray(self.highs)
        span = hi - lo
        out = np.full(rows.shape, 0.5)
        ok = span > 0
        out[:, ok] = (rows[:, ok] - lo[ok]) / span[ok]
        return out


def label(value: float, threshold: float) -> str:
    """Binary labelling function: ``low`` iff value <= threshold."""
    return LOW if value <= threshold else HIGH


def labeled_vector(fv: FeatureVector, tv: ThresholdVector) -> Tuple[str, ...]:
    return tuple(label(fv[f], t) for f, t in zip(tv.features, tv.thresholds))


def label_matrix(values: np.ndarray, thresholds: Sequence[float]) -> np.ndarray:
    """Vectorised labelling: boolean array, True where the label is ``high``."""
    return np.asarray(values, dtype=float) > np.asarray(thresholds, dtype=float)


@dataclass
class FeatureTable:
    """Normalised per-user feature rows, keyed by (user, timestamp); timestamp None = whole period."""

    schema: FeatureSchema
    rows: Dict[Tuple[Hashable, Optional[int]], Tuple] = field(default_factory=dict)
    extras: Dict[Tuple[Hashable, Optional[int]], Dict[str, float]] = field(default_factory=dict)

    def vector(self, user, timestamp=None) -> FeatureVector:
        return FeatureVector(user, self.rows[(user, timestamp)], self.schema, timestamp)

    def vectors(self, timestamp=None) -> List[FeatureVector]:
        return [
            FeatureVector(u, vals, self.schema, t)
            for (u, t), vals in self.rows.items()
            if t == timestamp
        ]

    def users(self, timestamp=None) -> List[Hashable]:
        return [u for (u, t) in self.rows if t == timestamp]

    def timestamps(self) -> List[int]:
        return sorted({t for (_, t) in self.rows if t is not None})

    def __contains__(self, key) -> bool:
        return key in self.rows

    def __len__(self) -> int:
        return len(self.rows)


def mean_rows(rows: Mapping[Hashable, List[Tuple[Sequence[float], float]]]) -> Dict[Hashable, Tuple[float, ...]]:
    """Weighted mean of value rows per key; each entry is (values, weight)."""
    out = {}
    for key, items in rows.items():
        vals = np.array([v for v, _ in items], dtype=float)
        w = np.array([wt for _, wt in items], dtype=float)
        if w.sum() <= 0:
            w = np.ones_like(w)
        out[key] = tuple(float(x) for x in (vals * w[:, None]).sum(axis=0) / w.sum())
    return out
