"""Month-to-month archetype transitions and their label-shuffling null model."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyInput, InputError

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence(seed, spawn_key=(replica,))"


@dataclass(frozen=True)
class ArchetypeSequence:
    user: Hashable
    steps: Tuple[Tuple[int, str], ...]

    def __post_init__(self):
        steps = tuple((int(t), a) for t, a in self.steps)
        object.__setattr__(self, "steps", steps)
        months = [t for t, _ in steps]
        if any(b <= a for a, b in zip(months, months[1:])):
            raise InputError(f"user {self.user!r}: months must be strictly increasing")


def sequences_from_assignments(assignments: Mapping[Tuple[Hashable, int], str]) -> List[ArchetypeSequence]:
    """Group {(user, month): archetype} into per-user sequences, users in sorted order."""
    by_user: Dict[Hashable, List[Tuple[int, str]]] = {}
    for (u, t), a in assignments.items():
        by_user.setdefault(u, []).append((t, a))
    return [ArchetypeSequence(u, tuple(sorted(s))) for u, s in sorted(by_user.items(), key=lambda kv: kv[0])]


class _Encoded:
    """Flat observation arrays sorted by month, plus the index pairs (t, t+1) of each user."""

    def __init__(self, seqs: Sequence[ArchetypeSequence], names: Optional[Sequence[str]] = None):
        if names is None:
            names = sorted({a for s in seqs for _, a in s.steps})
        self.names = list(names)
        code = {n: i for i, n in enumerate(self.names)}
        months, labels, src, dst = [], [], [], []
        for s in seqs:
            prev_t, prev_i = None, None
            for t, a in s.steps:
                try:
                    lab = code[a]
                except KeyError:
                    raise InputError(f"archetype {a!r} not in catalog") from None
                i = len(labels)
                months.append(t)
                labels.append(lab)
                if prev_t is not None and t == prev_t + 1:
                    src.append(prev_i)
                    dst.append(i)
                prev_t, prev_i = t, i
        order = np.argsort(np.asarray(months, dtype=np.int64), kind="stable")
        inverse = np.empty_like(order)
        inverse[order] = np.arange(order.size)
        self.months = np.asarray(months, dtype=np.int64)[order]
        self.labels = np.asarray(labels, dtype=np.int64)[order]
        self.src = inverse[np.asarray(src, dtype=np.int64)] if src else np.zeros(0, dtype=np.int64)
        self.dst = inverse[np.asarray(dst, dtype=np.int64)] if dst else np.zeros(0, dtype=np.int64)
        self.k = len(self.names)

    def counts(self, labels: np.ndarray) -> np.ndarray:
        k = self.k
        flat = np.bincount(labels[self.src] * k + labels[self.dst], minlength=k * k)
        return flat.reshape(k, k)

    def month_multisets(self, labels: np.ndarray) -> np.ndarray:
        _, mi = np.unique(self.months, return_inverse=True)
        return np.bincount(mi * self.k + labels, minlength=(mi.max() + 1) * self.k if mi.size else 0)


def _row_normalize(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), np.nan)


@dataclass
class TransitionMatrix:
    names: List[str]
    counts: np.ndarray
    probs: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        """Rows with at least one outgoing observation."""
        return self.counts.sum(axis=1) > 0

    def p(self, a: str, b: str) -> float:
        return float(self.probs[self.names.index(a), self.names.index(b)])


def observed_transitions(
    seqs: Sequence[ArchetypeSequence], names: Optional[Sequence[str]] = None
) -> TransitionMatrix:
    """P(B|A) from every adjacent-month pair (t, t+1) of every user; undefined rows are NaN."""
    enc = _Encoded(seqs, names)
    if enc.src.size == 0:
        raise EmptyInput("no adjacent-month pairs to count")
    counts = enc.counts(enc.labels)
    return TransitionMatrix(enc.names, counts, _row_normalize(counts))


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replica,))))


def shuffle_within_months(months: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Permute labels independently inside each month; ``months`` must be sorted.

    Months are contiguous runs, so each run is shuffled in place in month order.
    """
    out = labels.copy()
    cuts = np.flatnonzero(np.diff(months)) + 1
    for seg in np.split(out, cuts):
        rng.shuffle(seg)
    return out


@dataclass
class NullStats:
    names: List[str]
    samples: np.ndarray  # (n_shuffles, k, k), NaN where a shuffled row had no support
    seed: int
    n_shuffles: int

    @property
    def mean(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return _nanmean(self.samples)

    @property
    def std(self) -> np.ndarray:
        return _nanstd(self.samples)


def _nanmean(x: np.ndarray) -> np.ndarray:
    valid = ~np.isnan(x)
    n = valid.sum(axis=0)
    s = np.where(valid, x, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, s / np.maximum(n, 1), np.nan)


def _nanstd(x: np.ndarray) -> np.ndarray:
    valid = ~np.isnan(x)
    n = valid.sum(axis=0)
    m = _nanmean(x)
    dev = np.where(valid, x - m, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 1, np.sqrt((dev ** 2).sum(axis=0) / np.maximum(n - 1, 1)), np.nan)


def null_model(
    seqs: Sequence[ArchetypeSequence],
    n_shuffles: int = 500,
    seed: int = 0,
    names: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> NullStats:
    """Shuffled-copy distribution of P(B|A).

    Each copy permutes archetype labels within every month, which keeps the
    monthly label multisets and who-is-active-when intact while breaking the
    link between a user's consecutive labels. Replica ``r`` draws from its own
    stream derived from ``(seed, r)``, so results do not depend on ``n_jobs``.
    """
    if n_shuffles < 2:
        raise ValueError("n_shuffles must be >= 2")
    enc = _Encoded(seqs, names)
    if enc.src.size == 0:
        raise EmptyInput("no adjacent-month pairs to count")
    reference = enc.month_multisets(enc.labels)

    def run(replicas: Sequence[int]) -> List[Tuple[int, np.ndarray]]:
        out = []
        for r in replicas:
            lab = shuffle_within_months(enc.months, enc.labels, replica_rng(seed, r))
            if not np.array_equal(enc.month_multisets(lab), reference):
                raise AssertionError("shuffle changed a monthly label multiset")
            out.append((r, _row_normalize(enc.counts(lab))))
        return out

    samples = np.empty((n_shuffles, enc.k, enc.k))
    chunks = [range(i, n_shuffles, max(n_jobs, 1)) for i in range(max(n_jobs, 1))]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = [x for part in pool.map(run, chunks) for x in part]
    else:
        results = run(range(n_shuffles))
    for r, probs in results:
        samples[r] = probs
    return NullStats(enc.names, samples, seed, n_shuffles)


def normal_upper_p(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class TransitionRow:
    source: str
    target: str
    obs: float
    null_mean: float
    null_std: float
    z: float
    p_normal: float
    p_empirical: float
    significant: bool

    @property
    def testable(self) -> bool:
        return not math.isnan(self.z)


@dataclass
class TransitionReport:
    rows: List[TransitionRow]
    alpha: float
    seed: Optional[int] = None
    n_shuffles: Optional[int] = None
    metadata: Dict[str, object] = field(default_factory=dict)

    def get(self, source: str, target: str) -> TransitionRow:
        for r in self.rows:
            if r.source == source and r.target == target:
                return r
        raise KeyError((source, target))

    def significant(self) -> List[TransitionRow]:
        return [r for r in self.rows if r.significant]

    def significant_fraction(self) -> float:
        return len(self.significant()) / len(self.rows) if self.rows else 0.0

    def write_csv(self, path: Union[str, Path]) -> None:
        from .schemas import write_rows

        write_rows(path, "transitions", [
            {
                "from": r.source, "to": r.target, "obs": r.obs, "null_mean": r.null_mean,
                "null_std": r.null_std, "z": r.z, "p_normal": r.p_normal,
                "p_empirical": r.p_empirical, "significant": r.significant,
            }
            for r in self.rows
        ])

    def meta(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "n_shuffles": self.n_shuffles,
            "alpha": self.alpha,
            "rng": RNG_ALGORITHM,
            "p_value": "one-sided upper-tail normal from z; empirical = share of null samples >= observed",
            **self.metadata,
        }

    def write_meta(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.meta(), indent=2, sort_keys=True) + "\n")


def significance(observed: TransitionMatrix, null: NullStats, alpha: float = 0.01) -> TransitionReport:
    """z-scores and one-sided p-values for each ordered pair with a supported observed row.

    A pair is significant when p < alpha and the observed rate exceeds the null
    mean. Pairs whose null std is zero or undefined are untestable.
    """
    if list(observed.names) != list(null.names):
        raise InputError("observed and null matrices use different archetype orders")
    mean, std = null.mean, null.std
    rows = []
    k = len(observed.names)
    for i in range(k):
        if not observed.defined[i]:
            continue
        for j in range(k):
            obs = float(observed.probs[i, j])
            mu, sd = float(mean[i, j]), float(std[i, j])
            col = null.samples[:, i, j]
            col = col[~np.isnan(col)]
            p_emp = float((col >= obs).mean()) if col.size else math.nan
            if math.isnan(sd) or sd == 0.0 or math.isnan(mu):
                z = p = math.nan
                sig = False
            else:
                z = (obs - mu) / sd
                p = normal_upper_p(z)
                sig = p < alpha and obs > mu
            rows.append(TransitionRow(observed.names[i], observed.names[j], obs, mu, sd, z, p, p_emp, sig))
    return TransitionReport(rows, alpha, null.seed, null.n_shuffles)


def transition_report(
    seqs: Sequence[ArchetypeSequence],
    names: Optional[Sequence[str]] = None,
    n_shuffles: int = 500,
    seed: int = 0,
    alpha: float = 0.01,
    n_jobs: int = 1,
) -> TransitionReport:
    obs = observed_transitions(seqs, names)
    null = null_model(seqs, n_shuffles, seed, obs.names, n_jobs)
    return significance(obs, null, alpha)
