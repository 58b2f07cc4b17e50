"""Deterministic synthetic datasets with planted archetypes and transition structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .archetypes import ArchetypeCatalog, default_catalog
from .errors import SpecError
from .features import HIGH
from .ingest import write_texts, write_threads, write_users
from .lexicon import FAMILIES, Lexicon, write_lexicon
from .transitions import ArchetypeSequence

# raw (un-normalised) ranges per feature; values are affine images of [0, 1]
RAW_RANGES = {"score": (-20.0, 80.0), "sentiment": (-1.0, 1.0), "toxicity": (0.0, 1.0)}

_POSITIVE = ["trust", "joy", "hope", "friend", "thanks", "great", "love", "proud"]
_NEGATIVE = ["anger", "fear", "hate", "disgust", "sad", "awful", "corrupt", "betray"]
_FILLER = ["the", "a", "we", "they", "this", "that", "is", "are", "news", "vote", "post", "today", "people"]


@dataclass
class SynthSpec:
    n_users: int = 1000
    months: int = 12
    year: int = 2023
    n_threads: int = 10000
    community: str = "c/Synthetic"
    mixture: Optional[Sequence[float]] = None  # over catalog order; uniform when None
    activity: float = 1.0  # probability a user is active in a given month
    size_p: float = 0.25  # geometric tail of thread sizes above 2
    max_size: int = 60
    planted: Mapping[Tuple[str, str], float] = field(default_factory=dict)  # (A, B) -> boost of P(B|A)
    texts: bool = True
    seed: int = 0

    def validate(self, catalog: ArchetypeCatalog) -> np.ndarray:
        if self.n_users < 1 or self.months < 1:
            raise SpecError("need at least one user and one month")
        if not 0 < self.activity <= 1:
            raise SpecError("activity must lie in (0, 1]")
        if self.n_threads < 0 or not 0 < self.size_p <= 1 or self.max_size < 2:
            raise SpecError("invalid thread size distribution")
        if self.n_threads and self.n_users < 2:
            raise SpecError("threads need at least two users")
        k = len(catalog)
        mix = np.full(k, 1.0 / k) if self.mixture is None else np.asarray(self.mixture, dtype=float)
        if mix.shape != (k,) or np.any(mix < 0) or mix.sum() <= 0:
            raise SpecError(f"mixture must be {k} non-negative weights with positive sum")
        mix = mix / mix.sum()
        for (a, b), boost in self.planted.items():
            if a not in catalog.names or b not in catalog.names:
                raise SpecError(f"planted pair {(a, b)} not in catalog")
            if not 0 <= mix[catalog.index(b)] + boost <= 1:
                raise SpecError(f"planted boost {boost} pushes P({b}|{a}) outside [0, 1]")
        return mix


def transition_kernel(spec: SynthSpec, catalog: ArchetypeCatalog, mix: np.ndarray) -> np.ndarray:
    """Row-stochastic matrix: every row is the mixture, except planted rows where B gains ``boost``
    and the remaining mass is rescaled proportionally."""
    k = len(catalog)
    P = np.tile(mix, (k, 1))
    for (a, b), boost in spec.planted.items():
        i, j = catalog.index(a), catalog.index(b)
        target = mix[j] + boost
        rest = 1.0 - mix[j]
        row = mix * ((1.0 - target) / rest) if rest > 0 else np.zeros(k)
        row[j] = target
        P[i] = row
    return P


@dataclass
class SynthLabels:
    names: List[str]
    labels: np.ndarray  # (n_users, months) catalog index
    active: np.ndarray  # (n_users, months) bool

    def sequences(self) -> List[ArchetypeSequence]:
        seqs = []
        for u in range(self.labels.shape[0]):
            steps = tuple((t + 1, self.names[self.labels[u, t]]) for t in np.flatnonzero(self.active[u]))
            if steps:
                seqs.append(ArchetypeSequence(u, steps))
        return seqs


def synth_labels(spec: SynthSpec, catalog: Optional[ArchetypeCatalog] = None) -> SynthLabels:
    """Latent monthly archetype chain per user, drawn from the (possibly planted) kernel."""
    catalog = catalog or default_catalog()
    mix = spec.validate(catalog)
    P = transition_kernel(spec, catalog, mix)
    rng = np.random.default_rng(spec.seed)
    k = len(catalog)
    labels = np.empty((spec.n_users, spec.months), dtype=np.int64)
    labels[:, 0] = rng.choice(k, size=spec.n_users, p=mix)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    for t in range(1, spec.months):
        draws = rng.random(spec.n_users)
        rows = cum[labels[:, t - 1]]
        labels[:, t] = (draws[:, None] > rows).sum(axis=1)
    active = rng.random((spec.n_users, spec.months)) < spec.activity
    return SynthLabels(catalog.names, labels, active)


def _feature_values(labels: np.ndarray, catalog: ArchetypeCatalog, rng: np.random.Generator) -> np.ndarray:
    """Normalised-space values consistent with each row's archetype, margin 0.05 around 0.5."""
    p = len(catalog.features)
    high = np.array([[l == HIGH for l in a.labels] for a in catalog.archetypes])[labels]
    u = rng.random((labels.size, p))
    vals = np.where(high, 0.55 + 0.45 * u, 0.45 * u)
    # pin the population extremes so min-max normalisation is the identity
    for j in range(p):
        col = vals[:, j]
        if (~high[:, j]).any():
            col[np.flatnonzero(~high[:, j])[np.argmin(col[~high[:, j]])]] = 0.0
        if high[:, j].any():
            col[np.flatnonzero(high[:, j])[np.argmax(col[high[:, j]])]] = 1.0
    return vals


def synthetic_lexicons() -> Dict[str, Lexicon]:
    emo = {}
    dims = FAMILIES["emotion"]
    for w in _POSITIVE:
        emo[w] = tuple(0.9 if d in ("joy", "trust") else (0.5 if d == "anticipation" else 0.0) for d in dims)
    for w in _NEGATIVE:
        emo[w] = tuple(0.9 if d in ("anger", "disgust") else (0.6 if d in ("fear", "sadness") else 0.0) for d in dims)
    pad = {w: (0.9, 0.4, 0.6) for w in _POSITIVE}
    pad.update({w: (0.1, 0.8, 0.4) for w in _NEGATIVE})
    moral = {w: (0.5, 0.4, 0.7, 0.3, 0.2) for w in _POSITIVE}
    moral.update({w: (-0.6, -0.5, -0.4, -0.3, -0.7) for w in _NEGATIVE})
    return {
        "emotion": Lexicon("synthetic-emotion", "emotion", dims, emo),
        "pad": Lexicon("synthetic-pad", "pad", FAMILIES["pad"], pad),
        "moral": Lexicon("synthetic-moral", "moral", FAMILIES["moral"], moral),
    }


@dataclass
class SynthPaths:
    threads: Path
    users: Path
    texts: Optional[Path]
    lexicons: Dict[str, Path]
    truth: SynthLabels


def synth_fixture(
    spec: SynthSpec,
    out_dir: Union[str, Path],
    catalog: Optional[ArchetypeCatalog] = None,
) -> SynthPaths:
    """Write threads.csv, users.csv, texts.csv and three toy lexicons; byte-identical per seed."""
    catalog = catalog or default_catalog()
    if tuple(catalog.features) != tuple(RAW_RANGES):
        raise SpecError(f"fixture generator supports features {tuple(RAW_RANGES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth = synth_labels(spec, catalog)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1,)))
    names = [f"u{u:05d}" for u in range(spec.n_users)]

    obs_user, obs_month = np.nonzero(truth.active)
    vals = _feature_values(truth.labels[obs_user, obs_month], catalog, rng)
    lo = np.array([RAW_RANGES[f][0] for f in catalog.features])
    hi = np.array([RAW_RANGES[f][1] for f in catalog.features])
    raw = lo + vals * (hi - lo)
    order = np.lexsort((obs_month, obs_user))
    write_users(out / "users.csv", (
        (names[obs_user[i]], spec.year, int(obs_month[i]) + 1, raw[i]) for i in order
    ), catalog.features)

    propensity = rng.pareto(2.0, spec.n_users) + 1.0
    sentiment_high = np.array([a.labels[catalog.features.index("sentiment")] == HIGH for a in catalog.archetypes])
    per_month = np.full(spec.months, spec.n_threads // spec.months)
    per_month[: spec.n_threads % spec.months] += 1
    threads, texts = [], []
    counter = 0
    for t in range(spec.months):
        active = np.flatnonzero(truth.active[:, t])
        if active.size < 2:
            if per_month[t]:
                raise SpecError(f"month {t + 1} has fewer than two active users")
            continue
        w = propensity[active] / propensity[active].sum()
        cap = min(spec.max_size, active.size)
        sizes = np.minimum(2 + rng.geometric(spec.size_p, per_month[t]) - 1, cap)
        for size in sizes:
            members = np.sort(rng.choice(active, size=int(size), replace=False, p=w))
            key = f"t{counter:06d}"
            counter += 1
            threads.append((key, spec.community, spec.year, t + 1, [names[u] for u in members]))
            if spec.texts:
                for u in members:
                    positive = sentiment_high[truth.labels[u, t]]
                    pool = _POSITIVE if positive else _NEGATIVE
                    n_words = int(rng.integers(3, 16))
                    picks = rng.random(n_words) < 0.3
                    words = [
                        pool[rng.integers(len(pool))] if pk else _FILLER[rng.integers(len(_FILLER))]
                        for pk in picks
                    ]
                    texts.append((key, names[u], " ".join(words), round(float(rng.random()), 6)))
    write_threads(out / "threads.csv", threads)
    text_path = None
    if spec.texts:
        text_path = out / "texts.csv"
        write_texts(text_path, texts)
    lex_paths = {}
    for fam, lex in synthetic_lexicons().items():
        p = out / f"lexicon_{fam}.tsv"
        write_lexicon(lex, p)
        lex_paths[fam] = p
    return SynthPaths(out / "threads.csv", out / "users.csv", text_path, lex_paths, truth)
