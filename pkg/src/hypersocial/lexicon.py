"""Lexicon scoring of user texts: Plutchik emotions, PAD and moral foundations.

Lexicons live in external TSV files (``term<TAB>dim1...dimd``); nothing is bundled.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyInput, InputError, SchemaMismatch

FAMILIES: Dict[str, Tuple[str, ...]] = {
    "emotion": ("anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"),
    "pad": ("valence", "arousal", "dominance"),
    "moral": ("care", "fairness", "loyalty", "authority", "sanctity"),
}

_DOMAINS = {"emotion": (0.0, 1.0), "pad": (-math.inf, math.inf), "moral": (-1.0, 1.0)}

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercased alphanumeric runs; every other character separates tokens."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Lexicon:
    name: str
    family: str
    dimensions: Tuple[str, ...]
    entries: Mapping[str, Tuple[float, ...]]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SchemaMismatch(f"unknown lexicon family {self.family!r}")
        if len(self.dimensions) != len(FAMILIES[self.family]):
            raise SchemaMismatch(
                f"{self.family} lexicon needs {len(FAMILIES[self.family])} dimensions, got {len(self.dimensions)}"
            )
        lo, hi = _DOMAINS[self.family]
        for term, scores in self.entries.items():
            if term != term.lower():
                raise SchemaMismatch(f"lexicon term {term!r} is not lowercase")
            if len(scores) != len(self.dimensions):
                raise SchemaMismatch(f"term {term!r}: {len(scores)} scores for {len(self.dimensions)} dimensions")
            if any(not (lo <= s <= hi) or math.isnan(s) for s in scores):
                raise SchemaMismatch(f"term {term!r}: scores outside the {self.family} domain [{lo}, {hi}]")

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: Union[str, Path], family: str, name: Optional[str] = None) -> Lexicon:
    path = Path(path)
    entries: Dict[str, Tuple[float, ...]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty lexicon file") from None
        if not header or header[0].strip().lower() != "term":
            raise InputError(f"{path}: header must start with 'term'")
        dims = tuple(h.strip().lower() for h in header[1:])
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            term = row[0].strip().lower()
            try:
                scores = tuple(float(x) for x in row[1:])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric score") from None
            if term in entries:
                # duplicate rows (e.g. after lowercasing) are summed into one entry
                scores = tuple(a + b for a, b in zip(entries[term], scores))
            entries[term] = scores
    return Lexicon(name or path.stem, family, dims, entries)


def write_lexicon(lex: Lexicon, path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(("term",) + lex.dimensions)
        for term in sorted(lex.entries):
            w.writerow((term,) + tuple(repr(float(x)) for x in lex.entries[term]))


def score_text(text: str, lex: Lexicon) -> np.ndarray:
    """Per-dimension sum of the scores of matched tokens; unknown tokens add nothing."""
    out = np.zeros(len(lex.dimensions))
    for tok in tokenize(text):
        s = lex.entries.get(tok)
        if s is not None:
            out += s
    return out


def _text_score(text: str, lex: Lexicon, per_token: bool) -> np.ndarray:
    toks = tokenize(text)
    out = np.zeros(len(lex.dimensions))
    hits = 0
    for tok in toks:
        s = lex.entries.get(tok)
        if s is not None:
            out += s
            hits += 1
    if lex.family == "moral":
        # moral scores stay on the [-1, 1] lexicon scale: mean over matched words
        return out / hits if hits else out
    if per_token and toks:
        return out / len(toks)
    return out


def raw_profile(texts: Sequence[str], lex: Lexicon, per_token: bool = False) -> np.ndarray:
    """Mean per-text score over a user's texts (before population scaling)."""
    texts = list(texts)
    if not texts:
        raise EmptyInput("profile needs at least one text")
    return np.mean([_text_score(t, lex, per_token) for t in texts], axis=0)


@dataclass(frozen=True)
class Profile:
    subject: Hashable
    family: str
    dimensions: Tuple[str, ...]
    values: Tuple[float, ...]

    def __getitem__(self, dim: str) -> float:
        return self.values[self.dimensions.index(dim)]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.dimensions, self.values))


@dataclass(frozen=True)
class ProfileScale:
    """Population min-max bounds with zero kept inside the range, so silence scores 0."""

    lows: Tuple[float, ...]
    highs: Tuple[float, ...]

    @classmethod
    def fit(cls, raw: np.ndarray) -> "ProfileScale":
        raw = np.atleast_2d(np.asarray(raw, dtype=float))
        return cls(tuple(np.minimum(raw.min(axis=0), 0.0)), tuple(np.maximum(raw.max(axis=0), 0.0)))

    def apply(self, raw: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lows)
        span = np.asarray(self.highs) - lo
        out = np.zeros_like(np.asarray(raw, dtype=float))
        ok = span > 0
        out[..., ok] = (np.asarray(raw)[..., ok] - lo[ok]) / span[ok]
        return np.clip(out, 0.0, 1.0)


def profile(
    texts: Sequence[str],
    lex: Lexicon,
    scale: Optional[ProfileScale] = None,
    subject: Hashable = None,
    per_token: bool = False,
) -> Profile:
    """Profile of one user. Emotion/PAD values go through ``scale`` when given; moral values never do."""
    raw = raw_profile(texts, lex, per_token)
    vals = raw if (scale is None or lex.family == "moral") else scale.apply(raw)
    return Profile(subject, lex.family, lex.dimensions, tuple(float(v) for v in vals))


def population_profiles(
    corpus: Mapping[Hashable, Sequence[str]],
    lex: Lexicon,
    per_token: bool = False,
) -> Dict[Hashable, Profile]:
    """Profiles for every user with at least one text, scaled over the whole population."""
    users = [u for u, texts in corpus.items() if texts]
    if not users:
        raise EmptyInput("no user has any text")
    raw = np.array([raw_profile(corpus[u], lex, per_token) for u in users])
    if lex.family == "moral":
        vals = raw
    else:
        vals = ProfileScale.fit(raw).apply(raw)
    return {
        u: Profile(u, lex.family, lex.dimensions, tuple(float(x) for x in row))
        for u, row in zip(users, vals)
    }


def mean_profile(profiles: Iterable[Profile], subject: Hashable) -> Profile:
    profiles = list(profiles)
    if not profiles:
        raise EmptyInput(f"no member profiles for {subject!r}")
    first = profiles[0]
    vals = np.mean([p.values for p in profiles], axis=0)
    return Profile(subject, first.family, first.dimensions, tuple(float(v) for v in vals))


def word_counts(text: str) -> Tuple[int, int]:
    """(word count, unique word count) under :func:`tokenize`."""
    toks = tokenize(text)
    return len(toks), len(set(toks))
