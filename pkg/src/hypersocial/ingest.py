"""Readers for the released CSV layouts: threads, per-month user profiles and thread texts."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import InputError
from .features import FeatureSchema, FeatureTable, MinMaxScaler, mean_rows
from .hypergraph import Hyperedge, Hypergraph, Interner, SnapshotSeries

log = logging.getLogger(__name__)

THREAD_COLUMNS = ("thread_id", "community", "year", "month", "members")
USER_COLUMNS = ("user_id", "year", "month")
TEXT_COLUMNS = ("thread_id", "user_id", "text")
FEATURES = ("score", "sentiment", "toxicity")

Period = Tuple[int, int]


def period_index(period: Period, base: Period) -> int:
    """Month offset of ``period`` from ``base``, 1-based (base itself is t=1)."""
    return (period[0] * 12 + period[1]) - (base[0] * 12 + base[1]) + 1


def _open_reader(path: Path, required: Sequence[str], column_map: Optional[Mapping[str, str]], optional: Sequence[str] = ()):
    fh = path.open(newline="", encoding="utf-8")
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    mapping = dict(column_map or {})
    # canonical name -> column in file
    resolved = {c: mapping.get(c, c) for c in list(required) + list(optional)}
    missing = [c for c in required if resolved[c] not in fields]
    if missing:
        fh.close()
        raise InputError(f"{path}: missing required column(s) {', '.join(missing)}")
    return fh, reader, resolved, fields


def _int(row, col, path, lineno) -> int:
    raw = (row.get(col) or "").strip()
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{path}:{lineno}: column {col!r} is not an integer ({raw!r})") from None


@dataclass
class ThreadData:
    series: SnapshotSeries
    base: Optional[Period]
    keys: Dict[str, int]  # thread key -> hyperedge id
    dropped_small: int = 0
    filtered_out: int = 0


def load_threads(
    path: Union[str, Path],
    community: Optional[str] = None,
    year: Optional[int] = None,
    months: Optional[Iterable[int]] = None,
    min_size: int = 3,
    interner: Optional[Interner] = None,
    column_map: Optional[Mapping[str, str]] = None,
) -> ThreadData:
    """Build the monthly snapshot series and the thread-level aggregate.

    CSV header: ``thread_id,community,year,month,members`` with members separated
    by ``;``. Repeated members collapse; threads smaller than ``min_size`` after
    deduplication are dropped. Snapshot timestamps count calendar months from the
    earliest retained month, so a gap in the data stays a gap.
    """
    path = Path(path)
    interner = interner if interner is not None else Interner()
    month_filter = set(months) if months is not None else None
    fh, reader, col, fields = _open_reader(path, THREAD_COLUMNS, column_map)
    extra = [f for f in fields if f not in col.values()]
    if extra:
        log.warning("%s: ignoring unknown column(s) %s", path, ", ".join(extra))
    edges: List[Tuple[Period, Hyperedge]] = []
    keys: Dict[str, int] = {}
    dropped = filtered = 0
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(row.get(col[c]) is None for c in THREAD_COLUMNS):
                raise InputError(f"{path}:{lineno}: wrong number of fields")
            key = row[col["thread_id"]].strip()
            comm = row[col["community"]].strip()
            y = _int(row, col["year"], path, lineno)
            m = _int(row, col["month"], path, lineno)
            if not 1 <= m <= 12:
                raise InputError(f"{path}:{lineno}: month {m} outside 1..12")
            if not key:
                raise InputError(f"{path}:{lineno}: empty thread_id")
            names = [x.strip() for x in row[col["members"]].split(";") if x.strip()]
            if not names:
                raise InputError(f"{path}:{lineno}: empty member list")
            if key in keys:
                raise InputError(f"{path}:{lineno}: duplicate thread_id {key!r}")
            if (community is not None and comm != community) or (year is not None and y != year) or (
                month_filter is not None and m not in month_filter
            ):
                filtered += 1
                continue
            members = frozenset(interner.intern(n) for n in names)
            if len(members) < min_size:
                dropped += 1
                continue
            eid = len(edges)
            keys[key] = eid
            edges.append(((y, m), Hyperedge(eid, members, comm, y, m, key)))
    if not edges:
        log.warning("%s: no threads left after filtering (%d dropped as too small)", path, dropped)
        return ThreadData(SnapshotSeries([], [], [], Hypergraph(), interner), None, keys, dropped, filtered)
    periods = sorted({p for p, _ in edges})
    base = periods[0]
    by_period: Dict[Period, List[Hyperedge]] = {p: [] for p in periods}
    for p, e in edges:
        by_period[p].append(e)
    series = SnapshotSeries(
        timestamps=[period_index(p, base) for p in periods],
        snapshots=[Hypergraph(by_period[p]) for p in periods],
        periods=periods,
        aggregate=Hypergraph(e for _, e in edges),
        interner=interner,
    )
    return ThreadData(series, base, keys, dropped, filtered)


@dataclass
class UserData:
    """Raw per-(user, period) feature rows; ``period`` None marks a whole-period aggregate row."""

    schema: FeatureSchema
    rows: Dict[Tuple[int, Optional[Period]], Tuple[float, ...]]
    weights: Dict[Tuple[int, Optional[Period]], float] = field(default_factory=dict)
    extras: Dict[Tuple[int, Optional[Period]], Dict[str, str]] = field(default_factory=dict)

    def users(self) -> Set[int]:
        return {u for u, _ in self.rows}

    def scaler(self) -> MinMaxScaler:
        return MinMaxScaler.fit(np.array(list(self.rows.values())))

    def aggregate_rows(self) -> Dict[int, Tuple[float, ...]]:
        """Whole-period rows: explicit ones when present, else activity-weighted monthly means."""
        explicit = {u: v for (u, p), v in self.rows.items() if p is None}
        pending: Dict[int, List] = {}
        for (u, p), v in self.rows.items():
            if p is not None and u not in explicit:
                pending.setdefault(u, []).append((v, self.weights.get((u, p), 1.0)))
        explicit.update(mean_rows(pending))
        return explicit

    def normalized(self, base: Optional[Period], scaler: Optional[MinMaxScaler] = None) -> FeatureTable:
        """One global min-max fit; monthly rows keyed by snapshot timestamp, aggregates by None."""
        scaler = scaler or self.scaler()
        table = FeatureTable(self.schema)
        monthly = [(u, p) for (u, p) in self.rows if p is not None]
        if monthly and base is None:
            base = min(p for _, p in monthly)
        if monthly:
            vals = scaler.transform(np.array([self.rows[k] for k in monthly]))
            for (u, p), row in zip(monthly, vals):
                table.rows[(u, period_index(p, base))] = tuple(float(x) for x in row)
        agg = self.aggregate_rows()
        if agg:
            users = sorted(agg)
            vals = scaler.transform(np.array([agg[u] for u in users]))
            for u, row in zip(users, vals):
                table.rows[(u, None)] = tuple(float(x) for x in row)
        return table


def load_users(
    path: Union[str, Path],
    interner: Optional[Interner] = None,
    features: Sequence[str] = FEATURES,
    column_map: Optional[Mapping[str, str]] = None,
    weight_column: str = "n_texts",
) -> UserData:
    """Read ``user_id,year,month,<features...>[,extra]``.

    A blank or 0 month marks a whole-period row. Values are kept raw here; call
    :meth:`UserData.normalized` to rescale. ``weight_column``, when present,
    weights monthly rows in derived aggregates.
    """
    path = Path(path)
    interner = interner if interner is not None else Interner()
    required = USER_COLUMNS + tuple(features)
    fh, reader, col, fields = _open_reader(path, required, column_map, optional=(weight_column,))
    known = set(col.values())
    extra_cols = [f for f in fields if f not in known]
    data = UserData(FeatureSchema(tuple(features)), {})
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(row.get(col[c]) is None for c in required):
                raise InputError(f"{path}:{lineno}: wrong number of fields")
            name = row[col["user_id"]].strip()
            if not name:
                raise InputError(f"{path}:{lineno}: empty user_id")
            y = _int(row, col["year"], path, lineno)
            mraw = (row[col["month"]] or "").strip()
            m = 0 if mraw == "" else _int(row, col["month"], path, lineno)
            if not 0 <= m <= 12:
                raise InputError(f"{path}:{lineno}: month {m} outside 0..12")
            vals = []
            for f in features:
                raw = row[col[f]].strip()
                try:
                    v = float(raw)
                except ValueError:
                    raise InputError(f"{path}:{lineno}: column {f!r} is not numeric ({raw!r})") from None
                if not math.isfinite(v):
                    raise InputError(f"{path}:{lineno}: column {f!r} is not finite")
                vals.append(v)
            key = (interner.intern(name), None if m == 0 else (y, m))
            if key in data.rows:
                raise InputError(f"{path}:{lineno}: duplicate row for user {name!r}")
            data.rows[key] = tuple(vals)
            wraw = (row.get(col[weight_column]) or "").strip() if col[weight_column] in fields else ""
            if wraw:
                try:
                    data.weights[key] = float(wraw)
                except ValueError:
                    raise InputError(f"{path}:{lineno}: column {weight_column!r} is not numeric") from None
            if extra_cols:
                data.extras[key] = {c: row[c] for c in extra_cols}
    return data


@dataclass
class TextData:
    by_thread: Dict[str, List[Tuple[int, str, Optional[float]]]]

    def by_user(self, threads: Optional[Iterable[str]] = None) -> Dict[int, List[str]]:
        keep = set(threads) if threads is not None else None
        out: Dict[int, List[str]] = {}
        for key, items in self.by_thread.items():
            if keep is not None and key not in keep:
                continue
            for u, text, _ in items:
                out.setdefault(u, []).append(text)
        return out


def load_texts(
    path: Union[str, Path],
    interner: Interner,
    column_map: Optional[Mapping[str, str]] = None,
) -> TextData:
    """Read ``thread_id,user_id,text[,subjectivity]``."""
    path = Path(path)
    fh, reader, col, fields = _open_reader(path, TEXT_COLUMNS, column_map, optional=("subjectivity",))
    has_subj = col["subjectivity"] in fields
    out: Dict[str, List[Tuple[int, str, Optional[float]]]] = {}
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(row.get(col[c]) is None for c in TEXT_COLUMNS):
                raise InputError(f"{path}:{lineno}: wrong number of fields")
            subj = None
            if has_subj and (row[col["subjectivity"]] or "").strip():
                try:
                    subj = float(row[col["subjectivity"]])
                except ValueError:
                    raise InputError(f"{path}:{lineno}: subjectivity is not numeric") from None
            u = interner.intern(row[col["user_id"]].strip())
            out.setdefault(row[col["thread_id"]].strip(), []).append((u, row[col["text"]], subj))
    return TextData(out)


def write_threads(path: Union[str, Path], rows: Iterable[Tuple[str, str, int, int, Sequence[str]]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(THREAD_COLUMNS)
        for key, comm, y, m, members in rows:
            w.writerow((key, comm, y, m, ";".join(members)))


def write_users(
    path: Union[str, Path],
    rows: Iterable[Tuple[str, int, int, Sequence[float]]],
    features: Sequence[str] = FEATURES,
) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(USER_COLUMNS + tuple(features))
        for name, y, m, vals in rows:
            w.writerow((name, y, "" if m in (0, None) else m) + tuple(repr(float(v)) for v in vals))


def write_texts(path: Union[str, Path], rows: Iterable[Tuple[str, str, str, Optional[float]]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TEXT_COLUMNS + ("subjectivity",))
        for key, user, text, subj in rows:
            w.writerow((key, user, text, "" if subj is None else repr(float(subj))))


def coverage(thread_users: Iterable[int], profiled: Iterable[int]) -> List[int]:
    """Thread participants without a profile row, sorted."""
    return sorted(set(thread_users) - set(profiled))
