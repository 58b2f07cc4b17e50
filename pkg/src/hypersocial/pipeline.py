"""End-to-end orchestration: inputs + config + seed -> plot-ready CSV/JSON tables.

Stages run in a fixed order and each is a pure function of the loaded inputs,
the config and the seed. Any stage failure is re-raised as :class:`StageError`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

import numpy as np
from scipy import sparse

from . import __version__
from .archetypes import ArchetypeCatalog, assign_codes, default_catalog, typicality_array
from .centrality import (
    LineGraph,
    approximate_betweenness,
    build_line_graph,
    characterize_discussions,
    hyperedge_betweenness,
    rank_hyperedges,
)
from .characterization import OmegaSpec, evaluate_batch
from .errors import HypersocialError, InputError, StageError
from .features import FeatureTable
from .hypergraph import Hypergraph, Interner
from .ingest import ThreadData, TextData, UserData, coverage, load_texts, load_threads, load_users
from .lexicon import load_lexicon, mean_profile, population_profiles
from .schemas import write_rows
from .transitions import ArchetypeSequence, RNG_ALGORITHM, null_model, observed_transitions, significance

log = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "threads": None,
    "users": None,
    "texts": None,
    "lexicons": {},
    "community": None,
    "year": None,
    "months": None,
    "min_size": 3,
    "catalog": None,
    "thresholds": 0.5,
    "omega": [],
    "typical_k": 10,
    "centrality": {"k": 50, "s": 1, "pivots": None, "max_incidence": None, "max_pairs": None, "n_jobs": 1},
    "null_model": {"n_shuffles": 500, "seed": 0, "alpha": 0.01, "n_jobs": 1},
    "column_map": {},
    "cache_dir": None,
    "stages": ["stats", "distributions", "archetypes", "profiles", "transitions", "centrality", "omega"],
}


def load_config(source: Union[str, Path, Mapping, None], overrides: Optional[Mapping] = None) -> Dict[str, Any]:
    """Merge a JSON config over the defaults; relative input paths resolve against the config file."""
    base_dir = Path.cwd()
    if source is None:
        raw: Dict[str, Any] = {}
    elif isinstance(source, Mapping):
        raw = dict(source)
    else:
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        base_dir = path.resolve().parent
    cfg = json.loads(json.dumps(DEFAULTS))
    # file values first, then overrides, so nested blocks merge key by key
    layers = [raw.items(), ((k, v) for k, v in (overrides or {}).items() if v is not None)]
    for layer in layers:
        for key, value in layer:
            if key not in cfg:
                raise InputError(f"unknown config key {key!r}")
            if isinstance(cfg[key], dict) and isinstance(value, Mapping) and key not in ("lexicons", "column_map"):
                cfg[key].update(value)
            else:
                cfg[key] = value
    for key in ("threads", "users", "texts", "cache_dir"):
        if cfg[key] is not None:
            cfg[key] = str((base_dir / cfg[key]).resolve())
    cfg["lexicons"] = {k: str((base_dir / v).resolve()) for k, v in cfg["lexicons"].items()}
    if isinstance(cfg["catalog"], str):
        cfg["catalog"] = str((base_dir / cfg["catalog"]).resolve())
    return cfg


def file_digest(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def hypergraph_digest(h: Hypergraph) -> str:
    h_ = hashlib.sha256()
    for e in h.hyperedges:
        h_.update(f"{e.id}:{','.join(map(str, sorted(e.members)))};".encode())
    return h_.hexdigest()


def cached_line_graph(h: Hypergraph, s: int, cache_dir: Optional[str], **kwargs) -> LineGraph:
    """Line graph, reusing ``<cache_dir>/linegraph-<hash>.npz`` when the hypergraph content matches."""
    if not cache_dir:
        return build_line_graph(h, s, **kwargs)
    path = Path(cache_dir) / f"linegraph-{hypergraph_digest(h)[:24]}-s{s}.npz"
    if path.exists():
        return LineGraph(tuple(e.id for e in h.hyperedges), sparse.load_npz(path).tocsr(), s)
    lg = build_line_graph(h, s, **kwargs)
    path.parent.mkdir(parents=True, exist_ok=True)
    sparse.save_npz(path, lg.adjacency, compressed=False)
    return lg


@dataclass
class Context:
    cfg: Dict[str, Any]
    out: Path
    interner: Interner = field(default_factory=Interner)
    threads: Optional[ThreadData] = None
    users: Optional[UserData] = None
    texts: Optional[TextData] = None
    table: Optional[FeatureTable] = None
    catalog: Optional[ArchetypeCatalog] = None
    yearly: Dict[int, str] = field(default_factory=dict)
    monthly: Dict[tuple, str] = field(default_factory=dict)
    typical: Dict[str, List[int]] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)

    def name(self, u: int) -> str:
        return self.interner.lookup(u)

    def emit(self, filename: str, table: str, rows) -> None:
        write_rows(self.out / filename, table, rows)
        self.outputs.append(filename)


def _thresholds(cfg, catalog: ArchetypeCatalog) -> List[float]:
    t = cfg["thresholds"]
    if isinstance(t, (int, float)):
        return [float(t)] * len(catalog.features)
    try:
        return [float(t[f]) for f in catalog.features]
    except KeyError as exc:
        raise InputError(f"no threshold for feature {exc}") from None


def stage_load(ctx: Context) -> None:
    cfg = ctx.cfg
    if not cfg["threads"]:
        raise InputError("config must name a threads file")
    cmap = cfg["column_map"]
    ctx.threads = load_threads(
        cfg["threads"], cfg["community"], cfg["year"], cfg["months"], cfg["min_size"],
        ctx.interner, cmap.get("threads"),
    )
    if cfg["catalog"] is None:
        ctx.catalog = default_catalog()
    else:
        ctx.catalog = ArchetypeCatalog.from_config(cfg["catalog"])
    if cfg["users"]:
        ctx.users = load_users(cfg["users"], ctx.interner, ctx.catalog.features, cmap.get("users"))
        ctx.table = ctx.users.normalized(ctx.threads.base)
    if cfg["texts"]:
        ctx.texts = load_texts(cfg["texts"], ctx.interner, cmap.get("texts"))
    agg = ctx.threads.series.aggregate
    thread_users = agg.nodes if agg is not None else ()
    profiled = ctx.users.users() if ctx.users else set()
    missing = coverage(thread_users, profiled)
    ctx.notes["coverage"] = {
        "thread_users": len(thread_users),
        "profiled_thread_users": len(thread_users) - len(missing),
        "missing_profiles": len(missing),
        "dropped_small_threads": ctx.threads.dropped_small,
        "filtered_threads": ctx.threads.filtered_out,
    }
    ctx.emit("coverage.csv", "coverage", ({"user_id": ctx.name(u), "status": "missing_profile"} for u in missing))


def stage_stats(ctx: Context) -> None:
    series = ctx.threads.series
    rows = []
    jac = series.adjacent_jaccard()
    for (t, h), period, j in zip(series, series.periods, jac):
        s = h.summary_stats()
        rows.append({
            "t": str(t), "year": period[0], "month": period[1], "n": s.n, "m": s.m,
            "max_edge_size": s.max_edge_size, "mean_hyperdegree": s.mean_hyperdegree,
            "mean_degree": s.mean_degree, "jaccard_next": j,
        })
    if series.aggregate is not None and series.aggregate.size:
        s = series.aggregate.summary_stats()
        rows.append({
            "t": "all", "year": None, "month": None, "n": s.n, "m": s.m,
            "max_edge_size": s.max_edge_size, "mean_hyperdegree": s.mean_hyperdegree,
            "mean_degree": s.mean_degree, "jaccard_next": None,
        })
    ctx.emit("stats.csv", "stats", rows)


def stage_distributions(ctx: Context) -> None:
    series = ctx.threads.series
    rows = []
    graphs = list(zip([str(t) for t in series.timestamps], series.snapshots))
    if series.aggregate is not None and series.aggregate.size:
        graphs.append(("all", series.aggregate))
    for label, h in graphs:
        hdeg, sizes = h.distributions()
        rows += [{"t": label, "kind": "hyperdegree", "value": v, "count": c} for v, c in hdeg.items()]
        rows += [{"t": label, "kind": "size", "value": v, "count": c} for v, c in sizes.items()]
    ctx.emit("distributions.csv", "distributions", rows)


def _require_users(ctx: Context, stage: str) -> bool:
    if ctx.table is None:
        log.warning("stage %s skipped: no user profiles configured", stage)
        return False
    return True


def stage_archetypes(ctx: Context) -> None:
    if not _require_users(ctx, "archetypes"):
        return
    cat, table = ctx.catalog, ctx.table
    th = _thresholds(ctx.cfg, cat)
    keys = sorted(table.rows, key=lambda k: (k[1] is not None, k[1] or 0, k[0]))
    vals = np.array([table.rows[k] for k in keys])
    idx = assign_codes(vals, cat, th)
    for k, i in zip(keys, idx):
        if k[1] is None:
            ctx.yearly[k[0]] = cat.names[i]
        else:
            ctx.monthly[k] = cat.names[i]
    counts = {n: 0 for n in cat.names}
    for a in ctx.yearly.values():
        counts[a] += 1
    ctx.emit("archetype_census.csv", "archetype_census", (
        {"archetype": a.name, "labels": a.code, "count": counts[a.name]} for a in cat
    ))

    # typicality ranking over whole-period assignments
    k = int(ctx.cfg["typical_k"])
    users = sorted(ctx.yearly)
    rows = []
    if users:
        agg_vals = np.array([table.rows[(u, None)] for u in users])
        for a in cat:
            members = [i for i, u in enumerate(users) if ctx.yearly[u] == a.name]
            if not members:
                ctx.typical[a.name] = []
                continue
            scores = typicality_array(agg_vals[members], a)
            order = sorted(range(len(members)), key=lambda j: (-scores[j], users[members[j]]))[:k]
            ctx.typical[a.name] = [users[members[j]] for j in order]
            rows += [
                {"archetype": a.name, "rank": r + 1, "user_id": ctx.name(users[members[j]]), "typicality": float(scores[j])}
                for r, j in enumerate(order)
            ]
    ctx.emit("typical_users.csv", "typical_users", rows)

    # monthly hyperdegree/degree per archetype
    series = ctx.threads.series
    rows = []
    for t, h in series:
        hdeg = dict(zip(h.nodes, h.hyperdegrees()))
        deg = dict(zip(h.nodes, h.degrees()))
        for a in cat.names:
            members = [u for u in h.nodes if ctx.monthly.get((u, t)) == a]
            rows.append({
                "t": t, "archetype": a, "n_users": len(members),
                "mean_hyperdegree": float(np.mean([hdeg[u] for u in members])) if members else None,
                "mean_degree": float(np.mean([deg[u] for u in members])) if members else None,
            })
    ctx.emit("archetype_activity.csv", "archetype_activity", rows)


def stage_profiles(ctx: Context) -> None:
    lex_paths = ctx.cfg["lexicons"]
    if not lex_paths or ctx.texts is None or not ctx.typical:
        log.warning("stage profiles skipped: needs texts, lexicons and archetype assignments")
        return
    corpus = ctx.texts.by_user(ctx.threads.keys)
    rows = []
    for family in ("emotion", "pad", "moral"):
        if family not in lex_paths:
            continue
        lex = load_lexicon(lex_paths[family], family)
        profs = population_profiles(corpus, lex)
        for a in ctx.catalog.names:
            members = [profs[u] for u in ctx.typical.get(a, []) if u in profs]
            if not members:
                continue
            p = mean_profile(members, a)
            rows += [{"subject": a, "family": family, "dim": d, "value": v} for d, v in zip(p.dimensions, p.values)]
    ctx.emit("profiles.csv", "profiles", rows)


def stage_transitions(ctx: Context) -> None:
    if not _require_users(ctx, "transitions") or not ctx.monthly:
        return
    nm = ctx.cfg["null_model"]
    by_user: Dict[int, list] = {}
    for (u, t), a in ctx.monthly.items():
        by_user.setdefault(u, []).append((t, a))
    seqs = [ArchetypeSequence(u, tuple(sorted(s))) for u, s in sorted(by_user.items())]
    names = ctx.catalog.names
    obs = observed_transitions(seqs, names)
    null = null_model(seqs, int(nm["n_shuffles"]), int(nm["seed"]), names, int(nm.get("n_jobs", 1)))
    report = significance(obs, null, float(nm["alpha"]))
    report.write_csv(ctx.out / "transitions.csv")
    ctx.outputs.append("transitions.csv")
    report.metadata["undefined_rows"] = [n for n, d in zip(names, obs.defined) if not d]
    report.write_meta(ctx.out / "transitions_meta.json")
    ctx.outputs.append("transitions_meta.json")


def stage_centrality(ctx: Context) -> None:
    c = ctx.cfg["centrality"]
    series = ctx.threads.series
    key_of = {eid: key for key, eid in ctx.threads.keys.items()}
    texts = ctx.texts.by_thread if ctx.texts else {}
    rows = []
    for t, h in series:
        lg = cached_line_graph(
            h, int(c["s"]), ctx.cfg["cache_dir"],
            max_incidence=c.get("max_incidence"), max_pairs=c.get("max_pairs"),
        )
        if c.get("pivots"):
            scores = approximate_betweenness(lg, int(c["pivots"]), seed=int(ctx.cfg["null_model"]["seed"]))
        else:
            scores = hyperedge_betweenness(lg, n_jobs=int(c.get("n_jobs", 1)))
        top = rank_hyperedges(scores, int(c["k"]))
        labels = {u: a for (u, tt), a in ctx.monthly.items() if tt == t}
        by_id = {eid: texts.get(key_of[eid], []) for eid, _ in top}
        records = characterize_discussions(h, [eid for eid, _ in top], by_id, labels)
        for rank, ((eid, score), rec) in enumerate(zip(top, records), start=1):
            rows.append({
                "hyperedge_id": key_of[eid], "betweenness": score, "rank": rank,
                "avg_word_count": rec.avg_word_count, "avg_unique_word_count": rec.avg_unique_word_count,
                "avg_subjectivity": rec.avg_subjectivity, "archetype_purity": rec.archetype_purity,
                "month": t,
            })
    ctx.emit("central_discussions.csv", "central_discussions", rows)


def stage_omega(ctx: Context) -> None:
    specs = [OmegaSpec.parse(s) if isinstance(s, str) else OmegaSpec(**s) for s in ctx.cfg["omega"]]
    if not specs:
        return
    h = ctx.threads.series.aggregate
    features: Dict[str, Dict[int, Any]] = {}
    if ctx.table is not None:
        for j, f in enumerate(ctx.table.schema.names):
            features[f] = {u: row[j] for (u, t), row in ctx.table.rows.items() if t is None}
    features["archetype"] = dict(ctx.yearly)
    key_of = {eid: key for key, eid in ctx.threads.keys.items()}
    rows = [
        {"hyperedge_id": key_of[eid], "omega": label, "value": value}
        for eid, label, value in evaluate_batch(specs, h, features)
    ]
    ctx.emit("omega.csv", "omega", rows)


STAGES: Dict[str, Callable[[Context], None]] = {
    "stats": stage_stats,
    "distributions": stage_distributions,
    "archetypes": stage_archetypes,
    "profiles": stage_profiles,
    "transitions": stage_transitions,
    "centrality": stage_centrality,
    "omega": stage_omega,
}


def run_pipeline(config: Union[str, Path, Mapping, None], out_dir: Union[str, Path], overrides: Optional[Mapping] = None,
                 stages: Optional[List[str]] = None) -> Path:
    cfg = load_config(config, overrides)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg, out)
    wanted = stages or cfg["stages"]
    unknown = [s for s in wanted if s not in STAGES]
    if unknown:
        raise InputError(f"unknown stage(s) {unknown}")
    timings = {}
    for name, fn in [("load", stage_load)] + [(s, STAGES[s]) for s in STAGES if s in wanted]:
        if name == "profiles" and "archetypes" not in wanted:
            continue
        start = time.perf_counter()
        try:
            fn(ctx)
        except InputError:
            raise
        except HypersocialError as exc:
            raise StageError(name, exc) from exc
        except Exception as exc:  # noqa: BLE001 - any failure aborts with the stage name
            raise StageError(name, exc) from exc
        timings[name] = round(time.perf_counter() - start, 3)
        log.info("stage %s done in %.2fs", name, timings[name])
    inputs = {
        k: {"path": cfg[k], "sha256": file_digest(cfg[k])}
        for k in ("threads", "users", "texts") if cfg[k]
    }
    inputs.update({f"lexicon:{k}": {"path": v, "sha256": file_digest(v)} for k, v in sorted(cfg["lexicons"].items())})
    meta = {
        "package_version": __version__,
        "config": cfg,
        "seed": cfg["null_model"]["seed"],
        "rng": RNG_ALGORITHM,
        "inputs": inputs,
        "outputs": sorted(ctx.outputs),
        "notes": ctx.notes,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "timings_s": timings,
    }
    (out / "run_metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out
