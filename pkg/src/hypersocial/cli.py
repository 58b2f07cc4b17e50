"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 stage failure. With ``--json-errors`` the
error is also printed to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .errors import InputError, StageError

STAGE_COMMANDS = {
    "stats": ["stats"],
    "distributions": ["distributions"],
    "archetypes": ["archetypes"],
    "profiles": ["archetypes", "profiles"],
    "transitions": ["archetypes", "transitions"],
    "centrality": ["archetypes", "centrality"],
    "characterize": ["archetypes", "omega"],
    "run": None,
}


def _months(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--seed", type=int, help="null-model seed (overrides config)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--community", help="keep only threads of this community")
    p.add_argument("--months", type=_months, help="months to keep, e.g. 1-12 or 1,2,5")
    p.add_argument("--threads", help="threads CSV (overrides config)")
    p.add_argument("--users", help="users CSV (overrides config)")
    p.add_argument("--texts", help="texts CSV (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypersocial", description=__doc__.splitlines()[0])
    parser.add_argument("--json-errors", action="store_true", help="emit machine-readable errors on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load inputs and report counts and profile coverage")
    _common(p)
    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "run" else "run every stage")
        _common(p)
        if name in ("transitions", "run"):
            p.add_argument("--n-shuffles", type=int, help="null-model shuffled copies")
            p.add_argument("--alpha", type=float, help="significance level")
        if name in ("centrality", "run"):
            p.add_argument("--k", type=int, help="top-k discussions per month")
            p.add_argument("--s", type=int, help="line-graph overlap threshold")
            p.add_argument("--pivots", type=int, help="approximate betweenness with this many pivots")
        if name == "characterize":
            p.add_argument("--omega", action="append", help="omega spec, e.g. gini:toxicity (repeatable)")

    p = sub.add_parser("synth", help="write a synthetic fixture")
    p.add_argument("--out", default="fixture", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=1000, dest="n_users")
    p.add_argument("--threads", type=int, default=10000, dest="n_threads")
    p.add_argument("--months", type=int, default=12)
    p.add_argument("--activity", type=float, default=1.0)
    p.add_argument("--plant", action="append", default=[], metavar="A>B=BOOST",
                   help='planted transition boost, e.g. "Quiet Critic>Respected Critic=0.3"')
    return parser


def _overrides(args) -> dict:
    o = {
        "community": args.community,
        "months": args.months,
        "threads": args.threads,
        "users": args.users,
        "texts": args.texts,
    }
    o = {k: str(Path(v).resolve()) if k in ("threads", "users", "texts") and v else v for k, v in o.items()}
    nm = {}
    if args.seed is not None:
        nm["seed"] = args.seed
    if getattr(args, "n_shuffles", None) is not None:
        nm["n_shuffles"] = args.n_shuffles
    if getattr(args, "alpha", None) is not None:
        nm["alpha"] = args.alpha
    if nm:
        o["null_model"] = nm
    c = {k: getattr(args, k) for k in ("k", "s", "pivots") if getattr(args, k, None) is not None}
    if c:
        o["centrality"] = c
    if getattr(args, "omega", None):
        o["omega"] = args.omega
    return o


def _synth(args) -> int:
    from .synth import SynthSpec, synth_fixture

    planted = {}
    for item in args.plant:
        try:
            pair, boost = item.rsplit("=", 1)
            a, b = pair.split(">", 1)
            planted[(a.strip(), b.strip())] = float(boost)
        except ValueError:
            raise InputError(f"bad --plant value {item!r}; expected 'A>B=BOOST'") from None
    spec = SynthSpec(n_users=args.n_users, n_threads=args.n_threads, months=args.months,
                     activity=args.activity, planted=planted, seed=args.seed)
    paths = synth_fixture(spec, args.out)
    config = {
        "threads": paths.threads.name,
        "users": paths.users.name,
        "texts": paths.texts.name if paths.texts else None,
        "lexicons": {k: v.name for k, v in paths.lexicons.items()},
        "omega": ["size", "purity:archetype", "gini:toxicity", "entropy:archetype", "interaction_potential"],
    }
    (Path(args.out) / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"fixture written to {args.out}")
    return 0


def _ingest(args) -> int:
    from .pipeline import Context, load_config, stage_load

    cfg = load_config(args.config, _overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg, out)
    stage_load(ctx)
    series = ctx.threads.series
    summary = {
        "snapshots": len(series),
        "periods": [f"{y}-{m:02d}" for y, m in series.periods],
        "hyperedges": series.aggregate.size if series.aggregate else 0,
        "nodes": series.aggregate.order if series.aggregate else 0,
        **ctx.notes["coverage"],
    }
    print(json.dumps(summary, indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return _synth(args)
        if args.command == "ingest":
            return _ingest(args)
        from .pipeline import run_pipeline

        out = run_pipeline(args.config, args.out, _overrides(args), STAGE_COMMANDS[args.command])
        print(f"outputs written to {out}")
        return 0
    except InputError as exc:
        return _fail(args, 2, "input_error", str(exc), None)
    except StageError as exc:
        return _fail(args, 3, "stage_failure", str(exc.cause), exc.stage)


def _fail(args, code: int, kind: str, message: str, stage: Optional[str]) -> int:
    if args.json_errors:
        sys.stderr.write(json.dumps({"error": kind, "stage": stage, "message": message, "exit_code": code}) + "\n")
    else:
        where = f" in stage {stage}" if stage else ""
        sys.stderr.write(f"hypersocial: {kind.replace('_', ' ')}{where}: {message}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
