"""Command-line entry points: one-shot clustering, headless tours, the HTTP
server and session replay.

Exit codes: 0 success, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import load_csv
from .engine import ClusteringParams, run_clustering
from .errors import (ClusterScoutError, InvalidCombination, InvalidRate,
                     MalformedInput, ParseError, UnknownFeature)
from . import session as session_mod
from . import tour as tour_mod

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3

_INPUT_ERRORS = (MalformedInput, ParseError, UnknownFeature, InvalidRate,
                 InvalidCombination, FileNotFoundError, ValueError)


def _load_dataset(path: str):
    return load_csv(Path(path).read_bytes())


def _resolve_features(ds, raw: str | None) -> frozenset[int]:
    if not raw:
        return frozenset(ds.enabled_features)
    out = set()
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        if token.isdigit():
            idx = int(token)
            if not 0 <= idx < ds.n_features:
                raise UnknownFeature(f"feature index {idx} out of range")
        else:
            idx = ds.feature_index(token)
            if idx is None:
                raise UnknownFeature(f"unknown feature {token!r}")
        out.add(idx)
    return frozenset(out)


def _params_from_args(ds, args) -> ClusteringParams:
    return ClusteringParams(
        feature_subset=_resolve_features(ds, args.features),
        algorithm=args.algo, metric=args.metric, linkage=args.linkage,
        k=args.k, eps=args.eps, min_pts=args.min_pts,
        sample_rate=args.sample_rate, seed=args.seed,
        standardize=args.standardize)


def cmd_run(args) -> int:
    ds = _load_dataset(args.data)
    params = _params_from_args(ds, args)
    inst = run_clustering(ds, params)
    lines = ["row_id,cluster"]
    for pos, row in enumerate(inst.row_indices):
        lines.append(f"{ds.row_ids[row]},{inst.labeling.labels[pos]}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    summary = {
        "rows": len(inst.row_indices),
        "k_effective": inst.labeling.k_effective,
        "cluster_sizes": inst.cluster_sizes,
        "inertia": inst.inertia,
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def _parse_policy(policy: str, steps: int) -> list[str]:
    """Expand a feedback policy into a per-step feedback list."""
    if policy == "always-generate":
        return ["generate"] * steps
    if policy.startswith("like-after:"):
        at = int(policy.split(":", 1)[1])
        return ["like" if i == at else "generate" for i in range(steps)]
    if policy.startswith("bad-after:"):
        at = int(policy.split(":", 1)[1])
        return ["bad" if i == at else "generate" for i in range(steps)]
    raise ValueError(f"unknown policy {policy!r}")


def cmd_tour(args) -> int:
    ds = _load_dataset(args.data)
    params = _params_from_args(ds, args)
    entry = run_clustering(ds, params)
    feedback = _parse_policy(args.policy, args.steps)
    state = tour_mod.init_tour(ds, entry, seed=args.seed)
    tour_mod.estimate_weights(state)
    trace = {"seed": args.seed, "policy": args.policy,
             "weights": state.weights, "steps": []}
    for i, fb in enumerate(feedback):
        node = tour_mod.step(state, fb)
        trace["steps"].append({
            "step": i, "feedback": fb, "node_id": node.node_id,
            "mode": state.mode,
            "params": node.instance.params.to_dict(),
            "k_effective": node.instance.labeling.k_effective,
            "score": node.instance.score,
        })
    trace["accepted"] = tour_mod.accept(state).to_dict()
    text = json.dumps(trace, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .api import serve
    try:
        serve(host=args.host, port=args.port)
    except OSError as e:
        print(f"input error: cannot bind {args.host}:{args.port} ({e})",
              file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_session_replay(args) -> int:
    ds = _load_dataset(args.data)
    payload = Path(args.file).read_bytes()
    loaded = session_mod.load_session(payload, ds)
    # replay the applied prefix of the log onto a fresh state
    fresh = session_mod.SessionState(dataset=ds)
    fresh.enabled_features = sorted(ds.enabled_features)
    for entry in loaded.log.entries[:loaded.log.cursor]:
        session_mod.apply_op(fresh, dict(entry.params, name=entry.op_name))
    want = session_mod.state_fingerprint(loaded)
    got = session_mod.state_fingerprint(fresh)
    match = want == got
    print(json.dumps({"replayed_ops": loaded.log.cursor, "match": match}))
    return EXIT_OK if match else EXIT_COMPUTE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterscout")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_clustering_args(p):
        p.add_argument("--data", required=True, help="CSV file")
        p.add_argument("--algo", default="kmeans",
                       choices=["kmeans", "agglomerative", "dbscan"])
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--metric", default="euclidean")
        p.add_argument("--linkage", default="complete")
        p.add_argument("--eps", type=float, default=0.5)
        p.add_argument("--min-pts", dest="min_pts", type=int, default=5)
        p.add_argument("--features", default=None,
                       help="comma-separated names or indices")
        p.add_argument("--sample-rate", dest="sample_rate", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-standardize", dest="standardize",
                       action="store_false")

    run_p = sub.add_parser("run", help="one-shot clustering to a labels CSV")
    add_clustering_args(run_p)
    run_p.add_argument("--out", default=None, help="labels CSV path (default stdout)")
    run_p.set_defaults(fn=cmd_run)

    tour_p = sub.add_parser("tour", help="headless tour with a scripted policy")
    add_clustering_args(tour_p)
    tour_p.add_argument("--steps", type=int, default=5)
    tour_p.add_argument("--policy", default="always-generate",
                        help="always-generate | like-after:N | bad-after:N")
    tour_p.add_argument("--out", default=None, help="trace JSON path (default stdout)")
    tour_p.set_defaults(fn=cmd_tour)

    serve_p = sub.add_parser("serve", help="run the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(fn=cmd_serve)

    session_p = sub.add_parser("session", help="session utilities")
    session_sub = session_p.add_subparsers(dest="session_command", required=True)
    replay_p = session_sub.add_parser("replay", help="verify a session log replays")
    replay_p.add_argument("--file", required=True, help="saved session JSON")
    replay_p.add_argument("--data", required=True, help="dataset CSV")
    replay_p.set_defaults(fn=cmd_session_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _INPUT_ERRORS as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ClusterScoutError as e:
        print(f"computation error: {e}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
