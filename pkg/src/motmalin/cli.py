"""Command line harness: serve a table, run batches, query the solver.

Subcommands: serve, selfplay, solve, clue, replay-verify. Exit codes: 0 on
success, 1 for usage problems, 2 for unreadable or malformed data, 3 when a
log fails verification. MOTMALIN_PORT and MOTMALIN_LOG_DIR override config
values; explicit flags beat both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from motmalin.assoc import AssocError, generate_clue, infer_coordinates, load_embeddings
from motmalin.game import GameError, parse_coordinate
from motmalin.selfplay import SelfPlayStalled, selfplay
from motmalin.session import (
    CorruptRecord,
    SeqGap,
    SessionConfig,
    SessionError,
    create_session,
    load_config,
    load_grid,
    packaged_data,
    verify_log,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

ENV_PORT = "MOTMALIN_PORT"
ENV_LOG_DIR = "MOTMALIN_LOG_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motmalin",
        description="Cooperative word-association board game: server, agents, solver.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="session config file (YAML)")
        sp.add_argument("--seed", type=int, help="shuffle seed (selfplay: first seed of the batch)")
        sp.add_argument("--embeddings", help="embedding table file")
        sp.add_argument("--grid", help="grid file (4 column words + 4 row words)")
        sp.add_argument("--log-dir", help="directory for session logs")

    sp = sub.add_parser("serve", help="run a live table over a websocket")
    common(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, help="listen port")
    sp.add_argument("--condition", choices=("humans_only", "eca_pair", "robot_pair", "hybrid", "agents_only"))

    sp = sub.add_parser("selfplay", help="run headless all-agent games and report statistics")
    common(sp)
    sp.add_argument("--n", type=int, default=10, help="number of games")

    sp = sub.add_parser("solve", help="rank grid cells for a clue word")
    common(sp)
    sp.add_argument("clue", help="the clue word to decode")

    sp = sub.add_parser("clue", help="pick the best clue word for a target cell")
    common(sp)
    sp.add_argument("cell", help="target cell label, e.g. B4")

    sp = sub.add_parser("replay-verify", help="replay a session log and check its digest")
    sp.add_argument("logfile", help="JSON Lines session log")

    return parser


def _base_config(args: argparse.Namespace) -> SessionConfig:
    config = load_config(args.config) if args.config else SessionConfig()
    updates: dict = {}
    if getattr(args, "condition", None):
        updates["condition"] = args.condition
    if args.seed is not None:
        updates["shuffle_seed"] = args.seed
    if args.embeddings:
        updates["embedding_file"] = args.embeddings
    if args.grid:
        updates["grid_file"] = args.grid
    return replace(config, **updates) if updates else config


def _resolve_log_dir(args: argparse.Namespace) -> Optional[str]:
    return args.log_dir or os.environ.get(ENV_LOG_DIR) or None


def _open_store_and_grid(args: argparse.Namespace):
    store = load_embeddings(str(args.embeddings or packaged_data("demo_embeddings.txt")))
    grid = load_grid(args.grid or packaged_data("demo_grid.yaml"))
    return store, grid


def resolve_port(flag: Optional[int], config: SessionConfig) -> int:
    """Flag beats environment beats config file."""
    if flag is not None:
        return flag
    env = os.environ.get(ENV_PORT)
    return int(env) if env else config.port


def _cmd_serve(args: argparse.Namespace) -> int:
    from motmalin.web import serve

    config = _base_config(args)
    log_dir = _resolve_log_dir(args)
    if log_dir and not config.log_path:
        config = replace(config, log_path=str(Path(log_dir) / f"{config.session_id}.jsonl"))
    port = resolve_port(args.port, config)
    session = create_session(config)
    print(f"serving session {session.id} on ws://{args.host}:{port}/ws", file=sys.stderr)
    try:
        serve(session, host=args.host, port=port)
    except SystemExit as exc:
        # uvicorn exits 3 when it cannot start (busy port, bad host); fold
        # that into the data-problem code so 3 stays reserved for digests
        return EXIT_DATA if exc.code else EXIT_OK
    finally:
        session.close()
    return EXIT_OK


def _cmd_selfplay(args: argparse.Namespace) -> int:
    config = _base_config(args)
    report = selfplay(args.n, base_seed=args.seed or 0, config=config, log_dir=_resolve_log_dir(args))
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    store, grid = _open_store_and_grid(args)
    inference = infer_coordinates(store, args.clue, grid)
    if inference.oov:
        print("OOV: clue not in vocabulary, probabilities are uniform")
    for cs in inference.cells:
        print(f"{cs.cell.label()} {cs.score:.5f} {cs.probability:.5f}")
    return EXIT_OK


def _cmd_clue(args: argparse.Namespace) -> int:
    store, grid = _open_store_and_grid(args)
    target = parse_coordinate(args.cell)
    candidate = generate_clue(store, grid, target)
    if candidate is None:
        print(f"no clue passes the acceptance gate for {target.label()}")
    else:
        print(f"{candidate.word} {candidate.pair_score:.5f} {candidate.distractor_score:.5f} {candidate.total:.5f}")
    return EXIT_OK


def _cmd_replay_verify(args: argparse.Namespace) -> int:
    try:
        state, recorded = verify_log(args.logfile)
    except (SeqGap, CorruptRecord) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    digest = state.digest()
    if recorded is not None and recorded != digest:
        print(f"DigestMismatch: log records {recorded}, replay computes {digest}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"ok: {state.resolved_count} rounds, digest {digest}")
    return EXIT_OK


_HANDLERS = {
    "serve": _cmd_serve,
    "selfplay": _cmd_selfplay,
    "solve": _cmd_solve,
    "clue": _cmd_clue,
    "replay-verify": _cmd_replay_verify,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _HANDLERS[args.subcommand](args)
    except (SessionError, AssocError, GameError, SelfPlayStalled, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
