"""Headless batches: four agents at one table, statistics out.

Games are fully deterministic given the base seed and config, so a batch is
reproducible byte for byte, logs included. The embedding store is loaded once
and shared read-only across all games in the batch.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Optional

from motmalin.assoc import EmbeddingStore, load_embeddings
from motmalin.game import PhaseKind
from motmalin.session import (
    MissingFile,
    Session,
    SessionConfig,
    VirtualClock,
    create_session,
    packaged_data,
)

# A session tick normally drives the whole game to its end; a handful of
# retries covers nothing, it is purely a guard against a silent wedge.
MAX_TICKS = 64


class SelfPlayStalled(Exception):
    """No agent had a move and the game was not over."""


def play_game(
    config: SessionConfig,
    store: Optional[EmbeddingStore] = None,
    seat_stores: Optional[dict[int, EmbeddingStore]] = None,
) -> Session:
    """Run one all-agent game to its end; returns the finished session."""
    session = create_session(config, store=store, seat_stores=seat_stores, clock=VirtualClock())
    try:
        for _ in range(MAX_TICKS):
            if session.state.phase.kind is PhaseKind.END:
                return session
            if not session.tick():
                raise SelfPlayStalled(
                    f"seed {config.shuffle_seed}: no agent can act in "
                    f"{session.state.phase.kind.value} after {session.state.resolved_count} rounds"
                )
        raise SelfPlayStalled(f"seed {config.shuffle_seed}: not finished after {MAX_TICKS} ticks")
    finally:
        session.close()


def _load_stores(config: SessionConfig) -> tuple[EmbeddingStore, dict[int, EmbeddingStore]]:
    path = Path(config.embedding_file or packaged_data("demo_embeddings.txt"))
    if not path.exists():
        raise MissingFile(f"embedding file not found: {path}")
    store = load_embeddings(str(path))
    seat_stores = {}
    for seat, seat_path in config.seat_embedding_files.items():
        if not Path(seat_path).exists():
            raise MissingFile(f"embedding file not found: {seat_path}")
        seat_stores[seat] = load_embeddings(str(seat_path))
    return store, seat_stores


def selfplay(
    n: int,
    base_seed: int = 0,
    config: Optional[SessionConfig] = None,
    log_dir: Optional[str] = None,
) -> dict:
    """Play n games seeded base_seed..base_seed+n-1; aggregate a report.

    successRate is completed cells over resolutions across the whole batch
    (0.0 for an empty batch). perGame rows come out sorted by seed.
    """
    base = config or SessionConfig(condition="agents_only")
    if base.condition != "agents_only":
        base = replace(base, condition="agents_only")
    store, seat_stores = _load_stores(base) if n > 0 else (None, None)

    per_game = []
    total_completed = 0
    total_rounds = 0
    for i in range(n):
        seed = base_seed + i
        log_path = str(Path(log_dir) / f"game-{seed:06d}.jsonl") if log_dir else None
        cfg = replace(base, shuffle_seed=seed, session_id=f"selfplay-{seed}", log_path=log_path)
        session = play_game(cfg, store=store, seat_stores=seat_stores)
        completed = len(session.state.completed)
        rounds = session.state.resolved_count
        per_game.append({"seed": seed, "completed": completed, "rounds": rounds})
        total_completed += completed
        total_rounds += rounds

    return {
        "games": n,
        "successRate": total_completed / total_rounds if total_rounds else 0.0,
        "meanRounds": total_rounds / n if n else 0.0,
        "perGame": sorted(per_game, key=lambda g: g["seed"]),
    }
