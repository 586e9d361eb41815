"""Session host: one table, four seats, humans and agents mixed.

All commands funnel through a single lock per session, so the event log is a
serial history no matter how clients interleave. Every accepted command turns
into events that are appended to a JSON Lines log and broadcast to
subscribers; agents are polled after each accepted command (and on idle
ticks), and their game acts re-enter the same single-writer path.

Hidden information is enforced at the frame boundary: the card on a CardDealt
event rides only on the owner's copy, the shuffle seed never leaves the
server, and snapshots carry only the requesting seat's own card. The log file
itself is server-side and keeps everything, which is what makes ``replay``
able to rebuild the exact final state and compare digests.
"""

from __future__ import annotations

import json
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, TextIO, Union

import yaml

from motmalin.agent import (
    ActionKind,
    AgentProfile,
    AgentView,
    EmbodimentProfile,
    decide,
    load_templates,
    react,
    realize,
)
from motmalin.assoc import EmbeddingStore, load_embeddings
from motmalin.game import (
    Command,
    EventKind,
    GameError,
    GameEvent,
    GameState,
    Grid,
    NUM_SEATS,
    PRIVATE_EVENT_FIELDS,
    PhaseKind,
    Seat,
    apply_command,
    apply_event,
    new_game,
    replay_events,
)

CONDITIONS = ("humans_only", "eca_pair", "robot_pair", "hybrid", "agents_only")

# Log record types that are bookkeeping, not game events; replay skips them.
META_RECORD_TYPES = frozenset({"CommandRejected", "Instructions", "FinalDigest"})

# Hard ceiling on commands the agent pump may apply per tick. A full game is
# under 200; hitting this means agents are ping-ponging.
PUMP_LIMIT = 10_000

IDLE_TICK_SECONDS = 2.0


class SessionError(Exception):
    pass


class BadConfig(SessionError):
    pass


class MissingFile(SessionError):
    pass


class NotYourSeat(SessionError):
    pass


class Malformed(SessionError):
    pass


class SeqGap(SessionError):
    def __init__(self, at: int, message: str = ""):
        self.at = at
        super().__init__(message or f"sequence gap at record {at}")


class CorruptRecord(SessionError):
    def __init__(self, at: int, message: str = ""):
        self.at = at
        super().__init__(message or f"corrupt record at {at}")


@dataclass(frozen=True)
class LogRecord:
    seq: int
    ts: int
    session: str
    actor: Union[int, str]
    type: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "ts": self.ts,
                "session": self.session,
                "actor": self.actor,
                "type": self.type,
                "payload": self.payload,
            },
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str, at: int) -> "LogRecord":
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptRecord(at, f"record {at}: not valid JSON ({exc.msg})") from None
        try:
            return cls(
                seq=int(data["seq"]),
                ts=int(data["ts"]),
                session=str(data["session"]),
                actor=data["actor"],
                type=str(data["type"]),
                payload=dict(data["payload"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptRecord(at, f"record {at}: missing or bad field ({exc})") from None


@dataclass(frozen=True)
class SessionConfig:
    condition: str = "humans_only"
    grid_file: Optional[str] = None
    embedding_file: Optional[str] = None
    agent_profiles: tuple[AgentProfile, ...] = ()
    shuffle_seed: int = 0
    log_path: Optional[str] = None
    session_id: str = "S1"
    agent_faces: tuple[str, str] = ("amber", "cobalt")
    agent_voices: tuple[str, str] = ("alto", "tenor")
    port: int = 8765
    # per-seat embedding overrides, e.g. to study players with unlike lexicons
    seat_embedding_files: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise BadConfig(f"unknown condition {self.condition!r}")


def _profile_from_dict(data: dict) -> AgentProfile:
    kw = {}
    mapping = {
        "name": "name",
        "proactivity": "proactivity",
        "confidenceThreshold": "confidence_threshold",
        "intimacyLevel": "intimacy_level",
        "hintStyle": "hint_style",
        "rngSeed": "rng_seed",
    }
    for src, dst in mapping.items():
        if src in data:
            kw[dst] = data[src]
    if "templatesFile" in data:
        kw["templates"] = load_templates(data["templatesFile"])
    try:
        return AgentProfile(**kw)
    except (TypeError, ValueError) as exc:
        raise BadConfig(f"bad agent profile: {exc}") from None


def load_config(path) -> SessionConfig:
    """Read a session config file (YAML mapping, wire-style key names)."""
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"config file not found: {p}")
    with open(p, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise BadConfig(f"{p}: config must be a mapping")
    try:
        profiles = tuple(_profile_from_dict(d) for d in data.get("agentProfiles", []))
        return SessionConfig(
            condition=data.get("condition", "humans_only"),
            grid_file=data.get("gridFile"),
            embedding_file=data.get("embeddingFile"),
            agent_profiles=profiles,
            shuffle_seed=int(data.get("shuffleSeed", 0)),
            log_path=data.get("logPath"),
            session_id=str(data.get("sessionId", "S1")),
            agent_faces=tuple(data.get("agentFaces", ("amber", "cobalt"))),
            agent_voices=tuple(data.get("agentVoices", ("alto", "tenor"))),
            port=int(data.get("port", 8765)),
            seat_embedding_files={int(k): v for k, v in data.get("seatEmbeddingFiles", {}).items()},
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise BadConfig(f"{p}: {exc}") from None


def load_grid(path) -> Grid:
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"grid file not found: {p}")
    with open(p, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict) or "columns" not in data or "rows" not in data:
        raise BadConfig(f"{p}: grid file needs 'columns' and 'rows' lists")
    return Grid(tuple(data["columns"]), tuple(data["rows"]))


def packaged_data(name: str) -> Path:
    """Path of a data file shipped inside the package."""
    return Path(str(resources.files("motmalin") / "data" / name))


class MonotonicClock:
    """Milliseconds since session start, from the process monotonic clock."""

    def __init__(self) -> None:
        self._t0 = time.monotonic()

    def __call__(self) -> int:
        return int((time.monotonic() - self._t0) * 1000)


class VirtualClock:
    """Deterministic clock for headless runs: a fixed step per record."""

    def __init__(self, step_ms: int = 10) -> None:
        self._now = 0
        self._step = step_ms

    def __call__(self) -> int:
        self._now += self._step
        return self._now


@dataclass
class AgentRuntime:
    seat: int
    profile: AgentProfile
    embodiment: EmbodimentProfile
    store: EmbeddingStore
    cursor: int = 0  # history index up to which events were already reacted to


Subscriber = Callable[[dict], None]


class Session:
    """One live table. All mutation happens under one lock."""

    def __init__(
        self,
        session_id: str,
        state: GameState,
        occupants: tuple[str, ...],
        agents: dict[int, AgentRuntime],
        clock: Callable[[], int],
        log_stream: Optional[TextIO] = None,
    ) -> None:
        self.id = session_id
        self.state = state
        self.occupants = occupants
        self.agents = agents
        self._clock = clock
        self._lock = threading.Lock()
        self._log_stream = log_stream
        self.records: list[LogRecord] = []
        self._subscribers: list[tuple[Optional[int], Subscriber]] = []
        self.seat_tokens: dict[int, str] = {}
        self._final_logged = False
        for event in state.history:
            self._append_record(event.seat if event.seat is not None else "server",
                                event.kind.value, self._event_log_payload(event))

    # ------------------------------------------------------------- logging

    @staticmethod
    def _event_log_payload(event: GameEvent) -> dict:
        payload = event.payload()
        payload.pop("type", None)
        payload.pop("seat", None)
        return payload

    def _append_record(self, actor: Union[int, str], type_: str, payload: dict) -> LogRecord:
        record = LogRecord(
            seq=len(self.records) + 1,
            ts=self._clock(),
            session=self.id,
            actor=actor,
            type=type_,
            payload=payload,
        )
        self.records.append(record)
        if self._log_stream is not None:
            # flush per record: the log must survive a killed process
            self._log_stream.write(record.to_json() + "\n")
            self._log_stream.flush()
        return record

    def close(self) -> None:
        if self._log_stream is not None:
            self._log_stream.flush()
            self._log_stream.close()
            self._log_stream = None

    # ----------------------------------------------------------- frames

    def subscribe(self, seat: Optional[int], send: Subscriber) -> Callable[[], None]:
        """Attach a frame sink for one seat; returns a detach callable."""
        entry = (seat, send)
        self._subscribers.append(entry)

        def detach() -> None:
            if entry in self._subscribers:
                self._subscribers.remove(entry)

        return detach

    def _send_to_seat(self, seat: int, frame: dict) -> None:
        for sub_seat, send in list(self._subscribers):
            if sub_seat == seat:
                send(frame)

    def _broadcast_event(self, event: GameEvent) -> None:
        public = {"kind": "event", "body": event.public_payload()}
        has_private = bool(PRIVATE_EVENT_FIELDS.get(event.kind)) and event.seat is not None
        for sub_seat, send in list(self._subscribers):
            if has_private and sub_seat == event.seat:
                send({"kind": "event", "body": event.payload()})
            else:
                send(public)

    def _broadcast(self, frame: dict) -> None:
        for _, send in list(self._subscribers):
            send(frame)

    # ---------------------------------------------------------- snapshots

    def snapshot(self, seat: int) -> dict:
        """Everything one seat may know, for (re)joining clients."""
        state = self.state
        slots = []
        for s in range(NUM_SEATS):
            runtime = self.agents.get(s)
            slots.append(
                {
                    "seat": s,
                    "color": Seat(s).color,
                    "occupant": self.occupants[s],
                    "embodiment": None
                    if runtime is None
                    else {"kind": runtime.embodiment.kind, "faceId": runtime.embodiment.face_id},
                }
            )
        own_card = state.hands[seat]
        return {
            "session": self.id,
            "yourSeat": seat,
            "yourCard": own_card.label() if own_card else None,
            "seats": slots,
            "grid": state.grid.to_dict(),
            "phase": state.phase.to_dict(),
            "selections": [c.label() if c else None for c in state.selections],
            "completed": sorted(c.label() for c in state.completed),
            "resolvedCount": state.resolved_count,
            "deckSize": len(state.deck),
            "clues": [e.word for e in state.history if e.kind is EventKind.CLUE_PROPOSED],
        }

    def join(self, seat: int, token: Optional[str] = None) -> tuple[str, dict]:
        """Claim or resume a human seat; returns (seat token, snapshot)."""
        with self._lock:
            if seat not in range(NUM_SEATS):
                raise NotYourSeat(f"no such seat {seat}")
            if self.occupants[seat] != "human":
                raise NotYourSeat(f"seat {seat} is played by an agent")
            issued = self.seat_tokens.get(seat)
            if issued is None:
                token = secrets.token_hex(8)
                self.seat_tokens[seat] = token
            elif token != issued:
                raise NotYourSeat(f"seat {seat} is already claimed")
            else:
                token = issued
            return token, self.snapshot(seat)

    # ----------------------------------------------------------- commands

    def submit(self, seat: int, body: dict) -> bool:
        """Apply one seat's command; returns True if it was accepted.

        Rejections are logged and reported to the sender's frames only.
        """
        with self._lock:
            accepted = self._handle_command(seat, body)
            self._pump()
            self._seal_if_ended()
            return accepted

    def handle_message(self, sender_seat: int, msg: dict) -> bool:
        """Entry point for wire messages from an authenticated connection."""
        error: Optional[Exception] = None
        body: dict = {}
        if not isinstance(msg, dict) or msg.get("kind") != "command":
            error = Malformed("expected a command message")
        elif msg.get("seat") != sender_seat:
            error = NotYourSeat(f"message seat {msg.get('seat')} is not yours")
            body = msg.get("body") if isinstance(msg.get("body"), dict) else {}
        elif not isinstance(msg.get("body"), dict):
            error = Malformed("command body must be an object")
        else:
            body = msg["body"]
        if error is not None:
            with self._lock:
                self._reject(sender_seat, body, error)
            return False
        return self.submit(sender_seat, body)

    def tick(self) -> bool:
        """Idle poll: give agents a chance to act; True if anything happened."""
        with self._lock:
            before = len(self.state.history)
            self._pump()
            self._seal_if_ended()
            return len(self.state.history) > before

    def _reject(self, seat: int, body: dict, error: Exception) -> None:
        name = type(error).__name__
        self._append_record(seat, "CommandRejected", {"command": body, "error": name, "message": str(error)})
        self._send_to_seat(seat, {"kind": "error", "body": {"error": name, "message": str(error)}})

    def _handle_command(self, seat: int, body: dict) -> bool:
        try:
            command = self._parse_command(seat, body)
            new_state, events = apply_command(self.state, command)
        except (GameError, SessionError) as exc:
            self._reject(seat, body, exc)
            return False
        self.state = new_state
        for event in events:
            self._append_record(
                event.seat if event.seat is not None else "server",
                event.kind.value,
                self._event_log_payload(event),
            )
            self._broadcast_event(event)
        return True

    @staticmethod
    def _parse_command(seat: int, body: dict) -> Command:
        if not isinstance(body, dict) or "type" not in body:
            raise Malformed("command body needs a 'type' field")
        try:
            return Command.from_body(seat, body)
        except GameError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise Malformed(f"bad command body: {exc}") from None

    # -------------------------------------------------------------- agents

    def _emit_actions(self, runtime: AgentRuntime, actions: list) -> None:
        social = [a for a in actions if a.kind is not ActionKind.GAME_ACT]
        if not social:
            return
        instructions = [
            inst.to_dict()
            for inst in realize(social, runtime.embodiment, runtime.profile.templates)
        ]
        if not instructions:
            return
        self._append_record(runtime.seat, "Instructions", {"instructions": instructions})
        self._broadcast({"kind": "instruction", "seat": runtime.seat, "body": {"instructions": instructions}})

    def _react_pass(self) -> None:
        for seat in sorted(self.agents):
            runtime = self.agents[seat]
            fresh = self.state.history[runtime.cursor:]
            runtime.cursor = len(self.state.history)
            view = AgentView.from_state(self.state, seat)
            for event in fresh:
                if event.kind is EventKind.RESOLUTION_ANNOUNCED:
                    self._emit_actions(runtime, react(runtime.profile, event, view))

    def _pump(self) -> None:
        """Poll agents until the table is quiescent.

        Each pass applies at most the first game act found (ascending seat
        order), then re-polls: any act planned against a stale view is simply
        re-derived from the new one.
        """
        if not self.agents:
            return
        for _ in range(PUMP_LIMIT):
            self._react_pass()
            queued: Optional[tuple[AgentRuntime, Command]] = None
            for seat in sorted(self.agents):
                runtime = self.agents[seat]
                view = AgentView.from_state(self.state, seat)
                actions = decide(runtime.profile, runtime.embodiment, view, runtime.store)
                if not actions:
                    continue
                self._emit_actions(runtime, actions)
                if queued is None:
                    for action in actions:
                        if action.kind is ActionKind.GAME_ACT:
                            queued = (runtime, action.command)
                            break
            if queued is None:
                return
            runtime, command = queued
            self._handle_command(runtime.seat, command.to_body())
        raise RuntimeError(f"agent pump exceeded {PUMP_LIMIT} commands in one tick")

    def _seal_if_ended(self) -> None:
        if self.state.phase.kind is PhaseKind.END and not self._final_logged:
            self._react_pass()  # reactions to the last verdict
            self._final_logged = True
            self._append_record("server", "FinalDigest", {"digest": self.state.digest()})


# ------------------------------------------------------------------ setup


def _agent_seats(condition: str) -> tuple[int, ...]:
    if condition == "humans_only":
        return ()
    if condition == "agents_only":
        return (0, 1, 2, 3)
    return (2, 3)


def _embodiments(config: SessionConfig) -> dict[int, EmbodimentProfile]:
    faces, voices = config.agent_faces, config.agent_voices
    seats = _agent_seats(config.condition)
    if not seats:
        return {}
    if config.condition == "agents_only":
        return {
            s: EmbodimentProfile(
                kind="robot" if s % 2 == 0 else "eca",
                face_id=f"face{s}",
                voice_id=f"voice{s}",
            )
            for s in seats
        }
    if len(set(faces)) != 2 or len(set(voices)) != 2:
        raise BadConfig("the two agents need distinct faces and distinct voices")
    if config.condition == "eca_pair":
        kinds = ("eca", "eca")
        order = (0, 1)
    elif config.condition == "robot_pair":
        kinds = ("robot", "robot")
        order = (0, 1)
    else:  # hybrid: which body sits where, and which face it wears, is drawn per session
        rng = random.Random(f"hybrid:{config.shuffle_seed}")
        kinds = tuple(rng.sample(("eca", "robot"), 2))
        order = tuple(rng.sample((0, 1), 2))
    return {
        seat: EmbodimentProfile(kind=kinds[i], face_id=faces[order[i]], voice_id=voices[order[i]])
        for i, seat in enumerate(seats)
    }


def _default_profile(seat: int, condition: str) -> AgentProfile:
    return AgentProfile(
        name=f"agent{seat}",
        proactivity=1.0 if condition == "agents_only" else 0.8,
        confidence_threshold=0.3,
        intimacy_level=0.5,
        rng_seed=seat,
    )


def create_session(
    config: SessionConfig,
    store: Optional[EmbeddingStore] = None,
    seat_stores: Optional[dict[int, EmbeddingStore]] = None,
    clock: Optional[Callable[[], int]] = None,
) -> Session:
    """Build a live session: grid, deal, agents, open log.

    A preloaded store (or per-seat stores) may be passed to share embedding
    tables between many sessions; otherwise files from the config are loaded,
    falling back to the packaged demo data.
    """
    grid = load_grid(config.grid_file or packaged_data("demo_grid.yaml"))

    agent_seats = _agent_seats(config.condition)
    if store is None:
        embedding_path = Path(config.embedding_file or packaged_data("demo_embeddings.txt"))
        if agent_seats and not embedding_path.exists():
            raise MissingFile(f"embedding file not found: {embedding_path}")
        store = load_embeddings(str(embedding_path)) if agent_seats else None
    stores: dict[int, EmbeddingStore] = dict(seat_stores or {})
    for seat, path in config.seat_embedding_files.items():
        if seat not in stores:
            if not Path(path).exists():
                raise MissingFile(f"embedding file not found: {path}")
            stores[seat] = load_embeddings(str(path))

    embodiments = _embodiments(config)
    if len(config.agent_profiles) > len(agent_seats):
        raise BadConfig(f"{len(config.agent_profiles)} agent profiles for {len(agent_seats)} agent seats")
    agents: dict[int, AgentRuntime] = {}
    for i, seat in enumerate(agent_seats):
        profile = (
            config.agent_profiles[i]
            if i < len(config.agent_profiles)
            else _default_profile(seat, config.condition)
        )
        agents[seat] = AgentRuntime(
            seat=seat,
            profile=profile,
            embodiment=embodiments[seat],
            store=stores.get(seat, store),
        )

    occupants = tuple("agent" if s in agents else "human" for s in range(NUM_SEATS))
    seats = tuple(
        Seat(s, occupant=occupants[s], profile_ref=agents[s].profile.name if s in agents else None)
        for s in range(NUM_SEATS)
    )
    state = new_game(grid, seats, config.shuffle_seed)

    log_stream = None
    if config.log_path:
        log_dir = Path(config.log_path).parent
        log_dir.mkdir(parents=True, exist_ok=True)
        log_stream = open(config.log_path, "w", encoding="utf-8")

    return Session(
        session_id=config.session_id,
        state=state,
        occupants=occupants,
        agents=agents,
        clock=clock or MonotonicClock(),
        log_stream=log_stream,
    )


# ------------------------------------------------------------------ replay


def read_log(path) -> list[LogRecord]:
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"log file not found: {p}")
    records = []
    with open(p, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(LogRecord.from_json(line, at=lineno))
    return records


def replay(records: list[LogRecord]) -> GameState:
    """Rebuild the game state a log describes, validating as it goes.

    seq must run 1,2,3,... with no gaps; bookkeeping records are skipped;
    every game record must decode into an event the state machine can fold.
    """
    state: Optional[GameState] = None
    expected = 1
    for record in records:
        if record.seq != expected:
            raise SeqGap(record.seq, f"expected seq {expected}, found {record.seq}")
        expected += 1
        if record.type in META_RECORD_TYPES:
            continue
        payload = dict(record.payload)
        payload["type"] = record.type
        if isinstance(record.actor, int):
            payload["seat"] = record.actor
        try:
            event = GameEvent.from_payload(payload)
            if state is None:
                state = replay_events([event])
            else:
                state = apply_event(state, event)
        except SessionError:
            raise
        except Exception as exc:
            raise CorruptRecord(record.seq, f"record {record.seq}: {exc}") from None
    if state is None:
        raise CorruptRecord(0, "log contains no game events")
    return state


def recorded_digest(records: list[LogRecord]) -> Optional[str]:
    for record in reversed(records):
        if record.type == "FinalDigest":
            return record.payload.get("digest")
    return None


def verify_log(path) -> tuple[GameState, Optional[str]]:
    """Replay a log file; returns (state, digest recorded at the end if any)."""
    records = read_log(path)
    state = replay(records)
    return state, recorded_digest(records)
