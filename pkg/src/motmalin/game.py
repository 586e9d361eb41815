"""Rules engine for the Mot Malin cooperative word-association game.

The table is a 4x4 grid. Columns A-D and rows 1-4 each carry a word, eight
distinct words total, so every coordinate names a word pair. Each of the four
seats holds one hidden card (a coordinate). Any card holder may take the floor
(one at a time), type a clue word relating their pair, and the three other
seats must unanimously tap one cell. The engine then compares the agreed cell
against the speaker's hidden card, marks the cell completed on success, the
card is discarded either way, a fresh card is dealt while the deck lasts, and
the game ends once all 16 cards have been played.

Everything here is pure and event-sourced: ``apply_command`` validates a
command against the current state and emits ``GameEvent``s, and the state is
nothing but the fold of those events (``replay_events``). Reapplying a state's
own history reproduces it exactly, which is what makes server logs replayable.

Verdicts are computed by the engine from the hidden card, never trusted from
the speaker; a ``ConfirmResolution`` is only a pacing act.
"""

from __future__ import annotations

import hashlib
import json
import random
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

COLUMNS = ("A", "B", "C", "D")
ROWS = (1, 2, 3, 4)
NUM_SEATS = 4
SEAT_COLORS = ("red", "blue", "green", "yellow")


class GameError(Exception):
    """Base for every rules-engine rejection."""


class BadCoordinate(GameError):
    pass


class DuplicateGridWord(GameError):
    pass


class BadSeatCount(GameError):
    pass


class EmptyClue(GameError):
    pass


class MultiToken(GameError):
    pass


class GridWordClue(GameError):
    pass


class PhaseViolation(GameError):
    pass


class NotAGuesser(GameError):
    pass


class NotSpeaker(GameError):
    pass


class CompletedCell(GameError):
    pass


def normalize_word(raw: str) -> str:
    """Lowercased, NFKC-normalized, trimmed form used for every word compare."""
    return unicodedata.normalize("NFKC", raw).strip().lower()


@dataclass(frozen=True, slots=True)
class Coordinate:
    column: str
    row: int

    def __post_init__(self) -> None:
        if self.column not in COLUMNS or self.row not in ROWS:
            raise BadCoordinate(f"no such cell: {self.column!r}{self.row!r}")

    @property
    def row_major_index(self) -> int:
        # A1=0, B1=1, ... D4=15
        return (self.row - 1) * 4 + COLUMNS.index(self.column)

    def label(self) -> str:
        return f"{self.column}{self.row}"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.label()


def all_coordinates() -> tuple[Coordinate, ...]:
    """The 16 cells in row-major order (A1, B1, ... D4)."""
    return tuple(Coordinate(c, r) for r in ROWS for c in COLUMNS)


def parse_coordinate(text: str) -> Coordinate:
    """Parse a cell label like "B4" or " a1 "; raises BadCoordinate otherwise."""
    cleaned = text.strip().upper()
    if len(cleaned) != 2 or cleaned[0] not in COLUMNS or cleaned[1] not in "1234":
        raise BadCoordinate(f"cannot parse coordinate from {text!r}")
    return Coordinate(cleaned[0], int(cleaned[1]))


@dataclass(frozen=True, slots=True)
class Grid:
    """The eight table words: one per column A-D, one per row 1-4."""

    column_words: tuple[str, str, str, str]
    row_words: tuple[str, str, str, str]

    def __post_init__(self) -> None:
        cols = tuple(normalize_word(w) for w in self.column_words)
        rows = tuple(normalize_word(w) for w in self.row_words)
        if len(cols) != 4 or len(rows) != 4:
            raise DuplicateGridWord("grid needs exactly 4 column and 4 row words")
        if len(set(cols + rows)) != 8 or any(not w for w in cols + rows):
            raise DuplicateGridWord(f"grid words must be 8 distinct nonempty words: {cols + rows}")
        object.__setattr__(self, "column_words", cols)
        object.__setattr__(self, "row_words", rows)

    @property
    def words(self) -> tuple[str, ...]:
        return self.column_words + self.row_words

    def words_at(self, cell: Coordinate) -> tuple[str, str]:
        """The (column word, row word) pair a cell stands for."""
        return (
            self.column_words[COLUMNS.index(cell.column)],
            self.row_words[cell.row - 1],
        )

    def to_dict(self) -> dict:
        return {"columns": list(self.column_words), "rows": list(self.row_words)}

    @classmethod
    def from_dict(cls, data: dict) -> "Grid":
        return cls(tuple(data["columns"]), tuple(data["rows"]))


@dataclass(frozen=True, slots=True)
class Seat:
    """A table position. Color is fixed by position, never chosen."""

    id: int
    occupant: str = "human"  # "human" | "agent"
    profile_ref: Optional[str] = None

    def __post_init__(self) -> None:
        if self.id not in range(NUM_SEATS):
            raise BadSeatCount(f"seat id out of range: {self.id}")
        if self.occupant not in ("human", "agent"):
            raise ValueError(f"unknown occupant kind: {self.occupant!r}")

    @property
    def color(self) -> str:
        return SEAT_COLORS[self.id]


def validate_clue(grid: Grid, raw: str) -> str:
    """Normalize a typed clue and reject unusable ones.

    A clue is a single nonempty token after normalization and may not be one
    of the eight grid words (a grid word would trivialize the guess).
    """
    word = normalize_word(raw)
    if not word:
        raise EmptyClue("clue is empty")
    if any(ch.isspace() for ch in word):
        raise MultiToken(f"clue must be a single token: {raw!r}")
    if word in grid.words:
        raise GridWordClue(f"clue may not be a grid word: {word!r}")
    return word


class PhaseKind(str, Enum):
    OPEN = "Open"
    CLUE_ENTRY = "ClueEntry"
    GUESSING = "Guessing"
    RESOLUTION = "Resolution"
    END = "End"


@dataclass(frozen=True, slots=True)
class GamePhase:
    kind: PhaseKind
    speaker: Optional[int] = None
    clue: Optional[str] = None
    agreed: Optional[Coordinate] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.speaker is not None:
            out["speaker"] = self.speaker
        if self.clue is not None:
            out["clue"] = self.clue
        if self.agreed is not None:
            out["agreed"] = self.agreed.label()
        return out


PHASE_OPEN = GamePhase(PhaseKind.OPEN)
PHASE_END = GamePhase(PhaseKind.END)


class CommandKind(str, Enum):
    REQUEST_SPEAK = "RequestSpeak"
    CANCEL_SPEAK = "CancelSpeak"
    PROPOSE_CLUE = "ProposeClue"
    SELECT_CELL = "SelectCell"
    CONFIRM_RESOLUTION = "ConfirmResolution"


@dataclass(frozen=True, slots=True)
class Command:
    """Something a seat may attempt. Illegal commands are rejected, not UB."""

    kind: CommandKind
    seat: int
    word: Optional[str] = None
    cell: Optional[Coordinate] = None

    def to_body(self) -> dict:
        body: dict = {"type": self.kind.value}
        if self.word is not None:
            body["word"] = self.word
        if self.cell is not None:
            body["cell"] = self.cell.label()
        return body

    @classmethod
    def from_body(cls, seat: int, body: dict) -> "Command":
        kind = CommandKind(body["type"])
        word = body.get("word")
        cell = parse_coordinate(body["cell"]) if "cell" in body else None
        return cls(kind, seat, word=word, cell=cell)


def request_speak(seat: int) -> Command:
    return Command(CommandKind.REQUEST_SPEAK, seat)


def cancel_speak(seat: int) -> Command:
    return Command(CommandKind.CANCEL_SPEAK, seat)


def propose_clue(seat: int, word: Optional[str]) -> Command:
    return Command(CommandKind.PROPOSE_CLUE, seat, word=word)


def select_cell(seat: int, cell: Coordinate) -> Command:
    return Command(CommandKind.SELECT_CELL, seat, cell=cell)


def confirm_resolution(seat: int) -> Command:
    return Command(CommandKind.CONFIRM_RESOLUTION, seat)


class EventKind(str, Enum):
    GAME_STARTED = "GameStarted"
    CARD_DEALT = "CardDealt"
    SPEAK_REQUESTED = "SpeakRequested"
    SPEAK_CANCELLED = "SpeakCancelled"
    CLUE_PROPOSED = "ClueProposed"
    CELL_SELECTED = "CellSelected"
    AGREEMENT_REACHED = "AgreementReached"
    RESOLUTION_ANNOUNCED = "ResolutionAnnounced"
    CELL_COMPLETED = "CellCompleted"
    GAME_ENDED = "GameEnded"


# Event fields the public broadcast path must strip. The card on CardDealt
# travels only on the owner's private copy; the shuffle seed would let any
# client derive the whole deck.
PRIVATE_EVENT_FIELDS = {
    EventKind.CARD_DEALT: ("card",),
    EventKind.GAME_STARTED: ("shuffleSeed",),
}


@dataclass(frozen=True, slots=True)
class GameEvent:
    kind: EventKind
    seat: Optional[int] = None
    word: Optional[str] = None
    cell: Optional[Coordinate] = None
    success: Optional[bool] = None
    grid: Optional[Grid] = None
    seat_colors: Optional[tuple[str, ...]] = None
    shuffle_seed: Optional[int] = None
    completed_count: Optional[int] = None

    def payload(self) -> dict:
        """Full wire payload including seat; the log drops seat into `actor`."""
        out: dict = {"type": self.kind.value}
        if self.seat is not None:
            out["seat"] = self.seat
        if self.word is not None:
            out["word"] = self.word
        if self.cell is not None:
            key = {
                EventKind.CARD_DEALT: "card",
                EventKind.RESOLUTION_ANNOUNCED: "target",
            }.get(self.kind, "cell")
            out[key] = self.cell.label()
        if self.success is not None:
            out["success"] = self.success
        if self.grid is not None:
            out["grid"] = self.grid.to_dict()
        if self.seat_colors is not None:
            out["seatColors"] = list(self.seat_colors)
        if self.shuffle_seed is not None:
            out["shuffleSeed"] = self.shuffle_seed
        if self.completed_count is not None:
            out["completedCount"] = self.completed_count
        return out

    def public_payload(self) -> dict:
        out = self.payload()
        for field_name in PRIVATE_EVENT_FIELDS.get(self.kind, ()):
            out.pop(field_name, None)
        return out

    @classmethod
    def from_payload(cls, data: dict) -> "GameEvent":
        kind = EventKind(data["type"])
        cell_key = {
            EventKind.CARD_DEALT: "card",
            EventKind.RESOLUTION_ANNOUNCED: "target",
        }.get(kind, "cell")
        return cls(
            kind=kind,
            seat=data.get("seat"),
            word=data.get("word"),
            cell=parse_coordinate(data[cell_key]) if cell_key in data else None,
            success=data.get("success"),
            grid=Grid.from_dict(data["grid"]) if "grid" in data else None,
            seat_colors=tuple(data["seatColors"]) if "seatColors" in data else None,
            shuffle_seed=data.get("shuffleSeed"),
            completed_count=data.get("completedCount"),
        )


@dataclass(frozen=True, slots=True)
class GameState:
    grid: Grid
    deck: tuple[Coordinate, ...]
    hands: tuple[Optional[Coordinate], ...]
    resolved: frozenset[Coordinate]
    completed: frozenset[Coordinate]
    phase: GamePhase
    selections: tuple[Optional[Coordinate], ...]
    resolved_count: int
    history: tuple[GameEvent, ...]

    @property
    def speaker(self) -> Optional[int]:
        return self.phase.speaker

    def hand_of(self, seat: int) -> Optional[Coordinate]:
        return self.hands[seat]

    def to_dict(self) -> dict:
        """Canonical full serialization; set-valued fields sorted row-major."""
        return {
            "grid": self.grid.to_dict(),
            "deck": [c.label() for c in self.deck],
            "hands": [c.label() if c else None for c in self.hands],
            "resolved": sorted((c.label() for c in self.resolved)),
            "completed": sorted((c.label() for c in self.completed)),
            "phase": self.phase.to_dict(),
            "selections": [c.label() if c else None for c in self.selections],
            "resolvedCount": self.resolved_count,
            "history": [e.payload() for e in self.history],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _initial_state(started: GameEvent) -> GameState:
    if started.kind is not EventKind.GAME_STARTED:
        raise GameError("history must begin with GameStarted")
    if started.grid is None or started.shuffle_seed is None:
        raise GameError("GameStarted missing grid or shuffle seed")
    deck = list(all_coordinates())
    random.Random(started.shuffle_seed).shuffle(deck)
    return GameState(
        grid=started.grid,
        deck=tuple(deck),
        hands=(None,) * NUM_SEATS,
        resolved=frozenset(),
        completed=frozenset(),
        phase=PHASE_OPEN,
        selections=(None,) * NUM_SEATS,
        resolved_count=0,
        history=(started,),
    )


def apply_event(state: GameState, event: GameEvent) -> GameState:
    """Fold one event into the state. This is the only state mutator.

    Events are trusted here; legality is apply_command's job (and the
    session's replay wraps this with integrity checks for foreign logs).
    """
    k = event.kind
    hist = state.history + (event,)
    if k is EventKind.CARD_DEALT:
        card = state.deck[0]
        hands = list(state.hands)
        hands[event.seat] = card
        return replace(state, deck=state.deck[1:], hands=tuple(hands), history=hist)
    if k is EventKind.SPEAK_REQUESTED:
        return replace(state, phase=GamePhase(PhaseKind.CLUE_ENTRY, speaker=event.seat), history=hist)
    if k is EventKind.SPEAK_CANCELLED:
        return replace(state, phase=PHASE_OPEN, history=hist)
    if k is EventKind.CLUE_PROPOSED:
        phase = GamePhase(PhaseKind.GUESSING, speaker=event.seat, clue=event.word)
        return replace(state, phase=phase, history=hist)
    if k is EventKind.CELL_SELECTED:
        sel = list(state.selections)
        sel[event.seat] = event.cell
        return replace(state, selections=tuple(sel), history=hist)
    if k is EventKind.AGREEMENT_REACHED:
        phase = GamePhase(PhaseKind.RESOLUTION, speaker=state.phase.speaker, agreed=event.cell)
        return replace(state, phase=phase, selections=(None,) * NUM_SEATS, history=hist)
    if k is EventKind.RESOLUTION_ANNOUNCED:
        card = state.hands[event.seat]
        hands = list(state.hands)
        hands[event.seat] = None
        count = state.resolved_count + 1
        return replace(
            state,
            hands=tuple(hands),
            resolved=state.resolved | {card},
            resolved_count=count,
            phase=PHASE_END if count == 16 else PHASE_OPEN,
            history=hist,
        )
    if k is EventKind.CELL_COMPLETED:
        return replace(state, completed=state.completed | {event.cell}, history=hist)
    if k is EventKind.GAME_ENDED:
        return replace(state, history=hist)
    raise GameError(f"cannot fold event {k.value} mid-game")


def replay_events(events: Iterable[GameEvent]) -> GameState:
    """Rebuild a state from scratch by folding a full event history."""
    it = iter(events)
    try:
        first = next(it)
    except StopIteration:
        raise GameError("empty event history") from None
    state = _initial_state(first)
    for event in it:
        state = apply_event(state, event)
    return state


def new_game(grid: Grid, seats: tuple[Seat, ...], shuffle_seed: int) -> GameState:
    """Shuffle the 16 cards with the seed and deal one to each seat."""
    if len(seats) != NUM_SEATS or sorted(s.id for s in seats) != list(range(NUM_SEATS)):
        raise BadSeatCount(f"need exactly 4 seats with ids 0..3, got {[s.id for s in seats]}")
    started = GameEvent(
        EventKind.GAME_STARTED,
        grid=grid,
        seat_colors=SEAT_COLORS,
        shuffle_seed=shuffle_seed,
    )
    state = _initial_state(started)
    for seat in range(NUM_SEATS):
        card = state.deck[0]
        state = apply_event(state, GameEvent(EventKind.CARD_DEALT, seat=seat, cell=card))
    return state


def check_agreement(state: GameState) -> Optional[Coordinate]:
    """The unanimously selected cell, or None while guessers still differ."""
    if state.phase.kind is not PhaseKind.GUESSING:
        raise PhaseViolation(f"agreement is only defined while guessing, not in {state.phase.kind.value}")
    picks = [state.selections[s] for s in range(NUM_SEATS) if s != state.phase.speaker]
    if any(p is None for p in picks):
        return None
    if picks[0] == picks[1] == picks[2]:
        return picks[0]
    return None


def _guessers(state: GameState) -> list[int]:
    return [s for s in range(NUM_SEATS) if s != state.phase.speaker]


def apply_command(state: GameState, cmd: Command) -> tuple[GameState, list[GameEvent]]:
    """Validate one command and emit the events it causes.

    Pure: the input state is never touched; the returned state is exactly the
    fold of the returned events over it.
    """
    if cmd.seat not in range(NUM_SEATS):
        raise BadSeatCount(f"no such seat: {cmd.seat}")
    phase = state.phase
    events: list[GameEvent] = []

    if cmd.kind is CommandKind.REQUEST_SPEAK:
        if phase.kind is not PhaseKind.OPEN:
            raise PhaseViolation(f"cannot request to speak in {phase.kind.value}")
        if state.hands[cmd.seat] is None:
            raise PhaseViolation(f"seat {cmd.seat} holds no card")
        events.append(GameEvent(EventKind.SPEAK_REQUESTED, seat=cmd.seat))

    elif cmd.kind is CommandKind.CANCEL_SPEAK:
        if phase.kind is not PhaseKind.CLUE_ENTRY:
            raise PhaseViolation(f"nothing to cancel in {phase.kind.value}")
        if phase.speaker != cmd.seat:
            raise NotSpeaker(f"seat {cmd.seat} is not the speaker")
        events.append(GameEvent(EventKind.SPEAK_CANCELLED, seat=cmd.seat))

    elif cmd.kind is CommandKind.PROPOSE_CLUE:
        if phase.kind is not PhaseKind.CLUE_ENTRY:
            raise PhaseViolation(f"cannot propose a clue in {phase.kind.value}")
        if phase.speaker != cmd.seat:
            raise NotSpeaker(f"seat {cmd.seat} is not the speaker")
        word = validate_clue(state.grid, cmd.word or "")
        events.append(GameEvent(EventKind.CLUE_PROPOSED, seat=cmd.seat, word=word))

    elif cmd.kind is CommandKind.SELECT_CELL:
        if phase.kind is not PhaseKind.GUESSING:
            raise PhaseViolation(f"cannot select a cell in {phase.kind.value}")
        if cmd.seat == phase.speaker:
            raise NotAGuesser("the speaker never guesses their own clue")
        if cmd.cell is None:
            raise BadCoordinate("SelectCell carries no cell")
        if cmd.cell in state.completed:
            raise CompletedCell(f"{cmd.cell.label()} is already completed")
        events.append(GameEvent(EventKind.CELL_SELECTED, seat=cmd.seat, cell=cmd.cell))
        # Unanimity auto-advances to Resolution.
        interim = apply_event(state, events[0])
        agreed = check_agreement(interim)
        if agreed is not None:
            events.append(GameEvent(EventKind.AGREEMENT_REACHED, cell=agreed))

    elif cmd.kind is CommandKind.CONFIRM_RESOLUTION:
        if phase.kind is not PhaseKind.RESOLUTION:
            raise PhaseViolation(f"nothing to confirm in {phase.kind.value}")
        if phase.speaker != cmd.seat:
            raise NotSpeaker(f"seat {cmd.seat} is not the speaker")
        card = state.hands[cmd.seat]
        success = phase.agreed == card
        events.append(
            GameEvent(EventKind.RESOLUTION_ANNOUNCED, seat=cmd.seat, success=success, cell=phase.agreed)
        )
        if success:
            events.append(GameEvent(EventKind.CELL_COMPLETED, cell=phase.agreed))
        if state.deck:
            events.append(GameEvent(EventKind.CARD_DEALT, seat=cmd.seat, cell=state.deck[0]))
        if state.resolved_count + 1 == 16:
            done = len(state.completed | ({phase.agreed} if success else frozenset()))
            events.append(GameEvent(EventKind.GAME_ENDED, completed_count=done))

    else:  # pragma: no cover - enum is closed
        raise GameError(f"unknown command kind {cmd.kind}")

    new_state = state
    for event in events:
        new_state = apply_event(new_state, event)
    return new_state, events


def legal_commands(state: GameState, seat: int) -> set[Command]:
    """Every command apply_command would accept from this seat right now.

    ProposeClue appears as a template with word=None, standing for any word
    that passes validate_clue; the clue vocabulary is unbounded.
    """
    phase = state.phase
    if phase.kind is PhaseKind.OPEN:
        if state.hands[seat] is not None:
            return {request_speak(seat)}
        return set()
    if phase.kind is PhaseKind.CLUE_ENTRY:
        if phase.speaker == seat:
            return {propose_clue(seat, None), cancel_speak(seat)}
        return set()
    if phase.kind is PhaseKind.GUESSING:
        if phase.speaker == seat:
            return set()
        return {select_cell(seat, c) for c in all_coordinates() if c not in state.completed}
    if phase.kind is PhaseKind.RESOLUTION:
        if phase.speaker == seat:
            return {confirm_resolution(seat)}
        return set()
    return set()


def is_legal(state: GameState, cmd: Command) -> bool:
    """Membership test that treats a concrete ProposeClue as its template."""
    legal = legal_commands(state, cmd.seat)
    if cmd.kind is CommandKind.PROPOSE_CLUE:
        if propose_clue(cmd.seat, None) not in legal:
            return False
        try:
            validate_clue(state.grid, cmd.word or "")
        except GameError:
            return False
        return True
    return cmd in legal
