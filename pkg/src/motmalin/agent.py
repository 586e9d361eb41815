"""Autonomous player: game decisions, social reactions, and their embodiment.

The decision process is a dispatch over the game phase. Holding a card in the
open phase, the agent asks the association engine for a clue and takes the
floor only when the clue scores above its confidence threshold (and its
proactivity allows); as a guesser it picks the top inferred cell; as the
speaker in resolution it confirms. Social warmth (smiles, gaze, vulnerability
admissions, call-backs to earlier clues) rides along with a probability set by
the profile's intimacy level.

High-level acts are embodiment-agnostic. ``realize`` lowers them into
instructions a specific body can execute, substituting the nearest equivalent
when a capability is missing rather than dropping the act: a body without
arms nods instead of opening its hands.

Everything is a pure function of (profile, view, store): randomness comes from
an RNG derived by hashing the profile seed with the view fingerprint, so the
same situation always produces the same behavior and whole sessions replay
deterministically.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import yaml

from motmalin.assoc import EmbeddingStore, generate_clue, infer_coordinates
from motmalin.game import (
    Command,
    Coordinate,
    EventKind,
    GamePhase,
    GameState,
    GameEvent,
    Grid,
    NUM_SEATS,
    PhaseKind,
    confirm_resolution,
    cancel_speak,
    propose_clue,
    request_speak,
    select_cell,
)


class AgentError(Exception):
    pass


class UnknownTemplate(AgentError):
    pass


# Capability names a body may offer.
CAP_FACE = "FacialExpression"
CAP_HEAD = "HeadMovement"
CAP_GAZE = "Gaze"
CAP_SPEECH = "Speech"
CAP_GESTURE = "UpperBodyGesture"

EMBODIMENT_CAPABILITIES: dict[str, frozenset[str]] = {
    "robot": frozenset({CAP_FACE, CAP_HEAD, CAP_GAZE, CAP_SPEECH}),
    "eca": frozenset({CAP_FACE, CAP_HEAD, CAP_GAZE, CAP_SPEECH, CAP_GESTURE}),
}

REQUIRED_TEMPLATE_KEYS = frozenset({"celebrate", "vulnerability", "partial_hint", "reference_previous"})

DEFAULT_TEMPLATES: Mapping[str, str] = {
    "celebrate": "Yes! We found it together.",
    "vulnerability": "Word games are honestly not my strong suit, bear with me.",
    "partial_hint": "I think the clue points to {sure_word}, but the {unsure_axis} puzzles me.",
    "reference_previous": "That reminds me of {word} from earlier.",
}


def load_templates(path) -> dict[str, str]:
    """Read a key → utterance mapping; every referenced key must be present."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise UnknownTemplate(f"{path}: template file must map keys to strings")
    missing = REQUIRED_TEMPLATE_KEYS - data.keys()
    if missing:
        raise UnknownTemplate(f"{path}: missing template keys {sorted(missing)}")
    return dict(data)


@dataclass(frozen=True)
class AgentProfile:
    """Strategy and warmth knobs for one autonomous seat."""

    name: str = "agent"
    proactivity: float = 0.8
    confidence_threshold: float = 0.3
    intimacy_level: float = 0.5
    hint_style: str = "silent"  # "silent" | "partialHint"
    rng_seed: int = 0
    templates: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))

    def __post_init__(self) -> None:
        for label, value in (
            ("proactivity", self.proactivity),
            ("intimacyLevel", self.intimacy_level),
        ):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{label} must be within [0,1], got {value}")
        if self.hint_style not in ("silent", "partialHint"):
            raise ValueError(f"unknown hint style {self.hint_style!r}")
        missing = REQUIRED_TEMPLATE_KEYS - set(self.templates)
        if missing:
            raise UnknownTemplate(f"profile {self.name!r} lacks templates {sorted(missing)}")


@dataclass(frozen=True)
class EmbodimentProfile:
    """What one body can do, and which face and voice it wears."""

    kind: str  # "robot" | "eca"
    face_id: str
    voice_id: str

    def __post_init__(self) -> None:
        if self.kind not in EMBODIMENT_CAPABILITIES:
            raise ValueError(f"unknown embodiment kind {self.kind!r}")

    @property
    def capabilities(self) -> frozenset[str]:
        return EMBODIMENT_CAPABILITIES[self.kind]


class ActionKind(str, Enum):
    GAME_ACT = "GameAct"
    SAY = "Say"
    EXPRESS_JOY = "ExpressJoy"
    EXPRESS_DISAPPOINTMENT = "ExpressDisappointment"
    SMILE = "Smile"
    HEAD_NOD = "HeadNod"
    GAZE_AT = "GazeAt"
    OPEN_HAND_GESTURE = "OpenHandGesture"
    VULNERABILITY_DISCLOSURE = "VulnerabilityDisclosure"
    REFERENCE_PREVIOUS_WORD = "ReferencePreviousWord"


@dataclass(frozen=True)
class BehaviorAction:
    """One high-level act: either a game command or a social behavior."""

    kind: ActionKind
    command: Optional[Command] = None
    template_key: Optional[str] = None
    slots: tuple[tuple[str, str], ...] = ()
    seat: Optional[int] = None
    word: Optional[str] = None


def game_act(command: Command) -> BehaviorAction:
    return BehaviorAction(ActionKind.GAME_ACT, command=command)


def say(template_key: str, **slots: str) -> BehaviorAction:
    return BehaviorAction(ActionKind.SAY, template_key=template_key, slots=tuple(sorted(slots.items())))


def gaze_at(seat: int) -> BehaviorAction:
    return BehaviorAction(ActionKind.GAZE_AT, seat=seat)


@dataclass(frozen=True)
class Instruction:
    """A single body-level step, scheduled by onset."""

    kind: str  # SetFace | MoveHead | LookAt | Speak | PlayGesture
    onset_ms: int
    expression: Optional[str] = None
    motion: Optional[str] = None
    seat: Optional[int] = None
    text: Optional[str] = None
    gesture: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "onsetMs": self.onset_ms}
        for key, value in (
            ("expression", self.expression),
            ("motion", self.motion),
            ("seat", self.seat),
            ("text", self.text),
            ("gesture", self.gesture),
        ):
            if value is not None:
                out[key] = value
        return out


INSTRUCTION_CAPABILITY = {
    "SetFace": CAP_FACE,
    "MoveHead": CAP_HEAD,
    "LookAt": CAP_GAZE,
    "Speak": CAP_SPEECH,
    "PlayGesture": CAP_GESTURE,
}

# When a body lacks the capability an act needs, perform this act instead.
ACTION_SUBSTITUTIONS = {
    ActionKind.OPEN_HAND_GESTURE: ActionKind.HEAD_NOD,
}


@dataclass(frozen=True)
class AgentView:
    """Everything one seat is allowed to see: the public table plus own card."""

    seat: int
    card: Optional[Coordinate]
    grid: Grid
    phase: GamePhase
    selections: tuple[Optional[Coordinate], ...]
    completed: frozenset[Coordinate]
    resolved_count: int
    clues: tuple[str, ...]
    history_len: int

    @classmethod
    def from_state(cls, state: GameState, seat: int) -> "AgentView":
        return cls(
            seat=seat,
            card=state.hands[seat],
            grid=state.grid,
            phase=state.phase,
            selections=state.selections,
            completed=state.completed,
            resolved_count=state.resolved_count,
            clues=tuple(e.word for e in state.history if e.kind is EventKind.CLUE_PROPOSED),
            history_len=len(state.history),
        )


def _derived_rng(profile: AgentProfile, view: AgentView, salt: str) -> random.Random:
    # hash-seeded so behavior is a pure function of (profile, situation)
    fingerprint = f"{profile.rng_seed}|{view.seat}|{view.history_len}|{view.resolved_count}|{salt}"
    digest = hashlib.sha256(fingerprint.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _decorations(profile: AgentProfile, view: AgentView, rng: random.Random) -> list[BehaviorAction]:
    out: list[BehaviorAction] = []
    if rng.random() < profile.intimacy_level:
        out.append(BehaviorAction(ActionKind.SMILE))
    if rng.random() < profile.intimacy_level:
        listeners = [s for s in range(NUM_SEATS) if s != view.seat]
        out.append(gaze_at(rng.choice(listeners)))
    if view.clues and rng.random() < profile.intimacy_level:
        out.append(BehaviorAction(ActionKind.REFERENCE_PREVIOUS_WORD, word=view.clues[-1]))
    return out


def decide(
    profile: AgentProfile,
    embodiment: EmbodimentProfile,
    view: AgentView,
    store: EmbeddingStore,
) -> list[BehaviorAction]:
    """Choose this tick's acts for one seat. Empty list means wait.

    Open: take the floor when a confident clue exists for the held card.
    ClueEntry (as speaker): say that clue, or step back if it evaporated.
    Guessing (as guesser): pick once; when the table is split three ways,
    fall in behind the lowest-numbered guesser so a verdict is reached.
    Resolution (as speaker): confirm.
    """
    phase = view.phase
    rng = _derived_rng(profile, view, "decide")
    actions: list[BehaviorAction] = []

    if phase.kind is PhaseKind.OPEN:
        if view.card is None:
            return []
        candidate = generate_clue(store, view.grid, view.card, completed=view.completed)
        if candidate is None or candidate.total < profile.confidence_threshold:
            return []
        if rng.random() < profile.proactivity:
            actions.append(game_act(request_speak(view.seat)))

    elif phase.kind is PhaseKind.CLUE_ENTRY:
        if phase.speaker != view.seat:
            return []
        candidate = generate_clue(store, view.grid, view.card, completed=view.completed)
        if candidate is None:
            return [game_act(cancel_speak(view.seat))]
        actions.append(game_act(propose_clue(view.seat, candidate.word)))

    elif phase.kind is PhaseKind.GUESSING:
        if phase.speaker == view.seat:
            return []
        own_pick = view.selections[view.seat]
        if own_pick is None:
            actions.extend(plan_guess(profile, view, store, phase.clue))
        else:
            guessers = [s for s in range(NUM_SEATS) if s != phase.speaker]
            picks = [view.selections[s] for s in guessers]
            if all(p is not None for p in picks):
                anchor = picks[0]
                if own_pick != anchor:
                    # deadlock breaker: adopt the first guesser's pick
                    actions.append(game_act(select_cell(view.seat, anchor)))
        if not actions:
            return []

    elif phase.kind is PhaseKind.RESOLUTION:
        if phase.speaker != view.seat:
            return []
        actions.append(game_act(confirm_resolution(view.seat)))

    else:  # End
        return []

    if actions:
        actions.extend(_decorations(profile, view, rng))
    return actions


def _axis_confidence(store: EmbeddingStore, clue: str, words: tuple[str, ...]) -> tuple[float, str]:
    best = -2.0
    best_word = words[0]
    for w in words:
        sim = store.similarity(clue, w) if w in store else 0.0
        if sim > best:
            best, best_word = sim, w
    return best, best_word


def plan_guess(
    profile: AgentProfile,
    view: AgentView,
    store: EmbeddingStore,
    clue: str,
) -> list[BehaviorAction]:
    """Pick the best open cell for a clue, looking at the speaker.

    With the partialHint style, when exactly one axis of the grid is a
    confident match the agent says which word it is sure about before
    tapping its cell.
    """
    inferred = infer_coordinates(store, clue, view.grid, completed=view.completed)
    actions = [
        game_act(select_cell(view.seat, inferred.top)),
        gaze_at(view.phase.speaker),
    ]
    if profile.hint_style == "partialHint" and not inferred.oov:
        col_best, col_word = _axis_confidence(store, clue, view.grid.column_words)
        row_best, row_word = _axis_confidence(store, clue, view.grid.row_words)
        tau = profile.confidence_threshold
        if (col_best >= tau) != (row_best >= tau):
            sure_word = col_word if col_best >= tau else row_word
            unsure_axis = "row" if col_best >= tau else "column"
            actions.insert(0, say("partial_hint", sure_word=sure_word, unsure_axis=unsure_axis))
    return actions


def react(profile: AgentProfile, outcome: GameEvent, view: AgentView) -> list[BehaviorAction]:
    """Social response to a round verdict."""
    if outcome.kind is not EventKind.RESOLUTION_ANNOUNCED:
        return []
    if outcome.success:
        return [
            BehaviorAction(ActionKind.EXPRESS_JOY),
            BehaviorAction(ActionKind.SMILE),
            say("celebrate"),
        ]
    actions = [BehaviorAction(ActionKind.EXPRESS_DISAPPOINTMENT)]
    rng = _derived_rng(profile, view, "react")
    if rng.random() < profile.intimacy_level:
        actions.append(BehaviorAction(ActionKind.VULNERABILITY_DISCLOSURE, template_key="vulnerability"))
    return actions


def _render(templates: Mapping[str, str], key: str, slots: tuple[tuple[str, str], ...]) -> str:
    try:
        template = templates[key]
    except KeyError:
        raise UnknownTemplate(f"no template {key!r}") from None
    try:
        return template.format(**dict(slots))
    except (KeyError, IndexError) as exc:
        raise UnknownTemplate(f"template {key!r} missing slot {exc}") from None


# How long one instruction occupies the body before the next onset.
_BASE_SLOT_MS = 400
_SPEECH_MS_PER_CHAR = 45


def realize(
    actions: list[BehaviorAction],
    embodiment: EmbodimentProfile,
    templates: Optional[Mapping[str, str]] = None,
) -> list[Instruction]:
    """Lower high-level acts into a timed instruction series for one body.

    Game acts are the server's business and produce no instructions. Acts
    whose capability the body lacks are substituted, never silently cut.
    Onsets are non-decreasing.
    """
    if templates is None:
        templates = DEFAULT_TEMPLATES
    out: list[Instruction] = []
    onset = 0
    for action in actions:
        kind = action.kind
        if kind is ActionKind.GAME_ACT:
            continue
        realized = _lower(kind, action, templates, embodiment)
        if realized is None:
            continue
        out.append(
            Instruction(
                kind=realized.kind,
                onset_ms=onset,
                expression=realized.expression,
                motion=realized.motion,
                seat=realized.seat,
                text=realized.text,
                gesture=realized.gesture,
            )
        )
        onset += _BASE_SLOT_MS
        if realized.text is not None:
            onset += _SPEECH_MS_PER_CHAR * len(realized.text)
    return out


def _lower(
    kind: ActionKind,
    action: BehaviorAction,
    templates: Mapping[str, str],
    embodiment: EmbodimentProfile,
) -> Optional[Instruction]:
    if kind is ActionKind.SAY:
        return Instruction("Speak", 0, text=_render(templates, action.template_key, action.slots))
    if kind is ActionKind.EXPRESS_JOY:
        return Instruction("SetFace", 0, expression="joy")
    if kind is ActionKind.EXPRESS_DISAPPOINTMENT:
        return Instruction("SetFace", 0, expression="disappointment")
    if kind is ActionKind.SMILE:
        return Instruction("SetFace", 0, expression="smile")
    if kind is ActionKind.HEAD_NOD:
        return Instruction("MoveHead", 0, motion="nod")
    if kind is ActionKind.GAZE_AT:
        return Instruction("LookAt", 0, seat=action.seat)
    if kind is ActionKind.OPEN_HAND_GESTURE:
        if CAP_GESTURE not in embodiment.capabilities:
            return _lower(ACTION_SUBSTITUTIONS[kind], action, templates, embodiment)
        return Instruction("PlayGesture", 0, gesture="open_hand")
    if kind is ActionKind.VULNERABILITY_DISCLOSURE:
        return Instruction("Speak", 0, text=_render(templates, action.template_key or "vulnerability", action.slots))
    if kind is ActionKind.REFERENCE_PREVIOUS_WORD:
        return Instruction("Speak", 0, text=_render(templates, "reference_previous", (("word", action.word),)))
    return None
