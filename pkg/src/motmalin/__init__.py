"""Mot Malin: a networked cooperative word-association table.

Four seats around a 4x4 word grid take turns cluing their hidden coordinate
card while the other three converge on a cell. Seats can be humans at a
browser or autonomous players that solve associations over word embeddings
and surface their moves as embodied behavior (speech, gaze, expressions).
"""

from motmalin.game import (
    Command,
    Coordinate,
    GameEvent,
    GamePhase,
    GameState,
    Grid,
    Seat,
    apply_command,
    apply_event,
    legal_commands,
    new_game,
    parse_coordinate,
    replay_events,
)

__version__ = "0.1.0"

__all__ = [
    "Command",
    "Coordinate",
    "GameEvent",
    "GamePhase",
    "GameState",
    "Grid",
    "Seat",
    "apply_command",
    "apply_event",
    "legal_commands",
    "new_game",
    "parse_coordinate",
    "replay_events",
    "__version__",
]
