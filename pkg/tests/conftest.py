"""Shared fixtures: the reference grid and a tiny handcrafted embedding file.

The embedding vectors are picked so the right answers are obvious by hand:
"teacher" and "ball" live on the first two axes with "coach" halfway between
them, while the six remaining grid words live in the orthogonal complement,
so no distractor ever competes on the teacher/ball plane. That makes expected
similarities exact little surds (e.g. cos(coach, teacher) = 1/sqrt(2)) we can
pin to full float precision.
"""

import io

import pytest

from motmalin.assoc import EmbeddingStore, load_embeddings
from motmalin.game import Grid, Seat

GRID_COLUMNS = ("dog", "teacher", "water", "music")
GRID_ROWS = ("house", "fire", "tree", "ball")

LEXICON = {
    "teacher": (1.0, 0.0, 0.0, 0.0),
    "ball": (0.0, 1.0, 0.0, 0.0),
    "coach": (0.7, 0.7, 0.0, 0.0),
    "trainer": (0.6, 0.6, 0.1, 0.0),
    "teaching": (0.95, 0.1, 0.0, 0.0),
    "dog": (0.0, 0.0, 1.0, 0.0),
    "water": (0.0, 0.0, 0.0, 1.0),
    "music": (0.0, 0.0, 1.0, 1.0),
    "house": (0.0, 0.0, 1.0, -1.0),
    "fire": (0.0, 0.0, -1.0, 0.0),
    "tree": (0.0, 0.0, 2.0, 1.0),
}


def lexicon_text(vectors: dict) -> str:
    dim = len(next(iter(vectors.values())))
    lines = [f"{len(vectors)} {dim}"]
    for word, vec in vectors.items():
        lines.append(word + " " + " ".join(repr(x) for x in vec))
    return "\n".join(lines) + "\n"


@pytest.fixture
def grid() -> Grid:
    return Grid(GRID_COLUMNS, GRID_ROWS)


@pytest.fixture
def seats() -> tuple[Seat, ...]:
    return tuple(Seat(i) for i in range(4))


@pytest.fixture
def store() -> EmbeddingStore:
    return load_embeddings(io.StringIO(lexicon_text(LEXICON)))


@pytest.fixture
def lexicon_file(tmp_path):
    path = tmp_path / "toy_vectors.txt"
    path.write_text(lexicon_text(LEXICON), encoding="utf-8")
    return path
