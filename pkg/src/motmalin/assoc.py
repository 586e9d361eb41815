"""Word-association mathematics over a small embedding vocabulary.

Two jobs, both framed by the grid: given a hidden word pair, find a clue word
related to both of them (``generate_clue``); given another player's clue, rank
the open cells by how well the clue matches each cell's pair (``infer_coordinates``).

Similarity is plain cosine computed with naive left-to-right accumulation.
That is deliberate: rankings must be reproducible bit-for-bit across machines
and against reference reimplementations, and vectorized math libraries do not
promise a summation order. The vocabularies involved are desk-scale (a few
thousand words at most), so linear scans are plenty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

import httpx

from motmalin.game import (
    Coordinate,
    GameError,
    Grid,
    all_coordinates,
    normalize_word,
    validate_clue,
)

DEFAULT_COMBINE = "min"
DEFAULT_LAMBDA = 0.5
DEFAULT_POOL_K = 50
DEFAULT_BETA = 10.0

# Candidates sharing this long a prefix with a pair word are treated as
# morphological variants of it and never offered as clues.
VARIANT_PREFIX_LEN = 4


class AssocError(Exception):
    """Base for embedding and association failures."""


class BadHeader(AssocError):
    pass


class DimMismatch(AssocError):
    pass


class DuplicateWord(AssocError):
    pass


class ZeroVector(AssocError):
    pass


class WordOOV(AssocError):
    pass


class TargetWordOOV(AssocError):
    pass


class Timeout(AssocError):
    pass


class BadResponse(AssocError):
    pass


class Disabled(AssocError):
    pass


Vector = tuple[float, ...]


def cosine(u: Iterable[float], v: Iterable[float]) -> float:
    """u.v / (|u||v|), accumulated left to right for reproducibility."""
    u = tuple(u)
    v = tuple(v)
    if len(u) != len(v):
        raise DimMismatch(f"vectors of dimension {len(u)} and {len(v)}")
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine of a zero vector is undefined")
    return dot / (math.sqrt(nu) * math.sqrt(nv))


@dataclass
class EmbeddingStore:
    """Immutable word → vector table; word order follows the source file.

    Pairwise similarities are memoized on first use. Cosine is symmetric down
    to the bit (products commute exactly in IEEE arithmetic), so one cache
    entry per unordered pair is safe.
    """

    dim: int
    _vectors: dict[str, Vector]
    _order: dict[str, int]
    _sim_cache: dict[tuple[str, str], float] = field(default_factory=dict, repr=False)
    # memoized results of the two pure queries below; agents poll them on
    # every broadcast, so repeat calls must cost a dict lookup
    _infer_cache: dict = field(default_factory=dict, repr=False)
    _clue_cache: dict = field(default_factory=dict, repr=False)

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self._vectors)

    def vector(self, word: str) -> Vector:
        try:
            return self._vectors[word]
        except KeyError:
            raise WordOOV(f"{word!r} is not in the vocabulary") from None

    def order_index(self, word: str) -> int:
        return self._order[word]

    def similarity(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        hit = self._sim_cache.get(key)
        if hit is None:
            hit = cosine(self.vector(a), self.vector(b))
            self._sim_cache[key] = hit
        return hit


def load_embeddings(source: Union[TextIO, str]) -> EmbeddingStore:
    """Parse a plain-text embedding table into an EmbeddingStore.

    The format is one header line "<count> <dim>" followed by count lines of
    "<word> <v1> ... <vdim>", space-separated, UTF-8. Words are normalized the
    same way clues are.
    """
    if hasattr(source, "read"):
        lines = iter(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            return load_embeddings(fh)

    header = next(lines, None)
    if header is None:
        raise BadHeader("empty embedding stream")
    parts = header.split()
    if len(parts) != 2:
        raise BadHeader(f"header must be '<count> <dim>', got {header.strip()!r}")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise BadHeader(f"non-integer header fields: {header.strip()!r}") from None
    if count < 0 or dim <= 0:
        raise BadHeader(f"count and dim must be positive: {header.strip()!r}")

    vectors: dict[str, Vector] = {}
    order: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        fields = line.split()
        word = normalize_word(fields[0])
        if len(fields) - 1 != dim:
            raise DimMismatch(f"line {lineno}: expected {dim} components, got {len(fields) - 1}")
        try:
            vec = tuple(float(x) for x in fields[1:])
        except ValueError:
            raise DimMismatch(f"line {lineno}: non-numeric component") from None
        if word in vectors:
            raise DuplicateWord(f"line {lineno}: {word!r} appears twice")
        if all(x == 0.0 for x in vec):
            raise ZeroVector(f"line {lineno}: {word!r} has a zero vector")
        order[word] = len(vectors)
        vectors[word] = vec

    if len(vectors) != count:
        raise BadHeader(f"header declares {count} entries, stream has {len(vectors)}")
    return EmbeddingStore(dim=dim, _vectors=vectors, _order=order)


def neighbors(store: EmbeddingStore, word: str, k: int) -> list[tuple[str, float]]:
    """The k most similar vocabulary words, the query itself excluded.

    Equal similarities rank by source-file order so results never depend on
    hash seeds or sort instability.
    """
    if word not in store:
        raise WordOOV(f"{word!r} is not in the vocabulary")
    if k <= 0:
        return []
    ranked = sorted(
        ((other, store.similarity(word, other)) for other in store.words if other != word),
        key=lambda item: (-item[1], store.order_index(item[0])),
    )
    return ranked[:k]


@dataclass(frozen=True, slots=True)
class CellScore:
    cell: Coordinate
    score: float
    probability: float


@dataclass(frozen=True, slots=True)
class Inference:
    """Ranked open cells for one clue. oov marks a clue outside the vocabulary."""

    cells: tuple[CellScore, ...]
    oov: bool

    @property
    def top(self) -> Coordinate:
        return self.cells[0].cell


def _combine(combine: str, a: float, b: float) -> float:
    if combine == "min":
        return min(a, b)
    if combine == "mean":
        return (a + b) / 2.0
    raise ValueError(f"unknown combine function {combine!r}")


def _grid_similarity(store: EmbeddingStore, clue: str, grid_word: str) -> float:
    # a grid word missing from the vocabulary simply contributes nothing
    if grid_word not in store:
        return 0.0
    return store.similarity(clue, grid_word)


def infer_coordinates(
    store: EmbeddingStore,
    clue: str,
    grid: Grid,
    completed: frozenset[Coordinate] = frozenset(),
    combine: str = DEFAULT_COMBINE,
    beta: float = DEFAULT_BETA,
) -> Inference:
    """Score every open cell against a clue and attach softmax probabilities.

    A cell's score combines the clue's similarity to its column word and its
    row word. Descending by score, equal scores in row-major cell order. An
    out-of-vocabulary clue yields the uniform distribution, flagged, because
    humans type what they type and the game must go on.
    """
    word = normalize_word(clue)
    cache_key = (word, grid, completed, combine, beta)
    hit = store._infer_cache.get(cache_key)
    if hit is not None:
        return hit
    open_cells = [c for c in all_coordinates() if c not in completed]
    if word not in store:
        p = 1.0 / len(open_cells) if open_cells else 0.0
        result = Inference(
            cells=tuple(CellScore(c, 0.0, p) for c in open_cells),
            oov=True,
        )
        store._infer_cache[cache_key] = result
        return result
    scored = []
    for cell in open_cells:
        col_word, row_word = grid.words_at(cell)
        score = _combine(
            combine,
            _grid_similarity(store, word, col_word),
            _grid_similarity(store, word, row_word),
        )
        scored.append((cell, score))
    scored.sort(key=lambda item: (-item[1], item[0].row_major_index))
    peak = max(s for _, s in scored)
    weights = [math.exp(beta * (s - peak)) for _, s in scored]
    total = sum(weights)
    result = Inference(
        cells=tuple(
            CellScore(cell, score, w / total)
            for (cell, score), w in zip(scored, weights)
        ),
        oov=False,
    )
    store._infer_cache[cache_key] = result
    return result


@dataclass(frozen=True, slots=True)
class ClueCandidate:
    """A scored clue proposal for one hidden pair.

    total = pair_score − λ·distractor_score: strong ties to both pair words,
    penalized by the pull of the six other grid words.
    """

    word: str
    pair_score: float
    distractor_score: float
    total: float


def _shared_prefix_len(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def generate_clue(
    store: EmbeddingStore,
    grid: Grid,
    target: Coordinate,
    k: int = DEFAULT_POOL_K,
    lam: float = DEFAULT_LAMBDA,
    gate: bool = True,
    combine: str = DEFAULT_COMBINE,
    completed: frozenset[Coordinate] = frozenset(),
) -> Optional[ClueCandidate]:
    """Best clue for a target cell, or None if nothing trustworthy exists.

    The pool is the union of the k nearest neighbors of the two pair words,
    minus the grid words and near-variants of either pair word (shared prefix
    of VARIANT_PREFIX_LEN or more). Candidates are ranked by total and, when
    the gate is on, the first one whose own inference puts the target on top
    wins; proposing a clue we could not solve ourselves helps nobody.
    """
    col_word, row_word = grid.words_at(target)
    if col_word not in store or row_word not in store:
        raise TargetWordOOV(f"pair for {target.label()} not fully in vocabulary")
    cache_key = (grid, target, k, lam, gate, combine, completed)
    if cache_key in store._clue_cache:
        return store._clue_cache[cache_key]

    pool: list[str] = []
    seen = set()
    for pair_word in (col_word, row_word):
        for cand, _ in neighbors(store, pair_word, k):
            if cand not in seen:
                seen.add(cand)
                pool.append(cand)

    candidates = []
    for cand in pool:
        if cand in grid.words:
            continue
        if (
            _shared_prefix_len(cand, col_word) >= VARIANT_PREFIX_LEN
            or _shared_prefix_len(cand, row_word) >= VARIANT_PREFIX_LEN
        ):
            continue
        try:
            validate_clue(grid, cand)
        except GameError:
            continue
        pair_score = _combine(
            combine,
            store.similarity(cand, col_word),
            store.similarity(cand, row_word),
        )
        distractors = [w for w in grid.words if w not in (col_word, row_word)]
        distractor_score = max(_grid_similarity(store, cand, w) for w in distractors)
        candidates.append(ClueCandidate(cand, pair_score, distractor_score, pair_score - lam * distractor_score))

    candidates.sort(key=lambda c: (-c.total, store.order_index(c.word)))
    chosen = None
    for cand in candidates:
        if not gate:
            chosen = cand
            break
        inferred = infer_coordinates(store, cand.word, grid, completed=completed, combine=combine)
        if not inferred.oov and inferred.top == target:
            chosen = cand
            break
    store._clue_cache[cache_key] = chosen
    return chosen


@dataclass(frozen=True, slots=True)
class GeneratorBackend:
    """Where clue candidates come from: the built-in embedding scan or a
    remote word service. Remote words are suggestions only; they are always
    re-validated and re-scored locally before anyone says them aloud.
    """

    kind: str = "embedding"  # "embedding" | "remote"
    endpoint: Optional[str] = None
    timeout: float = 5.0
    template_id: str = "pair_words_v1"


def parse_word_list(text: str) -> list[str]:
    """Split a newline- or comma-separated word list, normalized, deduplicated."""
    words: list[str] = []
    seen = set()
    for chunk in text.replace(",", "\n").splitlines():
        word = normalize_word(chunk)
        if word and word not in seen:
            seen.add(word)
            words.append(word)
    return words


def remote_candidates(
    backend: GeneratorBackend,
    grid: Grid,
    target: Coordinate,
    client: Optional[httpx.Client] = None,
) -> list[str]:
    """Ask a remote service for clue words for the target's pair.

    One POST with the two pair words and the prompt template id; the reply
    body is a plain-text word list. Raises Disabled when no endpoint is
    configured so callers can fall back to the embedding pipeline.
    """
    if backend.kind != "remote" or not backend.endpoint:
        raise Disabled("no remote generator configured")
    col_word, row_word = grid.words_at(target)
    payload = {"words": [col_word, row_word], "template": backend.template_id}
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=backend.timeout)
    try:
        response = client.post(backend.endpoint, json=payload, timeout=backend.timeout)
    except httpx.TimeoutException as exc:
        raise Timeout(f"remote generator timed out after {backend.timeout}s") from exc
    except httpx.HTTPError as exc:
        raise BadResponse(f"remote generator unreachable: {exc}") from exc
    finally:
        if own_client:
            client.close()
    if response.status_code != 200:
        raise BadResponse(f"remote generator returned HTTP {response.status_code}")
    words = parse_word_list(response.text)
    if not words:
        raise BadResponse("remote generator returned no words")
    return words
