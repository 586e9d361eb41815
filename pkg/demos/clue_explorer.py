"""Poke at the association machinery: decode clues, then generate some.

Run with: python3 demos/clue_explorer.py
"""

from motmalin.assoc import generate_clue, infer_coordinates, load_embeddings, neighbors
from motmalin.game import Grid, parse_coordinate
from motmalin.session import packaged_data

GRID = Grid(("dog", "teacher", "water", "music"), ("house", "fire", "tree", "ball"))


def main():
    store = load_embeddings(str(packaged_data("demo_embeddings.txt")))

    for clue in ("coach", "kennel", "penguin"):
        inf = infer_coordinates(store, clue, GRID)
        head = " ".join(f"{cs.cell.label()}={cs.probability:.3f}" for cs in inf.cells[:3])
        oov = " (out of vocabulary, uniform fallback)" if inf.oov else ""
        print(f"decode {clue!r:10} -> {head}{oov}")

    print()
    for label in ("A1", "B4", "D3"):
        cell = parse_coordinate(label)
        cand = generate_clue(store, GRID, cell)
        words = "/".join(GRID.words_at(cell))
        if cand is None:
            print(f"clue for {label} ({words}): nothing passes the gate")
        else:
            print(f"clue for {label} ({words}): {cand.word!r} "
                  f"(pair {cand.pair_score:.4f}, distractor {cand.distractor_score:.4f})")

    print()
    print("nearest to 'teacher':", [w for w, _ in neighbors(store, "teacher", k=4)])


if __name__ == "__main__":
    main()
