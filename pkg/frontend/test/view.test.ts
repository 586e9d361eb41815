import { describe, expect, it, vi } from "vitest";

import type { Snapshot, ViewInput } from "../src/protocol.js";
import {
  agreementSummary,
  bubbleMs,
  enabledCommands,
  initialView,
  reduce,
  selectableCells,
  type ClientView,
} from "../src/view.js";

function snapshotFor(seat: number, extra: Partial<Snapshot> = {}): ViewInput {
  const body: Snapshot = {
    session: "S1",
    yourSeat: seat,
    yourCard: seat === 0 ? "B4" : null,
    seatToken: "tok",
    seats: [
      { seat: 0, color: "red", occupant: "human", embodiment: null },
      { seat: 1, color: "blue", occupant: "human", embodiment: null },
      { seat: 2, color: "green", occupant: "agent", embodiment: { kind: "eca", faceId: "amber" } },
      { seat: 3, color: "yellow", occupant: "agent", embodiment: { kind: "robot", faceId: "cobalt" } },
    ],
    grid: {
      columns: ["dog", "teacher", "water", "music"],
      rows: ["house", "fire", "tree", "ball"],
    },
    phase: { kind: "Open" },
    selections: [null, null, null, null],
    completed: [],
    resolvedCount: 0,
    deckSize: 12,
    clues: [],
    ...extra,
  };
  return { kind: "state_snapshot", body };
}

function fold(inputs: ViewInput[]): ClientView {
  return inputs.reduce(reduce, initialView());
}

const scriptedRound: ViewInput[] = [
  { kind: "hello", body: { session: "S1", occupants: ["human", "human", "agent", "agent"] } },
  snapshotFor(0),
  { kind: "event", body: { type: "SpeakRequested", seat: 0 } },
  { kind: "event", body: { type: "ClueProposed", seat: 0, word: "coach" } },
  {
    kind: "instruction",
    seat: 2,
    body: {
      instructions: [
        { kind: "LookAt", onsetMs: 0, seat: 0 },
        { kind: "Speak", onsetMs: 400, text: "That reminds me of coach from earlier." },
      ],
    },
  },
  { kind: "event", body: { type: "CellSelected", seat: 2, cell: "B4" } },
  { kind: "event", body: { type: "CellSelected", seat: 3, cell: "B4" } },
  { kind: "event", body: { type: "CellSelected", seat: 1, cell: "B4" } },
  { kind: "event", body: { type: "AgreementReached", cell: "B4" } },
  { kind: "event", body: { type: "ResolutionAnnounced", seat: 0, target: "B4", success: true } },
  { kind: "event", body: { type: "CellCompleted", cell: "B4" } },
  { kind: "event", body: { type: "CardDealt", seat: 0, card: "C2" } },
];

function deepFreeze<T>(value: T): T {
  if (value && typeof value === "object") {
    Object.freeze(value);
    for (const child of Object.values(value as object)) deepFreeze(child);
  }
  return value;
}

describe("reducer purity", () => {
  it("same stream twice gives identical view state", () => {
    expect(fold(scriptedRound)).toEqual(fold(scriptedRound));
  });

  it("never mutates its inputs", () => {
    let view = deepFreeze(initialView());
    for (const input of scriptedRound) {
      view = deepFreeze(reduce(view, deepFreeze(input)));
    }
    expect(view.completed).toEqual(["B4"]);
  });

  it("view construction is replayable from any prefix", () => {
    for (let cut = 0; cut <= scriptedRound.length; cut++) {
      const prefix = scriptedRound.slice(0, cut);
      expect(fold(prefix)).toEqual(fold(prefix));
    }
  });
});

describe("board state tracking", () => {
  it("mirrors the snapshot wholesale", () => {
    const view = fold([snapshotFor(0)]);
    expect(view.seat).toBe(0);
    expect(view.color).toBe("red");
    expect(view.ownCard).toBe("B4");
    expect(view.grid?.columns).toContain("teacher");
    expect(view.deckSize).toBe(12);
    expect(view.token).toBe("tok");
    expect(Object.keys(view.agents).map(Number).sort()).toEqual([2, 3]);
    expect(view.agents[2]?.faceId).toBe("amber");
  });

  it("walks the phase machine from events", () => {
    const base = [snapshotFor(0)];
    expect(fold(base).phase.kind).toBe("Open");
    const entry = [...base, { kind: "event", body: { type: "SpeakRequested", seat: 0 } } as ViewInput];
    expect(fold(entry).phase).toEqual({ kind: "ClueEntry", speaker: 0 });
    const guessing = [...entry, { kind: "event", body: { type: "ClueProposed", seat: 0, word: "coach" } } as ViewInput];
    expect(fold(guessing).phase).toEqual({ kind: "Guessing", speaker: 0, clue: "coach" });
    expect(fold(guessing).clues).toEqual(["coach"]);
  });

  it("tracks selections and clears them on agreement", () => {
    const view = fold(scriptedRound.slice(0, 8)); // through the third CellSelected
    expect(view.selections).toEqual([null, "B4", "B4", "B4"]);
    const after = reduce(view, { kind: "event", body: { type: "AgreementReached", cell: "B4" } });
    expect(after.selections).toEqual([null, null, null, null]);
    expect(after.phase).toEqual({ kind: "Resolution", speaker: 0, agreed: "B4" });
  });

  it("finishes the round: completed cell, card gone, new deal", () => {
    const view = fold(scriptedRound);
    expect(view.completed).toEqual(["B4"]);
    expect(view.ownCard).toBe("C2"); // played B4, drew C2
    expect(view.phase.kind).toBe("Open");
    expect(view.resolvedCount).toBe(1);
    expect(view.deckSize).toBe(11);
  });

  it("ends the game on the sixteenth resolution", () => {
    let view = fold([snapshotFor(0, { resolvedCount: 15, deckSize: 0 })]);
    view = reduce(view, {
      kind: "event",
      body: { type: "ResolutionAnnounced", seat: 0, target: "A1", success: false },
    });
    expect(view.phase.kind).toBe("End");
  });
});

describe("privacy at the view layer", () => {
  it("ignores card fields addressed to other seats", () => {
    let view = fold([snapshotFor(1)]);
    expect(view.ownCard).toBeNull();
    view = reduce(view, { kind: "event", body: { type: "CardDealt", seat: 0, card: "B4" } });
    expect(view.ownCard).toBeNull();
    expect(view.feed.at(-1)).toBe("seat 0 drew a card");
  });

  it("takes a card only from an addressed deal", () => {
    let view = fold([snapshotFor(1)]);
    view = reduce(view, { kind: "event", body: { type: "CardDealt", seat: 1, card: "D3" } });
    expect(view.ownCard).toBe("D3");
  });

  it("never shows a coordinate that no frame carried", () => {
    const view = fold(scriptedRound.filter((f) => f.kind !== "state_snapshot"));
    const shown = JSON.stringify(view);
    for (const cell of ["A2", "C3", "D1"]) {
      expect(shown).not.toContain(cell);
    }
  });
});

describe("agent display slots", () => {
  it("applies instructions in onset order", () => {
    const view = fold([
      snapshotFor(0),
      {
        kind: "instruction",
        seat: 3,
        body: {
          instructions: [
            { kind: "SetFace", onsetMs: 400, expression: "smile" },
            { kind: "SetFace", onsetMs: 0, expression: "joy" },
          ],
        },
      },
    ]);
    expect(view.agents[3]?.expression).toBe("smile"); // the later onset wins
  });

  it("renders speech as a bubble scaled to length", () => {
    const text = "Yes! We found it together.";
    const view = fold([
      snapshotFor(0),
      {
        kind: "instruction",
        seat: 2,
        body: { instructions: [{ kind: "Speak", onsetMs: 0, text }] },
      },
    ]);
    expect(view.agents[2]?.utterance).toBe(text);
    expect(view.agents[2]?.utteranceMs).toBe(bubbleMs(text));
    expect(bubbleMs(text)).toBeGreaterThanOrEqual(1500);
    expect(bubbleMs("a".repeat(200))).toBeGreaterThan(bubbleMs("short"));
  });

  it("labels head, gaze, and gesture as activity placeholders", () => {
    const steps = [
      { kind: "MoveHead", onsetMs: 0, motion: "nod" },
      { kind: "LookAt", onsetMs: 1, seat: 0 },
      { kind: "PlayGesture", onsetMs: 2, gesture: "open_hand" },
    ];
    const view = fold([
      snapshotFor(0),
      { kind: "instruction", seat: 2, body: { instructions: steps } },
    ]);
    expect(view.agents[2]?.activity).toBe("gesture: open_hand");
  });

  it("ignores unknown instruction kinds, slot unchanged", () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    const before = fold([
      snapshotFor(0),
      {
        kind: "instruction",
        seat: 2,
        body: { instructions: [{ kind: "SetFace", onsetMs: 0, expression: "joy" }] },
      },
    ]);
    const after = reduce(before, {
      kind: "instruction",
      seat: 2,
      body: { instructions: [{ kind: "Teleport", onsetMs: 0 }] },
    });
    expect(after.agents[2]).toEqual(before.agents[2]);
    expect(warn).toHaveBeenCalled();
    warn.mockRestore();
  });
});

describe("errors and status", () => {
  it("turns server errors into a toast and nothing else", () => {
    const before = fold(scriptedRound.slice(0, 4));
    const after = reduce(before, {
      kind: "error",
      body: { error: "PhaseViolation", message: "not your turn" },
    });
    expect(after.toast).toBe("PhaseViolation: not your turn");
    expect(after.toastSeq).toBe(before.toastSeq + 1);
    expect({ ...after, toast: before.toast, toastSeq: before.toastSeq }).toEqual(before);
  });

  it("tracks connection status frames", () => {
    const view = fold([{ kind: "local_status", status: "retry", detail: "reconnecting (attempt 2)" }]);
    expect(view.connection).toBe("retry");
    expect(view.connectionDetail).toBe("reconnecting (attempt 2)");
  });
});

describe("affordances", () => {
  it("offers RequestSpeak only with a card in an open floor", () => {
    expect(enabledCommands(fold([snapshotFor(0)]))).toEqual(new Set(["RequestSpeak"]));
    expect(enabledCommands(fold([snapshotFor(1)]))).toEqual(new Set());
  });

  it("offers clue entry only to the speaker", () => {
    const entry: ViewInput = { kind: "event", body: { type: "SpeakRequested", seat: 0 } };
    expect(enabledCommands(fold([snapshotFor(0), entry]))).toEqual(
      new Set(["ProposeClue", "CancelSpeak"]),
    );
    expect(enabledCommands(fold([snapshotFor(1), entry]))).toEqual(new Set());
  });

  it("lets everyone but the speaker guess, excluding completed cells", () => {
    const toGuessing: ViewInput[] = [
      { kind: "event", body: { type: "SpeakRequested", seat: 0 } },
      { kind: "event", body: { type: "ClueProposed", seat: 0, word: "coach" } },
    ];
    const speaker = fold([snapshotFor(0), ...toGuessing]);
    expect(enabledCommands(speaker).has("SelectCell")).toBe(false);
    const guesser = fold([snapshotFor(1, { completed: ["A1", "C2"] }), ...toGuessing]);
    const cells = selectableCells(guesser);
    expect(cells.size).toBe(14);
    expect(cells.has("A1")).toBe(false);
    expect(cells.has("B4")).toBe(true);
  });

  it("offers the reveal only to the speaker in resolution", () => {
    const toResolution: ViewInput[] = [
      { kind: "event", body: { type: "SpeakRequested", seat: 0 } },
      { kind: "event", body: { type: "ClueProposed", seat: 0, word: "coach" } },
      { kind: "event", body: { type: "AgreementReached", cell: "B4" } },
    ];
    expect(enabledCommands(fold([snapshotFor(0), ...toResolution]))).toEqual(
      new Set(["ConfirmResolution"]),
    );
    expect(enabledCommands(fold([snapshotFor(1), ...toResolution]))).toEqual(new Set());
  });

  it("offers nothing after the end", () => {
    const ended = reduce(fold([snapshotFor(0, { resolvedCount: 15 })]), {
      kind: "event",
      body: { type: "ResolutionAnnounced", seat: 0, target: "A1", success: true },
    });
    expect(enabledCommands(ended)).toEqual(new Set());
  });
});

describe("agreement counter", () => {
  it("reports the most-backed cell during guessing", () => {
    const stream: ViewInput[] = [
      snapshotFor(0),
      { kind: "event", body: { type: "SpeakRequested", seat: 0 } },
      { kind: "event", body: { type: "ClueProposed", seat: 0, word: "coach" } },
      { kind: "event", body: { type: "CellSelected", seat: 2, cell: "B4" } },
      { kind: "event", body: { type: "CellSelected", seat: 3, cell: "B4" } },
    ];
    expect(agreementSummary(fold(stream))).toEqual({ cell: "B4", count: 2, needed: 3 });
    expect(agreementSummary(fold(stream.slice(0, 3)))).toBeNull();
  });

  it("never counts the speaker's own stale selection", () => {
    const view = fold([
      snapshotFor(0, {
        phase: { kind: "Guessing", speaker: 0, clue: "coach" },
        selections: ["A1", null, "B4", null],
      }),
    ]);
    expect(agreementSummary(view)).toEqual({ cell: "B4", count: 1, needed: 3 });
  });
});
