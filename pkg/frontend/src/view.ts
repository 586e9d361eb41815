// The view model is a pure reducer over wire frames: same frames in, same
// view out, no clocks, no sockets, no DOM. Rendering and networking live
// elsewhere and only ever hand frames in or read the result.

import type {
  CommandBody,
  EventBody,
  GridWords,
  InstructionStep,
  PhaseInfo,
  Snapshot,
  ViewInput,
} from "./protocol.js";

export interface AgentSlot {
  seat: number;
  faceId: string | null;
  bodyKind: string | null; // "robot" | "eca"
  expression: string | null; // latest SetFace label
  utterance: string | null; // latest Speak text, shown as a bubble
  utteranceMs: number; // how long the bubble should stay up
  activity: string | null; // labeled placeholder for head/gaze/gesture
}

export interface ClientView {
  sessionId: string | null;
  seat: number | null;
  color: string | null;
  token: string | null;
  connection: "connecting" | "open" | "retry" | "seat_unavailable";
  connectionDetail: string | null;
  grid: GridWords | null;
  phase: PhaseInfo;
  ownCard: string | null;
  completed: string[];
  selections: (string | null)[];
  clues: string[];
  deckSize: number;
  resolvedCount: number;
  occupants: (string | null)[];
  seatColors: string[];
  agents: Record<number, AgentSlot>;
  feed: string[];
  toast: string | null;
  toastSeq: number; // bumps on every new toast so renders can re-trigger
}

const FEED_LIMIT = 120;
const SEAT_COLORS = ["red", "blue", "green", "yellow"];

export function initialView(): ClientView {
  return {
    sessionId: null,
    seat: null,
    color: null,
    token: null,
    connection: "connecting",
    connectionDetail: null,
    grid: null,
    phase: { kind: "Open" },
    ownCard: null,
    completed: [],
    selections: [null, null, null, null],
    clues: [],
    deckSize: 16,
    resolvedCount: 0,
    occupants: [null, null, null, null],
    seatColors: [...SEAT_COLORS],
    agents: {},
    feed: [],
    toast: null,
    toastSeq: 0,
  };
}

function pushFeed(feed: string[], line: string): string[] {
  const next = [...feed, line];
  return next.length > FEED_LIMIT ? next.slice(next.length - FEED_LIMIT) : next;
}

function fromSnapshot(view: ClientView, snap: Snapshot): ClientView {
  const agents: Record<number, AgentSlot> = {};
  for (const info of snap.seats) {
    if (info.embodiment) {
      const old = view.agents[info.seat];
      agents[info.seat] = old
        ? { ...old, faceId: info.embodiment.faceId, bodyKind: info.embodiment.kind }
        : {
            seat: info.seat,
            faceId: info.embodiment.faceId,
            bodyKind: info.embodiment.kind,
            expression: null,
            utterance: null,
            utteranceMs: 0,
            activity: null,
          };
    }
  }
  return {
    ...view,
    sessionId: snap.session,
    seat: snap.yourSeat,
    color: snap.seats[snap.yourSeat]?.color ?? SEAT_COLORS[snap.yourSeat] ?? null,
    token: snap.seatToken ?? view.token,
    grid: snap.grid,
    phase: snap.phase,
    ownCard: snap.yourCard,
    completed: [...snap.completed],
    selections: [...snap.selections],
    clues: [...snap.clues],
    deckSize: snap.deckSize,
    resolvedCount: snap.resolvedCount,
    occupants: snap.seats.map((s) => s.occupant),
    seatColors: snap.seats.map((s) => s.color),
    agents,
    feed: pushFeed(view.feed, `joined as seat ${snap.yourSeat} (${snap.phase.kind})`),
  };
}

function applyEvent(view: ClientView, body: EventBody): ClientView {
  const seat = body.seat;
  switch (body.type) {
    case "GameStarted":
      return {
        ...view,
        grid: body.grid ?? view.grid,
        seatColors: body.seatColors ?? view.seatColors,
        deckSize: 16,
        resolvedCount: 0,
        completed: [],
        selections: [null, null, null, null],
        feed: pushFeed(view.feed, "game started"),
      };
    case "CardDealt": {
      // the server addresses the coordinate to its owner only; showing it
      // requires both the field and the right addressee
      const mine = body.card !== undefined && seat === view.seat;
      return {
        ...view,
        deckSize: Math.max(0, view.deckSize - 1),
        ownCard: mine ? body.card ?? null : view.ownCard,
        feed: pushFeed(
          view.feed,
          mine ? `you drew ${body.card}` : `seat ${seat} drew a card`,
        ),
      };
    }
    case "SpeakRequested":
      return {
        ...view,
        phase: { kind: "ClueEntry", speaker: seat },
        feed: pushFeed(view.feed, `seat ${seat} takes the floor`),
      };
    case "SpeakCancelled":
      return {
        ...view,
        phase: { kind: "Open" },
        feed: pushFeed(view.feed, `seat ${seat} stands down`),
      };
    case "ClueProposed":
      return {
        ...view,
        phase: { kind: "Guessing", speaker: seat, clue: body.word },
        clues: [...view.clues, body.word ?? ""],
        feed: pushFeed(view.feed, `seat ${seat} says clue: ${body.word}`),
      };
    case "CellSelected": {
      const selections = [...view.selections];
      if (seat !== undefined) selections[seat] = body.cell ?? null;
      return {
        ...view,
        selections,
        feed: pushFeed(view.feed, `seat ${seat} taps ${body.cell}`),
      };
    }
    case "AgreementReached":
      return {
        ...view,
        phase: { kind: "Resolution", speaker: view.phase.speaker, agreed: body.cell },
        selections: [null, null, null, null],
        feed: pushFeed(view.feed, `all guessers agree on ${body.cell}`),
      };
    case "ResolutionAnnounced": {
      const count = view.resolvedCount + 1;
      return {
        ...view,
        resolvedCount: count,
        ownCard: seat === view.seat ? null : view.ownCard,
        phase: count === 16 ? { kind: "End" } : { kind: "Open" },
        feed: pushFeed(
          view.feed,
          body.success ? `${body.target}: got it!` : `${body.target}: not the card`,
        ),
      };
    }
    case "CellCompleted":
      return {
        ...view,
        completed: [...view.completed, body.cell ?? ""].sort(),
        feed: pushFeed(view.feed, `${body.cell} is done`),
      };
    case "GameEnded":
      return {
        ...view,
        phase: { kind: "End" },
        feed: pushFeed(view.feed, `game over: ${body.completedCount}/16 found`),
      };
    default:
      // future event types render in the feed but change nothing else
      return { ...view, feed: pushFeed(view.feed, `(${body.type})`) };
  }
}

// An on-screen bubble should outlive its utterance; scale with length.
export function bubbleMs(text: string): number {
  return Math.max(1500, 350 + 45 * text.length);
}

function applyInstructions(
  view: ClientView,
  seat: number,
  steps: InstructionStep[],
): ClientView {
  const existing = view.agents[seat];
  const slot: AgentSlot = existing
    ? { ...existing }
    : {
        seat,
        faceId: null,
        bodyKind: null,
        expression: null,
        utterance: null,
        utteranceMs: 0,
        activity: null,
      };
  const ordered = [...steps].sort((a, b) => a.onsetMs - b.onsetMs);
  for (const step of ordered) {
    switch (step.kind) {
      case "SetFace":
        slot.expression = step.expression ?? slot.expression;
        break;
      case "Speak":
        slot.utterance = step.text ?? null;
        slot.utteranceMs = bubbleMs(step.text ?? "");
        break;
      case "MoveHead":
        slot.activity = `head: ${step.motion}`;
        break;
      case "LookAt":
        slot.activity = `looks at seat ${step.seat}`;
        break;
      case "PlayGesture":
        slot.activity = `gesture: ${step.gesture}`;
        break;
      default:
        console.warn("unknown instruction kind", step.kind);
        break;
    }
  }
  return { ...view, agents: { ...view.agents, [seat]: slot } };
}

export function reduce(view: ClientView, input: ViewInput): ClientView {
  switch (input.kind) {
    case "local_status":
      return {
        ...view,
        connection: input.status,
        connectionDetail: input.detail ?? null,
      };
    case "hello":
      return {
        ...view,
        sessionId: input.body.session,
        occupants: [...input.body.occupants],
      };
    case "state_snapshot":
      return fromSnapshot(view, input.body);
    case "event":
      return applyEvent(view, input.body);
    case "instruction":
      return applyInstructions(view, input.seat, input.body.instructions);
    case "error":
      return {
        ...view,
        toast: `${input.body.error}: ${input.body.message}`,
        toastSeq: view.toastSeq + 1,
      };
    default:
      return view;
  }
}

// ---------------------------------------------------------------- derived

export interface Agreement {
  cell: string;
  count: number;
  needed: number;
}

// "2/3 agree on B4": the most-backed cell among current guesser picks.
export function agreementSummary(view: ClientView): Agreement | null {
  if (view.phase.kind !== "Guessing") return null;
  const counts = new Map<string, number>();
  for (const [seat, cell] of view.selections.entries()) {
    if (cell === null || seat === view.phase.speaker) continue;
    counts.set(cell, (counts.get(cell) ?? 0) + 1);
  }
  let best: Agreement | null = null;
  for (const [cell, count] of counts) {
    if (!best || count > best.count) best = { cell, count, needed: 3 };
  }
  return best;
}

export function allCells(): string[] {
  const out: string[] = [];
  for (const row of [1, 2, 3, 4]) {
    for (const col of ["A", "B", "C", "D"]) out.push(`${col}${row}`);
  }
  return out;
}

// Affordances mirror the server's legality rules so a tap that would be
// rejected is never offered. The server stays the judge either way.
export function enabledCommands(view: ClientView): Set<CommandBody["type"]> {
  const out = new Set<CommandBody["type"]>();
  if (view.seat === null) return out;
  const phase = view.phase;
  if (phase.kind === "Open" && view.ownCard !== null) out.add("RequestSpeak");
  if (phase.kind === "ClueEntry" && phase.speaker === view.seat) {
    out.add("ProposeClue");
    out.add("CancelSpeak");
  }
  if (phase.kind === "Guessing" && phase.speaker !== view.seat) out.add("SelectCell");
  if (phase.kind === "Resolution" && phase.speaker === view.seat)
    out.add("ConfirmResolution");
  return out;
}

export function selectableCells(view: ClientView): Set<string> {
  if (!enabledCommands(view).has("SelectCell")) return new Set();
  const done = new Set(view.completed);
  return new Set(allCells().filter((c) => !done.has(c)));
}
