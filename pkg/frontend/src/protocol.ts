// Wire protocol types. These mirror the server's JSON frames one to one;
// nothing here is invented client-side.

export interface GridWords {
  columns: string[];
  rows: string[];
}

export interface PhaseInfo {
  kind: "Open" | "ClueEntry" | "Guessing" | "Resolution" | "End";
  speaker?: number;
  clue?: string;
  agreed?: string;
}

export interface SeatInfo {
  seat: number;
  color: string;
  occupant: string | null;
  embodiment: { kind: string; faceId: string } | null;
}

export interface Snapshot {
  session: string;
  yourSeat: number;
  yourCard: string | null;
  seatToken?: string;
  seats: SeatInfo[];
  grid: GridWords;
  phase: PhaseInfo;
  selections: (string | null)[];
  completed: string[];
  resolvedCount: number;
  deckSize: number;
  clues: string[];
}

export interface EventBody {
  type: string;
  seat?: number;
  word?: string;
  cell?: string;
  card?: string;
  target?: string;
  success?: boolean;
  grid?: GridWords;
  seatColors?: string[];
  completedCount?: number;
}

export interface InstructionStep {
  kind: string; // SetFace | MoveHead | LookAt | Speak | PlayGesture
  onsetMs: number;
  expression?: string;
  motion?: string;
  seat?: number;
  text?: string;
  gesture?: string;
}

export interface HelloFrame {
  kind: "hello";
  body: { session: string; occupants: (string | null)[] };
}

export interface SnapshotFrame {
  kind: "state_snapshot";
  body: Snapshot;
}

export interface EventFrame {
  kind: "event";
  body: EventBody;
}

export interface InstructionFrame {
  kind: "instruction";
  seat: number;
  body: { instructions: InstructionStep[] };
}

export interface ErrorFrame {
  kind: "error";
  body: { error: string; message: string };
}

export type ServerFrame =
  | HelloFrame
  | SnapshotFrame
  | EventFrame
  | InstructionFrame
  | ErrorFrame;

export type CommandType =
  | "RequestSpeak"
  | "CancelSpeak"
  | "ProposeClue"
  | "SelectCell"
  | "ConfirmResolution";

export interface CommandBody {
  type: CommandType;
  word?: string;
  cell?: string;
}

export interface CommandFrame {
  kind: "command";
  seat: number;
  body: CommandBody;
}

export interface JoinFrame {
  kind: "join";
  body: { seat: number; token?: string };
}

// Connection status changes are not server frames, but every view change
// must pass through the reducer, so the client synthesizes these.
export interface LocalStatusFrame {
  kind: "local_status";
  status: "connecting" | "open" | "retry" | "seat_unavailable";
  detail?: string;
}

export type ViewInput = ServerFrame | LocalStatusFrame;

export function isServerFrame(value: unknown): value is ServerFrame {
  if (!value || typeof value !== "object") return false;
  const kind = (value as { kind?: unknown }).kind;
  return (
    kind === "hello" ||
    kind === "state_snapshot" ||
    kind === "event" ||
    kind === "instruction" ||
    kind === "error"
  );
}
