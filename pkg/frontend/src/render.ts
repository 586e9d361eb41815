// DOM output for a ClientView. Rendering is a full rebuild per frame: the
// game ticks at human speed, so simplicity beats diffing. All interaction
// flows back through the callbacks, never into the view directly.

import type { ClientView } from "./view.js";
import {
  agreementSummary,
  allCells,
  enabledCommands,
  selectableCells,
} from "./view.js";

export interface BoardActions {
  requestSpeak(): void;
  cancelSpeak(): void;
  proposeClue(word: string): void;
  selectCell(cell: string): void;
  confirmResolution(): void;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function phaseBanner(view: ClientView): string {
  const p = view.phase;
  switch (p.kind) {
    case "Open":
      return "open floor: anyone with a card may speak";
    case "ClueEntry":
      return p.speaker === view.seat
        ? "your floor: type a one-word clue"
        : `seat ${p.speaker} is thinking of a clue`;
    case "Guessing":
      return `clue from seat ${p.speaker}: "${p.clue}"`;
    case "Resolution":
      return `agreed on ${p.agreed}, waiting for seat ${p.speaker} to reveal`;
    case "End":
      return `game over: ${view.completed.length}/16 cells found`;
  }
}

function renderStatus(view: ClientView): HTMLElement {
  const bar = el("div", "statusbar");
  if (view.connection === "retry") {
    bar.append(el("span", "banner retry", view.connectionDetail ?? "reconnecting"));
  } else if (view.connection === "seat_unavailable") {
    bar.append(el("span", "banner refusal", view.connectionDetail ?? "seat unavailable"));
  } else if (view.connection === "connecting") {
    bar.append(el("span", "banner", "connecting"));
  } else {
    bar.append(el("span", "banner phase", phaseBanner(view)));
  }
  if (view.toast) {
    const toast = el("span", "toast", view.toast);
    toast.dataset.seq = String(view.toastSeq);
    bar.append(toast);
  }
  if (view.token && view.seat !== null) {
    // reload-safe bookmark: same seat, same token
    const link = el("a", "resume", "resume link") as HTMLAnchorElement;
    const params = new URLSearchParams(window.location.search);
    params.set("seat", String(view.seat));
    params.set("token", view.token);
    link.href = `?${params.toString()}`;
    bar.append(link);
  }
  return bar;
}

function renderGrid(view: ClientView, actions: BoardActions): HTMLElement {
  const wrap = el("div", "board");
  if (!view.grid) return wrap;
  const selectable = selectableCells(view);
  const completed = new Set(view.completed);
  const picksByCell = new Map<string, number[]>();
  view.selections.forEach((cell, seat) => {
    if (cell) picksByCell.set(cell, [...(picksByCell.get(cell) ?? []), seat]);
  });

  const table = el("table", "grid");
  const head = el("tr", "");
  head.append(el("th", "corner", ""));
  for (const word of view.grid.columns) head.append(el("th", "colword", word));
  table.append(head);

  allCells().forEach((label, i) => {
    const col = i % 4;
    const row = Math.floor(i / 4);
    if (col === 0) {
      const tr = el("tr", "");
      tr.append(el("th", "rowword", view.grid!.rows[row] ?? ""));
      table.append(tr);
    }
    const td = el("td", "cell");
    const button = el("button", "cellbtn", label) as HTMLButtonElement;
    if (completed.has(label)) {
      button.classList.add("done");
      button.disabled = true;
    } else if (selectable.has(label)) {
      button.onclick = () => actions.selectCell(label);
    } else {
      button.disabled = true;
    }
    if (view.ownCard === label) button.classList.add("owncard");
    const picks = picksByCell.get(label);
    if (picks) {
      button.classList.add("picked");
      button.append(el("span", "picks", picks.map((s) => `s${s}`).join(" ")));
    }
    td.append(button);
    table.lastElementChild!.append(td);
  });
  wrap.append(table);

  const agreement = agreementSummary(view);
  if (agreement) {
    wrap.append(
      el("div", "agreement", `${agreement.count}/${agreement.needed} agree on ${agreement.cell}`),
    );
  }
  return wrap;
}

function renderControls(view: ClientView, actions: BoardActions): HTMLElement {
  const box = el("div", "controls");
  const can = enabledCommands(view);

  const speak = el("button", `speakbtn ${view.color ?? ""}`, "request to speak") as HTMLButtonElement;
  speak.disabled = !can.has("RequestSpeak");
  speak.onclick = () => actions.requestSpeak();
  box.append(speak);

  if (can.has("ProposeClue")) {
    const input = el("input", "clueinput") as HTMLInputElement;
    input.placeholder = `one word for ${view.ownCard}`;
    const send = el("button", "cluebtn", "propose") as HTMLButtonElement;
    send.onclick = () => {
      if (input.value.trim()) actions.proposeClue(input.value.trim());
    };
    const giveUp = el("button", "cancelbtn", "never mind") as HTMLButtonElement;
    giveUp.onclick = () => actions.cancelSpeak();
    box.append(input, send, giveUp);
  }

  if (can.has("ConfirmResolution")) {
    const confirm = el("button", "confirmbtn", `reveal: was it ${view.phase.agreed}?`) as HTMLButtonElement;
    confirm.onclick = () => actions.confirmResolution();
    box.append(confirm);
  }

  const hand = el("div", "hand");
  hand.append(
    el("span", "", view.ownCard ? `your card: ${view.ownCard}` : "no card in hand"),
    el("span", "deck", `deck: ${view.deckSize}`),
  );
  box.append(hand);
  return box;
}

function renderAgents(view: ClientView): HTMLElement {
  const strip = el("div", "agents");
  for (const slot of Object.values(view.agents)) {
    const card = el("div", "agentslot");
    card.append(
      el("div", "face", `${slot.faceId ?? "?"} (${slot.bodyKind ?? "?"}, seat ${slot.seat})`),
    );
    if (slot.expression) card.append(el("div", "expression", slot.expression));
    if (slot.utterance) {
      const bubble = el("div", "bubble", slot.utterance);
      bubble.style.animationDuration = `${slot.utteranceMs}ms`;
      card.append(bubble);
    }
    if (slot.activity) card.append(el("div", "activity", slot.activity));
    strip.append(card);
  }
  return strip;
}

function renderFeed(view: ClientView): HTMLElement {
  const feed = el("div", "feed");
  for (const line of view.feed.slice(-30)) feed.append(el("div", "feedline", line));
  return feed;
}

export function render(view: ClientView, root: HTMLElement, actions: BoardActions): void {
  root.replaceChildren(
    renderStatus(view),
    renderGrid(view, actions),
    renderControls(view, actions),
    renderAgents(view),
    renderFeed(view),
  );
}
