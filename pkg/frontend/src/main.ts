// Entry point: read settings from the URL, run the frame -> reduce -> render
// loop. ?server=host:port&seat=0&token=... (server defaults to the page host)

import { BoardClient } from "./client.js";
import { render, type BoardActions } from "./render.js";
import { initialView, reduce, type ClientView } from "./view.js";

function start(): void {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? window.location.host;
  const seat = Number(params.get("seat") ?? "0");
  const token = params.get("token") ?? undefined;

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  let view: ClientView = initialView();

  const client = new BoardClient({
    serverAddress: server,
    seat,
    token,
    makeSocket: (url) => new WebSocket(url),
    dispatch: (input) => {
      view = reduce(view, input);
      render(view, root, actions);
    },
  });

  const actions: BoardActions = {
    requestSpeak: () => client.submit({ type: "RequestSpeak" }),
    cancelSpeak: () => client.submit({ type: "CancelSpeak" }),
    proposeClue: (word) => client.submit({ type: "ProposeClue", word }),
    selectCell: (cell) => client.submit({ type: "SelectCell", cell }),
    confirmResolution: () => client.submit({ type: "ConfirmResolution" }),
  };

  render(view, root, actions);
  client.connect();
}

start();
