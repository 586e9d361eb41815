"""Socket front door: one live table served as JSON frames over a websocket.

Connection lifecycle: the server says hello, the client answers with a join
naming its seat (plus its token when reconnecting), the server replies with a
snapshot tailored to that seat, and from then on frames flow both ways until
the socket closes. A background ticker polls the agents every couple of
seconds so they keep playing while humans sit idle.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager, suppress

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from motmalin.session import IDLE_TICK_SECONDS, NotYourSeat, Session


async def _idle_ticker(session: Session, interval: float) -> None:
    while True:
        await asyncio.sleep(interval)
        await asyncio.to_thread(session.tick)


def build_app(session: Session, idle_tick_seconds: float = IDLE_TICK_SECONDS) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        session.tick()  # agents may open the game before anyone connects
        ticker = asyncio.create_task(_idle_ticker(session, idle_tick_seconds))
        try:
            yield
        finally:
            ticker.cancel()
            with suppress(asyncio.CancelledError):
                await ticker
            session.close()

    app = FastAPI(title="motmalin", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    async def health() -> dict:
        return {
            "ok": True,
            "session": session.id,
            "phase": session.state.phase.kind.value,
            "resolvedCount": session.state.resolved_count,
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        await ws.send_json(
            {
                "kind": "hello",
                "body": {"session": session.id, "occupants": list(session.occupants)},
            }
        )
        try:
            first = await ws.receive_json()
        except (WebSocketDisconnect, json.JSONDecodeError):
            return
        if not isinstance(first, dict) or first.get("kind") != "join" or not isinstance(first.get("body"), dict):
            await ws.send_json({"kind": "error", "body": {"error": "Malformed", "message": "first message must be a join"}})
            await ws.close()
            return
        body = first["body"]
        try:
            seat = int(body.get("seat"))
            token, snapshot = session.join(seat, body.get("token"))
        except (NotYourSeat, TypeError, ValueError) as exc:
            await ws.send_json({"kind": "error", "body": {"error": "NotYourSeat", "message": str(exc)}})
            await ws.close()
            return

        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()

        def deliver(frame: dict) -> None:
            # runs under the session lock, possibly on another thread
            loop.call_soon_threadsafe(queue.put_nowait, frame)

        detach = session.subscribe(seat, deliver)
        snapshot = dict(snapshot)
        snapshot["seatToken"] = token
        await ws.send_json({"kind": "state_snapshot", "body": snapshot})

        async def pump_frames() -> None:
            while True:
                await ws.send_json(await queue.get())

        sender = asyncio.create_task(pump_frames())
        try:
            while True:
                try:
                    msg = await ws.receive_json()
                except json.JSONDecodeError:
                    await ws.send_json({"kind": "error", "body": {"error": "Malformed", "message": "frames must be JSON"}})
                    continue
                await asyncio.to_thread(session.handle_message, seat, msg)
        except WebSocketDisconnect:
            pass
        finally:
            detach()
            sender.cancel()
            with suppress(asyncio.CancelledError):
                await sender

    return app


def serve(session: Session, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the app under uvicorn; blocks until interrupted."""
    import uvicorn

    uvicorn.run(build_app(session), host=host, port=port, log_level="warning")
