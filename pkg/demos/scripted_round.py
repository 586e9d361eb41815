"""One hybrid round, narrated: a human gives "coach" for (teacher, ball).

Seats 0 and 1 are humans, 2 and 3 are autonomous guessers. We scan shuffle
seeds until the speaker's opening card is B4, then script the human side and
let the agents do their thing. Run with: python3 demos/scripted_round.py
"""

from motmalin.agent import AgentProfile
from motmalin.game import parse_coordinate, propose_clue, request_speak, select_cell, confirm_resolution
from motmalin.session import SessionConfig, VirtualClock, create_session, replay


def narrate(frame, seat):
    kind = frame["kind"]
    body = frame.get("body", {})
    if kind == "event":
        bits = {k: v for k, v in body.items() if k not in ("type", "grid")}
        print(f"  seat{seat} sees {body['type']} {bits}")
    elif kind == "instruction":
        for inst in body["instructions"]:
            label = inst.get("text") or inst.get("expression") or inst.get("motion") or inst.get("gesture")
            if label is None and "seat" in inst:
                label = f"seat {inst['seat']}"
            print(f"  seat{frame['seat']} body does {inst['kind']}({label!r}) at +{inst['onsetMs']}ms")


def main():
    b4 = parse_coordinate("B4")
    profiles = (
        AgentProfile(name="ana", proactivity=0.0, rng_seed=5),
        AgentProfile(name="bo", proactivity=0.0, rng_seed=6),
    )
    for seed in range(400):
        session = create_session(
            SessionConfig(condition="hybrid", shuffle_seed=seed, agent_profiles=profiles),
            clock=VirtualClock(),
        )
        if session.state.hands[0] == b4:
            break
    print(f"seed {seed}: human at seat 0 drew card {session.state.hands[0].label()} "
          f"= {session.state.grid.words_at(b4)}")

    session.subscribe(1, lambda f: narrate(f, 1))

    print("\nseat 0 requests the floor and proposes 'coach':")
    session.submit(0, request_speak(0).to_body())
    session.submit(0, propose_clue(0, "coach").to_body())

    print(f"\nagents picked: seat2={session.state.selections[2].label()} "
          f"seat3={session.state.selections[3].label()}")

    print("\nseat 1 agrees, seat 0 confirms:")
    session.submit(1, select_cell(1, b4).to_body())
    session.submit(0, confirm_resolution(0).to_body())

    state = session.state
    print(f"\ncompleted cells: {sorted(c.label() for c in state.completed)}")
    assert replay(session.records).digest() == state.digest()
    print("log replays to the same digest; the round is on the record.")


if __name__ == "__main__":
    main()
