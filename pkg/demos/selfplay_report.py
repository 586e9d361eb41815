"""Batch self-play with the packaged lexicon, then verify one log from disk.

Run with: python3 demos/selfplay_report.py
"""

import json
import tempfile
from pathlib import Path

from motmalin.selfplay import selfplay
from motmalin.session import verify_log


def main():
    with tempfile.TemporaryDirectory() as tmp:
        report = selfplay(10, base_seed=42, log_dir=tmp)
        print(json.dumps({k: v for k, v in report.items() if k != "perGame"}, indent=2))
        print("per game:", " ".join(f"{g['seed']}:{g['completed']}/16" for g in report["perGame"]))

        log = sorted(Path(tmp).glob("*.jsonl"))[0]
        state, digest = verify_log(log)
        print(f"\n{log.name}: {state.resolved_count} resolutions, sealed digest matches: "
              f"{digest == state.digest()}")


if __name__ == "__main__":
    main()
