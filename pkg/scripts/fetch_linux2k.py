#!/usr/bin/env python3
"""Download the Loghub Linux 2k structured log sample into data/.

The file is the input for the dataset-replay acceptance test and the full
pipeline demos.  It is a 2000-line structured CSV export of a Linux syslog
sample, published in the Loghub collection (https://github.com/logpai/loghub).
"""
from __future__ import annotations

import sys
import urllib.request
from pathlib import Path

URL = ("https://raw.githubusercontent.com/logpai/loghub/master/"
       "Linux/Linux_2k.log_structured.csv")
DESTINATION = Path(__file__).resolve().parent.parent / "data" / "Linux_2k.log_structured.csv"


def main() -> int:
    if DESTINATION.exists():
        print(f"already present: {DESTINATION}")
        return 0
    DESTINATION.parent.mkdir(parents=True, exist_ok=True)
    print(f"fetching {URL}")
    try:
        with urllib.request.urlopen(URL, timeout=60) as response:
            payload = response.read()
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    DESTINATION.write_bytes(payload)
    lines = payload.count(b"\n")
    print(f"wrote {DESTINATION} ({len(payload)} bytes, {lines} lines)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
