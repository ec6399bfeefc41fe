"""Run every scenario in a directory through the CLI and print one line per scenario."""

import argparse
import io
import sys
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from pdoweights.cli import main


def run(path: Path, out: str, formats: str) -> tuple[int, float]:
    t0 = time.perf_counter()
    with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
        code = main(["verify", str(path), "--out", out, "--format", formats])
    return code, time.perf_counter() - t0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", default=str(Path(__file__).resolve().parents[1] / "scenarios"))
    ap.add_argument("--out", default="reports")
    ap.add_argument("--format", default="json,csv,svg")
    args = ap.parse_args()
    worst = 0
    for path in sorted(Path(args.directory).glob("*.json")):
        code, dt = run(path, args.out, args.format)
        expected = 1 if "known-bad" in path.stem else 0
        tag = "ok" if code == expected else "UNEXPECTED"
        print(f"{path.name:32s} exit={code} expected={expected} {dt:6.1f}s {tag}")
        worst = max(worst, int(code != expected))
    sys.exit(worst)
