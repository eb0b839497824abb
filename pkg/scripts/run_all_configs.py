"""Run every shipped config and print one summary line per file."""
import argparse
import json
from pathlib import Path

from epsn.cli import main

ROOT = Path(__file__).resolve().parents[1]


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    ap.add_argument("--jobs", default="1")
    args = ap.parse_args()
    worst = 0
    for cfg in sorted((ROOT / "configs").glob("*.json")):
        command = "verify" if cfg.stem == "verify" else "run"
        out = args.out / cfg.stem
        code = main([command, str(cfg), "--out", str(out), "--jobs", args.jobs])
        summary = json.loads((out / "report.json").read_text())["summary"] if code != 2 else {}
        print(f"{cfg.name:28s} exit={code} {summary}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(cli())
