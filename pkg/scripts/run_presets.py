#!/usr/bin/env python3
"""Drive the CLI over the shipped preset configs and summarize the verdicts.

Usage: python3 scripts/run_presets.py [--quick]
"""

import argparse
import json
import sys
from pathlib import Path

from fracp.cli import run

PRESETS = {
    "configs/boundary_case2.json": ["classify", "solve", "exponent-fit", "compare"],
    "configs/boundary_case1.json": ["classify", "exponent-fit"],
    "configs/sobolev_bounded.json": ["classify", "sobolev-scan"],
    "configs/sobolev_divergent.json": ["classify", "sobolev-scan"],
    "configs/nonexistence.json": ["nonexistence-scan"],
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="only the quick config, all subcommands")
    args = ap.parse_args()

    jobs = {"configs/quick.json": ["all"]} if args.quick else PRESETS
    worst = 0
    for cfg_path, subcommands in jobs.items():
        for sub in subcommands:
            code = run(sub, cfg_path)
            out_dir = json.loads(Path(cfg_path).read_text())["output"]["directory"]
            print(f"{cfg_path} :: {sub:18s} -> exit {code} (artifacts in {out_dir})")
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
