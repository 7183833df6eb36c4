#!/usr/bin/env python3
"""Regenerate fixtures/golden/ by replaying fixtures/manifest.json through the CLI.

Usage: tools/regenerate_goldens.py <path to daeobs_cli>

Run the unit and acceptance tests afterwards: the CLI test suite checks the
golden values against independent oracles before comparing bytes.
"""
import json
import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    cli = str(pathlib.Path(sys.argv[1]).resolve())
    manifest = json.loads((FIXTURES / "manifest.json").read_text())
    (FIXTURES / "golden").mkdir(exist_ok=True)
    for case in manifest["cases"]:
        golden = case["golden"]
        target = FIXTURES / golden if golden else pathlib.Path("/dev/null")
        if golden and case["command"] == "simulate" and target.exists():
            shutil.rmtree(target)
        cmd = [cli, case["command"], case["fixture"], *case["args"], "--output", str(target)]
        proc = subprocess.run(cmd, cwd=FIXTURES, capture_output=True, text=True)
        print(f"{proc.returncode:3d}  {' '.join(cmd[1:])}")
        if proc.returncode != case["exit"]:
            print(f"unexpected exit code {proc.returncode}: {proc.stderr}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
