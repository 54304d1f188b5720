#!/usr/bin/env python3
"""Run the full pinned acceptance battery and write artifacts to ./battery_out."""

import sys

from polycarleson.battery import run_battery

if __name__ == "__main__":
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "battery_out"
    results, code = run_battery(out_dir=out_dir)
    print(f"exit code {code}; artifacts in {out_dir}/")
    sys.exit(code)
