#!/usr/bin/env python3
"""Run every shipped experiment config and print an outcome summary table.

Artifacts (snapshots, convergence series, outcome, manifest) land under
out/<config name>/.  Expect a few minutes total; the long horizons are the
extinction run (T = 140) and the weak-damping run (T = 160).
"""

import sys
import time
from pathlib import Path

from kswave.harness import fmt, parse_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = sorted((ROOT / "experiments").glob("case*_exp*.cfg"))


def main():
    rows = []
    for cfg_path in CONFIGS:
        spec = parse_config(cfg_path.read_text())
        t0 = time.time()
        outcome = run_experiment(spec, ROOT / "out" / cfg_path.stem)
        extra = ""
        if outcome.plateau is not None:
            extra = f"plateau {fmt(outcome.plateau)}"
        if outcome.peak is not None:
            extra = f"peak {fmt(outcome.peak[0])} at x = {fmt(outcome.peak[1])}"
        rows.append((cfg_path.stem, outcome.tag.value, extra,
                     f"{time.time() - t0:.1f}s"))
        print(f"{cfg_path.stem:16s} {outcome.tag.value:20s} {extra:32s} "
              f"[{rows[-1][3]}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
