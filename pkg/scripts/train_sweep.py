#!/usr/bin/env python3
"""Multi-seed training dynamics experiment.

Trains the toy policy over a seed sweep, reports the untrained baseline (greedy
decoding of the initial uniform policy) next to each seed's best-checkpoint
validation EHI, and writes per-seed results as JSONL for plotting.
"""

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ehikit.training import (  # noqa: E402
    PolicyState,
    SyntheticTask,
    TrainConfig,
    evaluate_policy,
    train,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10, help="number of seeds (0..n-1)")
    parser.add_argument("--updates", type=int, default=5000)
    parser.add_argument("--baseline-instances", type=int, default=500)
    parser.add_argument("--out", help="optional JSONL of per-seed results")
    args = parser.parse_args()

    task = SyntheticTask()
    baseline = evaluate_policy(PolicyState.initial(task), task, args.baseline_instances, seed=424242)
    print(f"untrained baseline: mean EHI {baseline['mean_ehi']:.4f}, mean F1 {baseline['mean_f1']:.4f}")

    rows = []
    for seed in range(args.seeds):
        start = time.monotonic()
        result = train(task, TrainConfig(seed=seed, max_updates=args.updates))
        elapsed = time.monotonic() - start
        rows.append(
            {
                "seed": seed,
                "best_update": result.best_update,
                "best_val_ehi": result.best_val_ehi,
                "untrained_val_ehi": result.log[0]["mean_val_ehi"],
                "final_val_ehi": result.log[-1]["mean_val_ehi"],
                "seconds": round(elapsed, 2),
            }
        )
        print(
            f"seed {seed}: best val EHI {result.best_val_ehi:.4f} @ update {result.best_update} "
            f"({elapsed:.1f}s)"
        )

    bests = [r["best_val_ehi"] for r in rows]
    print(
        f"median best {statistics.median(bests):.4f}, min {min(bests):.4f}, max {max(bests):.4f} "
        f"(baseline {baseline['mean_ehi']:.4f})"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
