#!/usr/bin/env python3
"""Generate a synthetic JSONL corpus from the toy entity-summarization task.

Each record carries a source transcript; with --with-summaries a noisy summary
is attached (drops an entity, repeats one, or swaps in an ungrounded one) so
the scored corpus exercises every EHI component. The reference field lists the
entities actually planted in the source.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ehikit.training import SyntheticTask, generate_task_instance  # noqa: E402


def noisy_summary(task: SyntheticTask, reference: tuple[str, ...], rng: np.random.Generator) -> str:
    keys = list(reference)
    roll = rng.random()
    if roll < 0.25 and keys:
        keys = keys[1:]  # omit one entity
    elif roll < 0.5 and keys:
        keys = keys + [keys[0]] * int(rng.integers(2, 4))  # overfocus on one
    elif roll < 0.75:
        outside = [k for k in task.entity_keys if k not in reference]
        keys = keys + [outside[int(rng.integers(0, len(outside)))]]  # hallucinate
    fillers = [task.filler_vocab[int(i)] for i in rng.integers(0, len(task.filler_vocab), size=2)]
    words = keys + fillers
    order = rng.permutation(len(words))
    return " ".join(words[int(i)] for i in order)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--n", type=int, default=100, help="number of records")
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--with-summaries", action="store_true")
    args = parser.parse_args()

    task = SyntheticTask()
    rng = np.random.default_rng(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for i in range(args.n):
            inst = generate_task_instance(task, rng)
            row = {
                "id": f"syn-{i:05d}",
                "source": inst.source_text,
                "reference": " ".join(inst.reference_entities),
            }
            if args.with_summaries:
                row["summary"] = noisy_summary(task, inst.reference_entities, rng)
            fh.write(json.dumps(row) + "\n")
    print(f"wrote {args.n} records to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
