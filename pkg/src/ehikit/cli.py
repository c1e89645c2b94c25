"""The ``ehi`` command: pair scoring, corpus scoring, splits, toy training, serving.

Exit codes: 0 ok, 2 usage or missing file, 3 parse error, 4 numerical
divergence. Machine-readable output goes to stdout only; diagnostics to
stderr. Every randomized subcommand takes an explicit --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import (
    CorpusParse,
    CorpusTooSmall,
    DuplicateId,
    SplitSpec,
    read_jsonl_path,
    split_corpus,
    write_jsonl_path,
)
from .entities import Gazetteer, GazetteerParse, load_gazetteer
from .metric import MetricConfig, ReferenceMode, score_pair
from .service import DEFAULT_MAX_BATCH, serve
from .training import (
    NumericalDivergence,
    SyntheticTask,
    TrainConfig,
    save_checkpoint,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_DIVERGENCE = 4

_METRIC_KEYS = {"of_repeat_cap", "lf_importance_threshold", "reference_mode", "heuristics_enabled"}
_TRAIN_KEYS = {
    "learning_rate", "batch_size", "beta1", "beta2", "adam_eps",
    "normalize_rewards", "regen_interval", "max_updates", "seed", "val_size",
}
_TASK_KEYS = {"source_length", "summary_length", "entities_per_source"}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise _CliError(EXIT_USAGE, f"file not found: {path}")
    return p.read_text(encoding="utf-8")


def _load_gazetteer(path: str) -> Gazetteer:
    p = Path(path)
    if not p.is_file():
        raise _CliError(EXIT_USAGE, f"gazetteer file not found: {path}")
    try:
        with open(p, "rb") as fh:
            return load_gazetteer(fh)
    except GazetteerParse as e:
        raise _CliError(EXIT_PARSE, str(e)) from None


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise _CliError(EXIT_USAGE, f"config file not found: {path}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise _CliError(EXIT_PARSE, f"config {path}: invalid JSON: {e.msg}") from None
    if not isinstance(obj, dict):
        raise _CliError(EXIT_PARSE, f"config {path}: expected a flat JSON object")
    unknown = set(obj) - _METRIC_KEYS - _TRAIN_KEYS - _TASK_KEYS
    if unknown:
        raise _CliError(EXIT_PARSE, f"config {path}: unknown keys {sorted(unknown)}")
    return obj


def _metric_config(raw: dict) -> MetricConfig:
    kwargs = {k: raw[k] for k in _METRIC_KEYS & set(raw)}
    if "reference_mode" in kwargs:
        try:
            kwargs["reference_mode"] = ReferenceMode(kwargs["reference_mode"])
        except ValueError:
            raise _CliError(
                EXIT_PARSE, f"reference_mode must be one of "
                f"{[m.value for m in ReferenceMode]}, got {kwargs['reference_mode']!r}"
            ) from None
    try:
        return MetricConfig(**kwargs)
    except (TypeError, ValueError) as e:
        raise _CliError(EXIT_PARSE, f"bad metric config: {e}") from None


def _read_corpus(path: str):
    p = Path(path)
    if not p.is_file():
        raise _CliError(EXIT_USAGE, f"corpus file not found: {path}")
    try:
        return read_jsonl_path(p)
    except (CorpusParse, DuplicateId) as e:
        raise _CliError(EXIT_PARSE, f"{path}: {e}") from None


def cmd_score(args) -> int:
    source = _read_text(args.source)
    summary = _read_text(args.summary)
    reference = _read_text(args.reference) if args.reference else None
    gazetteer = _load_gazetteer(args.gazetteer)
    config = _metric_config(_load_config_file(args.config))
    report = score_pair(source, summary, reference, gazetteer, config)
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_score_corpus(args) -> int:
    records = _read_corpus(args.input)
    gazetteer = _load_gazetteer(args.gazetteer)
    config = _metric_config(_load_config_file(args.config))

    ehis: list[float] = []
    f1s: list[float] = []
    skipped = 0
    errors = 0
    for rec in records:
        if rec.summary is None:
            skipped += 1
            continue
        try:
            report = score_pair(rec.source, rec.summary, rec.reference, gazetteer, config)
        except Exception as e:  # a bad record must not abort the run
            errors += 1
            print(f"record {rec.id}: scoring failed: {e}", file=sys.stderr)
            continue
        rec.scores = report.to_dict()
        ehis.append(report.ehi)
        f1s.append(report.entity_f1)

    write_jsonl_path(records, args.output)
    n = len(ehis)
    stats = {
        "n": n,
        "mean_ehi": sum(ehis) / n if n else None,
        "mean_f1": sum(f1s) / n if n else None,
        "frac_ehi_ge_0.3_le_0.6": (sum(1 for e in ehis if 0.3 <= e <= 0.6) / n) if n else None,
        "skipped_no_summary": skipped,
        "errors": errors,
    }
    print(json.dumps(stats), file=sys.stderr)
    return EXIT_OK


def cmd_split(args) -> int:
    records = _read_corpus(args.input)
    parts = args.fractions.split(",")
    if len(parts) != 3:
        raise _CliError(EXIT_USAGE, f"--fractions needs 3 comma-separated values, got {args.fractions!r}")
    try:
        spec = SplitSpec(float(parts[0]), float(parts[1]), float(parts[2]), args.seed)
    except ValueError as e:
        raise _CliError(EXIT_USAGE, f"bad split spec: {e}") from None
    try:
        train_recs, val_recs, test_recs = split_corpus(records, spec)
    except CorpusTooSmall as e:
        raise _CliError(EXIT_USAGE, str(e)) from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, recs in (("train", train_recs), ("val", val_recs), ("test", test_recs)):
        write_jsonl_path(recs, out_dir / f"{name}.jsonl")
    print(json.dumps({"train": len(train_recs), "val": len(val_recs), "test": len(test_recs)}))
    return EXIT_OK


def cmd_train_toy(args) -> int:
    raw = _load_config_file(args.config)
    task_kwargs = {k: raw[k] for k in _TASK_KEYS & set(raw)}
    train_kwargs = {k: raw[k] for k in _TRAIN_KEYS & set(raw)}
    train_kwargs["seed"] = args.seed
    if args.max_updates is not None:
        train_kwargs["max_updates"] = args.max_updates
    try:
        task = SyntheticTask(**task_kwargs)
        config = TrainConfig(**train_kwargs)
    except (TypeError, ValueError) as e:
        raise _CliError(EXIT_PARSE, f"bad training config: {e}") from None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = train(task, config)
    except NumericalDivergence as e:
        dump_path = out_dir / "divergence_dump.json"
        dump_path.write_text(json.dumps(e.state, indent=2) + "\n", encoding="utf-8")
        print(f"training diverged: {e} (state dumped to {dump_path})", file=sys.stderr)
        return EXIT_DIVERGENCE

    with open(out_dir / "metrics.jsonl", "w", encoding="utf-8") as fh:
        for entry_ in result.log:
            fh.write(json.dumps(entry_) + "\n")
    save_checkpoint(result.policy, out_dir / "checkpoint.json")
    print(json.dumps({"best_update": result.best_update, "best_val_ehi": result.best_val_ehi}))
    return EXIT_OK


def cmd_serve(args) -> int:
    gazetteer = _load_gazetteer(args.gazetteer)
    config = _metric_config(_load_config_file(args.config))
    transport = "stdio" if args.stdio else args.listen
    try:
        serve(transport, gazetteer, config, max_batch=args.max_batch)
    except OSError as e:
        raise _CliError(EXIT_USAGE, str(e)) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one source/summary pair")
    p.add_argument("--source", required=True, help="source document file")
    p.add_argument("--summary", required=True, help="summary file")
    p.add_argument("--reference", help="optional reference summary file")
    p.add_argument("--gazetteer", required=True, help="gazetteer TSV file")
    p.add_argument("--config", help="flat JSON metric config")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("score-corpus", help="score every record of a JSONL corpus")
    p.add_argument("--in", dest="input", required=True, help="input corpus (.jsonl or .jsonl.gz)")
    p.add_argument("--out", dest="output", required=True, help="output scored corpus")
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_score_corpus)

    p = sub.add_parser("split", help="deterministic train/val/test split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fractions", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train-toy", help="train the toy policy against the EHI reward")
    p.add_argument("--config", help="flat JSON training config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-updates", type=int, help="override max_updates")
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("serve", help="run the reward service")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    group.add_argument("--listen", help="TCP listen address host[:port]")
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--config")
    p.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except BrokenPipeError:
        return EXIT_OK


def entry() -> None:
    sys.exit(main())
