"""Command-line frontend: transform, process, dedup, clean and bench.

A JSON config file can preload any option; explicit flags override it.
CODENORM_WORKERS overrides the built-in worker default when no flag or
config value is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bench as bench_mod
from . import dataset as dataset_mod
from .dataset import CleanPolicy, EngineMode, MalformedRecord
from .syntax import NoFunctionFound
from .transform import (
    ALL_TRANSFORMS,
    OnNoFunction,
    Representation,
    Transform,
    TransformConfig,
    normalize_source,
    identity_unit,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_MALFORMED = 4
EXIT_REJECTED = 5

# §-free statement of the documented default: the three-transformation
# text pipeline over four workers.
DEFAULT_TRANSFORMS = frozenset({Transform.FuncRename, Transform.VarRename,
                                Transform.CommentRemove})
DEFAULT_WORKERS = 4

_MODE_NAMES = {"single_pass": EngineMode.SinglePass,
               "multi_pass": EngineMode.MultiPassBaseline}


class UnknownTransformName(Exception):
    pass


class ConflictingFlags(Exception):
    pass


class UnreadableConfigFile(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    transform_config: TransformConfig = field(default_factory=TransformConfig)
    input: str | None = None
    output: str | None = None
    workers: int = DEFAULT_WORKERS
    policy: CleanPolicy = CleanPolicy.DropAllInconsistent
    mode: EngineMode = EngineMode.SinglePass
    entries: int | None = None
    on_malformed: str = "abort"


def _parse_enable(value) -> frozenset[Transform]:
    if isinstance(value, str):
        names = [v.strip() for v in value.split(",") if v.strip()]
    else:
        names = list(value)
    if "none" in names:
        if len(names) > 1:
            raise ConflictingFlags("'none' cannot be combined with transform names")
        return frozenset()
    if "all" in names:
        if len(names) > 1:
            raise ConflictingFlags("'all' cannot be combined with transform names")
        return frozenset(ALL_TRANSFORMS)
    out = set()
    for name in names:
        try:
            out.add(Transform(name))
        except ValueError:
            known = ", ".join(sorted(t.value for t in Transform))
            raise UnknownTransformName(f"unknown transform {name!r} (known: {known}, none, all)")
    return frozenset(out)


_CONFIG_KEYS = frozenset({
    "input", "output", "enable", "var_prefix", "func_prefix",
    "string_placeholder", "repr", "on_no_function", "workers", "policy",
    "mode", "entries", "on_malformed",
})


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UnreadableConfigFile(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UnreadableConfigFile(f"config file {path} must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UnreadableConfigFile(
            f"config file {path} has unknown keys: {', '.join(sorted(unknown))}")
    return data


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codenorm",
        description="Normalize C/C++ function snippets and curate vulnerability corpora.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, *, enable=False, workers=False, repr_flag=False,
                   no_function=False, malformed=False):
        p.add_argument("--input", help="input path")
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--config", help="JSON config file; flags override it")
        if enable:
            p.add_argument("--enable", help="comma-separated transforms, or 'none'/'all'")
            p.add_argument("--var-prefix", dest="var_prefix")
            p.add_argument("--func-prefix", dest="func_prefix")
            p.add_argument("--string-placeholder", dest="string_placeholder")
        if repr_flag:
            p.add_argument("--repr", choices=["text", "token_array"], dest="repr_")
        if no_function:
            p.add_argument("--on-no-function", choices=["pass", "reject"],
                           dest="on_no_function")
        if workers:
            p.add_argument("--workers", type=int)
        if malformed:
            p.add_argument("--on-malformed", choices=["abort", "skip"],
                           dest="on_malformed")

    p = sub.add_parser("transform", help="normalize one C/C++ source file")
    add_common(p, enable=True, repr_flag=True, no_function=True)

    p = sub.add_parser("process", help="normalize a JSONL corpus")
    add_common(p, enable=True, workers=True, repr_flag=True, no_function=True,
               malformed=True)

    p = sub.add_parser("dedup", help="report duplicate groups in a corpus")
    add_common(p, workers=True, malformed=True)

    p = sub.add_parser("clean", help="drop duplicate/inconsistent records")
    add_common(p, workers=True, malformed=True)
    p.add_argument("--policy", choices=["drop_all", "keep_first"])

    p = sub.add_parser("bench", help="benchmark corpus processing")
    add_common(p, enable=True, workers=True, malformed=True)
    p.add_argument("--mode", choices=sorted(_MODE_NAMES))
    p.add_argument("--entries", type=int, help="process at most N corpus entries")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve argv plus optional config file into one RunConfig."""
    args = _build_parser().parse_args(argv)
    file_conf = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag_name, file_key, default):
        value = getattr(args, flag_name, None)
        if value is not None:
            return value
        if file_key in file_conf and file_conf[file_key] is not None:
            return file_conf[file_key]
        return default

    subcommand = args.subcommand
    if subcommand in ("dedup", "clean"):
        enabled = frozenset(ALL_TRANSFORMS)  # dedup always uses the canonical form
    else:
        enable_value = pick("enable", "enable", None)
        enabled = DEFAULT_TRANSFORMS if enable_value is None else _parse_enable(enable_value)

    workers = pick("workers", "workers", None)
    if workers is None:
        workers = int(os.environ.get("CODENORM_WORKERS", DEFAULT_WORKERS))
    workers = int(workers)
    if workers < 1:
        raise ConflictingFlags("--workers must be >= 1")

    try:
        transform_config = TransformConfig(
            enabled=enabled,
            var_prefix=pick("var_prefix", "var_prefix", "var_"),
            func_prefix=pick("func_prefix", "func_prefix", "func_"),
            string_placeholder=pick("string_placeholder", "string_placeholder", "str"),
            representation=Representation(pick("repr_", "repr", "text")),
            on_no_function=OnNoFunction(pick("on_no_function", "on_no_function", "pass")),
        )
    except ValueError as exc:
        raise ConflictingFlags(str(exc)) from exc

    mode_name = pick("mode", "mode", "single_pass")
    if mode_name not in _MODE_NAMES:
        raise ConflictingFlags(f"unknown mode {mode_name!r}")
    entries = pick("entries", "entries", None)
    if subcommand == "bench" and pick("input", "input", None) is None and entries != 0:
        raise ConflictingFlags("bench needs --input unless --entries is 0")
    return RunConfig(
        subcommand=subcommand,
        transform_config=transform_config,
        input=pick("input", "input", None),
        output=pick("output", "output", None),
        workers=workers,
        policy=CleanPolicy(pick("policy", "policy", "drop_all")),
        mode=_MODE_NAMES[mode_name],
        entries=None if entries is None else int(entries),
        on_malformed=pick("on_malformed", "on_malformed", "abort"),
    )


def _write_output(path: str | None, text: str) -> None:
    """Write atomically so an abort never leaves a partial output file."""
    if path is None:
        sys.stdout.write(text)
        return
    tmp = Path(path).with_name(Path(path).name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8", errors="surrogateescape")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _summary(message: str) -> None:
    print(message, file=sys.stderr)


def _load_corpus(rc: RunConfig):
    if rc.input is None:
        raise FileNotFoundError("--input is required for this subcommand")
    return dataset_mod.load_records(rc.input, on_malformed=rc.on_malformed,
                                    max_records=rc.entries)


def _cmd_transform(rc: RunConfig) -> int:
    source = Path(rc.input).read_text(encoding="utf-8", errors="surrogateescape")
    status = "ok"
    try:
        unit = normalize_source(source, rc.transform_config)
    except NoFunctionFound:
        if rc.transform_config.on_no_function is OnNoFunction.Reject:
            print("error: no function definition found", file=sys.stderr)
            return EXIT_REJECTED
        unit = identity_unit(source, rc.transform_config)
        status = "passed_through"
    if unit.tokens is not None:
        payload = json.dumps([[k, t] for k, t in unit.tokens], ensure_ascii=False) + "\n"
    else:
        payload = unit.text
    _write_output(rc.output, payload)
    _summary(f"transformed 1 unit (status {status})")
    return EXIT_OK


def _processed_jsonl(records, processed) -> str:
    lines = [json.dumps(dataset_mod.processed_to_dict(rec, proc), ensure_ascii=False)
             for rec, proc in zip(records, processed)]
    return "".join(line + "\n" for line in lines)


def _cmd_process(rc: RunConfig) -> int:
    records = _load_corpus(rc)
    processed = dataset_mod.process_dataset(records, rc.transform_config, rc.workers)
    if rc.transform_config.canonical:
        dataset_mod.find_duplicates(processed, records)  # fills dup_group
    _write_output(rc.output, _processed_jsonl(records, processed))
    counts = {status: 0 for status in dataset_mod.ProcessStatus}
    for proc in processed:
        counts[proc.status] += 1
    _summary("processed {} records (ok={}, passed_through={}, rejected={})".format(
        len(records), counts[dataset_mod.ProcessStatus.Ok],
        counts[dataset_mod.ProcessStatus.PassedThrough],
        counts[dataset_mod.ProcessStatus.Rejected]))
    return EXIT_OK


def _canonical_pass(rc: RunConfig):
    records = _load_corpus(rc)
    config = TransformConfig(enabled=ALL_TRANSFORMS,
                             on_no_function=rc.transform_config.on_no_function)
    processed = dataset_mod.process_dataset(records, config, rc.workers)
    report = dataset_mod.find_duplicates(processed, records)
    return records, processed, report


def _cmd_dedup(rc: RunConfig) -> int:
    records, _, report = _canonical_pass(rc)
    _write_output(rc.output, json.dumps(report.to_dict(), indent=2) + "\n")
    _summary("{} records, {} duplicate groups, {} inconsistent, {} removable".format(
        len(records), len(report.groups), len(report.inconsistent), len(report.removed)))
    return EXIT_OK


def _cmd_clean(rc: RunConfig) -> int:
    records, _, report = _canonical_pass(rc)
    survivors = dataset_mod.clean(records, report, rc.policy)
    lines = [json.dumps(rec.to_dict(), ensure_ascii=False) for rec in survivors]
    _write_output(rc.output, "".join(line + "\n" for line in lines))
    _summary(f"kept {len(survivors)} of {len(records)} records "
             f"(removed {len(records) - len(survivors)}, policy {rc.policy.value})")
    return EXIT_OK


def _cmd_bench(rc: RunConfig) -> int:
    report = bench_mod.run_benchmark(rc.input, rc.transform_config,
                                     workers=rc.workers, mode=rc.mode,
                                     max_entries=rc.entries)
    _write_output(rc.output, report.to_json() + "\n")
    peak = ("unknown" if report.peak_memory_bytes is None
            else f"{report.peak_memory_bytes / 1e6:.1f}MB")
    _summary(f"mode={report.mode.value} entries={report.entries} "
             f"wall={report.wall_time_ms:.0f}ms load={report.load_time_ms:.0f}ms "
             f"throughput={report.throughput:.0f}/s parse_count={report.parse_count_total} "
             f"peak={peak}")
    return EXIT_OK


_COMMANDS = {
    "transform": _cmd_transform,
    "process": _cmd_process,
    "dedup": _cmd_dedup,
    "clean": _cmd_clean,
    "bench": _cmd_bench,
}


def run(rc: RunConfig) -> int:
    """Dispatch a parsed RunConfig; returns the process exit status."""
    try:
        return _COMMANDS[rc.subcommand](rc)
    except (FileNotFoundError, IsADirectoryError, PermissionError,
            bench_mod.CorpusUnreadable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MalformedRecord as exc:
        print(f"error: malformed record: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        rc = parse_config(argv)
    except (UnknownTransformName, ConflictingFlags, UnreadableConfigFile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("run 'codenorm --help' for usage", file=sys.stderr)
        return EXIT_USAGE
    return run(rc)


if __name__ == "__main__":
    sys.exit(main())
