"""Vulnerability-corpus loading, parallel normalization, dedup and cleaning.

Records are sharded to workers in contiguous chunks and reassembled by
original index, so output is bit-identical regardless of worker count.
"""

from __future__ import annotations

import enum
import json
import multiprocessing
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .syntax import NoFunctionFound, QueryPlan, TokenKind, lex
from . import multipass
from .transform import (
    NormalizedUnit,
    OnNoFunction,
    TransformConfig,
    identity_unit,
    normalize_source,
)


class MalformedRecord(Exception):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class CanonicalFormMissing(Exception):
    """Dedup requires units built with the full-generalization config."""


@dataclass(frozen=True)
class DatasetRecord:
    func: str
    target: int
    cwe: tuple[str, ...] = ()
    project: str = ""
    commit_id: str = ""
    size: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "func": self.func, "target": self.target, "cwe": list(self.cwe),
            "project": self.project, "commit_id": self.commit_id,
            "size": self.size, "message": self.message,
        }


class ProcessStatus(enum.Enum):
    Ok = "ok"
    PassedThrough = "passed_through"
    Rejected = "rejected"


@dataclass
class ProcessedRecord:
    index: int
    output: NormalizedUnit | None
    dup_group: int | None
    status: ProcessStatus


class EngineMode(enum.Enum):
    SinglePass = "single_pass"
    MultiPassBaseline = "multi_pass_baseline"


def load_records(path: str | Path, on_malformed: str = "abort",
                 max_records: int | None = None) -> list[DatasetRecord]:
    """Read a JSON Lines corpus. *on_malformed* is "abort" or "skip"."""
    records: list[DatasetRecord] = []
    with open(path, "r", encoding="utf-8", errors="surrogateescape") as fh:
        for lineno, line in enumerate(fh, start=1):
            if max_records is not None and len(records) >= max_records:
                break
            if not line.strip():
                continue
            try:
                records.append(_parse_record(line, lineno))
            except MalformedRecord as exc:
                if on_malformed == "skip":
                    print(f"warning: skipping record: {exc}", file=sys.stderr)
                    continue
                raise
    return records


def _parse_record(line: str, lineno: int) -> DatasetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "record is not a JSON object")
    func = obj.get("func")
    if not isinstance(func, str) or not func:
        raise MalformedRecord(lineno, "missing or empty 'func'")
    target = obj.get("target")
    if target not in (0, 1):
        raise MalformedRecord(lineno, "'target' must be 0 or 1")
    cwe = obj.get("cwe", [])
    if isinstance(cwe, str):
        cwe = [cwe]
    if not isinstance(cwe, list) or not all(isinstance(c, str) for c in cwe):
        raise MalformedRecord(lineno, "'cwe' must be a list of strings")
    size = obj.get("size", 0)
    if not isinstance(size, int) or size < 0:
        raise MalformedRecord(lineno, "'size' must be a non-negative integer")
    return DatasetRecord(
        func=func, target=target, cwe=tuple(cwe),
        project=str(obj.get("project", "")), commit_id=str(obj.get("commit_id", "")),
        size=size, message=str(obj.get("message", "")),
    )


@dataclass
class ProcessResult:
    records: list[ProcessedRecord]
    parse_count_total: int


def _transform_one(source: str, config: TransformConfig, plan: QueryPlan,
                   mode: EngineMode) -> tuple[NormalizedUnit | None, ProcessStatus]:
    try:
        if mode is EngineMode.SinglePass:
            return normalize_source(source, config, plan), ProcessStatus.Ok
        return multipass.normalize_source_multipass(source, config, plan), ProcessStatus.Ok
    except NoFunctionFound:
        if config.on_no_function is OnNoFunction.PassThrough:
            return identity_unit(source, config), ProcessStatus.PassedThrough
        return None, ProcessStatus.Rejected


def _process_chunk(args) -> tuple[int, list[tuple[NormalizedUnit | None, ProcessStatus]], int]:
    start, sources, config, mode = args
    plan = QueryPlan(config.requested_roles())
    out = [_transform_one(src, config, plan, mode) for src in sources]
    return start, out, plan.parse_counter


def process_corpus(records: list[DatasetRecord], config: TransformConfig,
                   workers: int = 1,
                   mode: EngineMode = EngineMode.SinglePass) -> ProcessResult:
    """Transform every record, preserving input order; returns parse counts too."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = len(records)
    if n == 0:
        return ProcessResult([], 0)

    chunks = _contiguous_chunks(records, config, mode, workers)
    if workers == 1 or len(chunks) == 1:
        results = [_process_chunk(c) for c in chunks]
    else:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_process_chunk, chunks)

    processed: list[ProcessedRecord | None] = [None] * n
    parse_total = 0
    for start, outs, count in results:
        parse_total += count
        for offset, (unit, status) in enumerate(outs):
            idx = start + offset
            processed[idx] = ProcessedRecord(idx, unit, None, status)
    return ProcessResult(processed, parse_total)  # type: ignore[arg-type]


def _contiguous_chunks(records, config, mode, workers):
    n = len(records)
    # a few chunks per worker keeps lanes busy without hurting determinism
    chunk_size = max(1, -(-n // (workers * 4)))
    return [
        (start, [r.func for r in records[start:start + chunk_size]], config, mode)
        for start in range(0, n, chunk_size)
    ]


def process_dataset(records: list[DatasetRecord], config: TransformConfig,
                    workers: int = 1) -> list[ProcessedRecord]:
    return process_corpus(records, config, workers).records


@dataclass(frozen=True)
class DuplicateGroup:
    group_id: int
    members: tuple[int, ...]
    labels: tuple[int, ...]

    @property
    def inconsistent(self) -> bool:
        return len(set(self.labels)) > 1


@dataclass
class DuplicateReport:
    groups: list[DuplicateGroup] = field(default_factory=list)
    inconsistent: list[int] = field(default_factory=list)  # group ids
    removed: list[int] = field(default_factory=list)       # default policy

    def to_dict(self) -> dict:
        return {
            "groups": [
                {"group_id": g.group_id, "members": list(g.members),
                 "labels": list(g.labels), "inconsistent": g.inconsistent}
                for g in self.groups
            ],
            "inconsistent_group_ids": list(self.inconsistent),
            "removed": list(self.removed),
        }


def _canonical_token_array(unit: NormalizedUnit) -> tuple[tuple[str, str], ...]:
    if unit.tokens is not None:
        return unit.tokens
    toks = lex(unit.text or "")
    return tuple((t.kind.value, t.text) for t in toks if t.kind is not TokenKind.Whitespace)


def find_duplicates(processed: list[ProcessedRecord],
                    records: list[DatasetRecord]) -> DuplicateReport:
    """Group records sharing one canonical form; flag mixed-label groups.

    Hash buckets are verified by comparing full canonical token arrays, so a
    digest collision can never place distinct forms in one group. dup_group
    is filled on *processed* for members of multi-record groups.
    """
    for rec in processed:
        if rec.output is not None and not rec.output.canonical:
            raise CanonicalFormMissing(
                f"record {rec.index} was not processed with the canonical config")

    buckets: dict[int, list[int]] = {}
    for rec in processed:
        if rec.output is None:
            continue
        buckets.setdefault(rec.output.hash, []).append(rec.index)

    unit_of = {rec.index: rec.output for rec in processed}
    member_sets: list[list[int]] = []
    for digest in buckets:
        indices = buckets[digest]
        if len(indices) < 2:
            continue
        by_array: dict[tuple, list[int]] = {}
        for idx in indices:
            by_array.setdefault(_canonical_token_array(unit_of[idx]), []).append(idx)
        member_sets.extend(m for m in by_array.values() if len(m) >= 2)
    member_sets.sort(key=lambda m: m[0])

    report = DuplicateReport()
    proc_by_index = {rec.index: rec for rec in processed}
    for gid, members in enumerate(member_sets):
        labels = tuple(records[i].target for i in members)
        group = DuplicateGroup(gid, tuple(members), labels)
        report.groups.append(group)
        for i in members:
            proc_by_index[i].dup_group = gid
        if group.inconsistent:
            report.inconsistent.append(gid)
            report.removed.extend(members)
    report.removed.sort()
    return report


class CleanPolicy(enum.Enum):
    DropAllInconsistent = "drop_all"
    KeepFirst = "keep_first"


def removal_indices(report: DuplicateReport, policy: CleanPolicy) -> set[int]:
    removed: set[int] = set()
    for group in report.groups:
        if group.inconsistent:
            removed.update(group.members)  # either policy distrusts mixed labels
        elif policy is CleanPolicy.KeepFirst:
            removed.update(group.members[1:])
    return removed


def clean(records: list[DatasetRecord], report: DuplicateReport,
          policy: CleanPolicy = CleanPolicy.DropAllInconsistent) -> list[DatasetRecord]:
    """Drop duplicate-group members per *policy*, preserving input order."""
    removed = removal_indices(report, policy)
    return [r for i, r in enumerate(records) if i not in removed]


def processed_to_dict(record: DatasetRecord, processed: ProcessedRecord) -> dict:
    out = record.to_dict()
    unit = processed.output
    if unit is None:
        out["norm_func"] = None
    elif unit.tokens is not None:
        out["norm_tokens"] = [[kind, text] for kind, text in unit.tokens]
    else:
        out["norm_func"] = unit.text
    out["dup_group"] = processed.dup_group
    out["status"] = processed.status.value
    return out


def write_processed(path: str | Path, records: list[DatasetRecord],
                    processed: list[ProcessedRecord]) -> None:
    with open(path, "w", encoding="utf-8", errors="surrogateescape") as fh:
        for rec, proc in zip(records, processed):
            fh.write(json.dumps(processed_to_dict(rec, proc), ensure_ascii=False))
            fh.write("\n")


def write_records(path: str | Path, records: list[DatasetRecord]) -> None:
    with open(path, "w", encoding="utf-8", errors="surrogateescape") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False))
            fh.write("\n")
