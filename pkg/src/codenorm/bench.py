"""Wall-clock and peak-memory benchmarking of the processing pipeline.

Measures the load and processing phases separately with a monotonic clock,
samples resident memory from a side thread at >= 10 Hz, and prefers the
kernel's peak-RSS accounting when it is readable. A missing memory source
degrades the report to unknown instead of failing the run.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

try:
    import psutil
except ImportError:  # pragma: no cover - psutil is a declared dependency
    psutil = None

from .dataset import EngineMode, load_records, process_corpus
from .transform import TransformConfig


class CorpusUnreadable(Exception):
    pass


class InvalidMode(Exception):
    pass


class SamplerUnavailable(Exception):
    """No resident-set metric is readable on this platform."""


def current_rss() -> int | None:
    if psutil is not None:
        try:
            return psutil.Process().memory_info().rss
        except Exception:
            pass
    return _proc_status_field("VmRSS")


def peak_rss() -> int | None:
    value = _proc_status_field("VmHWM")
    if value is not None:
        return value
    return current_rss()


def _proc_status_field(field: str) -> int | None:
    try:
        with open("/proc/self/status") as fh:
            for line in fh:
                if line.startswith(field + ":"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    return None


def measure_peak_memory() -> int:
    """Max resident set observed for this process; raises SamplerUnavailable."""
    value = peak_rss()
    if value is None:
        raise SamplerUnavailable("no RSS metric available")
    return value


class PeakMemorySampler:
    """Background sampler tracking the max resident set during a run."""

    def __init__(self, interval: float = 0.05):
        self.interval = interval
        self._peak: int | None = None
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def _sample(self) -> None:
        rss = current_rss()
        if rss is not None and (self._peak is None or rss > self._peak):
            self._peak = rss

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            self._sample()

    def start(self) -> "PeakMemorySampler":
        self._sample()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> int | None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        self._sample()
        hwm = peak_rss()
        if hwm is not None and (self._peak is None or hwm > self._peak):
            self._peak = hwm
        return self._peak


@dataclass
class BenchReport:
    entries: int
    workers: int
    mode: EngineMode
    wall_time_ms: float
    load_time_ms: float
    peak_memory_bytes: int | None
    baseline_load_bytes: int | None
    throughput: float  # entries per second of processing time
    parse_count_total: int

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "workers": self.workers,
            "mode": self.mode.value,
            "wall_time_ms": self.wall_time_ms,
            "load_time_ms": self.load_time_ms,
            "peak_memory_bytes": self.peak_memory_bytes,
            "baseline_load_bytes": self.baseline_load_bytes,
            "throughput": self.throughput,
            "parse_count_total": self.parse_count_total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchReport":
        return cls(
            entries=data["entries"],
            workers=data["workers"],
            mode=EngineMode(data["mode"]),
            wall_time_ms=data["wall_time_ms"],
            load_time_ms=data["load_time_ms"],
            peak_memory_bytes=data["peak_memory_bytes"],
            baseline_load_bytes=data["baseline_load_bytes"],
            throughput=data["throughput"],
            parse_count_total=data["parse_count_total"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        return cls.from_dict(json.loads(text))


def run_benchmark(corpus_path: str | Path | None, config: TransformConfig,
                  workers: int = 4, mode: EngineMode = EngineMode.SinglePass,
                  max_entries: int | None = None) -> BenchReport:
    """Load the corpus, process it under *mode*, and report time and memory."""
    if not isinstance(mode, EngineMode):
        raise InvalidMode(f"unknown mode: {mode!r}")

    t_load = time.perf_counter()
    if corpus_path is None:
        records = []
    else:
        try:
            records = load_records(corpus_path, max_records=max_entries)
        except OSError as exc:
            raise CorpusUnreadable(f"cannot read corpus {corpus_path}: {exc}") from exc
    load_ms = (time.perf_counter() - t_load) * 1000.0
    baseline = current_rss()

    sampler = PeakMemorySampler().start()
    t_run = time.perf_counter()
    result = process_corpus(records, config, workers=workers, mode=mode)
    wall_ms = (time.perf_counter() - t_run) * 1000.0
    peak = sampler.stop()

    entries = len(records)
    throughput = entries / (wall_ms / 1000.0) if entries and wall_ms > 0 else 0.0
    return BenchReport(
        entries=entries,
        workers=workers,
        mode=mode,
        wall_time_ms=wall_ms,
        load_time_ms=load_ms,
        peak_memory_bytes=peak,
        baseline_load_bytes=baseline,
        throughput=throughput,
        parse_count_total=result.parse_count_total,
    )
