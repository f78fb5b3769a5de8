"""Benchmark harness tests (small corpora; the big run lives in acceptance)."""

import json

import pytest

import genfuncs
from codenorm.bench import (
    BenchReport,
    CorpusUnreadable,
    InvalidMode,
    PeakMemorySampler,
    current_rss,
    measure_peak_memory,
    peak_rss,
    run_benchmark,
)
from codenorm.dataset import EngineMode
from codenorm.transform import Transform, TransformConfig

TRIO = frozenset({Transform.FuncRename, Transform.VarRename, Transform.CommentRemove})


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("bench") / "corpus.jsonl"
    with open(path, "w") as fh:
        for i, func in enumerate(genfuncs.generate(11, 40)):
            fh.write(json.dumps({"func": func, "target": i % 2}) + "\n")
    return path


def test_zero_entries_report(small_corpus):
    report = run_benchmark(small_corpus, TransformConfig(enabled=TRIO),
                           workers=1, max_entries=0)
    assert report.entries == 0
    assert report.throughput == 0.0
    assert report.parse_count_total == 0


def test_missing_corpus_raises():
    with pytest.raises(CorpusUnreadable):
        run_benchmark("/nonexistent/corpus.jsonl", TransformConfig(enabled=TRIO))


def test_invalid_mode_rejected(small_corpus):
    with pytest.raises(InvalidMode):
        run_benchmark(small_corpus, TransformConfig(enabled=TRIO), mode="fast")


def test_single_pass_report_invariants(small_corpus):
    report = run_benchmark(small_corpus, TransformConfig(enabled=TRIO),
                           workers=1, mode=EngineMode.SinglePass)
    assert report.entries == 40
    assert report.parse_count_total == 40
    assert report.wall_time_ms > 0
    expected = report.entries / (report.wall_time_ms / 1000.0)
    assert report.throughput == pytest.approx(expected, rel=1e-6)


def test_multipass_parse_count(small_corpus):
    report = run_benchmark(small_corpus, TransformConfig(enabled=TRIO),
                           workers=1, mode=EngineMode.MultiPassBaseline)
    assert report.parse_count_total == 3 * report.entries


def test_report_round_trip(small_corpus):
    report = run_benchmark(small_corpus, TransformConfig(enabled=TRIO), workers=1)
    again = BenchReport.from_json(report.to_json())
    assert again == report
    degraded = BenchReport(entries=0, workers=1, mode=EngineMode.SinglePass,
                           wall_time_ms=0.5, load_time_ms=0.1,
                           peak_memory_bytes=None, baseline_load_bytes=None,
                           throughput=0.0, parse_count_total=0)
    assert BenchReport.from_json(degraded.to_json()) == degraded


def test_memory_readings_monotone():
    baseline = current_rss()
    if baseline is None:
        pytest.skip("no RSS metric on this platform")
    peak = peak_rss()
    assert peak >= baseline * 0.5  # peak accounting never collapses to zero
    assert measure_peak_memory() >= baseline * 0.5


def test_sampler_tracks_allocation():
    if current_rss() is None:
        pytest.skip("no RSS metric on this platform")
    sampler = PeakMemorySampler(interval=0.01).start()
    blob = bytearray(8 * 1024 * 1024)
    peak = sampler.stop()
    assert peak is not None and peak > 0
    del blob


def test_load_and_peak_in_report(small_corpus):
    report = run_benchmark(small_corpus, TransformConfig(enabled=TRIO), workers=1)
    if report.peak_memory_bytes is None:
        pytest.skip("sampler unavailable; degraded report allowed")
    assert report.baseline_load_bytes is not None
    assert report.peak_memory_bytes >= report.baseline_load_bytes
    assert report.load_time_ms >= 0
