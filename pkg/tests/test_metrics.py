"""Summaries, comparison arithmetic, aggregation, and the CSV surfaces."""

import csv

import pytest

from ponedge.metrics import (AGGREGATE_METRICS, EmptyRunError, IncomparableRunsError,
                             RunSummary, SUMMARY_CSV_COLUMNS, TASKS_CSV_COLUMNS,
                             TaskRecord, aggregate, compare, format_number,
                             percentile_95, read_summary_csv, summarize,
                             write_summary_csv, write_tasks_csv)


def record(task_id, latency=0.01, delivered=True, deadline=0.5, generated=1.0):
    if not delivered:
        return TaskRecord(task_id, None, generated, None, None, None, None,
                          "Unfinished", None, False)
    return TaskRecord(task_id, "n0257-edge", generated, generated + 1e-5,
                      generated + 1e-5, generated + latency - 1e-5,
                      generated + latency, "Delivered", latency,
                      latency <= deadline)


def make_summary(**kw):
    base = dict(scenario="e-health", topology="genio", cpu="Intel Core i7-3930K",
                mips=220_000.0, seed=1, tasks_generated=10, tasks_delivered=10,
                tasks_unfinished=0, tsr_pct=100.0, mean_latency_s=0.5,
                p95_latency_s=0.6, deadline_hit_pct=100.0)
    base.update(kw)
    return RunSummary(**base)


def _summarize(records, **kw):
    args = dict(scenario="e-health", topology="genio", cpu="x", mips=220_000.0, seed=1)
    args.update(kw)
    return summarize(records, **args)


def test_all_delivered_within_deadline():
    s = _summarize([record(i) for i in range(10)])
    assert s.tsr_pct == 100.0
    assert s.deadline_hit_pct == 100.0
    assert s.tasks_generated == s.tasks_delivered == 10


def test_tsr_ratio_eight_of_ten():
    records = [record(i) for i in range(8)] + [record(i, delivered=False) for i in (8, 9)]
    s = _summarize(records)
    assert s.tsr_pct == 80.0
    assert s.tasks_unfinished == 2
    assert s.tasks_generated == s.tasks_delivered + s.tasks_unfinished


def test_mean_latency_is_component_sum_for_single_task():
    # uplink + wait(0) + exec + downlink for the entry smart-city setup
    latency = 8.5e-6 + 500.0 / 43_000.0 + 8.05e-5
    s = _summarize([record(0, latency=latency)])
    assert s.mean_latency_s == pytest.approx(latency, abs=1e-12)
    assert s.mean_latency_s == pytest.approx(0.0117169, abs=5e-8)


def test_mean_latency_over_delivered_only():
    records = [record(0, latency=0.2), record(1, delivered=False)]
    s = _summarize(records)
    assert s.mean_latency_s == pytest.approx(0.2)
    assert s.tsr_pct == 50.0


def test_zero_generated_tasks_is_an_error():
    with pytest.raises(EmptyRunError):
        _summarize([])


def test_strict_deadline_mode_counts_misses_as_failures():
    records = [record(0, latency=0.01, deadline=0.5), record(1, latency=0.9, deadline=0.5)]
    lenient = _summarize(records)
    strict = _summarize(records, strict_deadline=True)
    assert lenient.tsr_pct == 100.0
    assert strict.tsr_pct == 50.0
    assert strict.deadline_hit_pct == 50.0


def test_percentile_95_nearest_rank():
    values = sorted(float(v) for v in range(1, 101))
    assert percentile_95(values) == 95.0
    assert percentile_95([3.0]) == 3.0


def test_compare_reduction_example():
    genio = make_summary(mean_latency_s=0.65)
    baseline = make_summary(topology="baseline", mean_latency_s=1.0)
    assert compare(genio, baseline) == pytest.approx(-35.0)


def test_compare_equal_means_zero():
    genio = make_summary(mean_latency_s=0.4)
    baseline = make_summary(topology="baseline", mean_latency_s=0.4)
    assert compare(genio, baseline) == 0.0


def test_compare_guards_scenario_cpu_seed():
    genio = make_summary(scenario="smart-city")
    baseline = make_summary(topology="baseline")
    with pytest.raises(IncomparableRunsError):
        compare(genio, baseline)
    with pytest.raises(IncomparableRunsError):
        compare(make_summary(seed=1), make_summary(seed=2))


def test_compare_sign_flips_when_swapped():
    genio = make_summary(mean_latency_s=0.65)
    baseline = make_summary(topology="baseline", mean_latency_s=1.0)
    forward = compare(genio, baseline)
    backward = compare(baseline, genio)
    assert forward < 0 < backward


def test_aggregate_one_row_per_config_mean_over_seeds():
    summaries = [make_summary(seed=s, mean_latency_s=0.1 * s) for s in range(1, 6)]
    rows = aggregate(summaries, ("scenario", "topology", "cpu", "mips"))
    assert len(rows) == 1
    assert rows[0]["runs"] == 5
    assert rows[0]["mean_latency_s_mean"] == pytest.approx(0.3)


def test_aggregate_identical_summaries_have_zero_std():
    rows = aggregate([make_summary(), make_summary()], ("scenario",))
    for metric in AGGREGATE_METRICS:
        assert rows[0][f"{metric}_std"] == 0.0


def test_aggregate_single_run_zero_std():
    rows = aggregate([make_summary()], ("scenario",))
    assert rows[0]["tsr_pct_std"] == 0.0


def test_aggregate_rows_sorted_by_keys():
    summaries = [
        make_summary(cpu="b", mips=300_000.0),
        make_summary(cpu="a", mips=220_000.0),
    ]
    rows = aggregate(summaries, ("mips", "cpu"))
    assert [row["mips"] for row in rows] == [220_000.0, 300_000.0]


def test_format_number_preserves_nine_significant_digits():
    assert format_number(0.011716906976744186) == "0.0117169069767"
    assert format_number(None) == ""
    assert format_number(True) == "true"
    assert format_number(12) == "12"
    assert format_number(float("nan")) == "nan"


def test_tasks_csv_column_order(tmp_path):
    path = tmp_path / "tasks.csv"
    write_tasks_csv(path, [record(0), record(1, delivered=False)],
                    scenario="e-health", topology="genio", cpu="Intel Core i7-3930K", seed=3)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == TASKS_CSV_COLUMNS
    assert rows[1][0] == "t0" and rows[1][11] == "Delivered"
    assert rows[2][11] == "Unfinished" and rows[2][12] == ""  # no latency


def test_summary_csv_round_trip(tmp_path):
    path = tmp_path / "summary.csv"
    original = make_summary()
    write_summary_csv(path, [original])
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    assert header == SUMMARY_CSV_COLUMNS
    (loaded,) = read_summary_csv(path)
    assert loaded.mean_latency_s == original.mean_latency_s
    assert loaded.tasks_generated == original.tasks_generated
    assert loaded.cpu == original.cpu
