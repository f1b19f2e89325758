"""Per-task lifecycle records, run aggregation, and topology comparison arithmetic."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

TASKS_CSV_COLUMNS = [
    "task_id", "scenario", "topology", "cpu", "seed", "node_id", "generated_at",
    "uplink_done", "exec_start", "exec_end", "delivered_at", "status",
    "latency_s", "deadline_met",
]
SUMMARY_CSV_COLUMNS = [
    "scenario", "topology", "cpu", "mips", "seed", "tasks_generated",
    "tasks_delivered", "tsr_pct", "mean_latency_s", "p95_latency_s",
    "deadline_hit_pct",
]

AGGREGATE_METRICS = ("tsr_pct", "mean_latency_s", "p95_latency_s", "deadline_hit_pct")


class EmptyRunError(Exception):
    """A run produced no tasks; there is nothing to summarize."""


class IncomparableRunsError(Exception):
    """Tried to compare runs with different scenario, cpu, or seed."""


@dataclass(frozen=True)
class TaskRecord:
    task_id: int
    node_id: str | None
    generated_at: float
    uplink_done: float | None
    exec_start: float | None
    exec_end: float | None
    delivered_at: float | None
    status: str  # Delivered | Unfinished
    latency_s: float | None
    deadline_met: bool

    @property
    def delivered(self) -> bool:
        return self.status == "Delivered"


@dataclass(frozen=True)
class RunSummary:
    scenario: str
    topology: str
    cpu: str
    mips: float
    seed: int
    tasks_generated: int
    tasks_delivered: int
    tasks_unfinished: int
    tsr_pct: float
    mean_latency_s: float
    p95_latency_s: float
    deadline_hit_pct: float
    node_utilization: tuple[tuple[str, float], ...] = ()


def percentile_95(sorted_values: list[float]) -> float:
    """Nearest-rank 95th percentile over an ascending list."""
    if not sorted_values:
        return math.nan
    rank = math.ceil(0.95 * len(sorted_values))
    return sorted_values[rank - 1]


def summarize(records: list[TaskRecord], *, scenario: str, topology: str, cpu: str,
              mips: float, seed: int, strict_deadline: bool = False,
              node_utilization: tuple[tuple[str, float], ...] = ()) -> RunSummary:
    """Aggregate one completed run.

    Latency statistics cover Delivered tasks only (unfinished tasks have no
    latency). By default success means delivered within the simulation time;
    strict_deadline additionally requires the deadline to be met.
    """
    if not records:
        raise EmptyRunError("empty-run: zero generated tasks")
    generated = len(records)
    latencies = sorted(r.latency_s for r in records if r.delivered)
    delivered = len(latencies)
    if strict_deadline:
        succeeded = sum(1 for r in records if r.delivered and r.deadline_met)
    else:
        succeeded = delivered
    if delivered:
        mean_latency = sum(latencies) / delivered
        p95 = percentile_95(latencies)
        hit = sum(1 for r in records if r.delivered and r.deadline_met)
        deadline_hit_pct = 100.0 * hit / delivered
    else:
        mean_latency = math.nan
        p95 = math.nan
        deadline_hit_pct = math.nan
    return RunSummary(
        scenario=scenario,
        topology=topology,
        cpu=cpu,
        mips=mips,
        seed=seed,
        tasks_generated=generated,
        tasks_delivered=delivered,
        tasks_unfinished=generated - delivered,
        tsr_pct=100.0 * succeeded / generated,
        mean_latency_s=mean_latency,
        p95_latency_s=p95,
        deadline_hit_pct=deadline_hit_pct,
        node_utilization=node_utilization,
    )


def compare(genio: RunSummary, baseline: RunSummary) -> float:
    """Latency reduction percent; negative means the first run is faster."""
    for key in ("scenario", "cpu", "seed"):
        if getattr(genio, key) != getattr(baseline, key):
            raise IncomparableRunsError(
                f"incomparable-runs: {key} differs "
                f"({getattr(genio, key)!r} vs {getattr(baseline, key)!r})"
            )
    return 100.0 * (genio.mean_latency_s - baseline.mean_latency_s) / baseline.mean_latency_s


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n  # population std: one seed -> 0
    return mean, math.sqrt(var)


def aggregate(summaries: list[RunSummary], keys: tuple[str, ...]) -> list[dict]:
    """One row per distinct key combination, metrics as mean and std.

    Rows come back sorted by the key tuple so repeated aggregations are
    byte-stable.
    """
    if not summaries:
        raise EmptyRunError("empty-run: no summaries to aggregate")
    groups: dict[tuple, list[RunSummary]] = {}
    for summary in summaries:
        groups.setdefault(tuple(getattr(summary, k) for k in keys), []).append(summary)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(str(v) if isinstance(v, str) else v for v in k)):
        members = groups[key]
        row: dict = dict(zip(keys, key))
        row["runs"] = len(members)
        for metric in AGGREGATE_METRICS:
            mean, std = _mean_std([getattr(m, metric) for m in members])
            row[f"{metric}_mean"] = mean
            row[f"{metric}_std"] = std
        rows.append(row)
    return rows


def format_number(value) -> str:
    """CSV cell text; floats keep >= 9 significant digits, blank for missing."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def write_tasks_csv(path, records: list[TaskRecord], *, scenario: str, topology: str,
                    cpu: str, seed: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TASKS_CSV_COLUMNS)
        for r in records:
            writer.writerow([
                f"t{r.task_id}", scenario, topology, cpu, seed,
                r.node_id or "",
                format_number(r.generated_at),
                format_number(r.uplink_done),
                format_number(r.exec_start),
                format_number(r.exec_end),
                format_number(r.delivered_at),
                r.status,
                format_number(r.latency_s),
                format_number(r.deadline_met),
            ])


def write_summary_csv(path, summaries: list[RunSummary]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_CSV_COLUMNS)
        for s in summaries:
            writer.writerow([
                s.scenario, s.topology, s.cpu,
                format_number(s.mips), s.seed, s.tasks_generated, s.tasks_delivered,
                format_number(s.tsr_pct),
                format_number(s.mean_latency_s),
                format_number(s.p95_latency_s),
                format_number(s.deadline_hit_pct),
            ])


def read_summary_csv(path) -> list[RunSummary]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RunSummary(
                scenario=row["scenario"],
                topology=row["topology"],
                cpu=row["cpu"],
                mips=float(row["mips"]),
                seed=int(row["seed"]),
                tasks_generated=int(row["tasks_generated"]),
                tasks_delivered=int(row["tasks_delivered"]),
                tasks_unfinished=int(row["tasks_generated"]) - int(row["tasks_delivered"]),
                tsr_pct=float(row["tsr_pct"]),
                mean_latency_s=float(row["mean_latency_s"]),
                p95_latency_s=float(row["p95_latency_s"]),
                deadline_hit_pct=float(row["deadline_hit_pct"]),
            ))
    return out
