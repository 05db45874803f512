"""CSV output for traces and summaries, plus a reader for the trace file."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

TRACE_HEADER = ("t", "algo", "dataset", "run_id", "mistake_rate", "sum", "gmean",
                "updates", "cum_loss", "elapsed_s")
SUMMARY_HEADER = ("algo", "dataset", "runs", "mistake_rate_mean", "mistake_rate_std",
                  "updates_mean", "updates_std", "time_mean_s", "time_std_s",
                  "sum_final_mean", "sum_final_std", "gmean_final_mean", "gmean_final_std")
TRACE_METRICS = ("mistake_rate", "sum", "gmean", "updates", "cum_loss", "elapsed_s")


def fmt(value: float) -> str:
    """Six significant digits."""
    return f"{value:.6g}"


def trace_rows(traces: Iterable) -> list[list[str]]:
    recs = sorted(traces, key=lambda r: (r.algo, r.dataset, r.run_id, r.snapshot.t))
    rows = []
    for r in recs:
        s = r.snapshot
        rows.append([str(s.t), r.algo, r.dataset, str(r.run_id), fmt(s.mistake_rate), fmt(s.sum),
                     fmt(s.gmean), str(s.updates), fmt(s.cumulative_loss), fmt(s.elapsed)])
    return rows


def summary_rows(summaries: Iterable) -> list[list[str]]:
    rows = []
    for s in sorted(summaries, key=lambda s: (s.algo, s.dataset)):
        rows.append([s.algo, s.dataset, str(s.runs),
                     *map(fmt, s.mistake_rate), *map(fmt, s.updates), *map(fmt, s.elapsed),
                     *map(fmt, s.sum), *map(fmt, s.gmean)])
    return rows


def _write(path: Path, header: Sequence[str], rows: list[list[str]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def emit_csv(traces: Iterable, summaries: Iterable, out_dir) -> tuple[Path, Path]:
    """Write ``trace.csv`` and ``summary.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return (_write(out / "trace.csv", TRACE_HEADER, trace_rows(traces)),
            _write(out / "summary.csv", SUMMARY_HEADER, summary_rows(summaries)))


def read_trace(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_HEADER:
            raise ValueError(f"{path} is not a trace file (header {reader.fieldnames})")
        rows = []
        for row in reader:
            row["t"] = int(row["t"])
            row["run_id"] = int(row["run_id"])
            for key in TRACE_METRICS:
                row[key] = float(row[key])
            rows.append(row)
    return rows


def mean_curves(rows: list[dict], metric: str) -> dict[tuple[str, str], list[tuple[float, float]]]:
    """Average ``metric`` across runs at each ``t``, per (algo, dataset)."""
    if metric not in TRACE_METRICS:
        raise ValueError(f"metric must be one of {TRACE_METRICS}")
    acc: dict = {}
    for r in rows:
        key = (r["algo"], r["dataset"])
        acc.setdefault(key, {}).setdefault(r["t"], []).append(r[metric])
    return {key: [(float(t), sum(v) / len(v)) for t, v in sorted(by_t.items())]
            for key, by_t in sorted(acc.items())}
