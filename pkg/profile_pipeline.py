"""
Profile fuse and evaluate throughput on synthetic datasets across worker
counts, capturing per-phase timings (fixture generation, fusion, scoring).
Results are printed and appended to profiling_runs.csv.

Run from repo root:
    python profile_pipeline.py
"""

from __future__ import annotations

import csv
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List

from wsss_bed.datasets import read_manifest
from wsss_bed.experiments import evaluate_dataset, fuse_dataset
from wsss_bed.fusion import FusionConfig
from wsss_bed.parallel import default_jobs
from wsss_bed.synthetic import write_fixture

DEFAULT_TAU = 0.15
ITERATIONS_PER_SCENARIO = 3  # first = cold, remaining warm


@dataclass
class Scenario:
    name: str
    image_count: int
    size: int
    class_count: int


SCENARIOS: List[Scenario] = [
    Scenario(name="voc_like_100_images", image_count=100, size=500, class_count=20),
    Scenario(name="small_200_images", image_count=200, size=96, class_count=20),
]


CSV_FIELDS = [
    "timestamp",
    "scenario",
    "iteration",
    "run_kind",
    "jobs",
    "write_fixture_ms",
    "fuse_ms",
    "evaluate_ms",
    "images_per_sec",
    "image_count",
    "size",
    "class_count",
]


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def _percentile(values: List[float], pct: float) -> float:
    if not values:
        return 0.0
    values_sorted = sorted(values)
    k = (len(values_sorted) - 1) * pct / 100.0
    lower = int(k)
    upper = min(lower + 1, len(values_sorted) - 1)
    if lower == upper:
        return values_sorted[lower]
    fraction = k - lower
    return values_sorted[lower] + (values_sorted[upper] - values_sorted[lower]) * fraction


def _job_counts() -> List[int]:
    counts = {1, 2, default_jobs()}
    return sorted(counts)


def _write_trace(rows: List[Dict[str, object]]) -> None:
    with open("profiling_runs.csv", "a", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        if f.tell() == 0:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _summary_line(values: List[float]) -> str:
    if not values:
        return "min=0.0 p50=0.0 p95=0.0 max=0.0"
    return (
        f"min={min(values):.1f} ms "
        f"p50={_percentile(values, 50):.1f} ms "
        f"p95={_percentile(values, 95):.1f} ms "
        f"max={max(values):.1f} ms"
    )


def run_scenario(scenario: Scenario, workdir: Path, run_timestamp: str) -> List[Dict[str, object]]:
    fixture_start = time.perf_counter()
    paths = write_fixture(
        workdir / scenario.name,
        scenario.image_count,
        style="sparse",
        height=scenario.size,
        width=scenario.size,
        class_count=scenario.class_count,
    )
    fixture_ms = _ms(fixture_start)
    manifest = read_manifest(paths.manifest)
    config = FusionConfig(tau=DEFAULT_TAU)

    rows: List[Dict[str, object]] = []
    for jobs in _job_counts():
        for iteration in range(ITERATIONS_PER_SCENARIO):
            fuse_start = time.perf_counter()
            fuse_dataset(manifest, paths.actmaps, paths.saliency, workdir / "pred", config, jobs=jobs)
            fuse_ms = _ms(fuse_start)

            eval_start = time.perf_counter()
            evaluate_dataset(manifest, paths.actmaps, paths.saliency, paths.gt, config, jobs=jobs)
            evaluate_ms = _ms(eval_start)

            is_first = not rows
            rows.append(
                {
                    "timestamp": run_timestamp,
                    "scenario": scenario.name,
                    "iteration": iteration,
                    "run_kind": "cold" if is_first else "warm",
                    "jobs": jobs,
                    "write_fixture_ms": fixture_ms if is_first else 0.0,
                    "fuse_ms": fuse_ms,
                    "evaluate_ms": evaluate_ms,
                    "images_per_sec": scenario.image_count / (evaluate_ms / 1000.0),
                    "image_count": scenario.image_count,
                    "size": scenario.size,
                    "class_count": scenario.class_count,
                }
            )
    return rows


def main() -> None:
    run_timestamp = datetime.now(timezone.utc).isoformat()
    all_rows: List[Dict[str, object]] = []

    with tempfile.TemporaryDirectory(prefix="wsss-bed-profile-") as tmp:
        for scenario in SCENARIOS:
            rows = run_scenario(scenario, Path(tmp), run_timestamp)
            all_rows.extend(rows)

            print(f"\nScenario: {scenario.name} ({scenario.image_count} images, "
                  f"{scenario.size}x{scenario.size}, {scenario.class_count} classes)")
            print(f"- Fixture generation: {rows[0]['write_fixture_ms']:.1f} ms")
            for jobs in _job_counts():
                runs = [r for r in rows if r["jobs"] == jobs]
                print(f"- jobs={jobs} fuse: {_summary_line([r['fuse_ms'] for r in runs])}")
                print(f"- jobs={jobs} evaluate: {_summary_line([r['evaluate_ms'] for r in runs])}")

    _write_trace(all_rows)
    print("\nPer-run traces appended to profiling_runs.csv")


if __name__ == "__main__":
    main()
