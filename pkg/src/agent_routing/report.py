"""Run-report exports: a line-delimited record file plus a summary file.

Exports are byte-deterministic for a fixed scenario and seeds: records are
written in emission order, JSON keys are sorted, and floats use Python's
shortest round-trip repr. Any CLI flag that alters routing policy is echoed
in the summary so output files are self-describing.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .sim import RunReport, Scenario

RECORDS_FILENAME = "records.jsonl"
SUMMARY_FILENAME = "summary.json"


def summarize(report: RunReport, scenario: Scenario, flags: dict[str, bool]) -> dict:
    """Aggregate statistics plus a configuration echo; all values JSON-safe."""
    succeeded = [o for o in report.outcomes if o.succeeded]
    times = [o.completion_time for o in succeeded]
    priorities = {t.id: t.priority for t in report.tasks}
    hp_times = [
        o.completion_time
        for o in succeeded
        if priorities.get(o.task_id, 0.0) >= scenario.rl.hp_threshold
    ]
    ratios = report.cost_ratios
    summary = {
        "flags": dict(flags),
        "config": {
            "duration": scenario.sim.duration,
            "seeds": {
                "workload": scenario.sim.workload_seed,
                "failure": scenario.sim.failure_seed,
                "rl": scenario.sim.rl_seed,
            },
            "filter_enabled": scenario.filter_policy is not None
            and not scenario.filter_policy.is_noop
            and not flags.get("no_filter", False),
            "hierarchy": (
                {"k": scenario.hierarchy.k, "seed": scenario.hierarchy.seed}
                if scenario.hierarchy is not None
                else None
            ),
            "rl_enabled": scenario.rl.enabled,
            "window": scenario.rl.window,
            "reward_coefficients": [scenario.rl.alpha, scenario.rl.beta, scenario.rl.gamma],
            "hp_threshold": scenario.rl.hp_threshold,
        },
        "weights_initial": list(report.initial_weights.as_tuple()),
        "weights_final": list(report.final_weights.as_tuple()),
        "tasks_generated": len(report.tasks),
        "tasks_completed": len(report.outcomes),
        "tasks_succeeded": len(succeeded),
        "tasks_failed": len(report.outcomes) - len(succeeded),
        "completion_time": _distribution(times),
        "hp_completion_mean": _mean(hp_times),
        "windows": len(report.rewards),
        "reward_mean": _mean([r.reward for r in report.rewards]),
        "cost_ratio": (
            {"count": len(ratios), "mean": _mean(ratios), "max": max(ratios)}
            if ratios
            else None
        ),
    }
    return summary


def _mean(values) -> float | None:
    return float(np.mean(values)) if len(values) else None


def _distribution(values) -> dict | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=np.float64)
    p50, p90, p99 = np.percentile(arr, [50, 90, 99])
    return {
        "mean": float(arr.mean()),
        "p50": float(p50),
        "p90": float(p90),
        "p99": float(p99),
        "max": float(arr.max()),
    }


def write_report(
    report: RunReport,
    scenario: Scenario,
    out_dir: Path,
    flags: dict[str, bool],
) -> tuple[Path, Path]:
    """Write records.jsonl and summary.json under ``out_dir``; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / RECORDS_FILENAME
    summary_path = out_dir / SUMMARY_FILENAME
    with records_path.open("w", encoding="utf-8") as handle:
        for record in report.records:
            handle.write(json.dumps(record, sort_keys=True))
            handle.write("\n")
    summary = summarize(report, scenario, flags)
    with summary_path.open("w", encoding="utf-8") as handle:
        json.dump(summary, handle, sort_keys=True, indent=2)
        handle.write("\n")
    return records_path, summary_path
