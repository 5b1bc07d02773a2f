#!/usr/bin/env python3
"""Independently recompute run statistics from exported files.

Reads a records.jsonl produced by `agent-routing simulate` and rebuilds the
summary statistics and per-window rewards from scratch (plain Python, no
imports from the package), then compares them against the exported
summary.json and reward records. Exits 0 when everything matches, 1
otherwise, printing a JSON report either way.

Usage: recompute_metrics.py RECORDS_JSONL SUMMARY_JSON [--tolerance 1e-9]
"""

import argparse
import json
import math
import sys
from pathlib import Path

TOLERANCE = 1e-9


def percentile_linear(sorted_values, q):
    """NumPy-style linear-interpolation percentile on pre-sorted data."""
    n = len(sorted_values)
    if n == 1:
        return float(sorted_values[0])
    rank = (q / 100.0) * (n - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    frac = rank - lo
    return float(sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac)


def gini_normalized(values):
    n = len(values)
    if n <= 1:
        return 0.0
    total = float(sum(values))
    if total <= 0:
        return 0.0
    ranked = sorted(values)
    weighted = sum((i + 1) * x for i, x in enumerate(ranked))
    gini = (2.0 * weighted) / (n * total) - (n + 1) / n
    return gini * n / (n - 1)


def recompute(records, config):
    alpha, beta, gamma = config["reward_coefficients"]
    threshold = config["hp_threshold"]
    window = config["window"]

    outcomes = [r for r in records if r["record"] == "task_outcome"]
    succeeded = [r for r in outcomes if r["succeeded"]]
    times = sorted(r["completion_time"] for r in succeeded)
    hp_times = [
        r["completion_time"] for r in succeeded if r["priority"] >= threshold
    ]

    completion = None
    if times:
        completion = {
            "mean": sum(times) / len(times),
            "p50": percentile_linear(times, 50),
            "p90": percentile_linear(times, 90),
            "p99": percentile_linear(times, 99),
            "max": float(times[-1]),
        }

    # Replay window boundaries: a reward record closes the window formed by
    # the `window` outcomes emitted since the previous one.
    rewards = []
    pending = []
    for record in records:
        if record["record"] == "task_outcome":
            pending.append(record)
            continue
        batch, pending = pending[:window], pending[window:]
        hp_batch = [
            r["completion_time"]
            for r in batch
            if r["priority"] >= threshold and r["succeeded"]
        ]
        hp_term = 1.0 / (1.0 + sum(hp_batch) / len(hp_batch)) if hp_batch else 1.0
        fairness_term = 1.0 - gini_normalized(record["agent_loads"])
        reliability_term = sum(1 for r in batch if r["succeeded"]) / len(batch)
        rewards.append(
            {
                "window_id": record["window_id"],
                "reward": alpha * hp_term + beta * fairness_term + gamma * reliability_term,
                "hp_completion_term": hp_term,
                "fairness_term": fairness_term,
                "reliability_term": reliability_term,
            }
        )

    return {
        "tasks_completed": len(outcomes),
        "tasks_succeeded": len(succeeded),
        "tasks_failed": len(outcomes) - len(succeeded),
        "completion_time": completion,
        "hp_completion_mean": (sum(hp_times) / len(hp_times)) if hp_times else None,
        "windows": len(rewards),
        "reward_mean": (sum(r["reward"] for r in rewards) / len(rewards)) if rewards else None,
        "rewards": rewards,
    }


def close(a, b, tolerance):
    if a is None or b is None:
        return a == b
    return abs(a - b) <= tolerance * max(1.0, abs(a), abs(b))


def compare(recomputed, summary, records, tolerance):
    mismatches = []

    def check(label, mine, theirs):
        if isinstance(mine, dict) and isinstance(theirs, dict):
            for key in mine:
                check(f"{label}.{key}", mine[key], theirs.get(key))
            return
        if isinstance(mine, (int, float)) or mine is None:
            if not close(mine, theirs, tolerance):
                mismatches.append(f"{label}: recomputed {mine!r} != exported {theirs!r}")
            return
        if mine != theirs:
            mismatches.append(f"{label}: recomputed {mine!r} != exported {theirs!r}")

    for key in ("tasks_completed", "tasks_succeeded", "tasks_failed",
                "completion_time", "hp_completion_mean", "windows", "reward_mean"):
        check(key, recomputed[key], summary.get(key))

    exported_rewards = [r for r in records if r["record"] == "reward"]
    if len(exported_rewards) != len(recomputed["rewards"]):
        mismatches.append("reward record count differs")
    for mine, theirs in zip(recomputed["rewards"], exported_rewards):
        for key in ("reward", "hp_completion_term", "fairness_term", "reliability_term"):
            if not close(mine[key], theirs[key], tolerance):
                mismatches.append(
                    f"window {mine['window_id']} {key}: {mine[key]!r} != {theirs[key]!r}"
                )
        if mine["window_id"] != theirs["window_id"]:
            mismatches.append(f"window id order: {mine['window_id']} != {theirs['window_id']}")

    return mismatches


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("records", type=Path)
    parser.add_argument("summary", type=Path)
    parser.add_argument("--tolerance", type=float, default=TOLERANCE)
    args = parser.parse_args(argv)

    records = []
    with args.records.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    summary = json.loads(args.summary.read_text(encoding="utf-8"))

    recomputed = recompute(records, summary["config"])
    mismatches = compare(recomputed, summary, records, args.tolerance)

    report = {
        "records_checked": len(records),
        "match": not mismatches,
        "mismatches": mismatches,
        "recomputed": {k: v for k, v in recomputed.items() if k != "rewards"},
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if not mismatches else 1


if __name__ == "__main__":
    sys.exit(main())
