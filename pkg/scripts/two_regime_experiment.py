#!/usr/bin/env python3
"""Learning-signal study on the two-regime scenario.

For each seed, runs the scenario twice: once with weight adaptation on and
once with the weight vector frozen at uniform. Reports per-seed mean reward
over the final fraction of windows, the pooled-standard-error margin
between the arms, and the learned w4 distribution.

Usage: two_regime_experiment.py [--seeds 20] [--base-seed 100] [--final-fraction 0.2]
"""

import argparse
import dataclasses
import json
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from agent_routing.scenario import load_scenario
from agent_routing.sim import SimParams, run

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "two_regime.yaml"


def seeded_variant(scenario, base_seed, index, rl_enabled):
    sim = SimParams(
        duration=scenario.sim.duration,
        workload_seed=base_seed + index,
        failure_seed=base_seed + 1000 + index,
        rl_seed=base_seed + 2000 + index,
        load_quantum=scenario.sim.load_quantum,
        load_decay=scenario.sim.load_decay,
    )
    rl = dataclasses.replace(scenario.rl, enabled=rl_enabled)
    return dataclasses.replace(scenario, sim=sim, rl=rl)


def final_window_mean(rewards, fraction):
    tail = rewards[int(len(rewards) * (1 - fraction)):]
    return statistics.fmean(r.reward for r in tail)


def pooled_margin(adaptive, frozen):
    """(margin, 2 * pooled standard error of the difference in means)."""
    n_a, n_f = len(adaptive), len(frozen)
    se_a = statistics.stdev(adaptive) / n_a ** 0.5 if n_a > 1 else 0.0
    se_f = statistics.stdev(frozen) / n_f ** 0.5 if n_f > 1 else 0.0
    margin = statistics.fmean(adaptive) - statistics.fmean(frozen)
    return margin, 2.0 * (se_a ** 2 + se_f ** 2) ** 0.5


def study(seeds, base_seed, final_fraction, scenario_path=SCENARIO, verbose=True):
    scenario = load_scenario(scenario_path)
    adaptive_means, frozen_means, learned_w4, window_counts = [], [], [], []
    for i in range(seeds):
        adaptive = run(seeded_variant(scenario, base_seed, i, rl_enabled=True))
        frozen = run(seeded_variant(scenario, base_seed, i, rl_enabled=False))
        a_mean = final_window_mean(adaptive.rewards, final_fraction)
        f_mean = final_window_mean(frozen.rewards, final_fraction)
        adaptive_means.append(a_mean)
        frozen_means.append(f_mean)
        learned_w4.append(adaptive.final_weights.w4)
        window_counts.append(len(adaptive.rewards))
        if verbose:
            print(
                f"seed {base_seed + i}: adaptive {a_mean:.4f}  frozen {f_mean:.4f}  "
                f"delta {a_mean - f_mean:+.4f}  w4 {adaptive.final_weights.w4:.3f}  "
                f"windows {len(adaptive.rewards)}",
                flush=True,
            )
    margin, two_se = pooled_margin(adaptive_means, frozen_means)
    result = {
        "seeds": seeds,
        "windows_min": min(window_counts),
        "adaptive_mean": statistics.fmean(adaptive_means),
        "frozen_mean": statistics.fmean(frozen_means),
        "margin": margin,
        "two_pooled_se": two_se,
        "signal": margin > two_se,
        "w4_median": statistics.median(learned_w4),
        "w4_initial": scenario.weights.w4,
        "seeds_improved": sum(a > f for a, f in zip(adaptive_means, frozen_means)),
    }
    if verbose:
        print(json.dumps(result, indent=2, sort_keys=True))
    return result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--base-seed", type=int, default=100)
    parser.add_argument("--final-fraction", type=float, default=0.2)
    parser.add_argument("--scenario", type=Path, default=SCENARIO)
    args = parser.parse_args(argv)
    result = study(args.seeds, args.base_seed, args.final_fraction, args.scenario)
    return 0 if result["signal"] else 1


if __name__ == "__main__":
    sys.exit(main())
