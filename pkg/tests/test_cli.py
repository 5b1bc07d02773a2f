import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from agent_routing.cli import main, run_verification
from agent_routing.model import Unreachable, UNREACHABLE
from agent_routing.oracle import exhaustive_best_path
from agent_routing.router import route

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
RECOMPUTE = ROOT / "scripts" / "recompute_metrics.py"

MINIMAL = (SCENARIOS / "two_node.yaml").read_text(encoding="utf-8")


@pytest.fixture
def demo_path():
    return str(SCENARIOS / "demo.yaml")


def test_route_two_node_scenario(capsys):
    code = main(["route", str(SCENARIOS / "two_node.yaml"), "--source", "alpha", "--dest", "omega"])
    out = capsys.readouterr().out
    assert code == 0
    assert "path: alpha -> omega" in out
    assert "total_cost:" in out


def test_route_output_is_stable_across_runs(capsys, demo_path):
    main(["route", demo_path, "--source", "gate_a", "--dest", "deep_2", "--priority", "3"])
    first = capsys.readouterr().out
    main(["route", demo_path, "--source", "gate_a", "--dest", "deep_2", "--priority", "3"])
    second = capsys.readouterr().out
    assert first == second


def test_route_unreachable_exits_2(tmp_path, capsys):
    text = MINIMAL  # single directed edge alpha -> omega; reverse is unreachable
    path = tmp_path / "one_way.yaml"
    path.write_text(text, encoding="utf-8")
    code = main(["route", str(path), "--source", "omega", "--dest", "alpha"])
    assert code == 2
    assert "unreachable" in capsys.readouterr().out


def test_route_parse_error_exits_1(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text(MINIMAL + "mystery: 1\n", encoding="utf-8")
    code = main(["route", str(path), "--source", "alpha", "--dest", "omega"])
    err = capsys.readouterr().err
    assert code == 1
    assert "mystery" in err
    assert "line" in err


def test_route_unknown_label_exits_1(capsys, demo_path):
    code = main(["route", demo_path, "--source", "gate_a", "--dest", "nope"])
    assert code == 1


def test_explain_terms_sum_to_each_hop(capsys, demo_path):
    code = main(["route", demo_path, "--source", "gate_a", "--dest", "deep_2",
                 "--priority", "2", "--complexity", "4", "--explain"])
    out = capsys.readouterr().out
    assert code == 0
    hop_costs = [float(m) for m in re.findall(r"hop .*: cost ([\d.e+-]+)", out)]
    assert hop_costs
    blocks = re.split(r"hop .*: cost [\d.e+-]+\n", out)[1:]
    for hop_cost, block in zip(hop_costs, blocks):
        weighted = [float(m) for m in re.findall(r"weighted ([\d.e+-]+)", block)]
        assert len(weighted) == 7
        assert sum(weighted) == pytest.approx(hop_cost, rel=1e-9)
    total = float(re.search(r"total_cost: ([\d.e+-]+)", out).group(1))
    assert sum(hop_costs) == pytest.approx(total, rel=1e-9)


def test_policy_flags_are_echoed(capsys, demo_path):
    main(["route", demo_path, "--source", "gate_a", "--dest", "deep_2", "--no-filter"])
    assert "# flags: no-filter" in capsys.readouterr().out


def test_simulate_writes_reports_and_is_byte_identical(tmp_path, capsys, demo_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["simulate", demo_path, "--out", str(out_a)]) == 0
    assert main(["simulate", demo_path, "--out", str(out_b)]) == 0
    capsys.readouterr()
    records_a = (out_a / "records.jsonl").read_bytes()
    records_b = (out_b / "records.jsonl").read_bytes()
    summary_a = (out_a / "summary.json").read_bytes()
    summary_b = (out_b / "summary.json").read_bytes()
    assert records_a == records_b
    assert summary_a == summary_b
    summary = json.loads(summary_a)
    assert summary["tasks_generated"] == summary["tasks_completed"]
    assert summary["flags"] == {"no_filter": False}


def test_simulate_summary_echoes_no_filter_flag(tmp_path, capsys, demo_path):
    out = tmp_path / "nf"
    main(["simulate", demo_path, "--out", str(out), "--no-filter"])
    stdout = capsys.readouterr().out
    assert "# flags: no_filter=True" in stdout
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["flags"]["no_filter"] is True
    assert summary["config"]["filter_enabled"] is False


def test_no_filter_flag_equals_scenario_without_filter_block(tmp_path, capsys, demo_path):
    stripped = tmp_path / "no_filter_block.yaml"
    text = (SCENARIOS / "demo.yaml").read_text(encoding="utf-8")
    text = "\n".join(line for line in text.splitlines() if not line.startswith("filter:")) + "\n"
    stripped.write_text(text, encoding="utf-8")

    out_flag = tmp_path / "flagged"
    out_block = tmp_path / "blockless"
    main(["simulate", demo_path, "--out", str(out_flag), "--no-filter"])
    main(["simulate", str(stripped), "--out", str(out_block)])
    capsys.readouterr()
    assert (out_flag / "records.jsonl").read_bytes() == (out_block / "records.jsonl").read_bytes()


def test_exported_numeric_fields_are_finite(tmp_path, capsys, demo_path):
    out = tmp_path / "fin"
    main(["simulate", demo_path, "--out", str(out)])
    capsys.readouterr()

    def walk(value):
        if isinstance(value, dict):
            for v in value.values():
                walk(v)
        elif isinstance(value, list):
            for v in value:
                walk(v)
        elif isinstance(value, float):
            assert value == value and abs(value) != float("inf")

    for line in (out / "records.jsonl").read_text(encoding="utf-8").splitlines():
        walk(json.loads(line))
    walk(json.loads((out / "summary.json").read_text(encoding="utf-8")))


def test_recompute_script_agrees_with_export(tmp_path, capsys):
    # Use a scenario with windows so reward records are exercised too.
    scenario = tmp_path / "windowed.yaml"
    scenario.write_text(
        (SCENARIOS / "demo.yaml").read_text(encoding="utf-8")
        + "rl: {enabled: true, window: 40, step: 0.2}\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    assert main(["simulate", str(scenario), "--out", str(out)]) == 0
    capsys.readouterr()
    proc = subprocess.run(
        [sys.executable, str(RECOMPUTE), str(out / "records.jsonl"), str(out / "summary.json")],
        capture_output=True,
        text=True,
    )
    report = json.loads(proc.stdout)
    assert proc.returncode == 0, proc.stdout
    assert report["match"] is True
    assert report["recomputed"]["windows"] > 0


def test_q_table_export(tmp_path, capsys, demo_path):
    out = tmp_path / "q"
    table_path = tmp_path / "q_table.json"
    main(["simulate", demo_path, "--out", str(out), "--q-table", str(table_path)])
    capsys.readouterr()
    payload = json.loads(table_path.read_text(encoding="utf-8"))
    assert payload["shape"] == [81, 14]
    assert len(payload["values"]) == 81


def test_verify_zero_instances_is_vacuous_pass(capsys):
    assert main(["verify", "--instances", "0"]) == 0
    assert "0/0" in capsys.readouterr().out


def test_verify_small_batch_passes(capsys):
    assert main(["verify", "--nodes", "6", "--instances", "60", "--seed", "17"]) == 0


def test_verify_rejects_oversized_nodes(capsys):
    assert main(["verify", "--nodes", "11"]) == 1


def test_verify_detects_a_corrupted_router():
    def second_best_router(graph, task, weights):
        """Deliberately wrong: prefer the runner-up simple path when one exists."""
        best = exhaustive_best_path(graph, task, weights)
        if isinstance(best, Unreachable):
            return UNREACHABLE
        # Enumerate path totals by temporarily removing the best path's first edge.
        first_edge = (best.path[0], best.path[1]) if len(best.path) > 1 else None
        if first_edge is None:
            return best
        pruned_edges = tuple(e for e in graph.edges if (e.src, e.dst) != first_edge)
        import dataclasses

        pruned = dataclasses.replace(graph, edges=pruned_edges)
        alternative = exhaustive_best_path(pruned, task, weights)
        return alternative if not isinstance(alternative, Unreachable) else best

    failures = run_verification(max_nodes=6, instances=40, seed=3, router_fn=second_best_router)
    assert failures, "corrupted router must produce disagreements"
    assert all("seed" in f for f in failures)


def test_verify_cli_exit_3_on_corruption(capsys, monkeypatch):
    import agent_routing.cli as cli

    def broken(graph, task, weights):
        result = route(graph, task, weights)
        if isinstance(result, Unreachable):
            return result
        import dataclasses

        return dataclasses.replace(result, total_cost=result.total_cost * 1.001)

    monkeypatch.setattr(cli, "route", broken)
    code = main(["verify", "--nodes", "5", "--instances", "20", "--seed", "1"])
    out = capsys.readouterr().out
    assert code == 3
    assert "seed" in out


def test_validate_ok(capsys, demo_path):
    assert main(["validate", demo_path]) == 0
    assert "ok:" in capsys.readouterr().out


def test_validate_bad_scenario_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(MINIMAL.replace("capability: 4.0", "capability: -4.0"), encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    assert "capability" in capsys.readouterr().err
