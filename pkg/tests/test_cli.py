"""End-to-end command tests through the real entry point.

Each case spawns ``python -m nocforge`` so exit codes, stderr, and the
files on disk are exactly what a shell user gets.
"""

import json
import os
import subprocess
import sys

import pytest

from nocforge.arch import save_arch
from nocforge.topology import Topology

from conftest import EXAMPLE_ARCH_PATH, make_arch

FAST = ["--warmup", "2000", "--window", "8000", "--drain", "4000"]


def run(args, cwd, env_extra=None):
    env = dict(os.environ)
    env.pop("HW_SEED", None)
    env.update(env_extra or {})
    return subprocess.run([sys.executable, "-m", "nocforge", *args],
                          capture_output=True, text=True, cwd=cwd, env=env)


def gen(cwd, out, *args):
    res = run(["generate", "--out", out, *args], cwd)
    assert res.returncode == 0, res.stderr
    return os.path.join(cwd, out)


class TestGenerate:
    def test_skip_graph_has_216_links(self, tmp_path):
        path = gen(tmp_path, "t.json", "--topo", "shg", "--rows", "8",
                   "--cols", "8", "--sr", "4", "--sc", "2,5")
        doc = json.loads(open(path).read())
        assert doc["link_count"] == 216
        assert len(Topology.from_dict(doc).links) == 216
        assert doc["manifest_path"] == "t.json.manifest.json"
        manifest = json.loads(open(path + ".manifest.json").read())
        assert manifest["outputs"] == ["t.json"]
        assert manifest["command"] == "generate"

    def test_smallest_mesh_prints_four_links(self, tmp_path):
        res = run(["generate", "--topo", "mesh", "--rows", "2",
                   "--cols", "2"], tmp_path)
        assert res.returncode == 0
        assert json.loads(res.stdout)["link_count"] == 4

    def test_non_power_of_two_hypercube_exits_2(self, tmp_path):
        res = run(["generate", "--topo", "hypercube", "--rows", "6",
                   "--cols", "6"], tmp_path)
        assert res.returncode == 2
        assert "powers of two" in res.stderr

    def test_unknown_family_exits_2(self, tmp_path):
        res = run(["generate", "--topo", "smallworld", "--rows", "4",
                   "--cols", "4"], tmp_path)
        assert res.returncode == 2
        assert "unknown topology" in res.stderr


class TestPredict:
    def test_report_and_reproducibility(self, tmp_path):
        topo = gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "4",
                   "--cols", "4")
        args = ["predict", "--topology", "t.json", "--arch",
                EXAMPLE_ARCH_PATH, "--out", "report.json"]
        assert run(args, tmp_path).returncode == 0
        first = open(tmp_path / "report.json", "rb").read()
        doc = json.loads(first)
        assert 0 < doc["area_overhead"] < 1
        assert all(v >= 1 for v in doc["link_latencies"])
        assert run(args, tmp_path).returncode == 0
        assert open(tmp_path / "report.json", "rb").read() == first

    def test_table_and_csv_formats(self, tmp_path):
        gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "4",
            "--cols", "4")
        base = ["predict", "--topology", "t.json", "--arch",
                EXAMPLE_ARCH_PATH]
        table = run([*base, "--format", "table"], tmp_path)
        assert "area_overhead" in table.stdout
        csv_out = run([*base, "--format", "csv"], tmp_path)
        assert csv_out.stdout.startswith("metric,value\n")
        assert any(line.startswith("p_noc_w,")
                   for line in csv_out.stdout.splitlines())

    def test_superset_chain_never_gets_cheaper(self, tmp_path):
        overheads = []
        for i, sr in enumerate(["", "2", "2,3"]):
            gen(tmp_path, f"t{i}.json", "--topo", "shg", "--rows", "4",
                "--cols", "4", "--sr", sr)
            res = run(["predict", "--topology", f"t{i}.json", "--arch",
                       EXAMPLE_ARCH_PATH], tmp_path)
            overheads.append(json.loads(res.stdout)["area_overhead"])
        assert overheads == sorted(overheads)

    def test_unroutable_design_exits_3(self, tmp_path):
        cramped = tmp_path / "cramped.json"
        save_arch(make_arch(ge_area_coeff=6.4e-7), str(cramped))
        gen(tmp_path, "t.json", "--topo", "fb", "--rows", "8", "--cols", "8")
        res = run(["predict", "--topology", "t.json", "--arch",
                   str(cramped)], tmp_path)
        assert res.returncode == 3
        assert "pipeline error" in res.stderr


class TestSimulate:
    def test_single_load_point(self, tmp_path):
        gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "4",
            "--cols", "4")
        res = run(["simulate", "--topology", "t.json", "--arch",
                   EXAMPLE_ARCH_PATH, "--load", "0.05", "--seed", "7",
                   *FAST, "--out", "sim.json"], tmp_path)
        assert res.returncode == 0, res.stderr
        doc = json.loads(open(tmp_path / "sim.json").read())
        assert doc["avg_latency_cycles"] >= doc["zero_load_latency_cycles"]
        assert doc["accepted_throughput"] == pytest.approx(0.05, rel=0.1)
        assert doc["seed"] == 7

    def test_hw_seed_env_matches_explicit_flag(self, tmp_path):
        gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "4",
            "--cols", "4")
        base = ["simulate", "--topology", "t.json", "--arch",
                EXAMPLE_ARCH_PATH, "--load", "0.1", *FAST, "--out",
                "s.json"]
        run([*base, "--seed", "9"], tmp_path)
        explicit = open(tmp_path / "s.json", "rb").read()
        run(base, tmp_path, env_extra={"HW_SEED": "9"})
        assert open(tmp_path / "s.json", "rb").read() == explicit

    def test_sweep_writes_curve_csv(self, tmp_path):
        gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "3",
            "--cols", "3")
        res = run(["simulate", "--topology", "t.json", "--arch",
                   EXAMPLE_ARCH_PATH, "--seed", "3", *FAST,
                   "--out", "perf.json"], tmp_path)
        assert res.returncode == 0, res.stderr
        doc = json.loads(open(tmp_path / "perf.json").read())
        assert len(doc["curve"]) == 10
        curve = open(tmp_path / "perf.json.curve.csv").read()
        assert curve.splitlines()[0] == \
            "offered_load,avg_latency,accepted_throughput"
        assert len(curve.splitlines()) == 11
        manifest = json.loads(
            open(tmp_path / "perf.json.manifest.json").read())
        assert manifest["outputs"] == ["perf.json", "perf.json.curve.csv"]
        assert manifest["seed"] == 3

    def test_overdriven_load_exits_2(self, tmp_path):
        gen(tmp_path, "t.json", "--topo", "mesh", "--rows", "3",
            "--cols", "3")
        res = run(["simulate", "--topology", "t.json", "--arch",
                   EXAMPLE_ARCH_PATH, "--load", "1.5"], tmp_path)
        assert res.returncode == 2


class TestExplore:
    def test_climb_outputs_and_sidecars(self, tmp_path):
        res = run(["explore", "--arch", EXAMPLE_ARCH_PATH, "--rows", "4",
                   "--cols", "4", "--no-simulate-winner", "--out",
                   "ex.json"], tmp_path)
        assert res.returncode == 0, res.stderr
        doc = json.loads(open(tmp_path / "ex.json").read())
        assert doc["best"]["spec"]["s_r"] == [2, 3]
        assert doc["best"]["spec"]["s_c"] == [2, 3]
        assert doc["best"]["feasible"]
        assert doc["winner_simulated"] is None
        assert len(doc["front"]) >= 1
        trace_lines = open(tmp_path / "ex.json.trace.csv").read().splitlines()
        assert len(trace_lines) == len(doc["trace"]) + 1
        manifest = json.loads(open(tmp_path / "ex.json.manifest.json").read())
        assert manifest["outputs"] == [
            "ex.json", "ex.json.front.csv", "ex.json.trace.csv"]

    def test_bad_budget_exits_2(self, tmp_path):
        res = run(["explore", "--arch", EXAMPLE_ARCH_PATH, "--rows", "4",
                   "--cols", "4", "--budget", "1.5"], tmp_path)
        assert res.returncode == 2
        assert "budget" in res.stderr
