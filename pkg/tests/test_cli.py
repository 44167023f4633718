import json

import numpy as np
import pytest

from granger_mdl.cli import main
from granger_mdl.timedomain import CausalGraph


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def sim_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "sim3.csv"
    assert run_cli("simulate", "--network", "3node", "--seed", "7",
                   "--out", str(path)) == 0
    return path


class TestSimulate:
    def test_creates_expected_csv(self, sim_csv):
        lines = sim_csv.read_text().strip().split("\n")
        assert lines[0] == "node1,node2,node3"
        assert len(lines) == 301

    def test_byte_identical_reruns(self, tmp_path, sim_csv):
        other = tmp_path / "again.csv"
        assert run_cli("simulate", "--network", "3node", "--seed", "7",
                       "--out", str(other)) == 0
        assert other.read_bytes() == sim_csv.read_bytes()

    def test_custom_spec_file(self, tmp_path):
        spec = {
            "n_nodes": 2,
            "coefficients": [[0, 0, 1, 0.5], [1, 0, 1, 0.4], [1, 1, 1, 0.3]],
            "noise_variances": [0.5, [0.2, 0.4]],
            "total_len": 120,
            "burn_in": 20,
            "initial_values": [0.0, 0.0],
        }
        spec_path = tmp_path / "net.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "sim.csv"
        assert run_cli("simulate", "--network", str(spec_path), "--seed", "1",
                       "--out", str(out)) == 0
        assert len(out.read_text().strip().split("\n")) == 101

    def test_invalid_spec_exits_2(self, tmp_path, capsys):
        spec_path = tmp_path / "bad.json"
        spec_path.write_text(json.dumps({
            "n_nodes": 1,
            "coefficients": [[0, 0, 1, 0.5]],
            "noise_variances": [1.0],
            "total_len": 50,
            "burn_in": 50,
            "initial_values": [0.0],
        }))
        code = run_cli("simulate", "--network", str(spec_path), "--seed", "1",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert "burn_in" in capsys.readouterr().err


class TestAnalyze:
    def test_mdl_graph_on_simulated_data(self, sim_csv, tmp_path):
        out = tmp_path / "graph.json"
        assert run_cli("analyze", str(sim_csv), "--method", "mdl",
                       "--out", str(out)) == 0
        graph = CausalGraph.from_json(out.read_text())
        assert set(graph.edges()) == {(0, 1), (0, 2)}

    def test_ftest_runs(self, sim_csv, capsys):
        assert run_cli("analyze", str(sim_csv), "--method", "ftest",
                       "--alpha", "0.05") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["method"] == "F_TEST"

    def test_single_column_exits_2(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("a\n1\n2\n3\n")
        assert run_cli("analyze", str(path)) == 2

    def test_missing_file_exits_2(self):
        assert run_cli("analyze", "/nonexistent.csv") == 2

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        col = rng.standard_normal(60)
        path = tmp_path / "dup.csv"
        path.write_text(
            "a,b\n" + "\n".join(f"{v:.17g},{v:.17g}" for v in col) + "\n"
        )
        assert run_cli("analyze", str(path), "--method", "mdl") == 3
        assert "numerical error" in capsys.readouterr().err

    def test_config_file_supplies_defaults(self, sim_csv, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"method": "mdl", "p_max": 6}))
        assert run_cli("analyze", str(sim_csv), "--config", str(config)) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["method"] == "MDL"
        assert payload["params"]["p_max"] == 6

    def test_flags_override_config(self, sim_csv, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"method": "mdl", "p_max": 6}))
        assert run_cli("analyze", str(sim_csv), "--config", str(config),
                       "--p-max", "4") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["params"]["p_max"] == 4


class TestSpectral:
    def test_frequency_grid_override_row_count(self, sim_csv, tmp_path):
        out = tmp_path / "freq.csv"
        assert run_cli("spectral", str(sim_csv), "--x", "node2", "--y", "node1",
                       "--freqs", "1:30,50,100", "--sample-rate", "200",
                       "--out", str(out)) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 33  # header + 32 grid rows

    def test_driven_direction_dominates(self, sim_csv, tmp_path):
        out = tmp_path / "freq.csv"
        assert run_cli("spectral", str(sim_csv), "--x", "node2", "--y", "node1",
                       "--freqs", "1:30", "--sample-rate", "200",
                       "--out", str(out)) == 0
        rows = np.genfromtxt(out, delimiter=",", names=True)
        assert (rows["f_y_to_x"] > 0).all()
        assert rows["f_y_to_x"].min() > rows["f_x_to_y"].max()

    def test_self_pair_exits_2(self, sim_csv, tmp_path):
        assert run_cli("spectral", str(sim_csv), "--x", "node1", "--y", "node1",
                       "--out", str(tmp_path / "x.csv")) == 2

    def test_unknown_variable_exits_2(self, sim_csv, tmp_path):
        assert run_cli("spectral", str(sim_csv), "--x", "node1", "--y", "nodeZ",
                       "--out", str(tmp_path / "x.csv")) == 2


class TestSimilarity:
    def graph_json(self, path, edges, nodes=("a", "b", "c")):
        payload = {
            "nodes": list(nodes),
            "method": "MDL",
            "edges": [{"from": f, "to": t, "weight": 1.0} for f, t in edges],
            "params": {},
        }
        path.write_text(json.dumps(payload))

    def test_identical_graphs(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        self.graph_json(a, [("a", "b")])
        assert run_cli("similarity", str(a), str(a)) == 0
        assert capsys.readouterr().out.strip() == "1"

    def test_hand_counted_half(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        self.graph_json(a, [("a", "b"), ("a", "c"), ("b", "c")])
        self.graph_json(b, [("a", "b"), ("b", "c"), ("c", "a")])
        assert run_cli("similarity", str(a), str(b)) == 0
        assert capsys.readouterr().out.strip() == "0.5"

    def test_node_count_mismatch_exits_2(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        self.graph_json(a, [("a", "b")])
        self.graph_json(b, [("a", "b")], nodes=("a", "b"))
        assert run_cli("similarity", str(a), str(b)) == 2


class TestMcBench:
    def test_basic_run_and_determinism(self, tmp_path, capsys):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        args = ["mc-bench", "--network", "3node",
                "--methods", "mdl,ftest:0.05", "--trials", "6", "--seed", "11",
                "--p-max", "6"]
        assert run_cli(*args, "--out", str(out1)) == 0
        table = capsys.readouterr().out
        assert "mdl" in table and "ftest:0.05" in table
        assert run_cli(*args, "--out", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_worker_count_invariance(self, tmp_path):
        out1, out2 = tmp_path / "w1.json", tmp_path / "w2.json"
        base = ["mc-bench", "--network", "3node", "--methods", "mdl",
                "--trials", "8", "--seed", "3", "--p-max", "6"]
        assert run_cli(*base, "--workers", "1", "--out", str(out1)) == 0
        assert run_cli(*base, "--workers", "2", "--out", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_single_trial_is_legal(self, tmp_path):
        assert run_cli("mc-bench", "--network", "3node", "--methods", "mdl",
                       "--trials", "1", "--seed", "0", "--p-max", "6",
                       "--out", str(tmp_path / "r.json")) == 0

    def test_bad_method_exits_2(self):
        assert run_cli("mc-bench", "--network", "3node", "--methods", "wald",
                       "--trials", "2", "--seed", "0") == 2
