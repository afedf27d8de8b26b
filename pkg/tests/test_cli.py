import json

import pytest

from inflap.cli import main
from inflap.const import EXIT_FAILED, EXIT_INPUT_ERROR, EXIT_OK


@pytest.fixture
def example_dir(tmp_path):
    assert main(["example", "dumbbell", "--out-dir", str(tmp_path)]) == EXIT_OK
    return tmp_path


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


class TestExample:
    def test_writes_three_files(self, example_dir):
        names = sorted(p.name for p in example_dir.iterdir())
        assert names == ["dumbbell_graph.json", "u_inf.json", "u_inf_Y.json"]

    def test_prints_the_graph(self, capsys):
        assert main(["example", "dumbbell"]) == EXIT_OK
        assert "P+" in _json(capsys)["points"]


class TestEigen:
    def test_dumbbell(self, example_dir, capsys):
        assert main(["eigen", str(example_dir / "dumbbell_graph.json")]) == EXIT_OK
        out = _json(capsys)
        assert out["lambda"] == "1/2"
        assert out["r_inf"] == "2"
        assert {"edge": "e+3", "t": "1"} in out["ridge"]

    def test_human_output(self, example_dir, capsys):
        assert main(["--human", "eigen", str(example_dir / "dumbbell_graph.json")]) == EXIT_OK
        assert capsys.readouterr().out.startswith("R_inf=2, lambda=0.5")

    def test_malformed_graph(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"vertices": ["a"]}', encoding="utf-8")
        assert main(["eigen", str(bad)]) == EXIT_INPUT_ERROR
        assert "malformed graph" in capsys.readouterr().err

    def test_invalid_graph(self, tmp_path):
        bad = tmp_path / "bad.json"
        raw = {
            "vertices": ["a", "b"],
            "edges": [{"id": "e", "from": "a", "to": "b", "length": "0"}],
            "boundary": ["a", "b"],
        }
        bad.write_text(json.dumps(raw), encoding="utf-8")
        assert main(["eigen", str(bad)]) == EXIT_INPUT_ERROR

    def test_missing_file(self, tmp_path):
        assert main(["eigen", str(tmp_path / "nope.json")]) == EXIT_INPUT_ERROR


class TestSolve:
    def test_ground_state(self, example_dir, capsys):
        code = main(["solve", str(example_dir / "dumbbell_graph.json"), "--h", "1/16"])
        out = _json(capsys)
        assert code == EXIT_OK
        assert out["status"] == "converged"
        assert out["incenter"]["status"] == "PASS"
        assert out["function"]["kind"] == "nodes"

    def test_writes_csv(self, example_dir, tmp_path, capsys):
        target = tmp_path / "u.csv"
        code = main(["solve", str(example_dir / "dumbbell_graph.json"), "--h", "1/8", "--out", str(target)])
        assert code == EXIT_OK
        assert _json(capsys)["written"] == str(target)
        assert target.read_text(encoding="utf-8").startswith("edge_id,t,value\n")

    def test_above_the_eigenvalue(self, example_dir, capsys):
        code = main(["solve", str(example_dir / "dumbbell_graph.json"), "--lambda", "0.6"])
        out = _json(capsys)
        assert code == EXIT_FAILED
        assert out["status"] == "infeasible"
        assert out["incenter"]["status"] == "FAIL"

    def test_threads_need_jacobi(self, example_dir):
        assert main(["solve", str(example_dir / "dumbbell_graph.json"), "--threads", "2"]) == EXIT_INPUT_ERROR


class TestResidual:
    def test_closed_form(self, example_dir, capsys):
        args = ["residual", str(example_dir / "dumbbell_graph.json"), str(example_dir / "u_inf.json"), "--h", "1/16"]
        assert main(args) == EXIT_OK
        out = _json(capsys)
        assert out["level"] == "1/2"
        assert out["conditions"]["status"] == "PASS"


class TestVerifiers:
    def test_verify_super(self, example_dir, capsys):
        assert main(["verify-super", str(example_dir / "u_inf.json"), "--trials", "200"]) == EXIT_OK
        assert _json(capsys)["status"] == "PASS"

    def test_verify_super_exact_only(self, example_dir, capsys):
        assert main(["verify-super", str(example_dir / "u_inf_Y.json"), "--exact-only"]) == EXIT_OK
        assert len(_json(capsys)["checks"]) == 1

    def test_verify_super_malformed_edges(self, example_dir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        raw = {"graph": str(example_dir / "dumbbell_graph.json"), "edges": [["e0", 0, 1]]}
        bad.write_text(json.dumps(raw), encoding="utf-8")
        assert main(["verify-super", str(bad), "--exact-only"]) == EXIT_INPUT_ERROR
        assert "edges" in capsys.readouterr().err

    def test_classify(self, example_dir, capsys):
        assert main(["classify", str(example_dir / "u_inf.json")]) == EXIT_OK
        assert _json(capsys)["check"] == "monge"

    def test_harnack_radius_condition(self, example_dir, capsys):
        args = ["harnack", str(example_dir / "u_inf.json"), "--x0", "P+", "--R", "1", "--r", "1/4"]
        assert main(args) == EXIT_INPUT_ERROR
        assert _json(capsys)["status"] == "INAPPLICABLE"

    def test_harnack(self, example_dir, capsys):
        args = ["harnack", str(example_dir / "u_inf.json"), "--x0", "P+", "--R", "1", "--r", "1/8"]
        assert main(args) == EXIT_OK
        assert _json(capsys)["status"] == "PASS"

    def test_regularity(self, example_dir, capsys):
        assert main(["regularity", str(example_dir / "u_inf.json"), "--samples", "50"]) == EXIT_OK
        assert _json(capsys)["status"] == "PASS"


class TestEikonal:
    def test_mcshane(self, example_dir, tmp_path, capsys):
        data = tmp_path / "g.json"
        data.write_text(json.dumps({"g": {v: 0 for v in ["V0", "V+2", "V-2", "V+3", "V-3"]}}), encoding="utf-8")
        out_file = tmp_path / "m.json"
        args = ["mcshane", str(example_dir / "dumbbell_graph.json"), str(data), "--lambda", "1/2"]
        assert main(args + ["--out", str(out_file)]) == EXIT_OK
        out = _json(capsys)
        assert out["classification"] == "solution"
        assert all(out["attainment"].values())
        assert main(["classify", str(out_file), "--lambda", "1/2"]) == EXIT_OK
        assert _json(capsys)["classification"] == "solution"

    def test_mcshane_incomplete_data(self, example_dir, tmp_path):
        data = tmp_path / "g.json"
        data.write_text('{"g": {"V0": 0}}', encoding="utf-8")
        args = ["mcshane", str(example_dir / "dumbbell_graph.json"), str(data), "--lambda", "1"]
        assert main(args) == EXIT_INPUT_ERROR


class TestGrid:
    def test_unit_square(self, tmp_path, capsys):
        domain = tmp_path / "square.json"
        domain.write_text('{"shape": "rectangle", "bounds": [0, 0, 1, 1]}', encoding="utf-8")
        assert main(["grid", str(domain), "--spacing", "0.5", "--k", "1"]) == EXIT_OK
        out = _json(capsys)
        assert len(out["vertices"]) == 9
        assert "positions" in out

    def test_consistency_needs_a_disk(self, tmp_path):
        domain = tmp_path / "square.json"
        domain.write_text('{"shape": "rectangle", "bounds": [0, 0, 1, 1]}', encoding="utf-8")
        assert main(["grid", str(domain), "--experiment", "consistency"]) == EXIT_INPUT_ERROR


class TestParser:
    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_INPUT_ERROR

    def test_missing_argument(self):
        assert main(["eigen"]) == EXIT_INPUT_ERROR

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("inflap ")
