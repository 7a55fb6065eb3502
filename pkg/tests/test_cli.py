import json

import numpy as np
import pytest

import qgraph as qg
from qgraph.cli import main
from qgraph.serialize import (
    family_to_document,
    graph_to_document,
    parse_family_document,
    parse_graph_document,
    save_family,
    save_graph,
)


@pytest.fixture()
def trivial_path(tmp_path, graph_trivial_m2):
    path = tmp_path / "trivial.json"
    save_graph(str(path), graph_trivial_m2)
    return str(path)


@pytest.fixture()
def line_path(tmp_path, graph_line):
    path = tmp_path / "line.json"
    save_graph(str(path), graph_line)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    payload = json.loads(out.out) if out.out.strip() else None
    return code, payload, out.err


class TestSerialization:
    def test_graph_document_round_trip(self, cp_family_graphs):
        for name, G in cp_family_graphs.items():
            doc = graph_to_document(G)
            G2, _ = parse_graph_document(doc)
            assert G2.structure.sizes == G.structure.sizes, name
            assert np.array_equal(G2.adjacency.matrix, G.adjacency.matrix), name

    def test_family_document_round_trip(self, tracial_m2):
        fam = qg.canonical_lqck_family("trivial", tracial_m2)
        fam2 = parse_family_document(family_to_document(fam))
        assert fam2.k == fam.k
        assert np.array_equal(fam2.images, fam.images)

    def test_parse_errors(self):
        with pytest.raises(qg.ParseError):
            parse_graph_document({"blocks": [2]})
        with pytest.raises(qg.ParseError):
            parse_graph_document([1, 2, 3])
        with pytest.raises(qg.ParseError):
            parse_family_document({"k": 2, "images": [[[1.0]]]})

    def test_embedded_tolerance(self, graph_trivial_m2):
        doc = graph_to_document(graph_trivial_m2, tol=1e-6)
        _, eff = parse_graph_document(doc)
        assert eff == 1e-6


class TestInspect:
    def test_trivial_graph_passes(self, capsys, trivial_path):
        code, payload, err = run(capsys, "inspect", trivial_path)
        assert code == 0
        assert payload["delta_sq"] == pytest.approx(4.0)
        assert payload["cp"]["choi"] is True
        assert payload["cp"]["tests_agree"] is True
        assert payload["faithful"] is True and payload["full"] is True
        assert payload["dim_E"] == 4
        assert "delta^2" in err

    def test_line_graph_reports_kernel(self, capsys, line_path):
        code, payload, _ = run(capsys, "inspect", line_path)
        assert code == 0
        assert payload["sources"] == [0] and payload["sinks"] == [1]
        assert payload["faithful"] is False and payload["full"] is False
        assert payload["kernel_dim"] == 1
        assert payload["dim_E"] == 1

    def test_malformed_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, payload, err = run(capsys, "inspect", str(bad))
        assert code == 1
        assert payload["error"] == "ParseError"

    def test_invalid_weights(self, capsys, tmp_path):
        doc = {
            "blocks": [2],
            "psi": [[0.25, 0.25]],
            "adjacency": [[[1.0, 0.0] if i == j else [0.0, 0.0] for j in range(4)] for i in range(4)],
        }
        path = tmp_path / "notstate.json"
        path.write_text(json.dumps(doc))
        code, payload, _ = run(capsys, "inspect", str(path))
        assert code == 1
        assert payload["error"] == "NotState"


class TestFock:
    def test_trivial_graph(self, capsys, trivial_path):
        code, payload, _ = run(capsys, "fock", trivial_path, "--levels", "3")
        assert code == 0
        assert payload["level_dims"] == [4, 4, 4, 4]
        assert payload["vacuum_defect"] > 0.5
        assert all(v < 1e-9 for v in payload["lqck_interior"].values())

    def test_source_graph_rejected(self, capsys, line_path):
        code, payload, _ = run(capsys, "fock", line_path)
        assert code == 1
        assert payload["error"] == "HasQuantumSource"

    def test_budget_exceeded(self, capsys, trivial_path):
        code, payload, _ = run(capsys, "fock", trivial_path, "--levels", "2000")
        assert code == 1
        assert payload["error"] == "BudgetExceeded"


class TestCheck:
    def test_lqck_pass(self, capsys, tmp_path, trivial_path, tracial_m2):
        fam_path = tmp_path / "fam.json"
        save_family(str(fam_path), qg.canonical_lqck_family("trivial", tracial_m2))
        code, payload, _ = run(
            capsys, "check", trivial_path, "--family", str(fam_path), "--mode", "lqck"
        )
        assert code == 0
        assert payload["lqck1"] < 1e-9

    def test_qck_pass(self, capsys, tmp_path, trivial_path, tracial_m2):
        fam_path = tmp_path / "fam.json"
        save_family(str(fam_path), qg.canonical_lqck_family("trivial", tracial_m2))
        code, payload, _ = run(
            capsys, "check", trivial_path, "--family", str(fam_path), "--mode", "qck"
        )
        assert code == 0

    def test_wrong_graph_fails_with_residual_code(
        self, capsys, tmp_path, tracial_m2, graph_complete_m2
    ):
        fam_path = tmp_path / "fam.json"
        save_family(str(fam_path), qg.canonical_lqck_family("trivial", tracial_m2))
        graph_path = tmp_path / "complete.json"
        save_graph(str(graph_path), graph_complete_m2)
        code, payload, _ = run(
            capsys, "check", str(graph_path), "--family", str(fam_path), "--mode", "lqck"
        )
        assert code == 2
        assert payload["lqck2"] > 0.1

    def test_classical_mode(self, capsys, tmp_path):
        G = qg.classical_graph([[0, 1], [1, 0]])
        e12 = np.array([[0, 1], [0, 0]], dtype=complex)
        fam = qg.CKFamily(2, np.stack([e12, e12.T]) / 2.0)
        graph_path, fam_path = tmp_path / "g.json", tmp_path / "f.json"
        save_graph(str(graph_path), G)
        save_family(str(fam_path), fam)
        code, payload, _ = run(
            capsys, "check", str(graph_path), "--family", str(fam_path), "--mode", "classical"
        )
        assert code == 0
        assert payload["cuntz_krieger"] < 1e-12

    def test_classical_mode_rejects_quantum_graph(
        self, capsys, tmp_path, trivial_path, tracial_m2
    ):
        fam_path = tmp_path / "fam.json"
        save_family(str(fam_path), qg.canonical_lqck_family("trivial", tracial_m2))
        code, payload, _ = run(
            capsys, "check", trivial_path, "--family", str(fam_path), "--mode", "classical"
        )
        assert code == 1
        assert payload["error"] == "NotClassical"

    def test_tolerance_env_override(
        self, capsys, monkeypatch, tmp_path, tracial_m2, graph_complete_m2
    ):
        fam_path = tmp_path / "fam.json"
        save_family(str(fam_path), qg.canonical_lqck_family("trivial", tracial_m2))
        graph_path = tmp_path / "complete.json"
        save_graph(str(graph_path), graph_complete_m2)
        monkeypatch.setenv("QGRAPH_TOL", "1e3")
        code, _, _ = run(
            capsys, "check", str(graph_path), "--family", str(fam_path), "--mode", "lqck"
        )
        assert code == 0
        monkeypatch.setenv("QGRAPH_TOL", "not-a-number")
        code, payload, _ = run(capsys, "check", str(graph_path), "--family", str(fam_path))
        assert code == 1


class TestExample:
    def test_materialize_and_inspect_all_graphs(self, capsys, tmp_path):
        names = [
            "complete_c2",
            "complete_m2",
            "trivial_m2",
            "trivial_m2_skew",
            "rank_one_m2",
            "classical_3cycle",
            "classical_line",
            "automorphism_swap",
        ]
        for name in names:
            path = tmp_path / f"{name}.json"
            code, payload, _ = run(capsys, "example", name, "--out", str(path))
            assert code == 0 and payload["kind"] == "graph"
            code, _, _ = run(capsys, "inspect", str(path))
            assert code == 0, name

    def test_materialize_family(self, capsys, tmp_path):
        path = tmp_path / "fam.json"
        code, payload, _ = run(capsys, "example", "family_trivial_m2", "--out", str(path))
        assert code == 0 and payload["kind"] == "family"
        graph_path = tmp_path / "g.json"
        run(capsys, "example", "trivial_m2", "--out", str(graph_path))
        code, _, _ = run(
            capsys, "check", str(graph_path), "--family", str(path), "--mode", "lqck"
        )
        assert code == 0

    def test_unknown_example(self, capsys, tmp_path):
        code, payload, _ = run(
            capsys, "example", "nonesuch", "--out", str(tmp_path / "x.json")
        )
        assert code == 1
        assert "known" in payload["message"]
