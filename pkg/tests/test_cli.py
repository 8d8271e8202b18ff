import json

import pytest

from gysinkit.cli import main
from gysinkit.superpotential import builtin


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCrit:
    def test_clifford_cp2_three_points(self, capsys, tmp_path):
        out_path = tmp_path / "crit.json"
        code, out, _ = run(
            capsys, "crit", "--family", "clifford_cp", "--n", "2", "--out", str(out_path)
        )
        assert code == 0
        report = json.loads(out_path.read_text())
        assert len(report["result"]["points"]) == 3
        assert report["result"]["nondegenerate_count"] == 3
        assert report["version"]

    def test_chekanov_q2_values(self, capsys, tmp_path):
        out_path = tmp_path / "crit.json"
        code, out, _ = run(capsys, "crit", "--family", "chekanov_q2", "--out", str(out_path))
        assert code == 0
        report = json.loads(out_path.read_text())
        values = sorted(
            round(p["critical_value"][0], 6) for p in report["result"]["points"]
        )
        assert values == [-4.0, 0.0, 0.0, 4.0]

    def test_malformed_poly_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run(capsys, "crit", "--poly", str(bad))
        assert code == 2
        assert "malformed JSON" in err

    def test_missing_family_exits_2(self, capsys):
        code, _, err = run(capsys, "crit")
        assert code == 2

    def test_poly_file_roundtrip(self, capsys, tmp_path):
        poly = tmp_path / "w.json"
        poly.write_text(json.dumps(builtin("clifford_cp", 1).to_json()))
        code, out, _ = run(capsys, "crit", "--poly", str(poly))
        assert code == 0
        assert "2 nondegenerate" in out


class TestSplit:
    @pytest.mark.parametrize("lattice,factors", [(1, 1), (2, 2), (4, 4)])
    def test_cp3_lattice_dichotomy(self, capsys, tmp_path, lattice, factors):
        out_path = tmp_path / "split.json"
        code, out, _ = run(
            capsys, "split", "--cpn", "3", "--lattice", str(lattice), "--out", str(out_path)
        )
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["result"]["factors"] == factors
        assert report["result"]["verification"]["passed"]

    def test_table_file(self, capsys, tmp_path):
        from conftest import quadric_surface_table
        from gysinkit.novikov import ExponentLattice

        table = tmp_path / "table.json"
        table.write_text(json.dumps(quadric_surface_table(ExponentLattice(1)).to_json()))
        code, out, _ = run(capsys, "split", "--table", str(table))
        assert code == 0
        assert "2 field factor(s)" in out

    def test_nonsemisimple_exits_1(self, capsys, tmp_path):
        from conftest import nilpotent_table
        from gysinkit.novikov import ExponentLattice

        table = tmp_path / "bad_table.json"
        table.write_text(json.dumps(nilpotent_table(ExponentLattice(1)).to_json()))
        code, out, _ = run(capsys, "split", "--table", str(table))
        assert code == 1
        assert "splitting failed" in out

    def test_cyclic_file(self, capsys, tmp_path):
        pres = tmp_path / "cyclic.json"
        pres.write_text(
            json.dumps(
                {
                    "type": "cyclic",
                    "m": 2,
                    "c": [1.0, 0.0],
                    "lambda": "1",
                    "lattice_denominator": 2,
                    "truncation": "10",
                }
            )
        )
        code, out, _ = run(capsys, "split", "--cyclic", str(pres))
        assert code == 0
        assert "2 field factor(s)" in out

    def test_conflicting_inputs_exit_2(self, capsys):
        code, _, err = run(capsys, "split", "--cpn", "3", "--table", "x.json")
        assert code == 2


class TestGysin:
    def test_cp3_q2_preset_passes(self, capsys, tmp_path):
        out_path = tmp_path / "gysin.json"
        code, out, _ = run(capsys, "gysin", "--pair", "cp3_q2", "--out", str(out_path))
        assert code == 0
        report = json.loads(out_path.read_text())
        res = report["result"]
        assert res["critical"] is True
        assert all(res["exactness"])
        assert res["connecting_class"]["euler"] == 0
        assert res["chain_residuals"] == {"i": 0.0, "p": 0.0}

    def test_cpn_preset(self, capsys):
        code, out, _ = run(capsys, "gysin", "--pair", "cpn", "--n", "3")
        assert code == 0
        assert "all checks pass" in out

    def test_noncritical_rho_tilde_fails(self, capsys, tmp_path):
        rho_tilde = tmp_path / "rho.json"
        rho_tilde.write_text(json.dumps([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]))
        out_path = tmp_path / "gysin.json"
        code, out, _ = run(
            capsys,
            "gysin", "--pair", "cp3_q2", "--rho-tilde", str(rho_tilde),
            "--out", str(out_path),
        )
        assert code == 1
        report = json.loads(out_path.read_text())
        assert report["result"]["critical"] is False
        quantum = report["result"]["connecting_class"]["quantum"]
        assert quantum["terms"], "nonzero connecting class expected"

    def test_unknown_pair_exits_2(self, capsys):
        code, _, err = run(capsys, "gysin", "--pair", "nope")
        assert code == 2

    def test_explicit_potentials_and_local_systems(self, capsys, tmp_path):
        base = tmp_path / "base.json"
        lift = tmp_path / "lift.json"
        rho = tmp_path / "rho.json"
        rho_t = tmp_path / "rho_t.json"
        base.write_text(json.dumps(builtin("chekanov_q2").to_json()))
        lift.write_text(json.dumps(builtin("chekanov_cp3").to_json()))
        rho.write_text(json.dumps([[1.0, 0.0], [1.0, 0.0]]))
        rho_t.write_text(json.dumps([[1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
        code, out, _ = run(
            capsys,
            "gysin",
            "--base-poly", str(base), "--lift-poly", str(lift),
            "--rho", str(rho), "--rho-tilde", str(rho_t),
            "--weight", "1",
        )
        assert code == 0
        assert "all checks pass" in out


class TestReduce:
    def test_cpn_constant(self, capsys):
        code, out, _ = run(capsys, "reduce", "--pair", "cpn", "--n", "5", "--kmax", "20")
        assert code == 0
        assert "= 5/6" in out

    def test_quadric_constant(self, capsys):
        code, out, _ = run(capsys, "reduce", "--pair", "quadric", "--n", "4", "--kmax", "20")
        assert code == 0
        assert "= 3/4" in out

    def test_explicit_kappa(self, capsys):
        code, out, _ = run(capsys, "reduce", "--kappa", "0.5", "--kmax", "20")
        assert code == 0
        assert "= 1/2" in out
        assert "0.707106781187" in out

    def test_file_based_identity(self, capsys, tmp_path):
        import math

        c_sigma = [3.0 * k for k in range(1, 101)]
        c_x = [0.5 * 3.0 * k + 0.1 * abs(math.sin(k)) for k in range(1, 101)]
        fs = tmp_path / "cs.json"
        fx = tmp_path / "cx.json"
        fs.write_text(json.dumps(c_sigma))
        fx.write_text(json.dumps(c_x))
        code, out, _ = run(
            capsys,
            "reduce", "--kappa", "1/2", "--c-sigma", str(fs), "--c-x", str(fx),
            "--const", "0.1", "--tol", "0.01",
        )
        assert code == 0

    def test_missing_kappa_exits_2(self, capsys):
        code, _, err = run(capsys, "reduce")
        assert code == 2


class TestAxioms:
    def test_small_suite_passes(self, capsys, tmp_path):
        out_path = tmp_path / "axioms.json"
        code, out, _ = run(
            capsys, "axioms", "--seeds", "8", "--zero-diff", "5", "--out", str(out_path)
        )
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["result"]["passed"] is True

    def test_negative_control_fails(self, capsys):
        code, out, _ = run(
            capsys, "axioms", "--seeds", "6", "--zero-diff", "0", "--negative-control"
        )
        assert code == 1
        assert "FAILURES" in out

    def test_zero_seeds_exits_2(self, capsys):
        code, _, err = run(capsys, "axioms", "--seeds", "0")
        assert code == 2


class TestPlumbing:
    def test_reports_are_byte_identical(self, capsys, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        run(capsys, "crit", "--family", "clifford_cp", "--n", "1", "--out", str(a))
        run(capsys, "crit", "--family", "clifford_cp", "--n", "1", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_toml_config_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('cpn = 3\nlattice = 4\n')
        out_path = tmp_path / "split.json"
        code, _, _ = run(capsys, "split", "--config", str(cfg), "--out", str(out_path))
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["result"]["factors"] == 4

    def test_flag_overrides_toml(self, capsys, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('cpn = 3\nlattice = 4\n')
        code, out, _ = run(capsys, "split", "--config", str(cfg), "--lattice", "1")
        assert code == 0
        assert "1 field factor(s)" in out

    def test_truncation_env_override(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("GYSINKIT_TRUNCATION", "6")
        out_path = tmp_path / "split.json"
        code, _, _ = run(
            capsys, "split", "--cpn", "2", "--lattice", "3", "--out", str(out_path)
        )
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["config"]["truncation"] == "6"

    def test_config_hash_embedded(self, capsys, tmp_path):
        out_path = tmp_path / "r.json"
        run(capsys, "crit", "--family", "clifford_cp", "--n", "1", "--out", str(out_path))
        report = json.loads(out_path.read_text())
        assert len(report["config_sha256"]) == 64
        assert report["tool"] == "gysinkit"
