import json
from pathlib import Path

import pytest

from ostf.cli import main, parse_psi_mode


def run(args):
    return main([str(a) for a in args])


def manifest_without_timestamp(path: Path) -> dict:
    data = json.loads(path.read_text())
    data.pop("timestamp_utc")
    return data


class TestGenerate:
    def test_taylor_green(self, tmp_path, capsys):
        out = tmp_path / "tg.ostf"
        assert run(["generate", "--generator", "taylor-green", "--n", 64,
                    "--out", out]) == 0
        assert out.exists()
        meta = json.loads((tmp_path / "tg.manifest.json").read_text())
        assert meta["command"] == "generate"
        from ostf import read_container
        ens = read_container(out)
        assert ens.size == 1 and ens.has_pressure

    def test_random_besov_deterministic(self, tmp_path):
        a, b = tmp_path / "a.ostf", tmp_path / "b.ostf"
        argv = ["generate", "--generator", "random-besov", "--n", 64,
                "--members", 4, "--seed", 7, "--alpha", 0.45,
                "--k-min", 2, "--k-max", 20]
        assert run(argv + ["--out", a]) == 0
        assert run(argv + ["--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_alpha_exit_2(self, tmp_path, capsys):
        code = run(["generate", "--generator", "random-besov", "--n", 64,
                    "--alpha", 1.5, "--out", tmp_path / "x.ostf"])
        captured = capsys.readouterr()
        assert code == 2
        assert "alpha" in captured.err

    def test_invalid_n_exit_2(self, tmp_path):
        assert run(["generate", "--generator", "taylor-green", "--n", 48,
                    "--out", tmp_path / "x.ostf"]) == 2


class TestAnalyze:
    @pytest.fixture()
    def tg_container(self, tmp_path):
        out = tmp_path / "tg.ostf"
        run(["generate", "--generator", "taylor-green", "--n", 64,
             "--out", out])
        return out

    @pytest.fixture()
    def rb_container(self, tmp_path):
        out = tmp_path / "rb.ostf"
        run(["generate", "--generator", "random-besov", "--n", 64,
             "--members", 4, "--seed", 7, "--alpha", 0.45,
             "--k-min", 2, "--k-max", 20, "--out", out])
        return out

    def test_structure_outputs(self, tg_container, tmp_path):
        stem = tmp_path / "curve"
        assert run(["structure", "--q", 3, "--in", tg_container,
                    "--out", stem]) == 0
        csv = (tmp_path / "curve.csv").read_text().splitlines()
        assert csv[0] == "eps,value,q"
        assert len(csv) == 7  # default 6 rungs
        fit = json.loads((tmp_path / "curve.fit.json").read_text())
        assert "alpha_fit" in fit

    def test_validate(self, tg_container, tmp_path):
        stem = tmp_path / "ax"
        assert run(["validate", "--in", tg_container, "--out", stem]) == 0
        report = json.loads((tmp_path / "ax.json").read_text())
        assert report["passed"] is True

    def test_dissipation_verdict_is_data_not_exit_code(self, rb_container,
                                                       tmp_path):
        stem = tmp_path / "diss"
        assert run(["dissipation", "--in", rb_container, "--psi-mode", "m0",
                    "--eps-count", 4, "--out", stem]) == 0
        report = json.loads((tmp_path / "diss.json").read_text())
        assert report["verdict"] in ("vanishing", "nonvanishing",
                                     "inconclusive")
        assert set(report) >= {"eps", "value", "verdict", "slope", "psi",
                               "mollifier_profile"}

    def test_balance_rows(self, tg_container, tmp_path):
        stem = tmp_path / "bal"
        assert run(["balance", "--eps-count", 5, "--in", tg_container,
                    "--out", stem]) == 0
        rows = json.loads((tmp_path / "bal.json").read_text())
        assert len(rows) == 5
        assert all(abs(r["sum"]) <= 1e-7 for r in rows)

    def test_onsager_and_mixed_dc_and_energy(self, rb_container, tmp_path):
        assert run(["onsager", "--in", rb_container,
                    "--out", tmp_path / "ons"]) == 0
        verdict = json.loads((tmp_path / "ons.json").read_text())["verdict"]
        assert verdict in ("conservative-regime", "dissipative-risk",
                           "inconclusive")
        assert run(["mixed-dc", "--in", rb_container,
                    "--out", tmp_path / "dc"]) == 0
        assert (tmp_path / "dc.p32.csv").exists()
        assert run(["energy", "--in", rb_container,
                    "--out", tmp_path / "en"]) == 0
        lines = (tmp_path / "en.csv").read_text().splitlines()
        assert lines[0] == "t,energy"

    def test_residuals_table(self, tg_container, tmp_path):
        stem = tmp_path / "res"
        assert run(["residuals", "--in", tg_container, "--max-mode", 1,
                    "--out", stem]) == 0
        lines = (tmp_path / "res.csv").read_text().splitlines()
        assert lines[0] == "phi_mode,i,j,eps,residual,floor"
        assert len(lines) > 4

    def test_missing_container_exit_1(self, tmp_path):
        assert run(["structure", "--in", tmp_path / "nope.ostf"]) == 1

    def test_corrupt_container_exit_1(self, tmp_path):
        bad = tmp_path / "bad.ostf"
        bad.write_bytes(b"garbage")
        assert run(["validate", "--in", bad]) == 1

    def test_pipeline_determinism(self, rb_container, tmp_path):
        for stem in ("d1", "d2"):
            assert run(["structure", "--q", 2, "--in", rb_container,
                        "--out", tmp_path / stem]) == 0
        assert ((tmp_path / "d1.csv").read_bytes()
                == (tmp_path / "d2.csv").read_bytes())
        m1 = manifest_without_timestamp(tmp_path / "d1.manifest.json")
        m2 = manifest_without_timestamp(tmp_path / "d2.manifest.json")
        m1["config"].pop("out")
        m2["config"].pop("out")
        assert m1 == m2


def test_parse_psi_mode():
    assert parse_psi_mode("m0", 2) == ((0, 0), "cos")
    assert parse_psi_mode("cos:1,0", 2) == ((1, 0), "cos")
    assert parse_psi_mode("sin:2,1", 2) == ((2, 1), "sin")
    with pytest.raises(ValueError):
        parse_psi_mode("tan:1,0", 2)
    with pytest.raises(ValueError):
        parse_psi_mode("cos:1", 2)
