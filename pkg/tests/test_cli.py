import json

import numpy as np
import pytest

from polartomo import cli, counts, fitstats, io

from conftest import RHO3D

TABLE1 = io.fixture_path("table1.json")
RHO3D_JSON = io.fixture_path("rho3d.json")


def load(path):
    return json.loads(path.read_text())


def matrix(d):
    return np.array(d["re"]) + 1j * np.array(d["im"])


class TestReconstruct:
    def test_golden(self, tmp_path):
        out = tmp_path / "rho.json"
        assert cli.main(["reconstruct", TABLE1, "-o", str(out)]) == 0
        d = load(out)
        assert d["basis"] == ["HH", "HV", "VH", "VV"] and d["converged"]
        assert np.max(np.abs(matrix(d) - RHO3D)) <= 5e-3
        assert "min_eigenvalue" in d["linear_inversion"]

    def test_stdout(self, capsys):
        assert cli.main(["reconstruct", TABLE1]) == 0
        assert json.loads(capsys.readouterr().out)["converged"]

    def test_underdetermined(self, tmp_path, capsys):
        f = tmp_path / "few.json"
        f.write_text(json.dumps({"measurements": [{"setting": "HH", "p": 0.3, "sigma": 0.01}]}))
        assert cli.main(["reconstruct", str(f)]) == 3
        assert json.loads(capsys.readouterr().err)["error"] == "UnderdeterminedSystem"

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["reconstruct", str(tmp_path / "nope.json")]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "SchemaError"

    def test_bad_label(self, tmp_path, capsys):
        f = tmp_path / "bad.json"
        f.write_text(json.dumps({"measurements": [{"setting": "HX", "p": 0.3, "sigma": 0.01}]}))
        assert cli.main(["reconstruct", str(f)]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "UnknownLabel"


class TestMetrics:
    def test_published(self, tmp_path):
        out = tmp_path / "m.json"
        assert cli.main(["metrics", RHO3D_JSON, "-o", str(out)]) == 0
        d = load(out)
        assert d["tangle"] == 0.0
        assert d["dop_photon2"] == pytest.approx(0.045, abs=0.002)
        assert d["dop_threshold"] == 0.01

    def test_not_hermitian(self, tmp_path, capsys):
        f = tmp_path / "bad.json"
        re = np.eye(4) / 4
        re[0, 1] = 0.1
        f.write_text(json.dumps({"re": re.tolist(), "im": np.zeros((4, 4)).tolist()}))
        assert cli.main(["metrics", str(f)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "NotHermitian" and err["deviation"] == pytest.approx(0.1)

    def test_wrong_basis(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text(json.dumps({"basis": ["VV", "VH", "HV", "HH"], "re": (np.eye(4) / 4).tolist()}))
        assert cli.main(["metrics", str(f)]) == 2


class TestSubtract:
    def test_default_fraction(self, tmp_path):
        out = tmp_path / "s.json"
        assert cli.main(["subtract", RHO3D_JSON, "-o", str(out)]) == 0
        d = load(out)
        assert d["background_fraction"] == 0.49
        assert np.allclose(matrix(d), (RHO3D - 0.1225 * np.eye(4)) / 0.51, atol=1e-12)

    def test_nonphysical(self, capsys):
        assert cli.main(["subtract", RHO3D_JSON, "--fraction", "0.9"]) == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "NonPhysical" and err["min_eigenvalue"] < 0


class TestCorrelation:
    def test_csv(self, tmp_path):
        out = tmp_path / "c.csv"
        assert cli.main(["correlation", RHO3D_JSON, "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "theta_rad,degree_of_correlation"
        rows = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
        assert rows.shape == (181, 2)
        assert rows[0, 0] == 0.0 and rows[-1, 0] == pytest.approx(np.pi)
        assert rows[90, 1] == pytest.approx((0.3047 - 0.1953) / 0.5, abs=1e-12)


class TestSynthPipeline:
    def test_synth_then_pipeline(self, tmp_path):
        c = tmp_path / "counts.json"
        args = ["synth", RHO3D_JSON, "--pairs", "1e5", "--accidental-level", "25000", "--seed", "0", "-o", str(c)]
        assert cli.main(args) == 0
        assert len(counts.counts_from_dict(load(c))) == 16
        for conv in ("pairwise", "complete"):
            out = tmp_path / f"{conv}.json"
            assert cli.main(["pipeline", str(c), "--normalization", conv, "-o", str(out)]) == 0
            d = load(out)
            assert d["normalization"] == conv
            assert np.max(np.abs(matrix(d["density_matrix"]) - RHO3D)) < 0.01
            assert d["metrics"]["tangle"] == pytest.approx(0.0, abs=0.01)

    def test_pipeline_default_complete(self, tmp_path):
        c = tmp_path / "counts.json"
        cli.main(["synth", RHO3D_JSON, "--pairs", "1e4", "-o", str(c)])
        out = tmp_path / "p.json"
        assert cli.main(["pipeline", str(c), "-o", str(out)]) == 0
        assert load(out)["normalization"] == "complete"

    def test_zero_counts(self, tmp_path, capsys):
        c = tmp_path / "counts.json"
        c.write_text(json.dumps({"records": [{"setting": "HH", "coincidences": 0, "accidental_total": 10, "peaks": 4}]}))
        assert cli.main(["pipeline", str(c)]) == 3
        assert json.loads(capsys.readouterr().err)["error"] == "ZeroCoincidences"


class TestMc:
    def test_small_ensemble(self, tmp_path):
        out = tmp_path / "mc.json"
        assert cli.main(["mc", TABLE1, "--samples", "20", "--seed", "3", "-o", str(out)]) == 0
        d = load(out)
        assert d["size"] == 20 and d["seed"] == 3 and d["rejected"] == 0
        names = {s["metric"]: s for s in d["stats"]}
        assert names["dop_photon2"]["point"] == pytest.approx(0.045, abs=0.002)

    def test_background_flag(self, tmp_path):
        out = tmp_path / "mc.json"
        assert cli.main(["mc", TABLE1, "--samples", "20", "--background", "-o", str(out)]) == 0
        d = load(out)
        assert d["background_fraction"] == 0.49
        t = next(s for s in d["stats"] if s["metric"] == "tangle")
        assert t["point"] == pytest.approx(0.028, abs=0.005)

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for f in (a, b):
            assert cli.main(["mc", TABLE1, "--samples", "15", "--background", "0.3", "--seed", "8", "-o", str(f)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_workers_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        cli.main(["mc", TABLE1, "--samples", "12", "--workers", "1", "-o", str(a)])
        cli.main(["mc", TABLE1, "--samples", "12", "--workers", "2", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestFit:
    def make(self, tmp_path):
        x = np.linspace(0, np.pi, 10)
        p = [fitstats.DataPoint(t, 0.222 + 0.01 * np.cos(2 * t), 0.028) for t in x]
        f = tmp_path / "pts.csv"
        fitstats.write_points_csv(f, p)
        return f

    def test_constant_reference(self, tmp_path):
        out = tmp_path / "fit.json"
        assert cli.main(["fit", str(self.make(tmp_path)), "--reference", "0.5", "-o", str(out)]) == 0
        d = load(out)
        assert d["model"] == "constant"
        assert d["sigma_distance"] == pytest.approx(abs(0.5 - d["params"]["a"]) / d["param_sigmas"]["a"])

    def test_sinusoid(self, tmp_path):
        out = tmp_path / "fit.json"
        assert cli.main(["fit", str(self.make(tmp_path)), "--model", "sinusoid", "--period", str(np.pi), "-o", str(out)]) == 0
        d = load(out)
        assert d["range"] == pytest.approx([0.212, 0.232], abs=1e-9)

    def test_sinusoid_needs_period(self, tmp_path):
        assert cli.main(["fit", str(self.make(tmp_path)), "--model", "sinusoid"]) == 2


class TestParser:
    def test_defaults(self):
        p = cli.build_parser()
        a = p.parse_args(["mc", "x"])
        assert (a.samples, a.seed, a.background) == (5000, 0, 0.0)
        assert p.parse_args(["mc", "x", "--background"]).background == 0.49
        assert p.parse_args(["subtract", "x"]).fraction == 0.49
        assert p.parse_args(["metrics", "x"]).dop_threshold == 0.01
        assert p.parse_args(["reproduce-paper"]).seed == 1

    def test_help_mentions_defaults(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["mc", "--help"])
        out = capsys.readouterr().out
        assert "5000" in out and "0.49" in out
