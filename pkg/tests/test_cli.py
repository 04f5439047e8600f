import csv
import json

import numpy as np
import pytest

from spiked_rmt.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main, run_verify_suite
from spiked_rmt.laws import f1
from spiked_rmt.sampler import load_batch


def write_ini(path, text):
    path.write_text(text.strip() + "\n", encoding="utf-8")
    return str(path)


def read_law(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["T", "value"]
    return np.array(rows[1:], dtype=float)


class TestPhase:
    def test_gaussian(self, tmp_path):
        assert main(["phase", "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "phase.json").read_text())
        assert rep["a_c"] == pytest.approx(1.0, abs=1e-8)
        assert rep["right_endpoint"] == pytest.approx(2.0, abs=1e-10)
        assert rep["beta"] == pytest.approx(1.0, abs=1e-6)
        assert rep["is_continuous_transition"] is True
        row = next(r for r in rep["x0_table"] if r["a"] == 2.0)
        assert row["x0"] == pytest.approx(2.5, abs=1e-8)

    def test_quartic_one_cut(self, tmp_path):
        ini = write_ini(tmp_path / "q.ini", "[potential]\nname = quartic")
        assert main(["phase", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "phase.json").read_text())
        assert rep["left_endpoint"] == pytest.approx(-rep["right_endpoint"])
        assert rep["a_c"] == pytest.approx(0.5 * rep["right_endpoint"] ** 3, rel=1e-8)

    def test_malformed_config(self, tmp_path):
        ini = write_ini(tmp_path / "bad.ini", "[potential\nname = quartic")
        assert main(["phase", "-c", ini, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_potential(self, tmp_path):
        ini = write_ini(tmp_path / "p.ini", "[potential]\nname = sextic")
        assert main(["phase", "-c", ini]) == EXIT_CONFIG

    def test_bad_number(self, tmp_path):
        ini = write_ini(tmp_path / "p.ini", "[potential]\ncoefficients = 0, 0, half")
        assert main(["phase", "-c", ini]) == EXIT_CONFIG

    def test_unknown_command(self):
        assert main(["plot"]) == EXIT_CONFIG


class TestLaw:
    def test_tw_rows_monotone(self, tmp_path):
        assert main(["law", "--law", "tw", "--grid=-6,4,0.1", "--out", str(tmp_path)]) == EXIT_OK
        data = read_law(tmp_path / "tw.csv")
        assert data.shape == (101, 2)
        assert np.all(np.diff(data[:, 1]) > 0)

    def test_gk_matches_normal(self, tmp_path):
        ini = write_ini(tmp_path / "l.ini", "[law]\nname = gk, normal\nalphas = 0\ngrid = -3, 3, 0.5")
        assert main(["law", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        gk, normal = read_law(tmp_path / "gk.csv"), read_law(tmp_path / "normal.csv")
        np.testing.assert_allclose(gk[:, 1], normal[:, 1], atol=1e-8)

    def test_fk_first_matches_f1(self, tmp_path):
        ini = write_ini(tmp_path / "l.ini", "[law]\nname = fk, f1\nalphas = 0.5\ngrid = -3, 1, 1")
        assert main(["law", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        fk, f1_col = read_law(tmp_path / "fk.csv"), read_law(tmp_path / "f1.csv")
        np.testing.assert_allclose(fk[:, 1], f1_col[:, 1], atol=1e-8)
        assert f1_col[1, 1] == pytest.approx(np.real(f1(-2.0, 0.5)), abs=1e-12)

    def test_unknown_law(self, tmp_path):
        assert main(["law", "--law", "beta", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_grid(self, tmp_path):
        assert main(["law", "--grid=4,-6,0.1", "--out", str(tmp_path)]) == EXIT_CONFIG


class TestVerify:
    def test_default_suite(self, tmp_path):
        assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "verify.json").read_text())
        assert rep["pass"] and rep["worst"] < 1e-6

    def test_s_grid(self, tmp_path):
        ini = write_ini(tmp_path / "v.ini", "[verify]\nspikes = 0.5, 0.9\nd = 3\nE = 1.5\ns = 1, 0.6, 1+0.2i")
        assert main(["verify", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        assert len(json.loads((tmp_path / "verify.json").read_text())["cases"]) == 3

    def test_confluent_spikes_rejected(self, tmp_path):
        ini = write_ini(tmp_path / "v.ini", "[verify]\nspikes = 0.5, 0.5")
        assert main(["verify", "-c", ini, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_tolerance_failure(self, tmp_path):
        ini = write_ini(tmp_path / "v.ini", "[verify]\nspikes = 0.5, 0.9\ntol = 0")
        assert main(["verify", "-c", ini, "--out", str(tmp_path)]) == EXIT_FAIL

    def test_rows_carry_brute_force(self):
        rows = run_verify_suite(brute=True)
        assert all("brute_force_residual" in r for r in rows if r["d"] <= 3)


SUPERCRITICAL = """
[spikes]
regime = supercritical-separated
values = 2
[run]
n = 100
trials = 400
seed = 11
[compare]
k = 1
"""


class TestSampleCompare:
    def test_sample_files(self, tmp_path):
        ini = write_ini(tmp_path / "s.ini", SUPERCRITICAL + "\n[output]\ncsv = yes")
        assert main(["sample", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        batch = load_batch(tmp_path / "samples.bin")
        assert batch.eigenvalues.shape == (400, 100)
        assert (tmp_path / "samples.csv").exists()

    def test_seeded_reproducible(self, tmp_path):
        ini = write_ini(tmp_path / "s.ini", SUPERCRITICAL)
        for sub in ("a", "b"):
            assert main(["compare", "-c", ini, "--out", str(tmp_path / sub)]) == EXIT_OK
        a = (tmp_path / "a" / "compare_k1.csv").read_bytes()
        assert a == (tmp_path / "b" / "compare_k1.csv").read_bytes()

    def test_supercritical_ks(self, tmp_path):
        ini = write_ini(tmp_path / "s.ini", SUPERCRITICAL + "tol = 0.2")
        assert main(["compare", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "compare.json").read_text())
        assert rep["pass"] and rep["statistics"][0]["ks"] < 0.2

    def test_tolerance_exit_code(self, tmp_path):
        ini = write_ini(tmp_path / "s.ini", SUPERCRITICAL + "tol = 0.001")
        assert main(["compare", "-c", ini, "--out", str(tmp_path)]) == EXIT_FAIL

    def test_clustered_reports_gk(self, tmp_path):
        text = """
[spikes]
regime = supercritical-clustered
a = 2
alphas = 0.5, -0.5
[run]
n = 100
trials = 300
seed = 2
[compare]
k = 1
"""
        ini = write_ini(tmp_path / "c.ini", text)
        assert main(["compare", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "compare.json").read_text())
        assert len(rep["spikes"]) == 2
        assert "spiked GUE" in rep["statistics"][0]["law"]

    def test_compare_needs_regime(self, tmp_path):
        ini = write_ini(tmp_path / "c.ini", "[run]\nn = 10")
        assert main(["compare", "-c", ini, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_incomplete_regime(self, tmp_path):
        ini = write_ini(tmp_path / "c.ini", "[spikes]\nregime = supercritical-clustered\na = 2")
        assert main(["compare", "-c", ini, "--out", str(tmp_path)]) == EXIT_CONFIG


class TestTransition:
    def test_secondary_report(self, tmp_path):
        text = """
[potential]
coefficients = 0, 0, 0.5, -0.06, 0.0025
[spikes]
regime = secondary-critical
a = 1.49155
alphas = 0.3, -0.2
m = 1
[run]
n = 500
"""
        ini = write_ini(tmp_path / "t.ini", text)
        assert main(["transition", "-c", ini, "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "transition.json").read_text())
        assert rep["a_star"] == pytest.approx(1.4915459461682, abs=1e-9)
        assert 0 < rep["p"] < 1
        assert len(rep["spikes"]) == 2

    def test_wrong_regime(self, tmp_path):
        ini = write_ini(tmp_path / "t.ini", "[spikes]\nregime = supercritical-separated\nvalues = 2")
        assert main(["transition", "-c", ini, "--out", str(tmp_path)]) == EXIT_CONFIG
