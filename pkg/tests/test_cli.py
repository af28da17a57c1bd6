import json
import math
import subprocess
import sys

import pytest

from kghopf.cli import curve_rows
from kghopf.config import load_config
from kghopf.errors import ConfigError


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "kghopf.cli", *args],
                          capture_output=True, text=True)


def write_config(path, c, e, extra=""):
    path.write_text(
        f"[potential]\nname = sine_gordon\n\n"
        f"[wave]\nc = {c}\nE = {e}\n\n{extra}")
    return str(path)


@pytest.fixture(scope="module")
def fig1_analysis(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("fig1cli")
    cfg = tmp / "fig1.ini"
    write_config(cfg, 1.45, 6.0)
    out = tmp / "out"
    res = run_cli("analyze", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    report = json.loads((out / "analysis.json").read_text())
    return tmp, cfg, out, report


class TestConfig:
    def test_defaults_resolve(self, tmp_path):
        cfg = load_config(write_config(tmp_path / "c.ini", 1.45, 6.0))
        assert cfg.c == 1.45 and cfg.e == 6.0
        assert cfg.nu_min is None
        assert cfg.resolve_nu_min(2.0) == pytest.approx(-400.0)

    def test_auto_keys(self, tmp_path):
        p = tmp_path / "c.ini"
        write_config(p, 1.45, 6.0, "[hill]\nnu_min = auto\n")
        assert load_config(str(p)).nu_min is None

    def test_bad_speed_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path / "c.ini", 1.0, 6.0))

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/kghopf.ini")

    def test_polynomial_coefficients(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[potential]\nname = polynomial\n"
                     "coefficients = 0 0 0.5\n[wave]\nc = 1.45\nE = 1.0\n")
        cfg = load_config(str(p))
        pot = cfg.build_potential()
        assert pot.eval(2.0)[0] == pytest.approx(2.0)


class TestAnalyze:
    def test_fig1_report(self, fig1_analysis):
        _, _, _, report = fig1_analysis
        assert report["wave"]["regime"] == "rotational"
        assert report["wave"]["T"] == pytest.approx(2.1022624989578231)
        assert report["indices"]["gamma_M"] == 1
        assert report["indices"]["gamma_P"] == 1
        assert len(report["hh_points"]) == 2
        assert all(c["consistent"] for c in report["corollaries"])
        # every HH row references a band row
        n_bands = len(report["bands"])
        for p in report["hh_points"]:
            assert p["band_index"] is not None
            assert 0 <= p["band_index"] < n_bands

    def test_fig2_report(self, tmp_path):
        cfg = write_config(tmp_path / "fig2.ini", 1.4, 1.5)
        out = tmp_path / "out"
        res = run_cli("analyze", "--config", cfg, "--out", str(out))
        assert res.returncode == 0, res.stderr
        report = json.loads((out / "analysis.json").read_text())
        assert report["wave"]["regime"] == "librational"
        assert len(report["hh_points"]) == 1

    def test_separatrix_exits_1(self, tmp_path):
        cfg = write_config(tmp_path / "sep.ini", 1.45, 2.0)
        res = run_cli("analyze", "--config", cfg, "--out", str(tmp_path))
        assert res.returncode == 1
        assert "separatrix" in res.stderr

    def test_bad_config_exits_1(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[wave]\nc = 1.0\nE = 6.0\n")
        res = run_cli("analyze", "--config", str(p), "--out", str(tmp_path))
        assert res.returncode == 1

    def test_csv_format_emits_tables(self, tmp_path):
        cfg = write_config(tmp_path / "f.ini", 1.45, 6.0)
        out = tmp_path / "out"
        res = run_cli("analyze", "--config", cfg, "--out", str(out),
                      "--format", "csv")
        assert res.returncode == 0
        assert (out / "bands.csv").exists()
        hh = (out / "hh_points.csv").read_text().splitlines()
        assert hh[0] == ("nu_star,beta,band_index,residual,double_point,"
                         "delta_plus,delta_minus")
        assert len(hh) == 3


class TestCurve:
    def test_zero_potential_closed_form(self, coef_zero_pi):
        c, T = 2.0, math.pi
        rows = curve_rows(coef_zero_pi, c, -30.0, 400)
        n_checked = 0
        for beta, nu, f, kind in rows:
            assert beta == pytest.approx(abs(c * c - 1) * math.sqrt(-nu),
                                         abs=1e-12)
            assert kind in ("finite", "+inf", "-inf", "regularized")
            # the identity F = c^2 nu holds to 1e-9 away from the double
            # points, where the finite branch is a 0/0 cancellation
            if kind == "finite" and nu < 0 \
                    and abs(math.sin(T * math.sqrt(-nu))) > 0.3:
                assert abs(f - c * c * nu) <= 1e-9 * (1 + abs(c * c * nu))
                n_checked += 1
        assert n_checked > 250

    def test_roots_match_analysis(self, fig1_analysis, fig1):
        tmp, cfg, out, report = fig1_analysis
        res = run_cli("curve", "--config", str(cfg), "--out", str(out))
        assert res.returncode == 0
        lines = (out / "curve.csv").read_text().splitlines()
        assert lines[0] == "beta,nu,F,kind"
        rows = [ln.split(",") for ln in lines[1:]]
        finite = [(float(b), float(nu), float(f)) for b, nu, f, k in rows
                  if k == "finite"]
        # sign changes of F - nu between consecutive finite rows bracket the
        # HH betas from the analysis
        step = finite[1][0] - finite[0][0]
        roots = []
        for (b1, n1, f1), (b2, n2, f2) in zip(finite[:-1], finite[1:]):
            g1, g2 = f1 - n1, f2 - n2
            # skip the modulational neighborhood of the origin, where
            # F - nu -> 0 and its computed sign is noise
            if b1 <= 3 * step:
                continue
            if g1 * g2 < 0 and abs(b2 - b1) < 0.1:
                roots.append(0.5 * (b1 + b2))
        hh_betas = sorted(p["beta"] for p in report["hh_points"])
        assert len(roots) == len(hh_betas)
        for r, b in zip(sorted(roots), hh_betas):
            assert abs(r - b) <= step

        # zeros of the F column occur exactly at band-endpoint betas: F < 0
        # inside bands, F > 0 in open gaps, and it passes through 0 at each
        # simple edge
        csq = abs(fig1.c ** 2 - 1.0)
        edge_betas = sorted(csq * math.sqrt(-e)
                            for lo, hi in fig1.bands.gaps for e in (lo, hi))
        f_zeros = []
        for (b1, n1, f1), (b2, n2, f2) in zip(finite[:-1], finite[1:]):
            if b1 > 3 * step and f1 * f2 < 0 and abs(b2 - b1) < 0.1:
                f_zeros.append(0.5 * (b1 + b2))
        assert len(f_zeros) == len(edge_betas)
        for z, e in zip(sorted(f_zeros), edge_betas):
            assert abs(z - e) <= step

    def test_infinite_rows_have_empty_f(self, tmp_path):
        cfg = write_config(tmp_path / "f.ini", 1.45, 6.0)
        out = tmp_path / "out"
        res = run_cli("curve", "--config", cfg, "--out", str(out))
        assert res.returncode == 0
        for ln in (out / "curve.csv").read_text().splitlines()[1:]:
            b, nu, f, kind = ln.split(",")
            if kind in ("+inf", "-inf"):
                assert f == ""
            else:
                float(f)


class TestSpectrumCmd:
    def test_small_grid_outputs(self, tmp_path):
        cfg = write_config(tmp_path / "f.ini", 1.45, 6.0,
                           "[spectrum]\nnx = 64\nny = 64\nim_max = 3.0\n")
        out = tmp_path / "out"
        res = run_cli("spectrum", "--config", cfg, "--out", str(out))
        assert res.returncode == 0, res.stderr
        bands = (out / "axis_bands.csv").read_text().splitlines()
        assert bands[0] == "beta_lo,beta_hi"
        assert len(bands) > 1
        curves = json.loads((out / "curves.json").read_text())
        assert isinstance(curves, list)
        for seg in curves:
            for pt in seg:
                assert len(pt) == 2

    def test_empty_window(self, tmp_path):
        cfg = write_config(
            tmp_path / "f.ini", 1.45, 6.0,
            "[spectrum]\nnx = 64\nny = 64\n"
            "re_min = 3.0\nre_max = 4.0\nim_min = 0.0\nim_max = 1.0\n")
        out = tmp_path / "out"
        res = run_cli("spectrum", "--config", cfg, "--out", str(out))
        assert res.returncode == 0, res.stderr
        assert json.loads((out / "curves.json").read_text()) == []
        assert (out / "axis_bands.csv").read_text().splitlines() == [
            "beta_lo,beta_hi"]


class TestSelftest:
    def test_passes_and_is_deterministic(self):
        r1 = run_cli("selftest")
        r2 = run_cli("selftest")
        assert r1.returncode == 0
        assert r1.stdout == r2.stdout
        assert r1.stdout.count("PASS") == 5
        assert "FAIL" not in r1.stdout

    def test_injected_failure(self):
        res = run_cli("selftest", "--inject-failure", "Abel determinant")
        assert res.returncode == 3
        assert sum("FAIL" in ln for ln in res.stdout.splitlines()) == 1

    def test_unknown_injection_name(self):
        from kghopf.cli import _selftest_rows
        with pytest.raises(ConfigError):
            _selftest_rows("nope")


class TestConsistencyExitCode:
    def test_analyze_exits_2_when_corollary_unmatched(self, tmp_path,
                                                      monkeypatch):
        # force an empty point list so the fired C3/C4 predicates go
        # unmatched: the fig-1 configuration must then exit 2
        import kghopf.cli as cli_mod
        from kghopf.config import default_config

        monkeypatch.setattr(cli_mod, "scan_hh_points",
                            lambda *a, **kw: [])
        cfg = default_config()
        cfg.c, cfg.e = 1.45, 6.0
        assert cli_mod.cmd_analyze(cfg, str(tmp_path)) == 2


class TestDeterminism:
    def test_analyze_and_curve_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path / "f.ini", 1.4, 1.5)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("analyze", "--config", cfg, "--out",
                           str(out)).returncode == 0
            assert run_cli("curve", "--config", cfg, "--out",
                           str(out)).returncode == 0
            outs.append(out)
        a, b = outs
        assert (a / "analysis.json").read_bytes() == \
            (b / "analysis.json").read_bytes()
        assert (a / "curve.csv").read_bytes() == (b / "curve.csv").read_bytes()
