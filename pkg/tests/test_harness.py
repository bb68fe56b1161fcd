"""Config handling, datum library, experiment driver, CLI, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from nlslab.core import GridDescriptor, l2_norm
from nlslab.errors import ConfigError, NlslabError
from nlslab.harness import (
    DEFAULTS,
    InitialDatumSpec,
    load_config,
    make_datum,
    run,
)
from nlslab.io import read_snapshot, write_snapshot
from nlslab.reports import strip_timing


@pytest.fixture
def grid():
    return GridDescriptor.centered((1024,), (0.04,))


class TestMakeDatum:
    def test_gaussian_samples(self, grid):
        f = make_datum(InitialDatumSpec("gaussian", amplitude=1.0, width=1.0), grid)
        x = grid.axis_coords(0)
        assert np.max(np.abs(f.values - np.exp(-0.5 * x**2))) < 1e-14

    def test_sech_norm(self, grid):
        f = make_datum(InitialDatumSpec("sech", amplitude=0.5), grid)
        assert abs(l2_norm(f) ** 2 - 0.5) < 1e-6

    def test_normalize(self, grid):
        f = make_datum(
            InitialDatumSpec("gaussian", amplitude=3.0, normalize=0.25), grid
        )
        assert abs(l2_norm(f) - 0.25) < 1e-12

    def test_modulated(self, grid):
        f = make_datum(
            InitialDatumSpec("modulated_gaussian", amplitude=1.0, wavenumber=3.0),
            grid,
        )
        x = grid.axis_coords(0)
        expected = np.exp(-0.5 * x**2) * np.exp(3j * x)
        assert np.max(np.abs(f.values - expected)) < 1e-14

    def test_unresolved_rejected(self, grid):
        k_nyq = np.pi / grid.spacings[0]
        with pytest.raises(NlslabError):
            make_datum(InitialDatumSpec("gaussian", wavenumber=0.98 * k_nyq), grid)

    def test_file_round_trip(self, grid, tmp_path):
        f = make_datum(InitialDatumSpec("gaussian", amplitude=0.7), grid)
        p = tmp_path / "datum.nlsf"
        write_snapshot(p, f)
        back = make_datum(InitialDatumSpec("file", path=str(p)), grid)
        assert np.array_equal(back.values, f.values)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            InitialDatumSpec("vortex")


class TestConfigHandling:
    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            run("warp_drive")

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            run("solve", {"cooling": {}})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            run("solve", {"evolve": {"dz": 0.1}})

    def test_defaults_echoed(self, tmp_path):
        rep = run(
            "solve",
            {"evolve": {"t1": 0.05}, "equation": {"mu": 0.0}},
            out_dir=tmp_path,
        )
        assert rep.params["config"]["evolve"]["t1"] == 0.05
        assert rep.params["config"]["evolve"]["dt"] == DEFAULTS["solve"]["evolve"]["dt"]
        data = json.loads((tmp_path / "solve_report.json").read_text())
        assert data["params"]["config"]["equation"]["mu"] == 0.0

    def test_bad_json_config(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)


class TestSolveExperiment:
    def test_free_solve_passes(self, tmp_path):
        rep = run(
            "solve",
            {"equation": {"mu": 0.0}, "evolve": {"t1": 0.2}},
            out_dir=tmp_path,
        )
        assert rep.verdict == "pass"
        names = [r.name for r in rep.residuals]
        assert "free_propagation_exact" in names

    def test_snapshots_written(self, tmp_path):
        run(
            "solve",
            {"evolve": {"t1": 0.05}, "output": {"snapshots": True}},
            out_dir=tmp_path,
        )
        f = read_snapshot(tmp_path / "solve_final.nlsf")
        assert f.grid.counts == (1024,)


class TestDeterminism:
    def test_reports_byte_identical_modulo_timing(self, tmp_path):
        cfg = {"evolve": {"t1": 0.1}}
        a = run("solve", cfg, out_dir=tmp_path / "a").to_json()
        b = run("solve", cfg, out_dir=tmp_path / "b").to_json()
        assert strip_timing(a) == strip_timing(b)
        ja = (tmp_path / "a" / "solve_report.json").read_text()
        jb = (tmp_path / "b" / "solve_report.json").read_text()
        assert strip_timing(ja) == strip_timing(jb)

    def test_parallel_matches_sequential(self, tmp_path):
        cfg = {"quadrature": {"t_max": 400.0, "panels": 24}}
        seq = run("corollary2", cfg, out_dir=tmp_path / "seq", parallel=False)
        par = run("corollary2", cfg, out_dir=tmp_path / "par", parallel=True)
        for rs, rp in zip(seq.residuals, par.residuals):
            if rs.value == 0.0:
                assert rp.value == 0.0
            else:
                assert abs(rs.value - rp.value) <= 1e-13 * abs(rs.value)


class TestCli:
    def _run(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "nlslab.cli", *args],
            capture_output=True,
            text=True,
        )

    def test_pass_run_exit_zero(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"evolve": {"t1": 0.05}}))
        proc = self._run("solve", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert proc.returncode == 0, proc.stderr
        assert "verdict: pass" in proc.stdout
        assert (tmp_path / "o" / "solve_report.json").exists()

    def test_config_error_exit_two(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"no_such_section": {}}))
        proc = self._run("solve", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert proc.returncode == 2
        assert "config error" in proc.stderr

    def test_numerical_failure_exit_one(self, tmp_path):
        # an unresolvable datum trips the health guard -> exit 1
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"datum": {"wavenumber": 70.0}}))
        proc = self._run("solve", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert proc.returncode == 1

    def test_missing_experiment_exit_two(self):
        proc = self._run()
        assert proc.returncode == 2


class TestOutputDirEnv:
    def test_env_override(self, monkeypatch, tmp_path):
        from nlslab.harness import default_output_dir
        monkeypatch.setenv("NLSLAB_OUT", str(tmp_path / "envout"))
        assert default_output_dir() == str(tmp_path / "envout")

    def test_snapshot_stride(self, tmp_path):
        run(
            "solve",
            {"evolve": {"t1": 0.01}, "output": {"snapshot_stride": 5}},
            out_dir=tmp_path,
        )
        assert (tmp_path / "solve_step000000.nlsf").exists()
        assert (tmp_path / "solve_step000005.nlsf").exists()


class TestWaveOpExperiment:
    def test_round_trip_report(self, tmp_path):
        rep = run("wave_op", out_dir=tmp_path)
        assert rep.verdict == "pass"
        assert (tmp_path / "wave_op_forward_plus.csv").exists()


class TestDnlsGaugeExperiment:
    def test_light_run_passes(self, tmp_path):
        rep = run(
            "dnls_gauge",
            {"evolve": {"t1": 0.2, "checkpoints": [0.1, 0.2], "dt": 5e-4}},
            out_dir=tmp_path,
        )
        assert rep.verdict == "pass"
