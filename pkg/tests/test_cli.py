"""End-to-end runs of the command-line surface, in process."""

import json
import math

import numpy as np
import pytest

from qndsim.cli import main
from qndsim.constants import TWO_PI
from qndsim.coupling import ModeField, PermittivityPerturbation, write_field_csv

from conftest import REF_KW


@pytest.fixture
def ref_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(REF_KW))
    return str(path)


def read_table(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest ")
    header = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:]]
    return header, rows


def column(header, rows, name, cast=float):
    idx = header.index(name)
    return [cast(r[idx]) for r in rows]


class TestRates:
    def test_csv_anchors(self, ref_config, tmp_path):
        out = tmp_path / "rates.csv"
        assert main(["rates", "--config", ref_config, "--out", str(out)]) == 0
        header, rows = read_table(out)
        assert header[0] == "n"
        assert len(rows) == 11  # n = 0..10 by default
        th = column(header, rows, "gamma_th")
        meas = column(header, rows, "gamma_meas")
        assert th[0] == 1.0  # normalization anchor
        assert all(m == 32.0 for m in meas)  # n-independent readout rate
        # thermal crossing of the measurement rate sits between n=5 and 6
        assert th[5] < 32.0 < th[6]

    def test_json_to_stdout(self, ref_config, capsys):
        assert main(["rates", "--config", ref_config, "--format", "json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["normalization"] == "gamma_th0"
        assert body["columns"][0] == "n"
        assert body["_manifest"]["sha256_16"]

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["rates", "--config", str(tmp_path / "nope.json")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestFeasibility:
    def test_pass_at_reference(self, ref_config, tmp_path):
        out = tmp_path / "feas.json"
        code = main(
            ["feasibility", "--config", ref_config, "--dominance", "5",
             "--out", str(out)]
        )
        assert code == 0
        body = json.loads(out.read_text())
        assert body["ok"] is True
        assert body["ratios"]["meas_over_thermal"] == 32.0
        assert body["sideband_margin"] == 512.0

    def test_fail_exits_two(self, tmp_path, capsys):
        cfg = dict(REF_KW, g1_hz=5e6)  # linear limit margin collapses
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        code = main(["feasibility", "--config", str(path), "--dominance", "5"])
        assert code == 2
        body = json.loads(capsys.readouterr().out)
        assert body["ok"] is False
        assert body["checks"]["linear_limit"] is False

    def test_invalid_config_exits_one(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"omega_m_hz": 2e9, "bogus_key": 1.0}))
        assert main(["feasibility", "--config", str(path)]) == 1
        assert "bogus_key" in capsys.readouterr().err


class TestEvolve:
    def test_csv_smoke(self, ref_config, tmp_path):
        out = tmp_path / "evolve.csv"
        code = main(
            ["evolve", "--config", ref_config, "--initial", "fock:1",
             "--t-final", "2e-4", "--grid", "9", "--dim", "10",
             "--out", str(out)]
        )
        assert code == 0
        header, rows = read_table(out)
        assert header[0] == "time_s"
        assert header[1] == "p0"
        assert len(rows) == 9
        # populations stay normalized along the run
        pops = [sum(float(v) for v in r[1:11]) for r in rows]
        assert all(abs(p - 1.0) < 1e-6 for p in pops)

    def test_json_diagnostics(self, ref_config, tmp_path):
        out = tmp_path / "evolve.json"
        code = main(
            ["evolve", "--config", ref_config, "--initial", "thermal:0.25",
             "--t-final", "1e-4", "--grid", "5", "--dim", "12",
             "--format", "json", "--out", str(out)]
        )
        assert code == 0
        body = json.loads(out.read_text())
        assert set(body) >= {"times_s", "populations", "diagnostics"}
        assert len(body["times_s"]) == 5

    def test_bad_initial_spec(self, ref_config, capsys):
        code = main(
            ["evolve", "--config", ref_config, "--initial", "coherent:2",
             "--t-final", "1e-4"]
        )
        assert code == 1
        assert "initial state" in capsys.readouterr().err


class TestTraject:
    def test_file_set_and_summary(self, ref_config, tmp_path, capsys):
        prefix = str(tmp_path / "run")
        code = main(
            ["traject", "--config", ref_config, "--count", "2",
             "--t-final", "0.02", "--seed", "3", "--out", prefix]
        )
        assert code == 0
        assert (tmp_path / "run_stats.json").exists()
        for i in range(2):
            assert (tmp_path / ("run_%03d_events.csv" % i)).exists()
            assert (tmp_path / ("run_%03d_staircase.csv" % i)).exists()
        assert "wrote 5 files" in capsys.readouterr().out
        stats = json.loads((tmp_path / "run_stats.json").read_text())
        assert stats["n_trajectories"] == 2
        assert stats["meta"]["sampler"] == "gillespie"

    def test_reruns_are_byte_identical(self, ref_config, tmp_path):
        for prefix in ("a", "b"):
            code = main(
                ["traject", "--config", ref_config, "--count", "1",
                 "--t-final", "0.01", "--seed", "5",
                 "--out", str(tmp_path / prefix)]
            )
            assert code == 0
        for suffix in ("_stats.json", "_000_events.csv", "_000_staircase.csv"):
            a = (tmp_path / ("a" + suffix)).read_bytes()
            b = (tmp_path / ("b" + suffix)).read_bytes()
            assert a == b, suffix

    def test_default_horizon_needs_thermal_rate(self, tmp_path, capsys):
        cfg = dict(REF_KW, nbar_th=0.0)
        path = tmp_path / "cold.json"
        path.write_text(json.dumps(cfg))
        code = main(
            ["traject", "--config", str(path), "--out", str(tmp_path / "x")]
        )
        assert code == 1
        assert "t-final" in capsys.readouterr().err


class TestSweep:
    def test_drive_ladder(self, ref_config, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--config", ref_config, "--axis", "nbar_photon",
             "--grid", "list:1,10,100", "--out", str(out)]
        )
        assert code == 0
        header, rows = read_table(out)
        ratio = column(header, rows, "gamma_meas_over_gamma_th0")
        assert ratio == [0.32, 3.2, 32.0]
        ok = column(header, rows, "ok", cast=str)
        assert ok == ["false", "false", "false"]  # default dominance is 10

    def test_g1_scaling_exponent(self, ref_config, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--config", ref_config, "--axis", "g1_hz",
             "--grid", "log:1e4:1e6:5", "--out", str(out)]
        )
        assert code == 0
        header, rows = read_table(out)
        g1 = np.array(column(header, rows, "g1_hz"))
        gamma1 = np.array(column(header, rows, "gamma_1_hz"))
        slope = np.polyfit(np.log(g1), np.log(gamma1), 1)[0]
        assert abs(slope - 2.0) < 0.01

    def test_empty_grid_emits_header_only(self, ref_config, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--config", ref_config, "--axis", "nbar_photon",
             "--grid", "list:", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2  # manifest + header
        assert lines[1].startswith("nbar_photon,")

    def test_unknown_axis(self, ref_config, capsys):
        code = main(
            ["sweep", "--config", ref_config, "--axis", "coupling_strength",
             "--grid", "list:1"]
        )
        assert code == 1
        assert "unknown sweep axis" in capsys.readouterr().err

    def test_bad_grid_spec(self, ref_config, capsys):
        code = main(
            ["sweep", "--config", ref_config, "--axis", "nbar_photon",
             "--grid", "every:1:2"]
        )
        assert code == 1
        assert "grid" in capsys.readouterr().err


class TestTwomode:
    def write_config(self, tmp_path, **extra):
        cfg = {
            "omega_0_hz": 200e12,
            "nu_hz": 10e9,
            "G1_a1_hz_per_m": 2e9,
            "G1_a2_hz_per_m": -2e9,
            "kappa_hz": 1e6,
            **extra,
        }
        path = tmp_path / "twomode.json"
        path.write_text(json.dumps(cfg))
        return str(path)

    def test_json_report(self, tmp_path):
        cfg = self.write_config(tmp_path, nbar_1=100.0)
        out = tmp_path / "tm.json"
        code = main(
            ["twomode", "--config", cfg, "--format", "json",
             "--x-zpf", "1e-15", "--out", str(out)]
        )
        assert code == 0
        body = json.loads(out.read_text())
        assert body["splitting_hz"] == pytest.approx(20e9, rel=1e-12)
        # G2' in Hz per m^2 collapses to G1_hz^2 / (2 nu_hz)
        assert body["G2_prime_hz_per_m2"] == pytest.approx(
            (2e9) ** 2 / (2 * 10e9), rel=1e-12
        )
        assert body["g2_hz"] == pytest.approx(
            (2e9 * 1e-15) ** 2 / (2 * 10e9), rel=1e-12
        )
        assert body["nbar_2"] == pytest.approx(
            (10e9 / 0.5e6) ** 2 * 100.0, rel=1e-12
        )
        assert body["mapping"]["regime"] == "strong"
        assert body["mapping"]["measurement_factor"] == 0.5

    def test_csv_branch_sweep(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "branches.csv"
        code = main(
            ["twomode", "--config", cfg, "--format", "csv",
             "--x-grid", "list:0,0.001", "--out", str(out)]
        )
        assert code == 0
        header, rows = read_table(out)
        assert header == ["x_m", "omega_plus_hz", "omega_minus_hz"]
        wp0 = float(rows[0][1])
        wm0 = float(rows[0][2])
        assert wp0 - wm0 == pytest.approx(20e9, rel=1e-9)

    def test_csv_requires_grid(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code = main(["twomode", "--config", cfg, "--format", "csv"])
        assert code == 1
        assert "x-grid" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"omega_0_hz": 1e14, "nu_hz": 1e9, "Q": 5}))
        assert main(["twomode", "--config", str(path)]) == 1
        assert "unknown config key 'Q'" in capsys.readouterr().err


class TestCoupling:
    def write_fields(self, tmp_path):
        g = np.linspace(0.0, 1.0, 201)
        eps = np.full(g.shape, 2.25)
        c = 0.02
        target = ModeField(
            grid=g, field=np.sin(math.pi * g), frequency=TWO_PI * 193.4e12,
            label="fundamental",
        )
        partner = ModeField(
            grid=g, field=np.sin(2.0 * math.pi * g), frequency=TWO_PI * 386.0e12,
            label="second",
        )
        pert = PermittivityPerturbation(epsilon=eps, depsilon_dx=c * eps)
        t_path = tmp_path / "target.csv"
        p_path = tmp_path / "partner.csv"
        write_field_csv(target, pert, str(t_path))
        write_field_csv(partner, pert, str(p_path))
        return str(t_path), str(p_path)

    def test_report_round_trip(self, tmp_path):
        t_path, p_path = self.write_fields(tmp_path)
        out = tmp_path / "coupling.json"
        code = main(
            ["coupling", "--field", t_path, "--others", p_path,
             "--x-zpf", "1e-15", "--out", str(out)]
        )
        assert code == 0
        body = json.loads(out.read_text())
        assert body["label"] == "fundamental"
        # uniform relative perturbation de/dx = c eps: G1 = -omega c / 2
        assert body["G1_hz_per_m"] == pytest.approx(
            -0.5 * 0.02 * 193.4e12, rel=1e-9
        )
        assert body["G2_self_hz_per_m2"] == pytest.approx(
            3.0 * body["G1_hz_per_m"] ** 2 / 193.4e12, rel=1e-9
        )
        assert "second" in body["G2_cross_hz_per_m2"]
        assert body["classification"] == "linear-dominant"
        assert body["g1_hz"] == pytest.approx(
            body["G1_hz_per_m"] * 1e-15, rel=1e-12
        )

    def test_self_only_when_no_partners(self, tmp_path, capsys):
        t_path, _ = self.write_fields(tmp_path)
        assert main(["coupling", "--field", t_path]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["G2_cross_hz_per_m2"] == {}
        assert body["G2_hz_per_m2"] == pytest.approx(
            body["G2_self_hz_per_m2"], rel=1e-12
        )

    def test_missing_field_file(self, tmp_path, capsys):
        code = main(["coupling", "--field", str(tmp_path / "nope.csv")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestUsageErrors:
    def test_no_command(self, capsys):
        assert main([]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_flag(self, ref_config, capsys):
        assert main(["rates", "--config", ref_config, "--frobnicate"]) == 1
        assert "error:" in capsys.readouterr().err
