import json
import math
import subprocess
import sys

import numpy as np
import pytest

import ldpopt as L
from ldpopt.cli import main


class TestMechCommand:
    def test_rr_json(self, tmp_path, capsys):
        out = tmp_path / "rr.json"
        code = main(["mech", "rr", "--k", "3", "--eps", str(math.log(2)),
                     "--out", str(out)])
        assert code == 0
        rec = L.mechanism_from_json(out.read_text())
        np.testing.assert_allclose(np.diag(rec.mechanism.rows), 0.5, atol=1e-12)
        assert rec.eps_claimed == pytest.approx(math.log(2))

    def test_binary_to_stdout(self, capsys):
        code = main(["mech", "binary", "--eps", "1.0",
                     "--p0", "0.7,0.3", "--p1", "0.3,0.7"])
        assert code == 0
        rec = L.mechanism_from_json(capsys.readouterr().out)
        assert rec.mechanism.k == 2 and rec.mechanism.l == 2

    def test_quaternary(self, capsys):
        code = main(["mech", "quaternary", "--eps", str(math.log(3)),
                     "--delta", "0.2"])
        assert code == 0
        rec = L.mechanism_from_json(capsys.readouterr().out)
        np.testing.assert_allclose(rec.mechanism.rows,
                                   [[0.2, 0, 0.2, 0.6], [0, 0.2, 0.6, 0.2]],
                                   atol=1e-12)
        assert rec.delta_claimed == pytest.approx(0.2)

    def test_validation_error_exit_code(self, capsys):
        assert main(["mech", "rr", "--k", "1", "--eps", "1.0"]) == 1


class TestOptCommand:
    def test_tv_round_trip_is_staircase(self, tmp_path, capsys):
        out = tmp_path / "opt.json"
        code = main(["opt", "--utility", "tv", "--eps", "1.0",
                     "--p0", "0.5,0.2,0.3", "--p1", "0.1,0.6,0.3",
                     "--out", str(out)])
        assert code == 0
        printed = float(capsys.readouterr().out.strip())
        p0 = L.make_distribution([0.5, 0.2, 0.3])
        p1 = L.make_distribution([0.1, 0.6, 0.3])
        assert printed == pytest.approx(L.binary_tv_closed(p0, p1, 1.0), abs=1e-9)
        rec = L.mechanism_from_json(out.read_text())
        assert L.is_staircase(rec.mechanism, 1.0)
        assert L.is_locally_private(rec.mechanism, 1.0)

    def test_mi(self, capsys):
        code = main(["opt", "--utility", "mi", "--eps", "0.5", "--p", "0.2,0.3,0.5"])
        assert code == 0
        value = float(capsys.readouterr().out.strip())
        assert value > 0


class TestCheckCommand:
    def test_valid_mechanism_passes(self, tmp_path, capsys):
        path = tmp_path / "rr.json"
        Q = L.randomized_response(3, 1.0)
        path.write_text(L.mechanism_to_json(Q, eps_claimed=1.0, delta_claimed=0.0))
        assert main(["check", str(path)]) == 0
        assert "is_locally_private(eps=1): True" in capsys.readouterr().out

    def test_false_claim_fails(self, tmp_path, capsys):
        path = tmp_path / "rr.json"
        Q = L.randomized_response(3, 2.0)
        path.write_text(L.mechanism_to_json(Q, eps_claimed=1.0, delta_claimed=0.0))
        assert main(["check", str(path)]) == 1

    def test_malformed_json_has_context(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"k": 2, "l": 2,
                                    "rows": [[0.9, 0.2], [0.5, 0.5]]}))
        assert main(["check", str(path)]) == 1
        assert "row 0" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, capsys):
        assert main(["check", "/nonexistent/mech.json"]) == 2

    def test_bound_reports_printed(self, tmp_path, capsys):
        path = tmp_path / "bin.json"
        p0 = L.make_distribution([0.7, 0.3])
        p1 = L.make_distribution([0.3, 0.7])
        Q = L.binary_ht(p0, p1, 0.5)
        path.write_text(L.mechanism_to_json(Q, eps_claimed=0.5, delta_claimed=0.0))
        assert main(["check", str(path), "--p0", "0.7,0.3", "--p1", "0.3,0.7"]) == 0
        out = capsys.readouterr().out
        assert "pinsker" in out and "duchi" in out


class TestRegionCommand:
    def test_eps_delta_csv(self, capsys):
        code = main(["region", "--eps", str(math.log(3)), "--delta", "0"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "p_md,p_fa"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        assert (0.25, 0.25) in rows

    def test_mechanism_region(self, tmp_path, capsys):
        path = tmp_path / "quat.json"
        path.write_text(L.mechanism_to_json(L.quaternary(1.0, 0.1), 1.0, 0.1))
        code = main(["region", "--mech", str(path)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        want = L.region_eps_delta(1.0, 0.1).vertices
        got = [tuple(map(float, line.split(","))) for line in lines[1:]]
        np.testing.assert_allclose(got, want, atol=1e-9)


class TestSweepCommand:
    CFG = dict(seed=7, k=3, num_instances=3, eps_grid=(0.0, 1.0), utility="kl")

    def test_deterministic_csv(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            code = main(["sweep", "--seed", "7", "--k", "3",
                         "--num-instances", "3", "--eps-grid", "0.0,1.0",
                         "--utility", "kl", "--out", str(out)])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_rows_and_ratios(self):
        rows = L.run_sweep(L.SweepConfig(**self.CFG))
        assert all(0.0 <= r.ratio <= 1.0 + 1e-9 for r in rows)
        eps0 = [r for r in rows if r.eps == 0.0]
        assert all(abs(r.utility_value) < 1e-12 for r in eps0)
        header = L.sweep_csv(rows).splitlines()[0]
        assert header == "instance_id,eps,mechanism,utility_value,opt_value,ratio"

    def test_mixed_is_max_of_binary_and_rr(self):
        rows = L.run_sweep(L.SweepConfig(**self.CFG))
        index = {(r.instance_id, r.eps, r.mechanism): r.utility_value for r in rows}
        for (inst, eps, mech), v in index.items():
            if mech == "mixed":
                assert v == pytest.approx(max(index[(inst, eps, "binary")],
                                              index[(inst, eps, "rr")]))

    def test_ratio_limits_per_instance(self):
        cfg = L.SweepConfig(seed=3, k=3, num_instances=5,
                            eps_grid=(0.01, 10.0), utility="kl",
                            mechanisms=("binary", "rr", "optimal"))
        rows = L.run_sweep(cfg)
        for r in rows:
            if r.mechanism == "binary" and r.eps == 0.01:
                assert r.ratio >= 1.0 - 1e-6
            if r.mechanism == "rr" and r.eps == 10.0:
                assert r.ratio >= 1.0 - 1e-6

    def test_config_file(self, tmp_path, capsys):
        cfg = dict(self.CFG)
        cfg["eps_grid"] = list(cfg["eps_grid"])
        cfg["out_path"] = str(tmp_path / "c.csv")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["sweep", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "c.csv").exists()
        assert "min mixed-strategy ratio" in capsys.readouterr().out

    def test_invalid_config(self, capsys):
        assert main(["sweep", "--k", "3", "--eps-grid", "",
                     "--utility", "kl"]) == 1

    def test_k_cap(self, capsys):
        assert main(["sweep", "--k", "13", "--eps-grid", "1.0",
                     "--utility", "kl"]) == 1


class TestExponentCommand:
    def test_identical_priors_zero_exponent(self, capsys):
        code = main(["exponent", "--p0", "0.5,0.5", "--p1", "0.5,0.5",
                     "--eps", "1.0", "--n", "1000", "--trials", "50",
                     "--seed", "1"])
        assert code == 0
        out = capsys.readouterr().out
        exponent = float(out.split("exponent_estimate=")[1].splitlines()[0])
        assert abs(exponent) < 1e-6

    def test_eps0_mechanism_zero_exponent(self):
        P0 = L.make_distribution([0.8, 0.2])
        P1 = L.make_distribution([0.2, 0.8])
        Q = L.randomized_response(2, 0.0)
        r = L.run_exponent_sim(P0, P1, Q, n=1000, trials=50, alpha_star=0.05, seed=2)
        assert abs(r.exponent) < 1e-9
        assert r.kl_rate == pytest.approx(0.0, abs=1e-12)


class TestConsoleEntryPoint:
    def test_installed_script(self):
        proc = subprocess.run([sys.executable, "-m", "ldpopt.cli", "mech", "rr",
                               "--k", "2", "--eps", "0.5"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        rec = L.mechanism_from_json(proc.stdout)
        assert rec.mechanism.k == 2
