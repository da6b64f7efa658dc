"""Command-line front end: config validation, exit codes, manifests, determinism."""

import json
import subprocess
import sys

import pytest

from dirichlet_nls.cli import COMMANDS, RunConfig, main


def run(tmp_path, *args):
    return main([*args, "--output", str(tmp_path)])


def manifest(tmp_path):
    return json.loads((tmp_path / "manifest.json").read_text())


def test_all_subcommands_registered():
    assert set(COMMANDS) == {
        "simulate", "lp-check", "bilinear-scan", "virial-check", "trace-check",
        "l4-scan", "logsobolev-check", "global-run",
    }


class TestValidation:
    @pytest.mark.parametrize("command", ["lp-check", "bilinear-scan", "l4-scan", "trace-check"])
    def test_missing_seed_is_usage_error(self, tmp_path, command):
        with pytest.raises(SystemExit) as e:
            run(tmp_path, command)
        assert e.value.code == 2

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as e:
            run(tmp_path, "lp-check", "--seed", "1", "--set", "colour=1")
        assert e.value.code == 2

    def test_bad_value_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as e:
            run(tmp_path, "simulate", "--seed", "1", "--set", "dt=-1")
        assert e.value.code == 2

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"seed": 4, "trials": 2, "domain": {"N": 5}}))
        out = tmp_path / "out"
        assert main(["lp-check", "--config", str(cfg), "--trials", "3", "--output", str(out)]) == 0
        m = manifest(out)
        assert m["config"]["trials"] == 3 and m["config"]["domain"]["N"] == 5

    def test_defaults_validate(self):
        cfg = RunConfig()
        assert cfg.seed is None and cfg.M == 65 and cfg.tolerances.slope == 0.3


def test_lp_check_manifest(tmp_path):
    assert run(tmp_path, "lp-check", "--seed", "1", "--N", "6", "--trials", "2") == 0
    m = manifest(tmp_path)
    assert m["passed"] and m["checks"]["reconstruction"]["pass"]
    assert m["checks"]["almost_orthogonality"]["pass"]
    assert len(m["config_sha256"]) == 64 and m["version"]
    assert (tmp_path / "lp_check.csv").read_text().startswith("trial,bands,residual,orthogonality")


def test_mode_simulation_needs_no_seed(tmp_path):
    code = run(tmp_path, "simulate", "--N", "6", "--eps", "1", "--t-final", "0.02",
               "--set", 'initial.kind="mode"', "--set", "snapshot_every=10")
    assert code == 0
    assert (tmp_path / "snapshot_0001.bin").exists()


def test_failing_check_exits_one(tmp_path):
    code = run(tmp_path, "lp-check", "--seed", "1", "--N", "6", "--set", "tolerances.lp_reconstruction=-1")
    assert code == 1 and not manifest(tmp_path)["passed"]


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DNLS_OUTPUT_ROOT", str(tmp_path))
    assert main(["lp-check", "--seed", "2", "--N", "5", "--trials", "1"]) == 0
    assert (tmp_path / "lp-check" / "manifest.json").exists()


def test_scan_csv_independent_of_workers(tmp_path):
    args = ["l4-scan", "--seed", "3", "--trials", "2", "--set", "j_range=[2,3]", "--set", "M=5"]
    main([*args, "--workers", "1", "--output", str(tmp_path / "a")])
    main([*args, "--workers", "2", "--output", str(tmp_path / "b")])
    assert (tmp_path / "a" / "l4.csv").read_bytes() == (tmp_path / "b" / "l4.csv").read_bytes()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "dirichlet_nls", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
