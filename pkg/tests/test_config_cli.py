import os

import pytest

from mmwcache.cli import main
from mmwcache.config import (ConfigError, ScenarioConfig, apply_overrides,
                             load_config)


class TestConfig:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("""
# scenario
seed = 9
n_mues = 12
area_radius = 350.5
sbs_powers_dbm = 20, 30
""")
        cfg = load_config(str(path))
        assert cfg.seed == 9
        assert cfg.n_mues == 12
        assert cfg.area_radius == 350.5
        assert cfg.sbs_powers_dbm == (20.0, 30.0)

    def test_unknown_key_names_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("seed = 1\nbogus_key = 3\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(path))
        assert "line 2" in str(err.value)
        assert "bogus_key" in str(err.value)

    def test_unparseable_value(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("seed = banana\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(path))
        assert "line 1" in str(err.value)

    def test_overrides(self):
        cfg = apply_overrides(ScenarioConfig(), ["seed=4", "quota=3"])
        assert cfg.seed == 4 and cfg.quota == 3
        with pytest.raises(ConfigError):
            apply_overrides(ScenarioConfig(), ["seed"])

    def test_digest_stability(self):
        assert ScenarioConfig(seed=1).digest() == ScenarioConfig(seed=1).digest()
        assert ScenarioConfig(seed=1).digest() != ScenarioConfig(seed=2).digest()


class TestCli:
    def test_analyze_coverage_anchor(self, tmp_path, capsys):
        rc = main(["analyze", "--op", "coverage", "--n", "3",
                   "--theta", "2.0944", "--out", str(tmp_path)])
        assert rc == 0
        csv = (tmp_path / "analyze_coverage.csv").read_text().splitlines()
        assert csv[0] == "op,arg1,arg2,value"
        assert float(csv[1].split(",")[-1]) == pytest.approx(1.0, abs=1e-4)

    def test_malformed_config_exit_2(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("definitely_not_a_key = 1\n")
        rc = main(["analyze", "--op", "coverage", "--config", str(path),
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_missing_config_exit_2(self, tmp_path):
        rc = main(["analyze", "--op", "coverage",
                   "--config", str(tmp_path / "absent.cfg"),
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_match_subcommand(self, tmp_path):
        rc = main(["match", "--users", "8", "--speed", "8.0", "--seed", "3",
                   "--out", str(tmp_path)])
        assert rc == 0
        rows = (tmp_path / "match_result.csv").read_text().splitlines()
        assert rows[0] == "mue,period1,period2,proposals_sent"
        assert len(rows) == 9

    def test_simulate_subcommand(self, tmp_path):
        rc = main(["simulate", "--seed", "3", "--speed", "12",
                   "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "simulate_events.csv").exists()

    def test_verify_stability_suite(self, tmp_path):
        rc = main(["verify", "--suite", "stability", "--seed", "7",
                   "--out", str(tmp_path)])
        assert rc == 0

    def test_env_default_outdir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MMWCACHE_OUT", str(tmp_path / "envout"))
        rc = main(["analyze", "--op", "coverage"])
        assert rc == 0
        assert (tmp_path / "envout" / "analyze_coverage.csv").exists()

    def test_reproduce_tiny_and_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            rc = main(["reproduce", "--seed", "11", "--replications", "2",
                       "--out", str(out)])
            assert rc == 0
        for name in os.listdir(out1):
            if name.endswith(".csv"):
                assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        manifest = (out1 / "run-manifest.txt").read_text()
        assert "config_digest" in manifest and "seed = 11" in manifest

    def test_seed_required_for_reproducible_commands(self, tmp_path):
        rc = main(["match", "--users", "4", "--out", str(tmp_path)])
        assert rc == 2
        rc = main(["reproduce", "--out", str(tmp_path)])
        assert rc == 2
