import math

import pytest

from mmwcache.config import ScenarioConfig
from mmwcache import scenario as S
from mmwcache import experiments as E


class TestGeneration:
    def test_determinism(self):
        cfg = ScenarioConfig(seed=5, n_mues=4)
        a = S.generate_scenario(cfg)
        b = S.generate_scenario(cfg)
        assert a.snapshot_text() == b.snapshot_text()

    def test_default_packing_succeeds(self):
        cfg = ScenarioConfig(seed=2)
        scn = S.generate_scenario(cfg)
        assert len(scn.sbss) == 50
        positions = [s.position for s in scn.sbss]
        for i in range(len(positions)):
            for j in range(i + 1, len(positions)):
                d = math.dist(positions[i], positions[j])
                assert d >= cfg.min_intercell - 1e-9

    def test_infeasible_packing_raises(self):
        cfg = ScenarioConfig(seed=2, n_sbs=2, min_intercell=1000.0)
        with pytest.raises(S.PackingFailure):
            S.generate_scenario(cfg, max_tries=200)

    def test_radius_from_threshold(self):
        cfg = ScenarioConfig()
        # 2 GHz, exponent 3: p - (free space + 30 log10 a) = -80 dB
        a = S.uw_cell_radius(20.0, cfg)
        wavelength = S.SPEED_OF_LIGHT / cfg.uw_carrier_frequency
        check = 20.0 - (20 * math.log10(4 * math.pi / wavelength)
                        + 30 * math.log10(a))
        assert check == pytest.approx(cfg.rss_threshold_dbm, abs=1e-9)

    def test_powers_within_set(self):
        scn = S.generate_scenario(ScenarioConfig(seed=8))
        assert {s.power_dbm for s in scn.sbss} <= {20.0, 27.0, 30.0}


class TestRayGeometry:
    def test_crossing_of_centered_cell(self):
        site = S.SbsSite(index=0, position=(10.0, 0.0), power_dbm=20.0,
                         radius=5.0,
                         beams=S.BeamGeometry(sbs_position=(10.0, 0.0)))
        crossings = S.ray_circle_crossings((0.0, 0.0), 0.0, [site], 100.0)
        assert len(crossings) == 1
        assert crossings[0].entry == pytest.approx(5.0)
        assert crossings[0].exit == pytest.approx(15.0)
        assert crossings[0].chord == pytest.approx(10.0)

    def test_miss(self):
        site = S.SbsSite(index=0, position=(10.0, 7.0), power_dbm=20.0,
                         radius=5.0,
                         beams=S.BeamGeometry(sbs_position=(10.0, 7.0)))
        assert not S.ray_circle_crossings((0.0, 0.0), 0.0, [site], 100.0)

    def test_beam_segments_inside_cell(self):
        site = S.SbsSite(index=0, position=(10.0, 0.0), power_dbm=20.0,
                         radius=5.0,
                         beams=S.BeamGeometry(sbs_position=(10.0, 0.0),
                                              n_beams=3,
                                              beamwidth=math.radians(40),
                                              anchor_angle=0.3))
        segs = S.beam_segments_in_cell((0.0, 0.0), 0.0, site, 5.0, 15.0)
        total = sum(b - a for a, b in segs)
        assert 0.0 < total < 10.0


class TestExperiments:
    def test_unknown_name(self):
        with pytest.raises(ValueError):
            E.run_experiment("nope", ScenarioConfig())

    def test_rate_vs_distance_columns(self):
        res = E.run_experiment("rate_vs_distance", ScenarioConfig(seed=1),
                               replications=1)
        assert "distance_m" in res.columns
        assert any(k.startswith("rate_los_gbps") for k in res.columns)
        csv = res.to_csv()
        assert csv.splitlines()[0].startswith("distance_m,")

    def test_small_region_experiment_runs(self):
        res = E.run_experiment("load_vs_users", ScenarioConfig(seed=1),
                               replications=2)
        assert res.columns["n_mues"] == [float(u) for u in range(5, 55, 5)]
        assert all(0.0 <= x <= 10.0 for x in res.columns["load_v8"])

    def test_experiment_determinism(self):
        a = E.run_experiment("hof_multiuser", ScenarioConfig(seed=4),
                             replications=2)
        b = E.run_experiment("hof_multiuser", ScenarioConfig(seed=4),
                             replications=2)
        assert a.to_csv() == b.to_csv()

    def test_trajectory_counts(self):
        cfg = ScenarioConfig(seed=6)
        scn = S.generate_scenario(cfg)
        stats = E.simulate_trajectory(scn, (-400.0, 0.0), 0.0, 16.0, 60.0,
                                      caching_enabled=False)
        assert stats.attempts == stats.crossings
        assert stats.failures <= stats.attempts
        cached = E.simulate_trajectory(scn, (-400.0, 0.0), 0.0, 16.0, 60.0,
                                       caching_enabled=True)
        assert cached.attempts + cached.skips == cached.crossings

    def test_worker_pool_matches_sequential(self):
        cfg = ScenarioConfig(seed=4)
        seq = E.run_experiment("energy_vs_users", cfg, replications=2,
                               threads=1)
        par = E.run_experiment("energy_vs_users", cfg, replications=2,
                               threads=2)
        assert seq.to_csv() == par.to_csv()

    def test_rate_sweep_los_anchor_at_20m(self):
        res = E.run_experiment("rate_vs_distance", ScenarioConfig(seed=1),
                               replications=1)
        idx = res.columns["distance_m"].index(20.0)
        for key, col in res.columns.items():
            if key.startswith("rate_los"):
                assert col[idx] > 10.0
