"""Random instance generators shared by the verify CLI and the test suite."""

from __future__ import annotations

import numpy as np

from .matching import GameInstance, MueState, SbsState


def random_game_instance(rng: np.random.Generator, max_mues: int = 8,
                         max_sbss: int = 4) -> GameInstance:
    """Random small matching game with time-consistent coasting gaps.

    Gaps equal speed times the scan interval, so distance-based cache
    coverage coincides with the playback-vs-scan-interval test used by the
    period-1 macro fallback and the offload feasibility constraint.
    """
    n_mues = int(rng.integers(1, max_mues + 1))
    n_sbss = int(rng.integers(1, max_sbss + 1))
    t_s = float(rng.uniform(1.0, 8.0))
    play_rate = 1e3

    sbss = tuple(SbsState(radius=float(rng.uniform(6.0, 40.0)),
                          quota=int(rng.integers(1, 4)))
                 for _ in range(n_sbss))
    mues = []
    for _ in range(n_mues):
        speed = float(rng.uniform(1.0, 16.0))
        segments = float(rng.choice([0.0, 1.0, 2.0, 5.0, 20.0])
                         * rng.uniform(0.0, 1.5) * play_rate)
        segments = min(segments, 2e4)
        cand1 = tuple(int(k) for k in
                      np.flatnonzero(rng.uniform(size=n_sbss) < 0.6))
        cand2 = tuple(int(k) for k in
                      np.flatnonzero(rng.uniform(size=n_sbss) < 0.5))
        mues.append(MueState(
            speed=speed, segments=segments,
            p_th=float(rng.uniform(0.05, 0.3)),
            cand1=cand1, cand2=cand2,
            gap1=speed * t_s, gap2=speed * t_s))
    return GameInstance(
        mues=tuple(mues), sbss=sbss,
        t_mts=1.0, scan_interval=t_s,
        epsilon=float(rng.uniform(0.0, 0.15)),
        play_rate=play_rate,
        cache_capacity=2e4)
