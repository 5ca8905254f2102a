import pytest

from mmwcache import matching as M


def example1_instance(epsilon: float = 0.05, **overrides) -> M.GameInstance:
    """Two users, two small cells, one macro; quota one each.

    u0 is slow with an empty cache heading into cell 0 with no onward SBS;
    u1 is fast with a full cache, crossing cell 0 first and able to reach
    cell 1 on cached playback. Cross-SBS plans are disabled, matching the
    plan set of the worked example this instance reproduces.
    """
    kwargs = dict(
        mues=(
            M.MueState(speed=2.0, segments=0.0, p_th=0.08,
                       cand1=(0,), cand2=(), gap1=30.0, gap2=30.0),
            M.MueState(speed=6.0, segments=1e4, p_th=0.30,
                       cand1=(0,), cand2=(1,), gap1=30.0, gap2=30.0),
        ),
        sbss=(M.SbsState(radius=16.0, quota=1),
              M.SbsState(radius=10.0, quota=1)),
        t_mts=1.0,
        scan_interval=10.0,
        epsilon=epsilon,
        play_rate=1e3,
        cache_capacity=1e4,
        allow_cross_sbs_plans=False,
    )
    kwargs.update(overrides)
    return M.GameInstance(**kwargs)


@pytest.fixture
def example1():
    return example1_instance()
