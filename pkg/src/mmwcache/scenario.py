"""Scenario generation and trajectory geometry over a circular deployment.

SBS positions are rejection-sampled uniformly over the disk under a minimum
inter-cell spacing; transmit powers are drawn from the configured set and
cell radii derive from the microwave RSS detection threshold. Everything is
a pure function of (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import ScenarioConfig
from .geometry import BeamGeometry, CellDisk, Pose

SPEED_OF_LIGHT = 299792458.0


class PackingFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SbsSite:
    index: int
    position: Tuple[float, float]
    power_dbm: float
    radius: float
    beams: BeamGeometry

    @property
    def cell(self) -> CellDisk:
        return CellDisk(self.position, self.radius)


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    sbss: Tuple[SbsSite, ...]
    mues: Tuple[Pose, ...]

    def snapshot_text(self) -> str:
        """Deterministic serialization used for byte-identity checks."""
        lines = [f"# scenario seed={self.config.seed}"]
        for s in self.sbss:
            lines.append(
                f"sbs,{s.index},{s.position[0]:.9f},{s.position[1]:.9f},"
                f"{s.power_dbm:.1f},{s.radius:.9f},{s.beams.anchor_angle:.9f}")
        for i, m in enumerate(self.mues):
            lines.append(
                f"mue,{i},{m.x:.9f},{m.y:.9f},{m.heading:.9f},{m.speed:.9f}")
        return "\n".join(lines) + "\n"


def uw_cell_radius(power_dbm: float, config: ScenarioConfig) -> float:
    """Cell radius where the shadowing-free microwave RSS crosses threshold."""
    wavelength = SPEED_OF_LIGHT / config.uw_carrier_frequency
    free_space = 20.0 * math.log10(4.0 * math.pi / wavelength)
    margin = power_dbm - config.rss_threshold_dbm - free_space
    if margin <= 0.0:
        raise ValueError("RSS threshold unreachable even at 1 m")
    return 10.0 ** (margin / (10.0 * config.uw_pathloss_exponent))


def generate_scenario(config: ScenarioConfig, seed: Optional[int] = None,
                      max_tries: int = 20000) -> Scenario:
    """Place SBSs (min spacing enforced) and MUEs uniformly over the disk."""
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    positions: List[Tuple[float, float]] = []
    tries = 0
    while len(positions) < config.n_sbs:
        tries += 1
        if tries > max_tries:
            raise PackingFailure(
                f"could not place {config.n_sbs} SBSs with spacing "
                f"{config.min_intercell} m in radius {config.area_radius} m")
        r = config.area_radius * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * math.pi)
        candidate = (r * math.cos(phi), r * math.sin(phi))
        if all(math.hypot(candidate[0] - p[0], candidate[1] - p[1])
               >= config.min_intercell for p in positions):
            positions.append(candidate)

    sbss = []
    beamwidth = math.radians(config.beamwidth_deg)
    for i, pos in enumerate(positions):
        power = float(rng.choice(config.sbs_powers_dbm))
        anchor = float(rng.uniform(0.0, 2.0 * math.pi))
        sbss.append(SbsSite(
            index=i, position=pos, power_dbm=power,
            radius=uw_cell_radius(power, config),
            beams=BeamGeometry(sbs_position=pos, n_beams=config.n_beams,
                               beamwidth=beamwidth, anchor_angle=anchor)))

    mues = []
    for _ in range(config.n_mues):
        r = config.area_radius * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * math.pi)
        mues.append(Pose(
            x=r * math.cos(phi), y=r * math.sin(phi),
            heading=float(rng.uniform(0.0, 2.0 * math.pi)),
            speed=float(rng.uniform(config.speed_min, config.speed_max))))
    return Scenario(config=config, sbss=tuple(sbss), mues=tuple(mues))


# ---------------------------------------------------------------------------
# Ray/segment geometry against the deployment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellCrossing:
    """One cell traversal along a straight trajectory."""

    sbs: int
    entry: float   # path coordinate where the cell is entered
    exit: float
    chord: float


def ray_circle_crossings(origin: Tuple[float, float], heading: float,
                         sites: Sequence[SbsSite],
                         max_range: float) -> List[CellCrossing]:
    """All cell traversals of the ray within max_range, ordered by entry."""
    ox, oy = origin
    dx, dy = math.cos(heading), math.sin(heading)
    out: List[CellCrossing] = []
    for site in sites:
        cx, cy = site.position
        fx, fy = ox - cx, oy - cy
        b = fx * dx + fy * dy
        c = fx * fx + fy * fy - site.radius ** 2
        disc = b * b - c
        if disc <= 0.0:
            continue
        root = math.sqrt(disc)
        t_in, t_out = -b - root, -b + root
        if t_out <= 0.0 or t_in >= max_range:
            continue
        out.append(CellCrossing(sbs=site.index, entry=max(t_in, 0.0),
                                exit=min(t_out, max_range),
                                chord=t_out - t_in))
    out.sort(key=lambda cr: (cr.entry, cr.sbs))
    return out


def beam_segments_in_cell(origin: Tuple[float, float], heading: float,
                          site: SbsSite, entry: float, exit: float,
                          ) -> List[Tuple[float, float]]:
    """Sub-intervals of [entry, exit] lying inside the SBS's mmW sectors."""
    ox, oy = origin
    dx, dy = math.cos(heading), math.sin(heading)
    beams = site.beams
    pitch = 2.0 * math.pi / beams.n_beams
    segments: List[Tuple[float, float]] = []
    steps = 64
    ts = [entry + (exit - entry) * i / steps for i in range(steps + 1)]
    inside = []
    for t in ts:
        px, py = ox + t * dx - site.position[0], oy + t * dy - site.position[1]
        az = math.atan2(py, px) % (2.0 * math.pi)
        rel = (az - (beams.anchor_angle - beams.beamwidth)) % pitch
        inside.append(rel <= beams.beamwidth)
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = ts[i]
        elif not flag and start is not None:
            segments.append((start, ts[i]))
            start = None
    if start is not None:
        segments.append((start, ts[-1]))
    return segments
