"""Planar geometry of cells, beams, trajectories and chords.

All functions are pure and operate on immutable value types, so they are safe
to evaluate from concurrent workers. Angles are radians, distances meters,
durations seconds.

Conventions
-----------
A small base station (SBS) forms N equidistant millimeter-wave sectors of
beamwidth theta_k. One sector is bounded by the rays at azimuths
(anchor_angle - beamwidth) and (anchor_angle); a terminal crossing the sector
enters on the first ray ("entry edge") and leaves through the second
("far edge"). Internally lines are represented in the form
x*sin(t0) - y*cos(t0) = 0 so that vertical far edges (t0 = +-pi/2) need no
special casing; the tan-based textbook formulas are recovered exactly
elsewhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

from .numerics import adaptive_simpson, clamp_unit, wrap_angle

TWO_PI = 2.0 * math.pi


class NoBeamCrossing(ValueError):
    """The trajectory does not intersect the far beam edge ahead of the MUE."""


@dataclass(frozen=True)
class Pose:
    """Position, heading and speed of a mobile user (straight-line motion)."""

    x: float
    y: float
    heading: float
    speed: float

    def __post_init__(self):
        if self.speed <= 0.0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class BeamGeometry:
    """Fixed-azimuth sectorized beam layout of one SBS.

    n_beams equidistant sectors of width beamwidth; the reference sector
    spans azimuths [anchor_angle - beamwidth, anchor_angle].
    """

    sbs_position: Tuple[float, float] = (0.0, 0.0)
    n_beams: int = 3
    beamwidth: float = math.radians(10.0)
    anchor_angle: float = 0.0

    def __post_init__(self):
        if self.n_beams < 1:
            raise ValueError("n_beams must be >= 1")
        if self.beamwidth <= 0.0:
            raise ValueError("beamwidth must be positive")
        if self.n_beams * self.beamwidth > TWO_PI * (1.0 + 1e-4):
            raise ValueError("total beam span exceeds the full circle")

    @property
    def entry_edge_angle(self) -> float:
        return wrap_angle(self.anchor_angle - self.beamwidth)


@dataclass(frozen=True)
class CellDisk:
    """Circular cell coverage region."""

    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class ChordSample:
    """A sampled chord of a cell disk: length and the generating angle."""

    length: float
    entry_angle: float

    def validate(self, cell: "CellDisk") -> None:
        if not 0.0 <= self.length <= 2.0 * cell.radius:
            raise ValueError("chord length outside [0, diameter]")


def beam_coverage_probability(n_beams: int, beamwidth: float) -> float:
    """Probability that a randomly oriented crossing meets a mmW sector.

    Entry point uniform on the cell perimeter, heading uniform over the full
    circle; a terminal entering inside a sector arc counts as covered
    outright, otherwise it is covered when its chord sweeps into a sector.

    P = [N*t/2pi] + [1 - N*t/2pi] * [0.5*(1 - 1/N) + t/(4pi)]
    """
    if n_beams < 2:
        raise ValueError("coverage model requires n_beams >= 2")
    if beamwidth <= 0.0:
        raise ValueError("beamwidth must be positive")
    span = n_beams * beamwidth
    if span > TWO_PI * (1.0 + 1e-4):
        # tolerate rounded inputs like theta = 2.0944 for three sectors
        raise ValueError("total beam span exceeds the full circle")
    frac = min(span / TWO_PI, 1.0)
    inscribed = 0.5 * (1.0 - 1.0 / n_beams) + beamwidth / (2.0 * TWO_PI)
    p = frac + (1.0 - frac) * inscribed
    return min(max(p, 0.0), 1.0)


def _relative(pose: Pose, beam: BeamGeometry) -> Tuple[float, float]:
    return (pose.x - beam.sbs_position[0], pose.y - beam.sbs_position[1])


def min_exit_distance(pose: Pose, beam: BeamGeometry) -> float:
    """Perpendicular distance from the MUE to the far beam edge.

    Equals |x*tan(t0) - y| / sqrt(1 + tan(t0)^2) for non-vertical edges and
    |x| in the vertical limit; computed as |x*sin(t0) - y*cos(t0)|.
    """
    x, y = _relative(pose, beam)
    t0 = beam.anchor_angle
    return abs(x * math.sin(t0) - y * math.cos(t0))


def beam_traverse_distance(pose: Pose, beam: BeamGeometry) -> float:
    """Distance traversed across the sector until the far edge is reached.

    r_c = (y - x*tan(t0)) / (tan(t0)*cos(h) - sin(h)) in the textbook form;
    raises NoBeamCrossing when the heading is parallel to the far edge or the
    intersection lies behind the MUE.
    """
    x, y = _relative(pose, beam)
    t0 = beam.anchor_angle
    h = pose.heading
    den = math.sin(t0 - h)
    num = y * math.cos(t0) - x * math.sin(t0)
    if abs(den) < 1e-15:
        raise NoBeamCrossing("heading parallel to the far beam edge")
    r = num / den
    if r <= 0.0:
        raise NoBeamCrossing("far-edge intersection lies behind the MUE")
    return r


def caching_duration(pose: Pose, beam: BeamGeometry) -> float:
    """Time spent crossing the sector: traverse distance over speed."""
    return beam_traverse_distance(pose, beam) / pose.speed


def entry_pose(beam: BeamGeometry, distance: float, heading: float,
               speed: float) -> Pose:
    """Pose located on the sector entry edge at the given SBS distance."""
    if distance <= 0.0:
        raise ValueError("distance must be positive")
    a = beam.entry_edge_angle
    return Pose(
        x=beam.sbs_position[0] + distance * math.cos(a),
        y=beam.sbs_position[1] + distance * math.sin(a),
        heading=heading,
        speed=speed,
    )


def beam_for_entry_pose(pose: Pose, n_beams: int, beamwidth: float,
                        sbs_position: Tuple[float, float] = (0.0, 0.0),
                        ) -> BeamGeometry:
    """Beam geometry whose entry edge passes through the given pose.

    The far-edge azimuth is the pose azimuth plus the beamwidth (the arccos
    construction of the entry edge, extended to the lower half plane via
    atan2).
    """
    az = math.atan2(pose.y - sbs_position[1], pose.x - sbs_position[0])
    return BeamGeometry(sbs_position=sbs_position, n_beams=n_beams,
                        beamwidth=beamwidth, anchor_angle=wrap_angle(az + beamwidth))


def _require_entry_edge(pose: Pose, beam: BeamGeometry, tol: float = 1e-6
                        ) -> Tuple[float, float]:
    """Validate the pose sits on the entry edge; return (r_uk, r_min)."""
    x, y = _relative(pose, beam)
    r = math.hypot(x, y)
    if r <= 0.0:
        raise ValueError("pose coincides with the SBS")
    az = math.atan2(y, x)
    if abs(math.sin(az - beam.entry_edge_angle)) > tol:
        raise ValueError(
            "pose is not on the beam entry edge; positions off the edge are "
            "rejected rather than silently projected")
    return r, min_exit_distance(pose, beam)


def admissible_heading_interval(beam: BeamGeometry) -> Tuple[float, float]:
    """Heading interval (width pi - beamwidth) that crosses the sector."""
    lo = beam.anchor_angle
    return (lo, lo + math.pi - beam.beamwidth)


def caching_duration_cdf(pose: Pose, beam: BeamGeometry, t0: float) -> float:
    """CDF of the sector crossing time for a uniformly random heading.

    For a pose on the entry edge at distance r_uk with perpendicular far-edge
    distance r_min, crossing within time t0 requires the heading to fall in a
    cone of half-angle arccos(r_min/(v t0)) about the perpendicular, clipped
    to the admissible range of width pi - beamwidth:

        F(t0) = [A + min(B, A)] / (pi - beamwidth),
        A = arccos(r_min/(v t0)),  B = arccos(r_min/r_uk),

    and F = 0 whenever r_min > v*t0.
    """
    if t0 < 0.0:
        raise ValueError("t0 must be nonnegative")
    r_uk, r_min = _require_entry_edge(pose, beam)
    v = pose.speed
    if v * t0 <= 0.0 or r_min > v * t0:
        return 0.0
    a = math.acos(clamp_unit(r_min / (v * t0)))
    b = math.acos(clamp_unit(r_min / r_uk))
    f = (a + min(b, a)) / (math.pi - beam.beamwidth)
    return min(max(f, 0.0), 1.0)


def expected_cache_traverse_distance(pose: Pose, beam: BeamGeometry,
                                     max_distance: Optional[float] = None,
                                     tail_eps: float = 1e-6) -> float:
    """Expected crossing distance E[r_c] = integral of (1 - F(r/v)) dr.

    The crossing-distance distribution has a 1/r tail, so the raw expectation
    diverges; the integral is truncated where the CDF reaches 1 within
    tail_eps, or at max_distance when given (censoring r_c there, matching a
    Monte Carlo estimate capped at the same distance).
    """
    r_uk, r_min = _require_entry_edge(pose, beam)
    v = pose.speed
    width = math.pi - beam.beamwidth
    b = math.acos(clamp_unit(r_min / r_uk))

    def survival(r: float) -> float:
        if r <= r_min:
            return 1.0
        a = math.acos(clamp_unit(r_min / r))
        return 1.0 - min((a + min(b, a)) / width, 1.0)

    if max_distance is None:
        # F(r) = 1 - eps  <=>  arccos(r_min/r) = (1-eps)*width - B
        target = (1.0 - tail_eps) * width - b
        target = min(max(target, 0.0), 0.5 * math.pi - 1e-9)
        max_distance = r_min / math.cos(target)
    if max_distance <= r_min:
        return max_distance
    tol = max(1e-12 * max_distance, 1e-10)
    return r_min + adaptive_simpson(survival, r_min, max_distance, tol=tol)


def hof_probability(speed: float, t_mts: float, cell_radius: float) -> float:
    """Handover-failure probability (2/pi)*arcsin(v*t_mts / (2a)).

    Outside the domain (v*t_mts > 2a, every chord too short) the probability
    clamps to 1.0 with a RuntimeWarning instead of raising, so batch sweeps
    over high speeds and small cells do not abort.
    """
    if speed < 0.0 or t_mts < 0.0:
        raise ValueError("speed and t_mts must be nonnegative")
    if cell_radius <= 0.0:
        raise ValueError("cell_radius must be positive")
    ratio = speed * t_mts / (2.0 * cell_radius)
    if ratio > 1.0:
        warnings.warn(
            f"v*t_mts = {speed * t_mts:g} exceeds the cell diameter "
            f"{2 * cell_radius:g}; HOF probability clamped to 1",
            RuntimeWarning, stacklevel=2)
        return 1.0
    return (2.0 / math.pi) * math.asin(ratio)


def chord_length_pdf(cell: CellDisk, d: float) -> float:
    """Density 2/(pi*sqrt(4a^2 - d^2)) of a random chord with one end fixed."""
    if d < 0.0:
        raise ValueError("chord length must be nonnegative")
    if d >= 2.0 * cell.radius:
        raise ValueError("density is singular at and beyond the diameter")
    return 2.0 / (math.pi * math.sqrt(4.0 * cell.radius ** 2 - d ** 2))


def chord_length_cdf(cell: CellDisk, d: float) -> float:
    """CDF of the random chord length: (2/pi)*arcsin(d / 2a)."""
    if d < 0.0:
        return 0.0
    ratio = d / (2.0 * cell.radius)
    if ratio >= 1.0:
        return 1.0
    return (2.0 / math.pi) * math.asin(ratio)
