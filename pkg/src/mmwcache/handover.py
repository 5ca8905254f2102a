"""Per-MUE handover state machine: scan, filter, TTT, execute, fail.

One machine per MUE; machines share nothing and may be stepped concurrently.
The four-step procedure is simplified to a moving-average decision filter
over RSS samples (window length configurable), a hysteresis margin, a
time-to-trigger wait and a fixed execution delay. Time-of-stay inside a
target cell is measured from the first in-coverage sample to coverage loss,
and a handover-failure record is emitted whenever it falls short of the
minimum time-of-stay.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Tuple

from .caching import CacheState, next_scan_interval


class Phase(enum.Enum):
    IDLE = "idle"
    SCANNING = "scanning"
    TTT_WAIT = "ttt_wait"
    EXECUTING = "executing"
    COASTING = "coasting"
    MBS_ATTACHED = "mbs_attached"
    SBS_ATTACHED = "sbs_attached"


def hof_indicator(tos: float, t_mts: float) -> int:
    """1 iff the time-of-stay falls strictly below the minimum time-of-stay."""
    if tos < 0.0:
        raise ValueError("tos must be nonnegative")
    return 1 if tos < t_mts else 0


@dataclass(frozen=True)
class HofRecord:
    mue: int
    cell: int
    tos: float
    failed: bool


@dataclass(frozen=True)
class HandoverEvent:
    time: float
    kind: str            # scan | ho_trigger | ho_complete | cell_exit | hof
    cell: Optional[int] = None
    tos: Optional[float] = None

    def csv_row(self, mue: int) -> str:
        cell = "" if self.cell is None else str(self.cell)
        tos = "" if self.tos is None else f"{self.tos:.6f}"
        return f"{self.time:.6f},{mue},{self.kind},{cell},{tos}"


EVENT_CSV_HEADER = "time_s,mue,event,cell,tos_s"


@dataclass
class HandoverPolicy:
    """Decision source for the state machine.

    Carries protocol constants, the set of known base stations, and the
    cache state used for scan muting when caching is enabled.
    """

    known_bss: frozenset
    ttt: float = 0.5
    hysteresis_db: float = 3.0
    execution_delay: float = 0.15
    rss_filter_len: int = 4
    detection_threshold_db: float = -80.0
    t_mts: float = 1.0
    default_scan_interval: float = 1.0
    caching_enabled: bool = False
    cache: Optional[CacheState] = None

    def scan_interval(self) -> float:
        if self.caching_enabled and self.cache is not None:
            return next_scan_interval(self.cache, self.ttt,
                                      self.default_scan_interval)
        return self.default_scan_interval


@dataclass
class HandoverState:
    """Mutable per-MUE protocol state; advanced by step()."""

    mue: int = 0
    phase: Phase = Phase.SCANNING
    serving: Optional[int] = None
    candidate: Optional[int] = None
    ttt_elapsed: float = 0.0
    exec_elapsed: float = 0.0
    clock: float = 0.0
    time_to_scan: float = 0.0
    rss_window: Dict[int, Deque[float]] = field(default_factory=dict)
    coverage_entry: Dict[int, float] = field(default_factory=dict)

    def filtered(self, bs: int) -> Optional[float]:
        window = self.rss_window.get(bs)
        if not window:
            return None
        return sum(window) / len(window)


def step(state: HandoverState, measurements: Dict[int, float], dt: float,
         policy: HandoverPolicy) -> Tuple[HandoverState, List[HandoverEvent]]:
    """Advance the machine by dt given the instantaneous per-BS RSS map.

    Measurements are sampled only at scan instants (cache muting lengthens
    the scan interval); TTT accrues continuously against the last filtered
    snapshot. Returns the same (mutated) state object plus emitted events.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    unknown = set(measurements) - set(policy.known_bss)
    if unknown:
        raise ValueError(f"measurements reference unknown BS ids {sorted(unknown)}")

    events: List[HandoverEvent] = []
    state.clock += dt
    state.time_to_scan -= dt

    scanned = False
    if state.time_to_scan <= 1e-12:
        scanned = True
        events.append(HandoverEvent(time=state.clock, kind="scan"))
        for bs, rss in measurements.items():
            window = state.rss_window.setdefault(
                bs, deque(maxlen=policy.rss_filter_len))
            window.append(rss)
        state.time_to_scan = policy.scan_interval()

        # Track coverage entry/exit for time-of-stay accounting.
        for bs, rss in measurements.items():
            if rss >= policy.detection_threshold_db:
                state.coverage_entry.setdefault(bs, state.clock - dt)
        tracked = state.serving if state.serving is not None else state.candidate
        if tracked is not None and tracked in state.coverage_entry:
            rss_now = measurements.get(tracked)
            if rss_now is None or rss_now < policy.detection_threshold_db:
                tos = state.clock - dt - state.coverage_entry.pop(tracked)
                tos = max(tos, 0.0)
                failed = bool(hof_indicator(tos, policy.t_mts))
                events.append(HandoverEvent(time=state.clock, kind="cell_exit",
                                            cell=tracked, tos=tos))
                if failed:
                    events.append(HandoverEvent(time=state.clock, kind="hof",
                                                cell=tracked, tos=tos))
                _detach(state, tracked, policy)

    if state.phase in (Phase.SCANNING, Phase.TTT_WAIT, Phase.COASTING,
                       Phase.MBS_ATTACHED, Phase.SBS_ATTACHED, Phase.IDLE):
        if scanned:
            _update_candidate(state, policy)
        if state.candidate is not None and state.phase == Phase.TTT_WAIT:
            state.ttt_elapsed += dt
            if state.ttt_elapsed >= policy.ttt - 1e-12:
                events.append(HandoverEvent(time=state.clock, kind="ho_trigger",
                                            cell=state.candidate))
                state.phase = Phase.EXECUTING
                state.exec_elapsed = 0.0
    elif state.phase == Phase.EXECUTING:
        state.exec_elapsed += dt
        if state.exec_elapsed >= policy.execution_delay - 1e-12:
            state.serving = state.candidate
            state.candidate = None
            state.ttt_elapsed = 0.0
            state.phase = Phase.SBS_ATTACHED
            events.append(HandoverEvent(time=state.clock, kind="ho_complete",
                                        cell=state.serving))
    return state, events


def _detach(state: HandoverState, bs: int, policy: HandoverPolicy) -> None:
    if state.serving == bs:
        state.serving = None
    if state.candidate == bs:
        state.candidate = None
        state.ttt_elapsed = 0.0
    if state.phase in (Phase.EXECUTING, Phase.TTT_WAIT, Phase.SBS_ATTACHED):
        covered = (policy.caching_enabled and policy.cache is not None
                   and policy.cache.playback_seconds
                   >= policy.default_scan_interval)
        state.phase = Phase.COASTING if covered else Phase.MBS_ATTACHED


def _update_candidate(state: HandoverState, policy: HandoverPolicy) -> None:
    """Pick the best detected non-serving cell and manage the TTT window."""
    best_bs, best_rss = None, None
    for bs in state.rss_window:
        if bs == state.serving:
            continue
        f = state.filtered(bs)
        if f is None or f < policy.detection_threshold_db:
            continue
        if best_rss is None or f > best_rss or (f == best_rss and bs < best_bs):
            best_bs, best_rss = bs, f

    serving_rss = (state.filtered(state.serving)
                   if state.serving is not None else None)
    threshold = (serving_rss + policy.hysteresis_db
                 if serving_rss is not None else policy.detection_threshold_db)

    if best_bs is None or best_rss < threshold:
        state.candidate = None
        state.ttt_elapsed = 0.0
        if state.phase == Phase.TTT_WAIT:
            state.phase = Phase.SCANNING
        return
    if state.candidate != best_bs:
        state.candidate = best_bs
        state.ttt_elapsed = 0.0
    if state.phase in (Phase.SCANNING, Phase.IDLE, Phase.COASTING,
                       Phase.MBS_ATTACHED, Phase.SBS_ATTACHED):
        state.phase = Phase.TTT_WAIT
