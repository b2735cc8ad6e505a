"""CUSUM and Shiryaev-Roberts detectors: single-run and multi-cyclic stopping.

Both detectors are driven by per-observation increments:

* CUSUM keeps a reflected random walk on the log scale,
  ``W_n = max(0, W_{n-1} + z_n)`` with ``W_0 = 0``, consuming log-likelihood
  ratios (or scores) ``z_n`` directly, and alarms when ``W_n >= h``.
* Shiryaev-Roberts keeps ``R_n = (1 + R_{n-1}) * r_n`` with ``R_0 = 0`` on
  the linear scale, consuming likelihood ratios ``r_n > 0``, and alarms when
  ``R_n >= A``.  Before the change ``R_n - n`` is a zero-mean martingale,
  which is what drives the false-alarm guarantee ``ARL >= A``.

Alarms use ``>=`` at the threshold.  A stream that ends without a crossing
is a valid "no alarm" outcome, not an error.  In a multi-cyclic run the
detector restarts from the fresh state after every alarm, and when the true
change index is known (simulation), the first alarm strictly after it is
flagged as the true detection.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

KINDS = ("cusum", "sr")
MODES = ("exact", "score")

#: log-likelihood ratios are clamped to this magnitude before exponentiation
#: so that ratio streams stay finite and positive.
LLR_CLAMP = 700.0


@dataclass(frozen=True)
class DetectorState:
    """Current statistic of a single detector (immutable; steps return new states)."""

    kind: str
    statistic: float = 0.0
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not np.isfinite(self.statistic):
            raise ValueError("statistic must be finite")
        if self.statistic < 0.0:
            raise ValueError("statistic cannot be negative")
        if self.n < 0:
            raise ValueError("step count cannot be negative")


def fresh_state(kind: str) -> DetectorState:
    """The state a detector holds before consuming anything (statistic 0)."""
    return DetectorState(kind=kind, statistic=0.0, n=0)


def cusum_step(state: DetectorState, increment: float) -> DetectorState:
    """Advance a CUSUM state by one log-scale increment."""
    if state.kind != "cusum":
        raise ValueError(f"cusum_step on a {state.kind!r} state")
    increment = float(increment)
    if not np.isfinite(increment):
        raise ValueError("increment must be finite")
    return DetectorState(
        kind="cusum",
        statistic=max(0.0, state.statistic + increment),
        n=state.n + 1,
    )


def sr_step(state: DetectorState, ratio: float) -> DetectorState:
    """Advance a Shiryaev-Roberts state by one likelihood ratio."""
    if state.kind != "sr":
        raise ValueError(f"sr_step on a {state.kind!r} state")
    ratio = float(ratio)
    if not (np.isfinite(ratio) and ratio > 0.0):
        raise ValueError("ratio must be finite and positive")
    return DetectorState(
        kind="sr",
        statistic=(1.0 + state.statistic) * ratio,
        n=state.n + 1,
    )


def to_ratios(log_increments) -> np.ndarray:
    """Turn log-likelihood ratios (or scores) into SR ratios ``exp(z)``.

    Inputs are clamped to ``+/-700`` first so the result is always finite
    and positive.
    """
    arr = np.asarray(log_increments, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("log increments must be finite")
    return np.exp(np.clip(arr, -LLR_CLAMP, LLR_CLAMP))


@dataclass(frozen=True)
class AlarmRecord:
    """One threshold crossing.

    ``stop_time`` counts steps within the alarm's own cycle;
    ``global_time`` counts from the start of the stream, so for cycle ``j``
    it equals the sum of the first ``j`` cycle lengths.
    """

    stop_time: int
    global_time: int
    statistic_at_stop: float
    threshold: float
    cycle_index: int

    def __post_init__(self) -> None:
        if self.stop_time < 1 or self.global_time < self.stop_time:
            raise ValueError("alarm times must be positive and consistent")
        if self.statistic_at_stop < self.threshold:
            raise ValueError("alarm statistic must reach the threshold")
        if self.cycle_index < 1:
            raise ValueError("cycle index starts at 1")


@dataclass(frozen=True)
class DetectionTrace:
    """Per-step statistic values and the alarms raised while consuming a stream."""

    kind: str
    mode: str
    threshold: float
    statistics: np.ndarray
    alarms: tuple[AlarmRecord, ...]
    change_point: int | None = None

    def __post_init__(self) -> None:
        stats = np.asarray(self.statistics, dtype=float)
        stats.setflags(write=False)
        object.__setattr__(self, "statistics", stats)
        object.__setattr__(self, "alarms", tuple(self.alarms))

    @property
    def increments_consumed(self) -> int:
        return int(self.statistics.size)

    @property
    def alarmed(self) -> bool:
        return len(self.alarms) > 0

    @property
    def first_alarm(self) -> AlarmRecord | None:
        return self.alarms[0] if self.alarms else None

    @property
    def true_detection(self) -> AlarmRecord | None:
        """First alarm strictly after the known change index, if any."""
        if self.change_point is None:
            return None
        for alarm in self.alarms:
            if alarm.global_time > self.change_point:
                return alarm
        return None

    @property
    def detection_delay(self) -> int | None:
        """Steps from the known change to the true detection."""
        alarm = self.true_detection
        if alarm is None:
            return None
        return alarm.global_time - self.change_point

    def write_csv(self, path: str | Path) -> Path:
        """Serialize the trace as ``step,statistic,alarm`` rows."""
        path = Path(path)
        alarm_steps = {alarm.global_time for alarm in self.alarms}
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["step", "statistic", "alarm"])
            for step, value in enumerate(self.statistics, start=1):
                writer.writerow([step, repr(float(value)), int(step in alarm_steps)])
        return path


def _validate_run_args(kind: str, mode: str, threshold: float) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not np.isfinite(threshold) or threshold <= 0.0:
        raise ValueError("threshold must be positive and finite")


def _step(state: DetectorState, increment: float) -> DetectorState:
    if state.kind == "cusum":
        return cusum_step(state, increment)
    return sr_step(state, increment)


def run_detector(
    increments: Iterable[float],
    kind: str,
    mode: str = "exact",
    threshold: float = 1.0,
) -> DetectionTrace:
    """Consume increments until the first threshold crossing (``>=``).

    For ``kind="sr"`` the stream must carry likelihood ratios (see
    :func:`to_ratios`); for ``kind="cusum"`` it carries log-likelihood
    ratios or scores.  ``mode`` records how the increments were produced.
    Consumption stops at the alarm; an exhausted stream without a crossing
    returns a trace with no alarms.
    """
    _validate_run_args(kind, mode, threshold)
    state = fresh_state(kind)
    values: list[float] = []
    alarms: list[AlarmRecord] = []
    consumed_any = False
    for increment in increments:
        consumed_any = True
        state = _step(state, increment)
        values.append(state.statistic)
        if state.statistic >= threshold:
            alarms.append(
                AlarmRecord(
                    stop_time=state.n,
                    global_time=state.n,
                    statistic_at_stop=state.statistic,
                    threshold=threshold,
                    cycle_index=1,
                )
            )
            break
    if not consumed_any:
        raise ValueError("empty increment stream")
    return DetectionTrace(
        kind=kind,
        mode=mode,
        threshold=threshold,
        statistics=np.array(values),
        alarms=tuple(alarms),
    )


def multi_cyclic_run(
    increments: Iterable[float],
    kind: str,
    mode: str = "exact",
    threshold: float = 1.0,
    change_point: int | None = None,
) -> DetectionTrace:
    """Consume the whole stream, restarting from fresh after every alarm.

    The statistic value recorded immediately after an alarm is exactly what
    a fresh detector produces on that increment.  When ``change_point`` is
    given (simulation with a known change index), the returned trace flags
    the first alarm with global time beyond it as the true detection.
    """
    _validate_run_args(kind, mode, threshold)
    if change_point is not None and change_point < 0:
        raise ValueError("change_point must be nonnegative")
    state = fresh_state(kind)
    values: list[float] = []
    alarms: list[AlarmRecord] = []
    cycle = 1
    cycle_start = 0  # global steps consumed before the current cycle
    consumed = 0
    for increment in increments:
        state = _step(state, increment)
        consumed += 1
        values.append(state.statistic)
        if state.statistic >= threshold:
            alarms.append(
                AlarmRecord(
                    stop_time=consumed - cycle_start,
                    global_time=consumed,
                    statistic_at_stop=state.statistic,
                    threshold=threshold,
                    cycle_index=cycle,
                )
            )
            state = fresh_state(kind)
            cycle += 1
            cycle_start = consumed
    if consumed == 0:
        raise ValueError("empty increment stream")
    return DetectionTrace(
        kind=kind,
        mode=mode,
        threshold=threshold,
        statistics=np.array(values),
        alarms=tuple(alarms),
        change_point=change_point,
    )
