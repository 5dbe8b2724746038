"""
Benchmark baselines on 1-minute total fan power

Linear interpolation across the event window, the average of the 5 most
recent baseline days, and the average of the 3 nearest of the 6 most recent
baseline days. The two day-averaging methods are shifted by an additive
adjustment anchored on the load just before the window.
"""

import logging
from abc import abstractmethod
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.baseline_config import BaselineConfig
from services.errors import IncompatibleResolutionError, InsufficientContextError, InvalidConfigError
from .aggregation import aggregate_values
from .baseline_models import Dataset, DayHistory, EventWindow
from .interfaces import BaselineMethodInterface

logger = logging.getLogger(__name__)

AVG_DAYS = 5
NEAREST_POOL = 6
NEAREST_SELECTED = 3
DISTANCES = ('energy', 'profile')


def _minutes_to_slots(minutes: int, window: EventWindow) -> int:
    return max(1, minutes // window.slot_minutes)


def linear_interp_fit(event_series: np.ndarray, window: EventWindow,
                      fit_minutes: int = 5) -> Tuple[float, float]:
    """
    Ordinary least squares line through the slots just before and just after
    the window; returns (intercept, slope) in slot-index coordinates.
    """
    series = np.asarray(event_series, dtype=np.float64)
    fit_slots = _minutes_to_slots(fit_minutes, window)
    if window.start_slot - fit_slots < 0 or window.end_slot + fit_slots >= series.size:
        raise InsufficientContextError(
            f"Window '{window.label}' needs {fit_slots} slots on both sides for linear interpolation"
        )

    t = np.concatenate([np.arange(window.start_slot - fit_slots, window.start_slot),
                        np.arange(window.end_slot + 1, window.end_slot + 1 + fit_slots)]).astype(np.float64)
    y = series[t.astype(int)]

    # Centered design keeps the normal equations well conditioned
    center = t.mean()
    design = np.column_stack([np.ones_like(t), t - center])
    (centered_intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(centered_intercept - slope * center), float(slope)


def linear_interp_baseline(event_series: np.ndarray, window: EventWindow, fit_minutes: int = 5) -> np.ndarray:
    """Baseline a + b*i for each window slot i"""
    intercept, slope = linear_interp_fit(event_series, window, fit_minutes)
    return intercept + slope * window.slots.astype(np.float64)


def additive_adjust(baseline: np.ndarray, event_series: np.ndarray, window: EventWindow,
                    context_minutes: int = 15) -> np.ndarray:
    """
    Shift a full-day baseline profile so its mean over the context slots just
    before the window equals the actual mean there; returns the window slots.
    """
    baseline = np.asarray(baseline, dtype=np.float64)
    actual = np.asarray(event_series, dtype=np.float64)
    context_slots = _minutes_to_slots(context_minutes, window)
    if window.start_slot - context_slots < 0:
        raise InsufficientContextError(
            f"Window '{window.label}' needs {context_slots} slots before it for the adjustment"
        )
    context = slice(window.start_slot - context_slots, window.start_slot)
    offset = actual[context].mean() - baseline[context].mean()
    return baseline[window.start_slot:window.end_slot + 1] + offset


def avg5_profile(history: DayHistory) -> np.ndarray:
    """Per-slot mean of the 5 most recent prior baseline days"""
    _, profiles = history.prior_days(AVG_DAYS)
    return profiles.mean(axis=0)


def avg5_baseline(history: DayHistory, window: EventWindow, context_minutes: int = 15,
                  adjust: bool = True) -> np.ndarray:
    profile = avg5_profile(history)
    if not adjust:
        return profile[window.start_slot:window.end_slot + 1]
    return additive_adjust(profile, history.event_series, window, context_minutes)


def _day_mode_selector(history: DayHistory, day_mode_span: Tuple[int, int],
                       windows: Sequence[EventWindow]) -> np.ndarray:
    """Day-mode slots that lie outside every event window"""
    slot_count = history.event_series.size
    selector = np.zeros(slot_count, dtype=bool)
    start = day_mode_span[0] // history.slot_minutes
    end = -(-day_mode_span[1] // history.slot_minutes)
    selector[start:end] = True
    for window in windows:
        selector[window.start_slot:window.end_slot + 1] = False
    return selector


def nearest_days(history: DayHistory, day_mode_span: Tuple[int, int], windows: Sequence[EventWindow],
                 distance: str = 'energy') -> List[int]:
    """
    Indices into history.dates of the 3 days closest to the event day among
    the 6 most recent. Distance ties go to the more recent day.
    """
    if distance not in DISTANCES:
        raise InvalidConfigError(f"Unknown distance '{distance}', expected one of {DISTANCES}")

    dates, profiles = history.prior_days(NEAREST_POOL)
    selector = _day_mode_selector(history, day_mode_span, windows)
    candidates = profiles[:, selector]
    event = history.event_series[selector]

    if distance == 'energy':
        hours_per_slot = history.slot_minutes / 60.0
        distances = np.abs(candidates.sum(axis=1) - event.sum()) * hours_per_slot
    else:
        distances = np.sqrt(((candidates - event) ** 2).sum(axis=1))

    ranked = sorted(range(len(dates)), key=lambda d: (distances[d], -d))
    first = len(history.dates) - NEAREST_POOL
    return sorted(first + d for d in ranked[:NEAREST_SELECTED])


def nearest3of6_profile(history: DayHistory, day_mode_span: Tuple[int, int],
                        windows: Sequence[EventWindow], distance: str = 'energy') -> np.ndarray:
    chosen = nearest_days(history, day_mode_span, windows, distance)
    return history.profiles[chosen].mean(axis=0)


def nearest3of6_baseline(history: DayHistory, window: EventWindow, day_mode_span: Tuple[int, int],
                         all_windows: Optional[Sequence[EventWindow]] = None, distance: str = 'energy',
                         context_minutes: int = 15, adjust: bool = True) -> np.ndarray:
    """Average of the 3 nearest of the 6 most recent baseline days over the window"""
    all_windows = list(all_windows) if all_windows is not None else [window]
    profile = nearest3of6_profile(history, day_mode_span, all_windows, distance)
    if not adjust:
        return profile[window.start_slot:window.end_slot + 1]
    return additive_adjust(profile, history.event_series, window, context_minutes)


def build_day_history(dataset: Dataset, held_out_day: date,
                      windows: Optional[List[EventWindow]] = None) -> DayHistory:
    """Total fan power of the baseline days before the held-out day, oldest first"""
    prior = sorted(d for d in dataset.meta.baseline_days if d < held_out_day)
    profiles = [dataset.total_power(d) for d in prior]
    return DayHistory(
        dates=prior,
        profiles=profiles,
        event_date=held_out_day,
        event_series=dataset.total_power(held_out_day),
        windows=list(windows or []),
        slot_minutes=dataset.slot_minutes,
    )


class BenchmarkMethod(BaselineMethodInterface):
    """Benchmark evaluated on 1-minute data and averaged to the report resolution"""

    def __init__(self, slot_minutes: int, context_minutes: Optional[int] = None):
        self._slot_minutes = slot_minutes
        self.context_minutes = context_minutes if context_minutes is not None else BaselineConfig.ADJUST_CONTEXT_MINUTES

    @property
    def slot_minutes(self) -> int:
        return self._slot_minutes

    def windows(self, dataset: Dataset) -> List[EventWindow]:
        meta = dataset.meta
        return [w.to_event_window(self._slot_minutes, meta.settling_minutes, 0) for w in meta.windows]

    def minute_windows(self, dataset: Dataset) -> List[EventWindow]:
        """Report-resolution windows expanded to 1-minute slots"""
        step = self._slot_minutes
        return [EventWindow(w.start_slot * step, (w.end_slot + 1) * step - 1, w.label, 1, 0)
                for w in self.windows(dataset)]

    @abstractmethod
    def estimate_window(self, history: DayHistory, window: EventWindow,
                        all_windows: List[EventWindow], dataset: Dataset) -> np.ndarray:
        """1-minute baseline over one window"""
        pass

    def estimate_day(self, dataset: Dataset, day: date, seed: int) -> Dict[str, np.ndarray]:
        if dataset.slot_minutes != 1:
            raise IncompatibleResolutionError(
                f"Benchmarks need 1-minute series, dataset is at {dataset.slot_minutes} minutes"
            )
        minute_windows = self.minute_windows(dataset)
        history = build_day_history(dataset, day, minute_windows)
        return {
            window.label: aggregate_values(self.estimate_window(history, window, minute_windows, dataset),
                                           1, self._slot_minutes)
            for window in minute_windows
        }


class LinearInterpMethod(BenchmarkMethod):

    def __init__(self, slot_minutes: int, fit_minutes: Optional[int] = None):
        super().__init__(slot_minutes)
        self.fit_minutes = fit_minutes if fit_minutes is not None else BaselineConfig.INTERP_FIT_MINUTES

    @property
    def method_id(self) -> str:
        return 'linterp'

    def estimate_window(self, history, window, all_windows, dataset):
        return linear_interp_baseline(history.event_series, window, self.fit_minutes)


class Avg5Method(BenchmarkMethod):

    @property
    def method_id(self) -> str:
        return 'avg5'

    def estimate_window(self, history, window, all_windows, dataset):
        return avg5_baseline(history, window, self.context_minutes)


class Nearest3of6Method(BenchmarkMethod):

    def __init__(self, slot_minutes: int, context_minutes: Optional[int] = None,
                 distance: Optional[str] = None):
        super().__init__(slot_minutes, context_minutes)
        self.distance = distance or BaselineConfig.NEAREST_DISTANCE

    @property
    def method_id(self) -> str:
        return 'n3of6'

    def estimate_window(self, history, window, all_windows, dataset):
        return nearest3of6_baseline(history, window, dataset.meta.day_mode_span, all_windows,
                                    self.distance, self.context_minutes)
