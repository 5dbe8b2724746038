"""
Data models for the fan power baseline pipeline
"""

from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dateutil.parser import isoparse

from services.errors import (
    IncompatibleResolutionError, InsufficientHistoryError, InvalidConfigError, LengthMismatchError,
    MissingSeriesError, WindowOutOfRangeError,
)
from utils.baseline_utils import MINUTES_PER_DAY, clock_to_slots, format_clock, parse_clock


class WindowLabel(Enum):
    """Event window labels"""
    MORNING = "morning"
    AFTERNOON = "afternoon"
    CUSTOM = "custom"


class TensorMode(Enum):
    """Fan mode handling when assembling the tensor"""
    PER_FAN = "per_fan"
    TOTAL = "total"


def _as_date(value: Any) -> date:
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    return isoparse(str(value)).date()


@dataclass
class FanSeries:
    """Power of one fan over one full day; NaN marks a missing reading"""
    fan_id: str
    day: date
    values: np.ndarray
    slot_minutes: int = 1

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.day = _as_date(self.day)
        self.validate()

    def validate(self) -> bool:
        errors = []
        if not self.fan_id:
            errors.append("Fan ID is required")
        if self.values.ndim != 1:
            errors.append("Readings must be one-dimensional")
        elif self.values.size * self.slot_minutes != MINUTES_PER_DAY:
            errors.append(f"{self.values.size} slots of {self.slot_minutes} min do not cover one day")
        if np.isinf(self.values).any():
            errors.append("Readings must be finite or missing")
        if errors:
            raise LengthMismatchError(f"Fan series validation failed: {'; '.join(errors)}")
        return True

    @property
    def slot_count(self) -> int:
        return int(self.values.size)

    @property
    def missing_fraction(self) -> float:
        return float(np.isnan(self.values).mean())

    @property
    def readings(self) -> List[Tuple[int, float]]:
        """(slot index, kW) pairs for the present readings"""
        present = np.flatnonzero(~np.isnan(self.values))
        return [(int(i), float(self.values[i])) for i in present]


@dataclass(frozen=True)
class EventWindow:
    """Inclusive 0-based slot range [start_slot, end_slot] within a day (test + settling)"""
    start_slot: int
    end_slot: int
    label: str = WindowLabel.CUSTOM.value
    slot_minutes: int = 1
    offset_minute: int = 0

    def __post_init__(self):
        if self.start_slot < 0 or self.end_slot < self.start_slot:
            raise WindowOutOfRangeError(
                f"Window '{self.label}' has invalid slot range [{self.start_slot}, {self.end_slot}]"
            )

    @property
    def length(self) -> int:
        return self.end_slot - self.start_slot + 1

    @property
    def slots(self) -> np.ndarray:
        return np.arange(self.start_slot, self.end_slot + 1)

    def minute_of_day(self) -> np.ndarray:
        """Clock minute at which each window slot starts"""
        return self.offset_minute + self.slots * self.slot_minutes

    def check_within(self, slot_count: int) -> None:
        if self.end_slot >= slot_count:
            raise WindowOutOfRangeError(
                f"Window '{self.label}' ends at slot {self.end_slot} but the day has {slot_count} slots"
            )

    def overlaps(self, other: 'EventWindow') -> bool:
        return self.start_slot <= other.end_slot and other.start_slot <= self.end_slot

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'start_slot': self.start_slot,
            'end_slot': self.end_slot,
            'slot_minutes': self.slot_minutes,
            'start': format_clock(self.offset_minute + self.start_slot * self.slot_minutes),
            'end': format_clock(self.offset_minute + (self.end_slot + 1) * self.slot_minutes),
        }


def validate_windows(windows: Sequence[EventWindow], slot_count: int) -> None:
    """Windows must fit the day and must not overlap each other"""
    for window in windows:
        window.check_within(slot_count)
    ordered = sorted(windows, key=lambda w: w.start_slot)
    for first, second in zip(ordered, ordered[1:]):
        if first.overlaps(second):
            raise WindowOutOfRangeError(f"Windows '{first.label}' and '{second.label}' overlap")


@dataclass(frozen=True)
class ClockWindow:
    """Test window as a clock interval [start, end) in minutes after midnight"""
    label: str
    start_minute: int
    end_minute: int

    def __post_init__(self):
        if not 0 <= self.start_minute < self.end_minute <= MINUTES_PER_DAY:
            raise InvalidConfigError(
                f"Window '{self.label}' has invalid clock interval {self.start_minute}-{self.end_minute}"
            )

    @classmethod
    def from_clock(cls, label: str, start: str, end: str) -> 'ClockWindow':
        return cls(label, parse_clock(start), parse_clock(end))

    def to_event_window(self, slot_minutes: int, settling_minutes: int = 60,
                        offset_minute: int = 0) -> EventWindow:
        """Append the settling window and convert to slots of the given resolution"""
        end_minute = min(self.end_minute + settling_minutes, MINUTES_PER_DAY)
        start_slot, end_slot = clock_to_slots(self.start_minute, end_minute, slot_minutes, offset_minute)
        if start_slot < 0:
            raise WindowOutOfRangeError(f"Window '{self.label}' starts before the tensor span")
        return EventWindow(start_slot, end_slot, self.label, slot_minutes, offset_minute)

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'start': format_clock(self.start_minute), 'end': format_clock(self.end_minute)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ClockWindow':
        label = data.get('label', WindowLabel.CUSTOM.value)
        missing = [key for key in ('start', 'end') if key not in data]
        if missing:
            raise InvalidConfigError(f"Window '{label}' is missing {missing}")
        try:
            return cls.from_clock(label, data['start'], data['end'])
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidConfigError):
                raise
            raise InvalidConfigError(f"Window '{label}': {e}")


DEFAULT_WINDOWS = (
    ClockWindow.from_clock(WindowLabel.MORNING.value, '09:00', '10:00'),
    ClockWindow.from_clock(WindowLabel.AFTERNOON.value, '13:00', '14:00'),
)


@dataclass
class DatasetMeta:
    """Building-year description: fan order, day order (event day last), windows and spans"""
    building: str
    fan_ids: List[str]
    baseline_days: List[date]
    event_day: Optional[date] = None
    windows: List[ClockWindow] = field(default_factory=lambda: list(DEFAULT_WINDOWS))
    settling_minutes: int = 60
    day_mode_span: Tuple[int, int] = (0, MINUTES_PER_DAY)
    tensor_span: Tuple[int, int] = (0, MINUTES_PER_DAY)
    slot_minutes: int = 1
    data_file: Optional[str] = None

    def __post_init__(self):
        self.baseline_days = [_as_date(d) for d in self.baseline_days]
        if self.event_day is not None:
            self.event_day = _as_date(self.event_day)
        self.day_mode_span = tuple(self.day_mode_span)
        self.tensor_span = tuple(self.tensor_span)
        self.validate()

    def validate(self) -> bool:
        errors = []
        if not self.building:
            errors.append("Building label is required")
        if not self.fan_ids:
            errors.append("At least one fan is required")
        if len(set(self.fan_ids)) != len(self.fan_ids):
            errors.append("Fan IDs must be unique")
        if len(set(self.day_order)) != len(self.day_order):
            errors.append("Day order must not contain duplicates")
        for name, (start, end) in (('day_mode_span', self.day_mode_span), ('tensor_span', self.tensor_span)):
            if not 0 <= start < end <= MINUTES_PER_DAY:
                errors.append(f"{name} must be an interval within the day")
        if self.settling_minutes < 0:
            errors.append("settling_minutes must be non-negative")
        labels = [w.label for w in self.windows]
        if len(set(labels)) != len(labels):
            errors.append("Window labels must be unique")
        if errors:
            raise InvalidConfigError(f"Dataset metadata validation failed: {'; '.join(errors)}")
        return True

    @property
    def day_order(self) -> List[date]:
        """Baseline days, then the event day last"""
        return self.baseline_days + ([self.event_day] if self.event_day is not None else [])

    @property
    def event_day_index(self) -> Optional[int]:
        return len(self.baseline_days) if self.event_day is not None else None

    def event_windows(self, slot_minutes: int) -> List[EventWindow]:
        """Event windows (test + settling) at the given resolution, relative to the tensor span"""
        return [w.to_event_window(slot_minutes, self.settling_minutes, self.tensor_span[0])
                for w in self.windows]

    def span_slots(self, slot_minutes: int) -> slice:
        """Tensor span as a slot slice of a full day"""
        if self.tensor_span[0] % slot_minutes or self.tensor_span[1] % slot_minutes:
            raise IncompatibleResolutionError(
                f"Tensor span {self.tensor_span} is not aligned to {slot_minutes}-minute slots"
            )
        return slice(self.tensor_span[0] // slot_minutes, self.tensor_span[1] // slot_minutes)

    def day_mode_slots(self, slot_minutes: int, offset_minute: int = 0) -> slice:
        start, end = clock_to_slots(self.day_mode_span[0], self.day_mode_span[1], slot_minutes, offset_minute)
        return slice(max(start, 0), end + 1)

    def with_days(self, baseline_days: Sequence[date], event_day: Optional[date] = None) -> 'DatasetMeta':
        values = self.to_dict()
        values['baseline_days'] = list(baseline_days)
        values['event_day'] = event_day
        return DatasetMeta.from_dict(values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'building': self.building,
            'fan_ids': list(self.fan_ids),
            'baseline_days': list(self.baseline_days),
            'event_day': self.event_day,
            'windows': [w.to_dict() for w in self.windows],
            'settling_minutes': self.settling_minutes,
            'day_mode_span': [format_clock(m) for m in self.day_mode_span],
            'tensor_span': [format_clock(m) for m in self.tensor_span],
            'slot_minutes': self.slot_minutes,
            'data_file': self.data_file,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DatasetMeta':
        data = dict(data)
        data['windows'] = [w if isinstance(w, ClockWindow) else ClockWindow.from_dict(w)
                           for w in data.get('windows', [w.to_dict() for w in DEFAULT_WINDOWS])]
        for span_name in ('day_mode_span', 'tensor_span'):
            if span_name in data and data[span_name] is not None:
                data[span_name] = tuple(parse_clock(v) for v in data[span_name])
            else:
                data.pop(span_name, None)
        return cls(**data)


@dataclass
class Dataset:
    """Metadata plus per-(fan, day) series at a common resolution"""
    meta: DatasetMeta
    series: Dict[Tuple[str, date], FanSeries]
    warnings: List[str] = field(default_factory=list)

    @property
    def slot_minutes(self) -> int:
        resolutions = {s.slot_minutes for s in self.series.values()}
        if len(resolutions) != 1:
            raise LengthMismatchError(f"Series resolutions differ: {sorted(resolutions)}")
        return resolutions.pop()

    def series_for(self, fan_id: str, day: date) -> FanSeries:
        try:
            return self.series[(fan_id, day)]
        except KeyError:
            raise MissingSeriesError(fan_id, day)

    def total_power(self, day: date) -> np.ndarray:
        """Full-day total fan power; fans summed in sorted-ID order"""
        return np.sum([self.series_for(fan, day).values for fan in sorted(self.meta.fan_ids)], axis=0)


@dataclass
class DayHistory:
    """Prior baseline days and the event day as 1-minute total fan power profiles"""
    dates: List[date]
    profiles: np.ndarray
    event_date: date
    event_series: np.ndarray
    windows: List[EventWindow] = field(default_factory=list)
    slot_minutes: int = 1

    def __post_init__(self):
        self.event_series = np.asarray(self.event_series, dtype=np.float64)
        profiles = np.asarray(self.profiles, dtype=np.float64)
        if profiles.size == 0:
            profiles = np.empty((0, self.event_series.size))
        elif profiles.ndim == 1:
            profiles = profiles[np.newaxis, :]
        self.profiles = profiles
        self.validate()

    def validate(self) -> bool:
        if self.profiles.shape != (len(self.dates), self.event_series.size):
            raise LengthMismatchError("History profiles and event series must have equal length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InvalidConfigError("History dates must be strictly increasing")
        if self.dates and self.dates[-1] >= self.event_date:
            raise InvalidConfigError("History days must precede the event day")
        return True

    def prior_days(self, count: int) -> Tuple[List[date], np.ndarray]:
        """The `count` most recent prior days, oldest first"""
        if len(self.dates) < count:
            raise InsufficientHistoryError(
                f"Need {count} prior baseline days before {self.event_date}, have {len(self.dates)}"
            )
        return self.dates[-count:], self.profiles[-count:]
