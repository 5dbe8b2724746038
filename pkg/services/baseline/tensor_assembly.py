"""
Fan power tensor assembly and event-window masking
"""

import logging
from datetime import date
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from services.errors import IncompatibleResolutionError, MissingSeriesError, WindowOutOfRangeError
from services.tensor import FanPowerTensor, ObservationMask
from services.tensor.tensor_models import Dims
from .baseline_models import DatasetMeta, EventWindow, FanSeries, TensorMode, validate_windows

logger = logging.getLogger(__name__)


def _index_series(series: Iterable[FanSeries]) -> Tuple[Dict[Tuple[str, date], FanSeries], int]:
    lookup = {}
    resolutions = set()
    for item in series:
        lookup[(item.fan_id, item.day)] = item
        resolutions.add(item.slot_minutes)
    if len(resolutions) > 1:
        raise IncompatibleResolutionError(f"Series have mixed resolutions: {sorted(resolutions)}")
    if not resolutions:
        raise MissingSeriesError('<any>', '<any>')
    return lookup, resolutions.pop()


def assemble_tensor(series: Union[Sequence[FanSeries], Dict], meta: DatasetMeta,
                    mode: Union[str, TensorMode] = TensorMode.PER_FAN) -> FanPowerTensor:
    """
    Stack series into a time x fan x day tensor in the meta's fan and day order.

    Total mode sums fans per slot into a T x 1 x S tensor. Fans are summed in
    sorted ID order so the fan order in meta does not change the result.
    """
    mode = TensorMode(mode)
    if isinstance(series, dict):
        series = list(series.values())
    lookup, slot_minutes = _index_series(series)

    span = meta.span_slots(slot_minutes)
    days = meta.day_order

    def slice_for(fan_id: str, day: date) -> np.ndarray:
        try:
            return lookup[(fan_id, day)].values[span]
        except KeyError:
            raise MissingSeriesError(fan_id, day)

    if mode == TensorMode.PER_FAN:
        values = np.stack([np.column_stack([slice_for(fan, day) for day in days])
                           for fan in meta.fan_ids], axis=1)
    else:
        totals = []
        for day in days:
            total = slice_for(sorted(meta.fan_ids)[0], day).copy()
            for fan in sorted(meta.fan_ids)[1:]:
                total += slice_for(fan, day)
            totals.append(total)
        values = np.column_stack(totals)[:, np.newaxis, :]

    metadata = {
        'building': meta.building,
        'mode': mode.value,
        'fan_ids': list(meta.fan_ids) if mode == TensorMode.PER_FAN else ['total'],
        'days': [d.isoformat() for d in days],
        'offset_minute': meta.tensor_span[0],
    }
    tensor = FanPowerTensor(values, slot_minutes, metadata)
    logger.debug(f"Assembled {mode.value} tensor {tensor.dims} at {slot_minutes}-minute resolution")
    return tensor


def mask_event_windows(dims: Dims, event_day: Union[int, Sequence[int]],
                       windows: List[EventWindow]) -> ObservationMask:
    """Mark every fan's entries inside the windows on the event day(s) unobserved"""
    T, _, S = dims
    event_days = [event_day] if isinstance(event_day, (int, np.integer)) else list(event_day)
    for day in event_days:
        if not 0 <= day < S:
            raise WindowOutOfRangeError(f"Event day index {day} outside 0..{S - 1}")
    validate_windows(windows, T)

    observed = np.ones(dims, dtype=bool)
    for day in event_days:
        for window in windows:
            observed[window.start_slot:window.end_slot + 1, :, day] = False
    return ObservationMask(observed)


def window_totals(tensor: FanPowerTensor, day: int, window: EventWindow) -> np.ndarray:
    """Per-slot sum over fans of one day's entries inside a window"""
    return tensor.values[window.start_slot:window.end_slot + 1, :, day].sum(axis=1)
