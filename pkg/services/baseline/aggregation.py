"""
Temporal re-aggregation of fan power series
"""

import logging
from typing import Dict

import numpy as np

from services.errors import IncompatibleResolutionError
from .baseline_models import Dataset, FanSeries

logger = logging.getLogger(__name__)


def _aggregation_factor(native_minutes: int, target_minutes: int) -> int:
    if target_minutes < 1 or 60 % target_minutes != 0:
        raise IncompatibleResolutionError(f"Target resolution {target_minutes} min does not divide an hour")
    if target_minutes % native_minutes != 0:
        raise IncompatibleResolutionError(
            f"Target resolution {target_minutes} min is not a multiple of the native {native_minutes} min"
        )
    return target_minutes // native_minutes


def aggregate_values(values: np.ndarray, native_minutes: int, target_minutes: int) -> np.ndarray:
    """Mean of each consecutive block of native slots"""
    factor = _aggregation_factor(native_minutes, target_minutes)
    values = np.asarray(values, dtype=np.float64)
    if values.size % factor != 0:
        raise IncompatibleResolutionError(
            f"{values.size} slots cannot be split into {target_minutes}-minute blocks"
        )
    if factor == 1:
        return values.copy()
    return values.reshape(-1, factor).mean(axis=1)


def aggregate(series: FanSeries, target_minutes: int) -> FanSeries:
    """Average a fan series onto a coarser resolution"""
    values = aggregate_values(series.values, series.slot_minutes, target_minutes)
    return FanSeries(series.fan_id, series.day, values, target_minutes)


def aggregate_dataset(dataset: Dataset, target_minutes: int) -> Dataset:
    """Aggregate every series of a dataset"""
    series: Dict = {key: aggregate(s, target_minutes) for key, s in dataset.series.items()}
    logger.debug(f"Aggregated {len(series)} series to {target_minutes}-minute resolution")
    return Dataset(dataset.meta, series, list(dataset.warnings))
