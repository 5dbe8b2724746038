"""
Baseline accuracy metrics: CV, NMBE, AEC and the 95% confidence interval
"""

from typing import Sequence, Tuple

import numpy as np

from services.errors import LengthMismatchError, TooFewSlotsError, TooFewValuesError, ZeroMeanActualError

CI_Z = 1.96


def _paired(estimate: Sequence[float], actual: Sequence[float], minimum: int) -> Tuple[np.ndarray, np.ndarray]:
    estimate = np.asarray(estimate, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if estimate.size != actual.size:
        raise LengthMismatchError(f"Estimate has {estimate.size} slots, actual has {actual.size}")
    if actual.size < minimum:
        raise TooFewSlotsError(f"Need at least {minimum} slots, got {actual.size}")
    return estimate, actual


def _mean_actual(actual: np.ndarray) -> float:
    mean = actual.sum() / actual.size
    if mean == 0:
        raise ZeroMeanActualError("Mean of the actual series is zero")
    return float(mean)


def cv(estimate: Sequence[float], actual: Sequence[float]) -> float:
    """Coefficient of variation of the RMSE, percent (|tau| - 1 divisor)"""
    estimate, actual = _paired(estimate, actual, 2)
    mean = _mean_actual(actual)
    residual = estimate - actual
    return float(100.0 * np.sqrt(np.sum(residual ** 2) / (actual.size - 1)) / mean)


def nmbe(estimate: Sequence[float], actual: Sequence[float], conventional: bool = False) -> float:
    """
    Normalized mean bias error, percent; positive means overestimation.

    The bias is divided by |tau| - 1 unless `conventional` selects |tau|.
    """
    estimate, actual = _paired(estimate, actual, 2)
    mean = _mean_actual(actual)
    divisor = actual.size if conventional else actual.size - 1
    return float(100.0 * (np.sum(estimate - actual) / divisor) / mean)


def aec(estimate: Sequence[float], actual: Sequence[float], slot_minutes: int) -> float:
    """Additional energy consumption (estimate minus actual), kWh"""
    estimate, actual = _paired(estimate, actual, 1)
    return float(np.sum(estimate - actual) * slot_minutes / 60.0)


def confidence_interval(values: Sequence[float]) -> Tuple[float, float]:
    """(mean, 1.96 * sample std / sqrt(n))"""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size < 2:
        raise TooFewValuesError(f"Need at least 2 values for a confidence interval, got {values.size}")
    half_width = CI_Z * np.std(values, ddof=1) / np.sqrt(values.size)
    return float(np.mean(values)), float(half_width)
