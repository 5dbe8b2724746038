"""
Leave-one-day-out cross-validation of baseline methods
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.baseline_config import BaselineConfig
from services.baseline import (
    Avg5Method, BaselineMethodInterface, Dataset, LinearInterpMethod, Nearest3of6Method, TensorMethod,
    aggregate_values,
)
from services.errors import InsufficientContextError, InsufficientHistoryError, InvalidConfigError
from services.tensor import FitOptions
from utils.baseline_utils import derive_seed
from .metrics import aec, confidence_interval, cv, nmbe

logger = logging.getLogger(__name__)

METRICS = ('cv', 'nmbe', 'aec')
MIN_TENSOR_DAYS = 2


@dataclass(frozen=True)
class MethodSpec:
    """One cell of the study grid"""
    method: str
    resolution: int = 15
    mode: str = 'per_fan'
    loss: str = 'huber'
    delta: float = 0.25
    delta_scaled: Optional[float] = None

    def __post_init__(self):
        if self.method not in BaselineConfig.SUPPORTED_METHODS:
            raise InvalidConfigError(f"Unknown method '{self.method}', expected one of {BaselineConfig.SUPPORTED_METHODS}")
        if self.resolution not in BaselineConfig.SUPPORTED_RESOLUTIONS:
            raise InvalidConfigError(f"Resolution {self.resolution} not in {BaselineConfig.SUPPORTED_RESOLUTIONS}")
        if self.mode not in BaselineConfig.SUPPORTED_MODES:
            raise InvalidConfigError(f"Mode '{self.mode}' not in {BaselineConfig.SUPPORTED_MODES}")
        if self.loss not in BaselineConfig.SUPPORTED_LOSSES:
            raise InvalidConfigError(f"Loss '{self.loss}' not in {BaselineConfig.SUPPORTED_LOSSES}")

    @property
    def key(self) -> Tuple[str, int, str, str]:
        """Report grouping key; benchmarks ignore mode and loss"""
        if self.method == 'tensor':
            return self.method, self.resolution, self.mode, self.loss
        return self.method, self.resolution, 'total', 'none'

    def build(self, options: FitOptions) -> BaselineMethodInterface:
        benchmark = BaselineConfig.get_benchmark_config()
        if self.method == 'tensor':
            return TensorMethod(self.resolution, self.mode, self.loss, self.delta, options, self.delta_scaled)
        if self.method == 'linterp':
            return LinearInterpMethod(self.resolution, benchmark['fit_minutes'])
        if self.method == 'avg5':
            return Avg5Method(self.resolution, benchmark['context_minutes'])
        return Nearest3of6Method(self.resolution, benchmark['context_minutes'], benchmark['distance'])


@dataclass
class WindowResult:
    """Metrics of one method on one held-out day and window"""
    day: date
    window: str
    method: str
    resolution: int
    mode: str
    loss: str
    cv: float
    nmbe: float
    aec: float
    estimate: np.ndarray = field(repr=False, default=None)
    actual: np.ndarray = field(repr=False, default=None)
    minute_of_day: np.ndarray = field(repr=False, default=None)

    @property
    def key(self) -> Tuple[str, int, str, str]:
        return self.method, self.resolution, self.mode, self.loss

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'day': self.day.isoformat(),
            'window': self.window,
            'method': self.method,
            'resolution': self.resolution,
            'mode': self.mode,
            'loss': self.loss,
            'cv': self.cv,
            'nmbe': self.nmbe,
            'aec': self.aec,
            'estimate_kw': [float(v) for v in self.estimate],
            'actual_kw': [float(v) for v in self.actual],
        }


@dataclass
class AggregateRow:
    """Mean and spread of one metric over the evaluated days"""
    method: str
    resolution: int
    mode: str
    loss: str
    window: str
    metric: str
    mean: float
    std: Optional[float]
    n: int
    ci_half_width: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class MetricReport:
    """Per-day window results plus fold coverage for every evaluated method"""
    results: List[WindowResult] = field(default_factory=list)
    covered: Dict[Tuple, List[date]] = field(default_factory=dict)
    skipped: Dict[Tuple, List[Tuple[date, str]]] = field(default_factory=dict)

    def merge(self, other: 'MetricReport') -> 'MetricReport':
        covered = {**self.covered, **other.covered}
        skipped = {**self.skipped, **other.skipped}
        return MetricReport(self.results + other.results, covered, skipped)

    def _groups(self) -> Dict[Tuple, List[WindowResult]]:
        groups: Dict[Tuple, List[WindowResult]] = {}
        for result in self.results:
            groups.setdefault(result.key + (result.window,), []).append(result)
        return groups

    def aggregates(self) -> List[AggregateRow]:
        """One row per (method, resolution, mode, loss, window, metric)"""
        rows = []
        for (method, resolution, mode, loss, window), results in self._groups().items():
            for metric in METRICS:
                values = np.array([r.metric(metric) for r in results])
                std = float(np.std(values, ddof=1)) if values.size >= 2 else None
                half_width = None
                if metric == 'aec' and values.size >= 2:
                    _, half_width = confidence_interval(values)
                rows.append(AggregateRow(method, resolution, mode, loss, window, metric,
                                         float(values.mean()), std, int(values.size), half_width))
        return rows

    def mean_metric(self, method: str, metric: str, window: Optional[str] = None, **key) -> float:
        """Mean of a metric over matching results"""
        values = [r.metric(metric) for r in self.results
                  if r.method == method and (window is None or r.window == window)
                  and all(getattr(r, k) == v for k, v in key.items())]
        if not values:
            raise InvalidConfigError(f"No results for method '{method}' with {key}")
        return float(np.mean(values))


def _actual(dataset: Dataset, day: date, slot_minutes: int) -> np.ndarray:
    """Held-out day's total fan power at the given resolution over the full day"""
    return aggregate_values(dataset.total_power(day), dataset.slot_minutes, slot_minutes)


def loocv(dataset: Dataset, spec: MethodSpec, options: Optional[FitOptions] = None,
          threads: int = 1, conventional_nmbe: Optional[bool] = None) -> MetricReport:
    """
    Hold out each baseline day in turn, estimate its event windows and score them.

    Benchmark folds without enough prior baseline days are skipped with a
    warning. Each fold fits with a seed derived from the run seed and the fold
    index, and results are reduced in fold order.
    """
    options = options or FitOptions.from_config()
    if conventional_nmbe is None:
        conventional_nmbe = BaselineConfig.NMBE_CONVENTIONAL_DIVISOR

    days = list(dataset.meta.baseline_days)
    if spec.method == 'tensor' and len(days) < MIN_TENSOR_DAYS:
        raise InsufficientHistoryError(f"Tensor cross-validation needs at least {MIN_TENSOR_DAYS} baseline days")

    method = spec.build(options)
    method.prepare(dataset)
    windows = method.windows(dataset)
    slot_minutes = method.slot_minutes
    span_offset = windows[0].offset_minute if windows else 0

    def run_fold(fold: int):
        day = days[fold]
        try:
            return method.estimate_day(dataset, day, derive_seed(options.seed, 'loocv-fold', fold))
        except (InsufficientHistoryError, InsufficientContextError) as e:
            return e

    folds = range(len(days))
    if threads > 1 and len(days) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(days))) as executor:
            outcomes = list(executor.map(run_fold, folds))
    else:
        outcomes = [run_fold(fold) for fold in folds]

    report = MetricReport(covered={spec.key: []}, skipped={spec.key: []})
    for fold, outcome in enumerate(outcomes):
        day = days[fold]
        if isinstance(outcome, Exception):
            logger.warning(f"⚠️ {spec.method} skipped fold {day.isoformat()}: {outcome}")
            report.skipped[spec.key].append((day, str(outcome)))
            continue

        actual_day = _actual(dataset, day, slot_minutes)
        for window in windows:
            index = span_offset // slot_minutes + window.slots
            actual = actual_day[index]
            estimate = np.asarray(outcome[window.label], dtype=np.float64)
            report.results.append(WindowResult(
                day=day,
                window=window.label,
                method=spec.key[0],
                resolution=spec.key[1],
                mode=spec.key[2],
                loss=spec.key[3],
                cv=cv(estimate, actual),
                nmbe=nmbe(estimate, actual, conventional_nmbe),
                aec=aec(estimate, actual, slot_minutes),
                estimate=estimate,
                actual=actual,
                minute_of_day=window.minute_of_day(),
            ))
        report.covered[spec.key].append(day)

    logger.info(f"LOOCV {spec.method} @ {spec.resolution} min: {len(report.covered[spec.key])} folds covered, "
                f"{len(report.skipped[spec.key])} skipped")
    return report


def run_study(dataset: Dataset, specs: List[MethodSpec], options: Optional[FitOptions] = None,
              threads: int = 1, conventional_nmbe: Optional[bool] = None) -> MetricReport:
    """LOOCV over every grid cell, merged in grid order"""
    report = MetricReport()
    seen = set()
    for spec in specs:
        if spec.key in seen:
            continue
        seen.add(spec.key)
        report = report.merge(loocv(dataset, spec, options, threads, conventional_nmbe))
    return report
