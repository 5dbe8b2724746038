"""
Tensor-completion baseline estimation for event days
"""

import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from services.errors import InvalidConfigError
from services.tensor import FanPowerTensor, FitOptions, FitResult, LossSpec, ObservationMask, complete
from utils.baseline_utils import format_clock
from .aggregation import aggregate_dataset
from .baseline_models import Dataset, EventWindow, TensorMode
from .interfaces import BaselineMethodInterface
from .tensor_assembly import assemble_tensor, mask_event_windows, window_totals

logger = logging.getLogger(__name__)


@dataclass
class WindowEstimate:
    """Completed values over one event window"""
    window: EventWindow
    baseline: np.ndarray
    per_fan: np.ndarray
    observed: np.ndarray

    @property
    def label(self) -> str:
        return self.window.label


@dataclass
class BaselineEstimate:
    """Per-window total fan baselines plus fit diagnostics"""
    windows: List[WindowEstimate]
    fit: FitResult
    completed: FanPowerTensor
    event_day: int
    fan_ids: List[str] = field(default_factory=list)

    @property
    def totals(self) -> Dict[str, np.ndarray]:
        return {w.label: w.baseline for w in self.windows}

    def to_frame(self) -> pd.DataFrame:
        """One row per window slot: clock time, baseline, observed and per-fan estimates"""
        frames = []
        for estimate in self.windows:
            minutes = estimate.window.minute_of_day()
            frame = pd.DataFrame({
                'window': estimate.label,
                'slot': estimate.window.slots,
                'clock': [format_clock(int(m)) for m in minutes],
                'baseline_kw': estimate.baseline,
                'observed_kw': estimate.observed,
            })
            fan_names = self.fan_ids or [f"fan_{j}" for j in range(estimate.per_fan.shape[1])]
            for j, fan in enumerate(fan_names):
                frame[f"estimate_{fan}_kw"] = estimate.per_fan[:, j]
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'event_day_index': self.event_day,
            'windows': [
                {
                    **w.window.to_dict(),
                    'baseline_kwh': float(w.baseline.sum() * w.window.slot_minutes / 60.0),
                    'observed_kwh': float(w.observed.sum() * w.window.slot_minutes / 60.0),
                }
                for w in self.windows
            ],
            'fit': self.fit.to_dict(),
        }


def estimate_baseline(tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec,
                      options: FitOptions, event_day: int,
                      windows: List[EventWindow]) -> BaselineEstimate:
    """Complete the tensor and sum the event day's completed entries over fans per window slot"""
    completed, fit = complete(tensor, mask, spec, options)

    estimates = []
    for window in windows:
        rows = slice(window.start_slot, window.end_slot + 1)
        per_fan = completed.values[rows, :, event_day]
        estimates.append(WindowEstimate(
            window=window,
            baseline=window_totals(completed, event_day, window),
            per_fan=np.array(per_fan),
            observed=window_totals(tensor, event_day, window),
        ))

    fan_ids = list(tensor.metadata.get('fan_ids', []))
    return BaselineEstimate(estimates, fit, completed, event_day, fan_ids)


def resolve_loss(tensor: FanPowerTensor, dataset: Dataset, loss: str, delta: float,
                 delta_scaled: Optional[float] = None, mask: Optional[ObservationMask] = None) -> LossSpec:
    """Loss spec for a tensor; delta_scaled sets delta from the observed day-mode median power"""
    if delta_scaled is None or loss != 'huber':
        return LossSpec.from_name(loss, delta)
    offset = tensor.metadata.get('offset_minute', 0)
    day_mode = dataset.meta.day_mode_slots(tensor.slot_minutes, offset)
    return LossSpec.scaled(tensor, delta_scaled, day_mode, mask)


def prepare_event_inputs(dataset: Dataset, slot_minutes: int,
                         mode: str = TensorMode.PER_FAN.value) -> Tuple[FanPowerTensor, ObservationMask, List[EventWindow], int]:
    """Tensor, event-window mask, windows and event day index for a dataset's event day"""
    event_day = dataset.meta.event_day_index
    if event_day is None:
        raise InvalidConfigError(f"Dataset {dataset.meta.building} has no event day to estimate")
    tensor = assemble_tensor(aggregate_dataset(dataset, slot_minutes).series, dataset.meta, mode)
    windows = dataset.meta.event_windows(slot_minutes)
    mask = mask_event_windows(tensor.dims, event_day, windows)
    return tensor, mask, windows, event_day


class TensorMethod(BaselineMethodInterface):
    """GCP tensor completion as a cross-validated baseline method"""

    def __init__(self, slot_minutes: int, mode: str, loss: str, delta: float,
                 options: FitOptions, delta_scaled: Optional[float] = None):
        self._slot_minutes = slot_minutes
        self._mode = TensorMode(mode).value
        self._loss = loss
        self.delta = delta
        self.delta_scaled = delta_scaled
        self.options = options
        self._prepared: Optional[Tuple[Dataset, FanPowerTensor, List[EventWindow]]] = None

    @property
    def method_id(self) -> str:
        return 'tensor'

    @property
    def slot_minutes(self) -> int:
        return self._slot_minutes

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def loss(self) -> str:
        return self._loss

    def prepare(self, dataset: Dataset) -> None:
        if self._prepared is not None and self._prepared[0] is dataset:
            return
        tensor = assemble_tensor(aggregate_dataset(dataset, self._slot_minutes).series, dataset.meta, self._mode)
        windows = dataset.meta.event_windows(self._slot_minutes)
        self._prepared = (dataset, tensor, windows)
        logger.debug(f"Prepared {self._mode} tensor {tensor.dims} with {self._loss} loss for cross-validation")

    def windows(self, dataset: Dataset) -> List[EventWindow]:
        self.prepare(dataset)
        return self._prepared[2]

    def fold_mask(self, dataset: Dataset, day: date) -> ObservationMask:
        """Windows of the held-out day and of the real event day are unobserved"""
        self.prepare(dataset)
        _, tensor, windows = self._prepared
        held_out = [dataset.meta.day_order.index(day)]
        if dataset.meta.event_day_index is not None and dataset.meta.event_day_index not in held_out:
            held_out.append(dataset.meta.event_day_index)
        return mask_event_windows(tensor.dims, held_out, windows)

    def estimate_day(self, dataset: Dataset, day: date, seed: int) -> Dict[str, np.ndarray]:
        self.prepare(dataset)
        _, tensor, windows = self._prepared
        mask = self.fold_mask(dataset, day)
        spec = resolve_loss(tensor, dataset, self._loss, self.delta, self.delta_scaled, mask)
        estimate = estimate_baseline(tensor, mask, spec, self.options.with_seed(seed),
                                     dataset.meta.day_order.index(day), windows)
        return estimate.totals
