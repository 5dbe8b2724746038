"""
Synthetic fan power datasets with known low-rank structure
"""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields
from datetime import date, timedelta
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from services.baseline import ClockWindow, DEFAULT_WINDOWS, DatasetMeta, write_manifest
from services.errors import BaselineInputError, InvalidConfigError
from services.tensor import CpModel, FanPowerTensor, cp_full
from utils.baseline_utils import MINUTES_PER_DAY, atomic_write, derive_seed, format_clock, parse_clock

logger = logging.getLogger(__name__)


@dataclass
class SynthConfig:
    """Generator settings; T slots cover the whole day"""
    T: int = 96
    N: int = 4
    S: int = 20
    rank: int = 2
    day_mode_start: str = '06:00'
    day_mode_end: str = '20:00'
    night_floor: float = 0.2
    peak_kw: float = 10.0
    fan_scales: Optional[List[float]] = None
    day_scales: Optional[List[float]] = None
    noise_std: float = 0.0
    outlier_count: int = 0
    outlier_magnitude: float = 10.0
    seed: int = 0
    building: str = 'SYNTH'
    start_date: str = '2017-06-05'
    with_event_day: bool = False
    settling_minutes: int = 60
    windows: List[ClockWindow] = field(default_factory=lambda: list(DEFAULT_WINDOWS))

    def __post_init__(self):
        self.windows = [w if isinstance(w, ClockWindow) else ClockWindow.from_dict(w) for w in self.windows]
        self.validate()

    def validate(self) -> bool:
        errors = []
        if min(self.T, self.N, self.S) < 1:
            errors.append("T, N and S must be positive")
        elif MINUTES_PER_DAY % self.T != 0:
            errors.append(f"T={self.T} does not divide the 1440 minutes of a day")
        if self.rank < 1:
            errors.append("rank must be positive")
        try:
            date.fromisoformat(str(self.start_date))
        except ValueError:
            errors.append(f"start_date '{self.start_date}' is not an ISO date (YYYY-MM-DD)")
        try:
            start, end = parse_clock(self.day_mode_start), parse_clock(self.day_mode_end)
            if end <= start:
                errors.append("day mode must end after it starts")
        except ValueError as e:
            errors.append(str(e))
        if self.night_floor < 0 or self.peak_kw <= 0:
            errors.append("night_floor must be non-negative and peak_kw positive")
        if self.fan_scales is not None and (len(self.fan_scales) != self.N or min(self.fan_scales) < 0):
            errors.append(f"fan_scales must list {self.N} non-negative values")
        if self.day_scales is not None and (len(self.day_scales) != self.S or min(self.day_scales) < 0):
            errors.append(f"day_scales must list {self.S} non-negative values")
        if self.noise_std < 0:
            errors.append("noise_std must be non-negative")
        if self.outlier_count < 0 or self.outlier_magnitude < 0:
            errors.append("outlier_count and outlier_magnitude must be non-negative")
        if errors:
            raise InvalidConfigError(f"Synthetic config validation failed: {'; '.join(errors)}")
        return True

    @property
    def slot_minutes(self) -> int:
        return MINUTES_PER_DAY // self.T

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.T, self.N, self.S

    @property
    def days(self) -> List[date]:
        first = date.fromisoformat(self.start_date)
        return [first + timedelta(days=k) for k in range(self.S)]

    def replace(self, **changes) -> 'SynthConfig':
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update({k: v for k, v in changes.items() if v is not None})
        return SynthConfig(**values)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown synthetic config keys: {unknown}")
        return cls(**data)


@dataclass
class SynthDataset:
    """Observed tensor, noiseless ground truth and injected outlier indices"""
    observed: FanPowerTensor
    truth: FanPowerTensor
    outliers: List[Tuple[int, int, int]]
    model: CpModel

    def __iter__(self):
        return iter((self.observed, self.truth, self.outliers))


def _bump(minutes: np.ndarray, start: float, end: float) -> np.ndarray:
    """Raised cosine equal to 1 mid-span and 0 outside [start, end]"""
    phase = (minutes - start) / (end - start)
    inside = (phase >= 0) & (phase <= 1)
    return np.where(inside, 0.5 - 0.5 * np.cos(2 * np.pi * np.clip(phase, 0, 1)), 0.0)


def _time_factors(config: SynthConfig) -> np.ndarray:
    """Component 0 is the day/night profile; later components are narrower bumps"""
    minutes = (np.arange(config.T) + 0.5) * config.slot_minutes
    start, end = parse_clock(config.day_mode_start), parse_clock(config.day_mode_end)
    columns = [config.night_floor + (1.0 - config.night_floor) * _bump(minutes, start, end)]
    for q in range(1, config.rank):
        width = (end - start) / (q + 1)
        offset = start + (q - 1) * (end - start - width) / max(config.rank - 1, 1)
        columns.append(_bump(minutes, offset, offset + width))
    return np.column_stack(columns)


def _window_slots(config: SynthConfig) -> np.ndarray:
    slots = np.zeros(config.T, dtype=bool)
    for window in config.windows:
        event = window.to_event_window(config.slot_minutes, config.settling_minutes)
        slots[event.start_slot:min(event.end_slot, config.T - 1) + 1] = True
    return slots


def generate(config: SynthConfig) -> SynthDataset:
    """
    Ground truth is a non-negative rank-`rank` CP model; the observed tensor
    adds Gaussian noise and outliers placed outside every event window, then
    clips at zero.
    """
    rng = np.random.default_rng(derive_seed(config.seed, 'synth'))

    time_factors = _time_factors(config)
    fan_factors = rng.uniform(0.5, 1.5, size=(config.N, config.rank))
    day_factors = rng.uniform(0.8, 1.2, size=(config.S, config.rank))
    if config.fan_scales is not None:
        fan_factors[:, 0] = config.fan_scales
    if config.day_scales is not None:
        day_factors[:, 0] = config.day_scales
    fan_factors[:, 0] *= config.peak_kw / config.N

    model = CpModel(time_factors, fan_factors, day_factors)
    truth = cp_full(model, config.slot_minutes)

    observed = np.array(truth.values)
    if config.noise_std > 0:
        observed = observed + rng.normal(0.0, config.noise_std, size=config.dims)

    outliers: List[Tuple[int, int, int]] = []
    if config.outlier_count > 0:
        allowed_slots = np.flatnonzero(~_window_slots(config))
        candidates = len(allowed_slots) * config.N * config.S
        if config.outlier_count > candidates:
            raise InvalidConfigError(f"Cannot place {config.outlier_count} outliers in {candidates} entries")
        picks = rng.choice(candidates, size=config.outlier_count, replace=False)
        peak = float(truth.values.max())
        for pick in sorted(int(p) for p in picks):
            slot_pos, rest = divmod(pick, config.N * config.S)
            j, k = divmod(rest, config.S)
            index = (int(allowed_slots[slot_pos]), j, k)
            observed[index] += config.outlier_magnitude * peak
            outliers.append(index)

    observed = np.maximum(observed, 0.0)
    logger.info(f"Generated synthetic tensor {config.dims} rank {config.rank} "
                f"(noise {config.noise_std}, {len(outliers)} outliers)")
    return SynthDataset(FanPowerTensor(observed, config.slot_minutes), truth, outliers, model)


def load_synth_config(path: Optional[str] = None, **overrides) -> SynthConfig:
    """Read a TOML synthetic config; missing keys take the defaults"""
    data: Dict[str, Any] = {}
    if path:
        if not os.path.isfile(path):
            raise BaselineInputError(f"Synthetic config not found: {path}")
        try:
            with open(path, 'rb') as handle:
                data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise InvalidConfigError(f"Synthetic config {path} is not valid TOML: {e}")
    if isinstance(data.get('start_date'), date):
        data['start_date'] = data['start_date'].isoformat()
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SynthConfig.from_dict(data)
    except (AttributeError, TypeError, ValueError) as e:
        if isinstance(e, InvalidConfigError):
            raise
        raise InvalidConfigError(f"Invalid synthetic config: {e}")


def synth_frame(dataset: SynthDataset, config: SynthConfig, fan_ids: List[str]) -> pd.DataFrame:
    """Observed tensor as 1-minute CSV rows; coarse slots repeat per minute"""
    values = np.repeat(dataset.observed.values, config.slot_minutes, axis=0)
    frames = []
    for k, day in enumerate(config.days):
        stamps = [f"{day.isoformat()}T{format_clock(m)}" for m in range(MINUTES_PER_DAY)]
        for j, fan in enumerate(fan_ids):
            frames.append(pd.DataFrame({'timestamp': stamps, 'fan_id': fan, 'power_kw': values[:, j, k]}))
    return pd.concat(frames, ignore_index=True)


def write_synth_dataset(dataset: SynthDataset, config: SynthConfig, out_dir: str) -> Dict[str, str]:
    """Write data.csv, manifest.toml and outliers.csv in the ingestion format"""
    os.makedirs(out_dir, exist_ok=True)
    fan_ids = [f"F{j + 1}" for j in range(config.N)]
    days = config.days

    frame = synth_frame(dataset, config, fan_ids)
    data_path = atomic_write(os.path.join(out_dir, 'data.csv'),
                             frame.to_csv(index=False, lineterminator='\n'))

    meta = DatasetMeta(
        building=config.building,
        fan_ids=fan_ids,
        baseline_days=days[:-1] if config.with_event_day else days,
        event_day=days[-1] if config.with_event_day else None,
        windows=list(config.windows),
        settling_minutes=config.settling_minutes,
        day_mode_span=(parse_clock(config.day_mode_start), parse_clock(config.day_mode_end)),
        data_file='data.csv',
    )
    manifest_path = write_manifest(meta, os.path.join(out_dir, 'manifest.toml'))

    outlier_frame = pd.DataFrame(
        [{'slot': i, 'fan_id': fan_ids[j], 'day': days[k].isoformat()} for i, j, k in dataset.outliers],
        columns=['slot', 'fan_id', 'day'],
    )
    outlier_path = atomic_write(os.path.join(out_dir, 'outliers.csv'),
                                outlier_frame.to_csv(index=False, lineterminator='\n'))

    logger.info(f"✅ Wrote synthetic dataset {config.building} to {out_dir}")
    return {'data': data_path, 'manifest': manifest_path, 'outliers': outlier_path}
