"""
Ingestion of per-fan power CSV files and dataset manifests
"""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import tomli_w

from config.baseline_config import BaselineConfig
from services.errors import (
    BaselineInputError, EmptyDatasetError, InvalidConfigError, MissingSeriesError, ParseError,
)
from utils.baseline_utils import MINUTES_PER_DAY, atomic_write
from .baseline_models import Dataset, DatasetMeta, FanSeries

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['timestamp', 'fan_id', 'power_kw']
TIMESTAMP_FORMAT = '%Y-%m-%dT%H:%M'


@dataclass
class IngestResult:
    """Series parsed from one CSV file"""
    series: List[FanSeries]
    meta: DatasetMeta
    warnings: List[str] = field(default_factory=list)
    dropped_days: List[date] = field(default_factory=list)

    def __iter__(self):
        return iter((self.series, self.meta))


def _read_frame(path: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise BaselineInputError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"Data file is empty: {path}")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(0, f"unreadable CSV: {e}")

    if list(frame.columns) != CSV_COLUMNS:
        raise ParseError(0, f"header must be {','.join(CSV_COLUMNS)}, got {','.join(map(str, frame.columns))}")
    if frame.empty:
        raise EmptyDatasetError(f"Data file has no rows: {path}")
    return frame


def _parse_rows(frame: pd.DataFrame) -> pd.DataFrame:
    """Validate rows; raises ParseError naming the 1-based data row"""
    def row_of(position: int) -> int:
        return int(position) + 1

    timestamps = pd.to_datetime(frame['timestamp'].str.strip(), format=TIMESTAMP_FORMAT, errors='coerce')
    bad = np.flatnonzero(timestamps.isna().to_numpy())
    if bad.size:
        raise ParseError(row_of(bad[0]), f"malformed timestamp '{frame['timestamp'].iloc[bad[0]]}'")

    fan_ids = frame['fan_id'].str.strip()
    empty_fans = np.flatnonzero((fan_ids == '').to_numpy())
    if empty_fans.size:
        raise ParseError(row_of(empty_fans[0]), "missing fan_id")

    power = np.empty(len(frame))
    for position, text in enumerate(frame['power_kw'].str.strip()):
        if text == '':
            power[position] = np.nan
            continue
        try:
            value = float(text)
        except ValueError:
            raise ParseError(row_of(position), f"power_kw '{text}' is not a number")
        if not np.isfinite(value) or value < 0:
            raise ParseError(row_of(position), f"power_kw {text} must be finite and >= 0")
        power[position] = value

    parsed = pd.DataFrame({'timestamp': timestamps, 'fan_id': fan_ids, 'power_kw': power})
    duplicated = np.flatnonzero(parsed.duplicated(subset=['timestamp', 'fan_id']).to_numpy())
    if duplicated.size:
        raise ParseError(row_of(duplicated[0]), "duplicate reading for fan and timestamp")

    parsed['day'] = parsed['timestamp'].dt.date
    parsed['minute'] = parsed['timestamp'].dt.hour * 60 + parsed['timestamp'].dt.minute
    return parsed


def ingest_csv(path: str, max_missing_fraction: Optional[float] = None) -> IngestResult:
    """
    Read a `timestamp,fan_id,power_kw` CSV into one 1-minute FanSeries per (fan, day).

    Days where any fan misses more than `max_missing_fraction` of its minutes are
    dropped; remaining gaps are linearly interpolated between neighbors.
    """
    if max_missing_fraction is None:
        max_missing_fraction = BaselineConfig.MAX_MISSING_FRACTION

    parsed = _parse_rows(_read_frame(path))
    fan_ids = list(dict.fromkeys(parsed['fan_id']))
    days = sorted(set(parsed['day']))

    raw: Dict[tuple, np.ndarray] = {}
    for (fan_id, day), group in parsed.groupby(['fan_id', 'day'], sort=False):
        values = np.full(MINUTES_PER_DAY, np.nan)
        values[group['minute'].to_numpy()] = group['power_kw'].to_numpy()
        raw[(fan_id, day)] = values

    warnings = []
    dropped = []
    series = []
    for day in days:
        day_values = {fan: raw.get((fan, day), np.full(MINUTES_PER_DAY, np.nan)) for fan in fan_ids}
        worst_fan, worst = max(((fan, float(np.isnan(v).mean())) for fan, v in day_values.items()),
                               key=lambda item: item[1])
        if worst > max_missing_fraction:
            message = (f"Dropped day {day.isoformat()}: fan {worst_fan} missing {worst:.1%} of slots "
                       f"(limit {max_missing_fraction:.1%})")
            logger.warning(f"⚠️ {message}")
            warnings.append(message)
            dropped.append(day)
            continue

        for fan, values in day_values.items():
            if np.isnan(values).any():
                values = pd.Series(values).interpolate(method='linear', limit_direction='both').to_numpy()
            series.append(FanSeries(fan, day, values, 1))

    kept_days = [d for d in days if d not in dropped]
    if not series:
        raise EmptyDatasetError(f"No complete days left in {path}")

    building = os.path.splitext(os.path.basename(path))[0]
    meta = DatasetMeta(building=building, fan_ids=fan_ids, baseline_days=kept_days,
                       data_file=os.path.basename(path))
    logger.info(f"Ingested {len(series)} fan series ({len(fan_ids)} fans, {len(kept_days)} days) from {path}")
    return IngestResult(series, meta, warnings, dropped)


def load_manifest(path: str) -> DatasetMeta:
    """Parse a TOML dataset manifest"""
    if not os.path.isfile(path):
        raise BaselineInputError(f"Manifest not found: {path}")
    try:
        with open(path, 'rb') as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as e:
        raise InvalidConfigError(f"Manifest {path} is not valid TOML: {e}")

    known = {'building', 'data_file', 'fan_ids', 'baseline_days', 'event_day', 'windows',
             'settling_minutes', 'day_mode_span', 'tensor_span'}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfigError(f"Manifest {path} has unknown keys: {unknown}")
    for required in ('building', 'data_file', 'fan_ids', 'baseline_days'):
        if required not in data:
            raise InvalidConfigError(f"Manifest {path} is missing '{required}'")

    data.setdefault('settling_minutes', BaselineConfig.SETTLING_MINUTES)
    try:
        return DatasetMeta.from_dict(data)
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidConfigError):
            raise
        raise InvalidConfigError(f"Manifest {path}: {e}")


def write_manifest(meta: DatasetMeta, path: str) -> str:
    """Write a manifest that load_manifest reads back to an equal DatasetMeta"""
    values: Dict[str, Any] = {k: v for k, v in meta.to_dict().items() if v is not None}
    values.pop('slot_minutes', None)
    return atomic_write(path, tomli_w.dumps(values))


def load_dataset(manifest_path: str, max_missing_fraction: Optional[float] = None) -> Dataset:
    """Manifest plus its CSV, restricted to the manifest's fans and days"""
    meta = load_manifest(manifest_path)
    data_path = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), meta.data_file)
    result = ingest_csv(data_path, max_missing_fraction)

    available = {(s.fan_id, s.day): s for s in result.series}
    warnings = list(result.warnings)

    if meta.event_day is not None and meta.event_day in result.dropped_days:
        raise EmptyDatasetError(f"Event day {meta.event_day.isoformat()} was dropped for missing data")

    baseline_days = []
    for day in meta.baseline_days:
        if day in result.dropped_days:
            message = f"Baseline day {day.isoformat()} removed from the day order"
            logger.warning(f"⚠️ {message}")
            warnings.append(message)
            continue
        baseline_days.append(day)
    meta = meta.with_days(baseline_days, meta.event_day)

    series = {}
    for day in meta.day_order:
        for fan_id in meta.fan_ids:
            if (fan_id, day) not in available:
                raise MissingSeriesError(fan_id, day)
            series[(fan_id, day)] = available[(fan_id, day)]

    if not meta.baseline_days:
        raise EmptyDatasetError(f"No baseline days left for {meta.building}")

    logger.info(f"✅ Loaded dataset {meta.building}: {len(meta.fan_ids)} fans, "
                f"{len(meta.baseline_days)} baseline days, event day {meta.event_day}")
    return Dataset(meta, series, warnings)
