"""
Report files for baseline estimates and cross-validation studies
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import pandas as pd

from utils.baseline_utils import atomic_write, format_clock
from .loocv_service import METRICS, MetricReport

logger = logging.getLogger(__name__)

# ASHRAE Guideline 14 calibration tolerances, reported as context only
ASHRAE_TOLERANCES = {
    'monthly': {'nmbe_percent': 5.0, 'cv_percent': 15.0},
    'hourly': {'nmbe_percent': 10.0, 'cv_percent': 30.0},
}


def _write_json(path: str, payload: Dict[str, Any]) -> str:
    return atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + '\n')


def _write_csv(path: str, frame: pd.DataFrame) -> str:
    return atomic_write(path, frame.to_csv(index=False, lineterminator='\n'))


def _key_name(key) -> str:
    method, resolution, mode, loss = key
    return f"{method}/{resolution}/{mode}/{loss}"


def ashrae_flags(report: MetricReport) -> List[Dict[str, Any]]:
    """Whether mean |NMBE| and mean CV fall within the hourly tolerance, per group"""
    by_group: Dict[tuple, Dict[str, float]] = {}
    for row in report.aggregates():
        group = (row.method, row.resolution, row.mode, row.loss, row.window)
        by_group.setdefault(group, {})[row.metric] = row.mean

    hourly = ASHRAE_TOLERANCES['hourly']
    flags = []
    for (method, resolution, mode, loss, window), means in by_group.items():
        flags.append({
            'method': method,
            'resolution': resolution,
            'mode': mode,
            'loss': loss,
            'window': window,
            'nmbe_within_hourly': abs(means['nmbe']) <= hourly['nmbe_percent'],
            'cv_within_hourly': means['cv'] <= hourly['cv_percent'],
        })
    return flags


def report_frame(report: MetricReport) -> pd.DataFrame:
    """One row per (day, window, method, metric)"""
    rows = []
    for result in report.results:
        for metric in METRICS:
            rows.append({
                'method': result.method,
                'resolution': result.resolution,
                'mode': result.mode,
                'loss': result.loss,
                'day': result.day.isoformat(),
                'window': result.window,
                'metric': metric,
                'value': result.metric(metric),
            })
    columns = ['method', 'resolution', 'mode', 'loss', 'day', 'window', 'metric', 'value']
    return pd.DataFrame(rows, columns=columns)


def summary_frame(report: MetricReport) -> pd.DataFrame:
    columns = ['method', 'resolution', 'mode', 'loss', 'window', 'metric', 'mean', 'std', 'n', 'ci_half_width']
    return pd.DataFrame([row.to_dict() for row in report.aggregates()], columns=columns)


def plot_frame(report: MetricReport) -> pd.DataFrame:
    """Long-format actual vs. estimate traces for external plotting"""
    frames = []
    for result in report.results:
        frames.append(pd.DataFrame({
            'method': result.method,
            'resolution': result.resolution,
            'mode': result.mode,
            'loss': result.loss,
            'day': result.day.isoformat(),
            'window': result.window,
            'minute_of_day': result.minute_of_day,
            'clock': [format_clock(int(m)) for m in result.minute_of_day],
            'actual_kw': result.actual,
            'estimate_kw': result.estimate,
        }))
    if not frames:
        return pd.DataFrame(columns=['method', 'resolution', 'mode', 'loss', 'day', 'window',
                                     'minute_of_day', 'clock', 'actual_kw', 'estimate_kw'])
    return pd.concat(frames, ignore_index=True)


def write_study_reports(report: MetricReport, out_dir: str,
                        run_config: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """Write report.json, report.csv, summary.csv and plot_data.csv"""
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        'config': run_config or {},
        'ashrae_guideline_14': {
            'tolerances': ASHRAE_TOLERANCES,
            'flags': ashrae_flags(report),
            'enforced': False,
        },
        'aggregates': [row.to_dict() for row in report.aggregates()],
        'folds': [result.to_dict() for result in report.results],
        'coverage': {
            _key_name(key): {
                'covered': [d.isoformat() for d in report.covered.get(key, [])],
                'skipped': [{'day': d.isoformat(), 'reason': reason} for d, reason in report.skipped.get(key, [])],
            }
            for key in sorted(set(report.covered) | set(report.skipped), key=_key_name)
        },
    }

    paths = {
        'json': _write_json(os.path.join(out_dir, 'report.json'), payload),
        'csv': _write_csv(os.path.join(out_dir, 'report.csv'), report_frame(report)),
        'summary': _write_csv(os.path.join(out_dir, 'summary.csv'), summary_frame(report)),
        'plot_data': _write_csv(os.path.join(out_dir, 'plot_data.csv'), plot_frame(report)),
    }
    logger.info(f"✅ Wrote study reports to {out_dir}")
    return paths


def write_estimate_reports(estimate, out_dir: str, run_config: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """Write baseline.csv (per window slot) and fit.json (fit diagnostics)"""
    os.makedirs(out_dir, exist_ok=True)
    payload = {'config': run_config or {}, **estimate.to_dict()}
    paths = {
        'baseline': _write_csv(os.path.join(out_dir, 'baseline.csv'), estimate.to_frame()),
        'fit': _write_json(os.path.join(out_dir, 'fit.json'), payload),
    }
    logger.info(f"✅ Wrote baseline estimate to {out_dir}")
    return paths
