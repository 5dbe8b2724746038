"""
Evaluation services
Metrics, leave-one-day-out cross-validation and report files
"""

from .metrics import cv, nmbe, aec, confidence_interval
from .loocv_service import MethodSpec, WindowResult, AggregateRow, MetricReport, loocv, run_study
from .report_service import ASHRAE_TOLERANCES, write_study_reports, write_estimate_reports

__all__ = [
    'cv',
    'nmbe',
    'aec',
    'confidence_interval',
    'MethodSpec',
    'WindowResult',
    'AggregateRow',
    'MetricReport',
    'loocv',
    'run_study',
    'ASHRAE_TOLERANCES',
    'write_study_reports',
    'write_estimate_reports',
]
