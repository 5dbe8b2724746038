"""
Baseline pipeline services
Ingestion, aggregation, tensor assembly, tensor baselines and benchmark methods
"""

from .baseline_models import (
    FanSeries, EventWindow, ClockWindow, DatasetMeta, Dataset, DayHistory, TensorMode, WindowLabel,
    DEFAULT_WINDOWS,
)
from .interfaces import BaselineMethodInterface
from .ingest_service import ingest_csv, load_manifest, write_manifest, load_dataset
from .aggregation import aggregate, aggregate_values, aggregate_dataset
from .tensor_assembly import assemble_tensor, mask_event_windows
from .baseline_estimator import BaselineEstimate, estimate_baseline, prepare_event_inputs, resolve_loss, TensorMethod
from .benchmark_methods import (
    linear_interp_baseline, avg5_baseline, nearest3of6_baseline, additive_adjust, build_day_history,
    LinearInterpMethod, Avg5Method, Nearest3of6Method,
)

__all__ = [
    'FanSeries',
    'EventWindow',
    'ClockWindow',
    'DatasetMeta',
    'Dataset',
    'DayHistory',
    'TensorMode',
    'WindowLabel',
    'DEFAULT_WINDOWS',
    'BaselineMethodInterface',
    'ingest_csv',
    'load_manifest',
    'write_manifest',
    'load_dataset',
    'aggregate',
    'aggregate_values',
    'aggregate_dataset',
    'assemble_tensor',
    'mask_event_windows',
    'BaselineEstimate',
    'estimate_baseline',
    'prepare_event_inputs',
    'resolve_loss',
    'TensorMethod',
    'linear_interp_baseline',
    'avg5_baseline',
    'nearest3of6_baseline',
    'additive_adjust',
    'build_day_history',
    'LinearInterpMethod',
    'Avg5Method',
    'Nearest3of6Method',
]
