"""
Tensor services for fan power baselines
Dense tensors, CP models, losses and GCP tensor completion
"""

from .tensor_models import FanPowerTensor, ObservationMask, CpModel
from .tensor_ops import tensor_from_values, cp_eval, cp_full, mode_unfold, mode_fold, khatri_rao
from .fit_models import LossKind, LossSpec, FitOptions, FitResult
from .losses import loss_value, loss_derivative
from .gcp_objective import objective, gradient
from .lbfgs_optimizer import lbfgs_minimize
from .gcp_fit_service import gcp_fit, complete

__all__ = [
    'FanPowerTensor',
    'ObservationMask',
    'CpModel',
    'tensor_from_values',
    'cp_eval',
    'cp_full',
    'mode_unfold',
    'mode_fold',
    'khatri_rao',
    'LossKind',
    'LossSpec',
    'FitOptions',
    'FitResult',
    'loss_value',
    'loss_derivative',
    'objective',
    'gradient',
    'lbfgs_minimize',
    'gcp_fit',
    'complete',
]
