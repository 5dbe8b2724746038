"""
Masked GCP objective and its gradient

F = sum over observed (i, j, k) of loss(m_ijk, p_ijk), where m = [[A, B, C]].
The gradient uses the elementwise derivative tensor Y (zero off the mask):
dF/dA = unfold(Y, 1) @ khatri_rao(C, B), and likewise for B and C.
"""

from typing import Callable, Tuple

import numpy as np

from services.errors import DimensionMismatchError
from .fit_models import LossSpec
from .losses import loss_derivative, loss_value
from .tensor_models import CpModel, FanPowerTensor, ObservationMask, Dims
from .tensor_ops import cp_full_array, mttkrp

Gradients = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _check_dims(model: CpModel, tensor: FanPowerTensor, mask: ObservationMask) -> None:
    if model.dims != tensor.dims:
        raise DimensionMismatchError(f"Model dims {model.dims} do not match tensor dims {tensor.dims}")
    if mask.dims != tensor.dims:
        raise DimensionMismatchError(f"Mask dims {mask.dims} do not match tensor dims {tensor.dims}")


def objective(model: CpModel, tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec) -> float:
    """Sum of elementwise losses over the observed entries"""
    _check_dims(model, tensor, mask)
    full = cp_full_array(model)
    observed = mask.observed
    return float(np.sum(loss_value(full[observed], tensor.values[observed], spec)))


def derivative_tensor(model: CpModel, tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec) -> np.ndarray:
    """Y with y_ijk = dloss/dm at observed entries and 0 elsewhere"""
    _check_dims(model, tensor, mask)
    full = cp_full_array(model)
    Y = np.zeros(tensor.dims, dtype=np.float64)
    observed = mask.observed
    Y[observed] = loss_derivative(full[observed], tensor.values[observed], spec)
    return Y


def gradient(model: CpModel, tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec) -> Gradients:
    """Factor gradients with the same shapes as the model factors"""
    Y = derivative_tensor(model, tensor, mask, spec)
    factors = model.factors
    return tuple(mttkrp(Y, factors, mode) for mode in (1, 2, 3))


def make_value_and_gradient(tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec,
                            rank: int) -> Callable[[np.ndarray], Tuple[float, np.ndarray]]:
    """Closure over flat parameter vectors for the optimizer"""
    dims: Dims = tensor.dims
    T, N, S = dims
    data = tensor.values
    observed = mask.observed
    observed_data = data[observed]
    split_points = (T * rank, (T + N) * rank)

    def value_and_gradient(flat: np.ndarray) -> Tuple[float, np.ndarray]:
        A = flat[:split_points[0]].reshape(T, rank)
        B = flat[split_points[0]:split_points[1]].reshape(N, rank)
        C = flat[split_points[1]:].reshape(S, rank)

        full = np.einsum('ir,jr,kr->ijk', A, B, C, optimize=True)
        model_values = full[observed]
        value = float(np.sum(loss_value(model_values, observed_data, spec)))

        Y = np.zeros(dims, dtype=np.float64)
        Y[observed] = loss_derivative(model_values, observed_data, spec)
        factors = (A, B, C)
        grads = [mttkrp(Y, factors, mode).ravel() for mode in (1, 2, 3)]
        return value, np.concatenate(grads)

    return value_and_gradient
