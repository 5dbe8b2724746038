"""
Elementwise fitting losses and their derivatives with respect to the model value
Both functions accept scalars or arrays and broadcast like numpy ufuncs.
"""

from typing import Union

import numpy as np

from .fit_models import LossKind, LossSpec

ArrayLike = Union[float, np.ndarray]


def loss_value(m: ArrayLike, p: ArrayLike, spec: LossSpec) -> ArrayLike:
    """Squared error (m - p)^2, or Huber: quadratic inside delta, 2*delta*|r| - delta^2 outside"""
    residual = np.subtract(m, p, dtype=np.float64)

    if spec.kind == LossKind.SQUARED_ERROR:
        value = residual * residual
    else:
        delta = spec.delta
        magnitude = np.abs(residual)
        value = np.where(magnitude <= delta, residual * residual, 2.0 * delta * magnitude - delta * delta)

    return float(value) if np.ndim(value) == 0 else value


def loss_derivative(m: ArrayLike, p: ArrayLike, spec: LossSpec) -> ArrayLike:
    """d loss / d m"""
    residual = np.subtract(m, p, dtype=np.float64)

    if spec.kind == LossKind.SQUARED_ERROR:
        value = 2.0 * residual
    else:
        delta = spec.delta
        # Both branches give 2*delta*sign(r) at |r| = delta
        value = np.where(np.abs(residual) <= delta, 2.0 * residual, 2.0 * delta * np.sign(residual))

    return float(value) if np.ndim(value) == 0 else value
