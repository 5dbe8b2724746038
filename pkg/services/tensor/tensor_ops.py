"""
Multilinear kernels for dense three-way tensors and CP models

Unfoldings follow the Kolda-Bader column ordering: the mode-1 unfolding of a
T x N x S tensor is T x (N*S) with column j + k*N (0-based), and modes 2 and 3
are analogous. khatri_rao(A, B) has row a*n + b equal to A[a] * B[b], so

    unfold(X, 1) ~ A @ khatri_rao(C, B).T
    unfold(X, 2) ~ B @ khatri_rao(C, A).T
    unfold(X, 3) ~ C @ khatri_rao(B, A).T

for X = [[A, B, C]].
"""

from typing import Sequence, Tuple, Union

import numpy as np

from services.errors import (
    ColumnMismatchError, InvalidModeError, LengthMismatchError,
    NonFiniteValueError, DimensionMismatchError,
)
from .tensor_models import CpModel, FanPowerTensor, Dims, _check_index

TensorLike = Union[FanPowerTensor, np.ndarray]


def tensor_from_values(dims: Sequence[int], slot_minutes: int, values: Sequence[float]) -> FanPowerTensor:
    """Build a tensor from a flat list stored row-major by (time, fan, day)"""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise DimensionMismatchError(f"Expected three dimensions, got {dims}")

    flat = np.asarray(values, dtype=np.float64).ravel()
    expected = dims[0] * dims[1] * dims[2]
    if flat.size != expected:
        raise LengthMismatchError(f"Expected {expected} values for dims {dims}, got {flat.size}")

    finite = np.isfinite(flat)
    if not finite.all():
        raise NonFiniteValueError(int(np.flatnonzero(~finite)[0]))

    return FanPowerTensor(flat.reshape(dims), slot_minutes)


def cp_eval(model: CpModel, index: Tuple[int, int, int]) -> float:
    """Evaluate one entry: sum over q of l_i^q * w_j^q * wbar_k^q"""
    _check_index(model.dims, index)
    i, j, k = index
    A, B, C = model.factors

    # Accumulate in component order, matching cp_full bit for bit
    total = 0.0
    for q in range(model.rank):
        total += A[i, q] * B[j, q] * C[k, q]
    return float(total)


def cp_full_array(model: CpModel) -> np.ndarray:
    """Dense reconstruction as a raw array"""
    A, B, C = model.factors
    full = np.zeros(model.dims, dtype=np.float64)
    for q in range(model.rank):
        full += (A[:, q][:, None, None] * B[:, q][None, :, None]) * C[:, q][None, None, :]
    return full


def cp_full(model: CpModel, slot_minutes: int) -> FanPowerTensor:
    """Dense low-rank approximation whose entries equal cp_eval at every index"""
    return FanPowerTensor(cp_full_array(model), slot_minutes)


def _as_array(tensor: TensorLike) -> np.ndarray:
    if isinstance(tensor, FanPowerTensor):
        return tensor.values
    array = np.asarray(tensor)
    if array.ndim != 3:
        raise DimensionMismatchError(f"Expected a three-way array, got {array.ndim} modes")
    return array


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise InvalidModeError(f"Mode must be 1, 2 or 3, got {mode}")
    return mode - 1


def mode_unfold(tensor: TensorLike, mode: int) -> np.ndarray:
    """Mode-n unfolding with Kolda-Bader column ordering"""
    axis = _check_mode(mode)
    array = _as_array(tensor)
    return np.reshape(np.moveaxis(array, axis, 0), (array.shape[axis], -1), order='F')


def mode_fold(matrix: np.ndarray, mode: int, dims: Dims) -> np.ndarray:
    """Inverse of mode_unfold"""
    axis = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    moved_shape = (dims[axis],) + tuple(d for a, d in enumerate(dims) if a != axis)

    matrix = np.asarray(matrix)
    if matrix.size != int(np.prod(dims)) or matrix.shape[0] != dims[axis]:
        raise DimensionMismatchError(f"Matrix of shape {matrix.shape} cannot fold into {dims}")

    return np.moveaxis(np.reshape(matrix, moved_shape, order='F'), 0, axis)


def khatri_rao(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product: (m x r) and (n x r) give (m*n) x r"""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise ColumnMismatchError("Khatri-Rao operands must be matrices")
    if A.shape[1] != B.shape[1]:
        raise ColumnMismatchError(f"Column counts differ: {A.shape[1]} vs {B.shape[1]}")

    m, r = A.shape
    n = B.shape[0]
    return (A[:, None, :] * B[None, :, :]).reshape(m * n, r)


def mttkrp(tensor: TensorLike, factors: Tuple[np.ndarray, np.ndarray, np.ndarray], mode: int) -> np.ndarray:
    """Matricized tensor times Khatri-Rao product of the other two factors"""
    axis = _check_mode(mode)
    A, B, C = factors
    partner = {0: (C, B), 1: (C, A), 2: (B, A)}[axis]
    return mode_unfold(tensor, mode) @ khatri_rao(*partner)
