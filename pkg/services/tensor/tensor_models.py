"""
Data models for fan power tensors and CP models
"""

from dataclasses import dataclass, field
from typing import Dict, Any, Sequence, Tuple

import numpy as np

from services.errors import (
    DimensionMismatchError, MaskDegenerateError,
    NonFiniteValueError, IndexOutOfBoundsError, InvalidConfigError,
)
from utils.baseline_utils import MINUTES_PER_DAY

Dims = Tuple[int, int, int]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FanPowerTensor:
    """
    Dense time x fan x day array of power readings in kW.

    Indices are 0-based: values[i, j, k] is slot i of fan j on day k.
    """
    values: np.ndarray
    slot_minutes: int
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise DimensionMismatchError(f"Fan power tensor must be three-way, got {values.ndim} modes")
        object.__setattr__(self, 'values', _frozen(values))
        self.validate()

    def validate(self) -> bool:
        """Validate tensor invariants"""
        if min(self.values.shape) < 1:
            raise DimensionMismatchError(f"All tensor dimensions must be >= 1, got {self.values.shape}")

        if not isinstance(self.slot_minutes, (int, np.integer)) or self.slot_minutes < 1:
            raise InvalidConfigError(f"slot_minutes must be a positive integer, got {self.slot_minutes}")

        if self.slot_minutes * self.values.shape[0] > MINUTES_PER_DAY:
            raise InvalidConfigError(
                f"{self.values.shape[0]} slots of {self.slot_minutes} minutes exceed one day"
            )

        finite = np.isfinite(self.values)
        if not finite.all():
            first = int(np.flatnonzero(~finite.ravel())[0])
            raise NonFiniteValueError(first)

        return True

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.values.shape)

    def value_at(self, i: int, j: int, k: int) -> float:
        """Read one entry"""
        _check_index(self.dims, (i, j, k))
        return float(self.values[i, j, k])


@dataclass(frozen=True, eq=False)
class ObservationMask:
    """Boolean flag per (i, j, k); True marks a known entry in the fitting set"""
    observed: np.ndarray

    def __post_init__(self):
        observed = np.asarray(self.observed, dtype=bool)
        if observed.ndim != 3:
            raise DimensionMismatchError(f"Observation mask must be three-way, got {observed.ndim} modes")
        object.__setattr__(self, 'observed', _frozen(observed))

    @classmethod
    def all_observed(cls, dims: Dims) -> 'ObservationMask':
        return cls(np.ones(dims, dtype=bool))

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.observed.shape)

    @property
    def observed_count(self) -> int:
        return int(self.observed.sum())

    @property
    def unobserved_count(self) -> int:
        return int(self.observed.size - self.observed.sum())

    def check_matches(self, tensor: FanPowerTensor) -> None:
        if self.dims != tensor.dims:
            raise DimensionMismatchError(f"Mask dims {self.dims} do not match tensor dims {tensor.dims}")

    def check_mode_coverage(self) -> None:
        """Every time slot, fan and day must have at least one observed entry"""
        mode_names = ('time slot', 'fan', 'day')
        for mode, name in enumerate(mode_names):
            other_axes = tuple(a for a in range(3) if a != mode)
            covered = self.observed.any(axis=other_axes)
            if not covered.all():
                missing = int(np.flatnonzero(~covered)[0])
                raise MaskDegenerateError(f"No observed entries for {name} index {missing}")


@dataclass(frozen=True, eq=False)
class CpModel:
    """
    Rank-r CP model stored as factor matrices whose columns are components:
    time_factors T x r, fan_factors N x r, day_factors S x r.
    """
    time_factors: np.ndarray
    fan_factors: np.ndarray
    day_factors: np.ndarray

    def __post_init__(self):
        for name in ('time_factors', 'fan_factors', 'day_factors'):
            matrix = np.asarray(getattr(self, name), dtype=np.float64)
            if matrix.ndim == 1:
                matrix = matrix[:, np.newaxis]
            if matrix.ndim != 2:
                raise DimensionMismatchError(f"{name} must be a matrix")
            object.__setattr__(self, name, _frozen(matrix))
        self.validate()

    def validate(self) -> bool:
        ranks = {m.shape[1] for m in self.factors}
        if len(ranks) != 1:
            raise DimensionMismatchError(f"Factor matrices disagree on rank: {sorted(ranks)}")
        if self.rank < 1:
            raise DimensionMismatchError("CP model rank must be positive")
        if min(self.dims) < 1:
            raise DimensionMismatchError("CP model dimensions must be positive")
        for matrix in self.factors:
            if not np.isfinite(matrix).all():
                raise NonFiniteValueError(int(np.flatnonzero(~np.isfinite(matrix).ravel())[0]),
                                          "CP model factors must be finite")
        return True

    @classmethod
    def from_vectors(cls, time_vectors: Sequence[Sequence[float]],
                     fan_vectors: Sequence[Sequence[float]],
                     day_vectors: Sequence[Sequence[float]]) -> 'CpModel':
        """Build from per-component vectors (l^q, w^q, wbar^q)"""
        return cls(np.column_stack(time_vectors), np.column_stack(fan_vectors),
                   np.column_stack(day_vectors))

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Dims, rank: int) -> 'CpModel':
        """Unpack a flat parameter vector (time, fan, day blocks, each row-major)"""
        T, N, S = dims
        sizes = np.cumsum([T * rank, N * rank])
        time_block, fan_block, day_block = np.split(np.asarray(flat, dtype=np.float64), sizes)
        return cls(time_block.reshape(T, rank), fan_block.reshape(N, rank), day_block.reshape(S, rank))

    def to_flat(self) -> np.ndarray:
        return np.concatenate([m.ravel() for m in self.factors])

    @property
    def factors(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.time_factors, self.fan_factors, self.day_factors

    @property
    def rank(self) -> int:
        return int(self.time_factors.shape[1])

    @property
    def dims(self) -> Dims:
        return tuple(int(m.shape[0]) for m in self.factors)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for diagnostics output"""
        return {
            'rank': self.rank,
            'dims': list(self.dims),
            'time_factors': self.time_factors.tolist(),
            'fan_factors': self.fan_factors.tolist(),
            'day_factors': self.day_factors.tolist(),
        }


def _check_index(dims: Dims, index: Tuple[int, int, int]) -> None:
    if len(index) != 3:
        raise IndexOutOfBoundsError(f"Index {index} must have three components")
    for position, (value, bound) in enumerate(zip(index, dims)):
        if not 0 <= value < bound:
            raise IndexOutOfBoundsError(f"Index {index} out of bounds for dims {dims} (mode {position + 1})")
