"""
Data models for GCP fitting: loss specification, options and results
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from config.baseline_config import BaselineConfig
from services.errors import InvalidConfigError
from .tensor_models import CpModel, FanPowerTensor, ObservationMask


class LossKind(Enum):
    """Elementwise fitting losses"""
    HUBER = "huber"
    SQUARED_ERROR = "l2"


@dataclass(frozen=True)
class LossSpec:
    """Loss function choice; delta (kW) is the Huber breakpoint"""
    kind: LossKind = LossKind.HUBER
    delta: float = 0.25

    def __post_init__(self):
        if not isinstance(self.kind, LossKind):
            object.__setattr__(self, 'kind', LossKind(self.kind))
        if self.kind == LossKind.HUBER and not (self.delta > 0 and np.isfinite(self.delta)):
            raise InvalidConfigError(f"Huber delta must be positive, got {self.delta}")

    @classmethod
    def huber(cls, delta: float = 0.25) -> 'LossSpec':
        return cls(LossKind.HUBER, delta)

    @classmethod
    def squared_error(cls) -> 'LossSpec':
        return cls(LossKind.SQUARED_ERROR, 0.0)

    @classmethod
    def from_name(cls, name: str, delta: float = 0.25) -> 'LossSpec':
        kind = LossKind(name.lower())
        return cls.huber(delta) if kind == LossKind.HUBER else cls.squared_error()

    @classmethod
    def scaled(cls, tensor: FanPowerTensor, fraction: float = 0.25, day_mode_slots: Optional[slice] = None,
               mask: Optional[ObservationMask] = None) -> 'LossSpec':
        """
        Huber loss with delta = fraction x median per-fan power over day-mode
        slots. With a mask, only observed entries count.
        """
        selected = np.ones(tensor.dims, dtype=bool)
        if mask is not None:
            mask.check_matches(tensor)
            selected &= mask.observed
        if day_mode_slots is not None:
            in_day = np.zeros(tensor.dims[0], dtype=bool)
            in_day[day_mode_slots] = True
            selected &= in_day[:, None, None]
        values = tensor.values[selected]
        if values.size == 0:
            raise InvalidConfigError("Cannot scale Huber delta: no observed day-mode readings")
        median = float(np.median(values))
        if median <= 0:
            raise InvalidConfigError("Cannot scale Huber delta: median power is not positive")
        return cls.huber(fraction * median)

    @property
    def name(self) -> str:
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        return {'loss': self.kind.value, 'delta': self.delta if self.kind == LossKind.HUBER else None}


@dataclass(frozen=True)
class FitOptions:
    """Multi-start L-BFGS options for GCP fitting"""
    rank: int = 12
    trials: int = 4
    seed: int = 0
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    lbfgs_memory: int = 10
    init_scale: float = 1.0
    threads: int = 1

    def __post_init__(self):
        errors = []
        if self.rank < 1:
            errors.append("rank must be positive")
        if self.trials < 1:
            errors.append("trials must be positive")
        if self.max_iterations < 0:
            errors.append("max_iterations must be non-negative")
        if not self.gradient_tolerance >= 0:
            errors.append("gradient_tolerance must be non-negative")
        if self.lbfgs_memory < 1:
            errors.append("lbfgs_memory must be positive")
        if not self.init_scale > 0:
            errors.append("init_scale must be positive")
        if self.threads < 1:
            errors.append("threads must be positive")
        if errors:
            raise InvalidConfigError(f"Invalid fit options: {'; '.join(errors)}")

    @classmethod
    def from_config(cls, **overrides) -> 'FitOptions':
        values = BaselineConfig.get_fit_config()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_seed(self, seed: int) -> 'FitOptions':
        values = self.to_dict()
        values['seed'] = seed
        return FitOptions(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rank': self.rank,
            'trials': self.trials,
            'seed': self.seed,
            'max_iterations': self.max_iterations,
            'gradient_tolerance': self.gradient_tolerance,
            'lbfgs_memory': self.lbfgs_memory,
            'init_scale': self.init_scale,
            'threads': self.threads,
        }


@dataclass
class OptimizeResult:
    """Outcome of one L-BFGS run"""
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    message: str
    history: List[float] = field(default_factory=list)

    def __iter__(self):
        # Unpacks as (solution, final value, iterations, converged)
        return iter((self.x, self.value, self.iterations, self.converged))


@dataclass
class FitResult:
    """Best-of-trials GCP fit"""
    model: CpModel
    objective: float
    trial_objectives: List[float]
    iterations_used: List[int]
    converged: List[bool]
    best_trial: int
    messages: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'objective': self.objective,
            'best_trial': self.best_trial,
            'trial_objectives': list(self.trial_objectives),
            'iterations_used': list(self.iterations_used),
            'converged': list(self.converged),
            'messages': list(self.messages),
            'rank': self.model.rank,
            'dims': list(self.model.dims),
        }
