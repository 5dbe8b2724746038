"""
Core interfaces for baseline estimation methods
"""

from abc import ABC, abstractmethod
from datetime import date
from typing import Dict, List

import numpy as np

from .baseline_models import Dataset, EventWindow


class BaselineMethodInterface(ABC):
    """A baseline method evaluated by leave-one-day-out cross-validation"""

    @property
    @abstractmethod
    def method_id(self) -> str:
        """Short method name used in reports (tensor, linterp, avg5, n3of6)"""
        pass

    @property
    @abstractmethod
    def slot_minutes(self) -> int:
        """Resolution at which estimates are returned"""
        pass

    @property
    def mode(self) -> str:
        """Fan mode handling; benchmarks always work on total fan power"""
        return 'total'

    @property
    def loss(self) -> str:
        """Fitting loss; 'none' for methods that do not fit a model"""
        return 'none'

    def prepare(self, dataset: Dataset) -> None:
        """Build per-dataset state once, before folds are estimated"""
        pass

    @abstractmethod
    def windows(self, dataset: Dataset) -> List[EventWindow]:
        """Event windows at the method's resolution"""
        pass

    @abstractmethod
    def estimate_day(self, dataset: Dataset, day: date, seed: int) -> Dict[str, np.ndarray]:
        """Baseline total fan power over each event window of `day`, keyed by window label"""
        pass
