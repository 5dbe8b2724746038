"""
Configuration for the fan power baseline system
"""

import logging
import os
from typing import Dict, Any

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class BaselineConfig:
    """Configuration class for tensor completion baselines"""

    # Data granularity
    RESOLUTION_MINUTES = int(os.environ.get('BASELINE_RESOLUTION_MINUTES', '15'))
    MODE = os.environ.get('BASELINE_MODE', 'per_fan')  # per_fan, total

    # Fitting
    LOSS = os.environ.get('BASELINE_LOSS', 'huber')  # huber, l2
    HUBER_DELTA = float(os.environ.get('BASELINE_HUBER_DELTA', '0.25'))  # kW
    RANK = int(os.environ.get('BASELINE_RANK', '12'))
    TRIALS = int(os.environ.get('BASELINE_TRIALS', '4'))
    SEED = int(os.environ.get('BASELINE_SEED', '0'))
    MAX_ITERATIONS = int(os.environ.get('BASELINE_MAX_ITERATIONS', '500'))
    GRADIENT_TOLERANCE = float(os.environ.get('BASELINE_GRADIENT_TOLERANCE', '1e-6'))
    LBFGS_MEMORY = int(os.environ.get('BASELINE_LBFGS_MEMORY', '10'))
    INIT_SCALE = float(os.environ.get('BASELINE_INIT_SCALE', '1.0'))

    # Ingestion and windows
    MAX_MISSING_FRACTION = float(os.environ.get('BASELINE_MAX_MISSING_FRACTION', '0.05'))
    SETTLING_MINUTES = int(os.environ.get('BASELINE_SETTLING_MINUTES', '60'))

    # Benchmarks
    INTERP_FIT_MINUTES = int(os.environ.get('BASELINE_INTERP_FIT_MINUTES', '5'))
    ADJUST_CONTEXT_MINUTES = int(os.environ.get('BASELINE_ADJUST_CONTEXT_MINUTES', '15'))
    NEAREST_DISTANCE = os.environ.get('BASELINE_NEAREST_DISTANCE', 'energy')  # energy, profile

    # Evaluation
    NMBE_CONVENTIONAL_DIVISOR = _env_bool('BASELINE_NMBE_CONVENTIONAL', 'false')

    # Runtime
    THREADS = int(os.environ.get('BASELINE_THREADS', '1'))
    LOG_LEVEL = os.environ.get('BASELINE_LOG_LEVEL', 'INFO')

    SUPPORTED_RESOLUTIONS = [1, 5, 15, 30]
    SUPPORTED_MODES = ['per_fan', 'total']
    SUPPORTED_LOSSES = ['huber', 'l2']
    SUPPORTED_METHODS = ['tensor', 'linterp', 'avg5', 'n3of6']

    @classmethod
    def get_fit_config(cls) -> Dict[str, Any]:
        """Get tensor fitting configuration"""
        return {
            'rank': cls.RANK,
            'trials': cls.TRIALS,
            'seed': cls.SEED,
            'max_iterations': cls.MAX_ITERATIONS,
            'gradient_tolerance': cls.GRADIENT_TOLERANCE,
            'lbfgs_memory': cls.LBFGS_MEMORY,
            'init_scale': cls.INIT_SCALE,
            'threads': cls.THREADS,
        }

    @classmethod
    def get_benchmark_config(cls) -> Dict[str, Any]:
        """Get benchmark method configuration"""
        return {
            'fit_minutes': cls.INTERP_FIT_MINUTES,
            'context_minutes': cls.ADJUST_CONTEXT_MINUTES,
            'distance': cls.NEAREST_DISTANCE,
        }

    @classmethod
    def validate_config(cls) -> bool:
        """Validate configuration ranges"""
        from services.errors import InvalidConfigError

        problems = []

        if cls.RESOLUTION_MINUTES not in cls.SUPPORTED_RESOLUTIONS:
            problems.append(f"BASELINE_RESOLUTION_MINUTES must be one of {cls.SUPPORTED_RESOLUTIONS}")
        if cls.MODE not in cls.SUPPORTED_MODES:
            problems.append(f"BASELINE_MODE must be one of {cls.SUPPORTED_MODES}")
        if cls.LOSS not in cls.SUPPORTED_LOSSES:
            problems.append(f"BASELINE_LOSS must be one of {cls.SUPPORTED_LOSSES}")
        if cls.HUBER_DELTA <= 0:
            problems.append("BASELINE_HUBER_DELTA must be positive")
        if cls.RANK < 1:
            problems.append("BASELINE_RANK must be positive")
        if cls.TRIALS < 1:
            problems.append("BASELINE_TRIALS must be positive")
        if cls.MAX_ITERATIONS < 1:
            problems.append("BASELINE_MAX_ITERATIONS must be positive")
        if cls.LBFGS_MEMORY < 1:
            problems.append("BASELINE_LBFGS_MEMORY must be positive")
        if cls.INIT_SCALE <= 0:
            problems.append("BASELINE_INIT_SCALE must be positive")
        if not 0 <= cls.MAX_MISSING_FRACTION < 1:
            problems.append("BASELINE_MAX_MISSING_FRACTION must be in [0, 1)")
        if cls.NEAREST_DISTANCE not in ('energy', 'profile'):
            problems.append("BASELINE_NEAREST_DISTANCE must be 'energy' or 'profile'")
        if cls.THREADS < 1:
            problems.append("BASELINE_THREADS must be positive")

        if problems:
            logger.error(f"❌ Invalid baseline configuration: {problems}")
            raise InvalidConfigError(f"Invalid configuration: {'; '.join(problems)}")

        return True
