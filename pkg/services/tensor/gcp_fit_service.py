"""
Multi-start GCP fitting and tensor completion
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import numpy as np

from services.errors import RankTooLargeError
from utils.baseline_utils import derive_seed
from .fit_models import FitOptions, FitResult, LossSpec, OptimizeResult
from .gcp_objective import make_value_and_gradient
from .lbfgs_optimizer import lbfgs_minimize
from .tensor_models import CpModel, FanPowerTensor, ObservationMask
from .tensor_ops import cp_full

logger = logging.getLogger(__name__)


def max_rank(dims: Tuple[int, int, int]) -> int:
    """Upper bound on the rank of any T x N x S tensor: min(TN, TS, NS)"""
    T, N, S = dims
    return min(T * N, T * S, N * S)


def check_fit_inputs(tensor: FanPowerTensor, mask: ObservationMask, options: FitOptions) -> None:
    """Reject rank above the bound and masks leaving a mode slice unobserved"""
    mask.check_matches(tensor)
    bound = max_rank(tensor.dims)
    if options.rank > bound:
        raise RankTooLargeError(
            f"Rank {options.rank} exceeds min(TN, TS, NS) = {bound} for dims {tensor.dims}; "
            f"any fit would make the estimates arbitrary"
        )
    mask.check_mode_coverage()


def initial_factors(dims: Tuple[int, int, int], rank: int, seed: int, trial: int,
                    init_scale: float) -> np.ndarray:
    """Flat i.i.d. uniform [0, init_scale] start for one trial"""
    rng = np.random.default_rng(derive_seed(seed, 'gcp-trial', trial))
    size = sum(dims) * rank
    return rng.uniform(0.0, init_scale, size=size)


def gcp_fit(tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec,
            options: FitOptions) -> FitResult:
    """Run independent L-BFGS trials and keep the one with the smallest objective"""
    check_fit_inputs(tensor, mask, options)

    dims = tensor.dims
    value_and_gradient = make_value_and_gradient(tensor, mask, spec, options.rank)

    def run_trial(trial: int) -> OptimizeResult:
        start = initial_factors(dims, options.rank, options.seed, trial, options.init_scale)
        return lbfgs_minimize(value_and_gradient, start, options)

    trials = range(options.trials)
    if options.threads > 1 and options.trials > 1:
        with ThreadPoolExecutor(max_workers=min(options.threads, options.trials)) as executor:
            results: List[OptimizeResult] = list(executor.map(run_trial, trials))
    else:
        results = [run_trial(trial) for trial in trials]

    # Lowest trial index wins ties
    best_trial = min(range(len(results)), key=lambda t: (results[t].value, t))
    best = results[best_trial]

    for trial, result in enumerate(results):
        if result.message == 'line_search_failure':
            logger.warning(f"⚠️ Trial {trial} stopped on line-search failure after "
                           f"{result.iterations} iterations (objective {result.value:.6g})")

    logger.info(f"✅ GCP fit rank {options.rank} on {dims}: best trial {best_trial} "
                f"objective {best.value:.6g} ({best.iterations} iterations, {best.message})")

    return FitResult(
        model=CpModel.from_flat(best.x, dims, options.rank),
        objective=best.value,
        trial_objectives=[r.value for r in results],
        iterations_used=[r.iterations for r in results],
        converged=[r.converged for r in results],
        best_trial=best_trial,
        messages=[r.message for r in results],
    )


def complete(tensor: FanPowerTensor, mask: ObservationMask, spec: LossSpec,
             options: FitOptions) -> Tuple[FanPowerTensor, FitResult]:
    """Impute unobserved entries; every entry of the result is the model's value"""
    fit = gcp_fit(tensor, mask, spec, options)
    completed = cp_full(fit.model, tensor.slot_minutes)
    return completed, fit
