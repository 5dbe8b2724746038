"""
Limited-memory BFGS minimization with Armijo backtracking

Search directions come from the two-loop recursion over the last `lbfgs_memory`
curvature pairs. Step lengths come from scipy's Armijo backtracking search
(quadratic then cubic interpolation), so accepted iterates never increase the
objective.
"""

import logging
from collections import deque
from typing import Callable, Deque, Dict, Optional, Tuple

import numpy as np
from scipy.optimize._linesearch import scalar_search_armijo

from services.errors import NonFiniteObjectiveError
from .fit_models import FitOptions, OptimizeResult

logger = logging.getLogger(__name__)

ValueAndGradient = Callable[[np.ndarray], Tuple[float, np.ndarray]]

ARMIJO_C1 = 1e-4
MIN_STEP = 1e-20
MAX_OVERFLOW_SHRINKS = 20


def _two_loop(gradient: np.ndarray, s_history: Deque[np.ndarray], y_history: Deque[np.ndarray],
              rho_history: Deque[float]) -> np.ndarray:
    """Return -H g for the implicit inverse-Hessian approximation H"""
    q = gradient.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_history), reversed(y_history), reversed(rho_history)):
        alpha = rho * np.dot(s, q)
        q -= alpha * y
        alphas.append(alpha)

    if s_history:
        s, y = s_history[-1], y_history[-1]
        q *= np.dot(s, y) / np.dot(y, y)

    for (s, y, rho), alpha in zip(zip(s_history, y_history, rho_history), reversed(alphas)):
        beta = rho * np.dot(y, q)
        q += (alpha - beta) * s

    return -q


def armijo_step(fun: ValueAndGradient, x: np.ndarray, direction: np.ndarray, f0: float,
                slope: float, alpha0: float) -> Optional[Tuple[float, float, np.ndarray]]:
    """Armijo backtracking along direction; returns (alpha, value, gradient) or None on failure"""
    evaluations: Dict[float, Tuple[float, np.ndarray]] = {}

    def phi(alpha: float) -> float:
        if alpha not in evaluations:
            value, grad = fun(x + alpha * direction)
            evaluations[alpha] = (np.float64(value), grad)
        return evaluations[alpha][0]

    # Overflowed trial points: shrink until the objective is finite
    for _ in range(MAX_OVERFLOW_SHRINKS):
        if np.isfinite(phi(alpha0)):
            break
        alpha0 *= 0.1
    else:
        return None

    alpha, _ = scalar_search_armijo(phi, f0, slope, c1=ARMIJO_C1, alpha0=alpha0, amin=MIN_STEP)
    if alpha is None or alpha <= 0:
        return None
    value, grad = evaluations[alpha]
    if not np.all(np.isfinite(grad)):
        return None
    return float(alpha), float(value), grad


def lbfgs_minimize(value_and_gradient: ValueAndGradient, initial: np.ndarray,
                   options: FitOptions) -> OptimizeResult:
    """
    Minimize a smooth function of a flat parameter vector.

    Stops when ||g||_inf / max(1, |f|) <= options.gradient_tolerance, after
    options.max_iterations accepted steps, or when the line search fails.
    """
    x = np.array(initial, dtype=np.float64, copy=True)
    value, grad = value_and_gradient(x)
    value = float(value)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise NonFiniteObjectiveError(f"Objective is not finite at the initial point (value={value})")

    memory = options.lbfgs_memory
    s_history: Deque[np.ndarray] = deque(maxlen=memory)
    y_history: Deque[np.ndarray] = deque(maxlen=memory)
    rho_history: Deque[float] = deque(maxlen=memory)
    history = [value]
    iterations = 0
    converged = False
    message = 'max_iterations'

    while True:
        scaled_norm = np.max(np.abs(grad)) / max(1.0, abs(value)) if grad.size else 0.0
        if scaled_norm <= options.gradient_tolerance:
            converged = True
            message = 'gradient_tolerance'
            break
        if iterations >= options.max_iterations:
            message = 'max_iterations'
            break

        direction = _two_loop(grad, s_history, y_history, rho_history)
        slope = float(np.dot(grad, direction))
        if not np.isfinite(slope) or slope >= 0:
            # Not a descent direction: restart from steepest descent
            s_history.clear()
            y_history.clear()
            rho_history.clear()
            direction = -grad
            slope = -float(np.dot(grad, grad))

        alpha = 1.0 if s_history else min(1.0, 1.0 / np.linalg.norm(grad))
        step = armijo_step(value_and_gradient, x, direction, value, slope, alpha)
        if step is None:
            message = 'line_search_failure'
            logger.debug(f"Line search failed at iteration {iterations} (f={value:.6g})")
            break

        alpha, new_value, new_grad = step
        s = alpha * direction
        y = new_grad - grad
        sy = float(np.dot(s, y))
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            s_history.append(s)
            y_history.append(y)
            rho_history.append(1.0 / sy)

        x = x + s
        value, grad = new_value, new_grad
        history.append(value)
        iterations += 1

        if iterations % 50 == 0:
            logger.debug(f"L-BFGS iteration {iterations}: f={value:.10g}, |g|inf={np.max(np.abs(grad)):.3g}")

    return OptimizeResult(x=x, value=value, iterations=iterations, converged=converged,
                          message=message, history=history)
