"""Limited-memory BFGS with strong-Wolfe line search and box projection.

Bounds are handled by projecting trial points into the box and zeroing
gradient components of active constraints that point outward, rather
than the full generalized-Cauchy-point machinery: pixel boxes are simple
and rarely active.  If a projected step breaks the curvature condition
the history is reset instead of storing a bad pair.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

CURVATURE_FLOOR = 1e-10
LINE_SEARCH_BUDGET = 20
_MIN_STEP = 1e-20

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass
class LbfgsConfig:
    history_size: int = 10
    max_iterations: int = 100
    c1: float = 1e-4
    c2: float = 0.9
    grad_tolerance: float = 1e-8
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError(f"need 0 < c1 < c2 < 1, got c1={self.c1}, c2={self.c2}")
        if self.history_size < 1:
            raise ValueError("history_size must be at least 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    @property
    def has_bounds(self) -> bool:
        return self.lower is not None or self.upper is not None


@dataclass
class LbfgsState:
    """Point, gradient, and the circular (s, y, rho) pair buffer."""

    x: np.ndarray
    gradient: np.ndarray
    pairs: deque = field(default_factory=lambda: deque(maxlen=10))
    iteration: int = 0
    best_x: Optional[np.ndarray] = None
    best_value: float = np.inf

    def push_pair(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Store a curvature pair unless s'y is at or below the floor."""
        sy = float(np.sum(s * y))
        if sy <= CURVATURE_FLOOR:
            return False
        self.pairs.append((s, y, 1.0 / sy))
        return True


def project(x: np.ndarray, config: LbfgsConfig) -> np.ndarray:
    if not config.has_bounds:
        return x
    return np.clip(x, config.lower, config.upper)


def project_gradient(
    gradient: np.ndarray, x: np.ndarray, config: LbfgsConfig
) -> np.ndarray:
    """Zero gradient components whose descent direction leaves the box."""
    if not config.has_bounds:
        return gradient
    out = gradient.copy()
    if config.lower is not None:
        out[(x <= config.lower) & (gradient > 0)] = 0.0
    if config.upper is not None:
        out[(x >= config.upper) & (gradient < 0)] = 0.0
    return out


def two_loop_direction(state: LbfgsState) -> np.ndarray:
    """Search direction -H.g from the stored pairs (identity when empty).

    Guaranteed to be a descent direction: if the recursion ever produces
    an ascent direction the history is cleared and steepest descent is
    returned.
    """
    gradient = state.gradient
    if not state.pairs:
        return -gradient
    q = gradient.astype(np.float64).copy()
    alphas: List[float] = []
    for s, y, rho in reversed(state.pairs):
        alpha = rho * float(np.sum(s * q))
        q -= alpha * y
        alphas.append(alpha)
    s_new, y_new, _ = state.pairs[-1]
    gamma = float(np.sum(s_new * y_new) / np.sum(y_new * y_new))
    r = gamma * q
    for (s, y, rho), alpha in zip(state.pairs, reversed(alphas)):
        beta = rho * float(np.sum(y * r))
        r += s * (alpha - beta)
    direction = -r
    if float(np.sum(direction * gradient)) >= 0.0:
        state.pairs.clear()
        return -gradient
    return direction


class _RayEvaluations:
    """Objective restricted to project(point + t*direction), with a log."""

    def __init__(self, objective: Objective, point, direction, config):
        self.objective = objective
        self.point = point
        self.direction = direction
        self.config = config
        self.log = {}  # t -> (x_t, f, g, slope)

    def __call__(self, t: float):
        if t in self.log:
            return self.log[t]
        x_t = project(self.point + t * self.direction, self.config)
        value, gradient = self.objective(x_t)
        value = float(value)
        gradient = np.asarray(gradient, dtype=np.float64)
        if not np.isfinite(value):
            value = np.inf
        slope = float(np.sum(gradient * self.direction))
        entry = (x_t, value, gradient, slope)
        self.log[t] = entry
        return entry


def _search(ray: _RayEvaluations, config: LbfgsConfig) -> Optional[float]:
    """Strong-Wolfe bracketing with interpolation zoom.

    Within the evaluation budget, returns a step satisfying both Wolfe
    conditions; on budget exhaustion, the smallest evaluated step that
    satisfies Armijo; if none exists down to 1e-20, None.
    """
    _, f0, _, slope0 = ray(0.0)
    if slope0 >= 0.0:
        return None
    c1, c2 = config.c1, config.c2
    evaluations = 0

    def armijo(t: float, f: float) -> bool:
        # The strict f < f0 guard rejects steps so small that the bound
        # holds only through rounding; accepting them would stall.
        return f <= f0 + c1 * t * slope0 and f < f0

    def smallest_armijo() -> Optional[float]:
        ok = [t for t, (_, f, _, _) in ray.log.items() if t > 0.0 and armijo(t, f)]
        return min(ok) if ok else None

    def backtrack_from(t: float) -> Optional[float]:
        nonlocal evaluations
        while t > _MIN_STEP:
            t *= 0.5
            _, f, _, _ = ray(t)
            evaluations += 1
            if armijo(t, f):
                return t
        return None

    def zoom(lo: float, hi: float) -> Optional[float]:
        nonlocal evaluations
        while evaluations < LINE_SEARCH_BUDGET:
            _, f_lo, _, slope_lo = ray(lo)
            _, f_hi, _, _ = ray(hi)
            t = _quadratic_step(lo, f_lo, slope_lo, hi, f_hi)
            _, f, g, slope = ray(t)
            evaluations += 1
            if not armijo(t, f) or f >= f_lo:
                hi = t
                continue
            if np.all(np.isfinite(g)) and abs(slope) <= -c2 * slope0:
                return t
            if slope * (hi - lo) >= 0.0:
                hi = lo
            lo = t
        best = smallest_armijo()
        return best if best is not None else backtrack_from(min(abs(lo), abs(hi)) or 1.0)

    t_prev, f_prev = 0.0, f0
    t = 1.0
    first = True
    while evaluations < LINE_SEARCH_BUDGET:
        _, f, g, slope = ray(t)
        evaluations += 1
        if not armijo(t, f) or (not first and f >= f_prev):
            return zoom(t_prev, t)
        if np.all(np.isfinite(g)) and abs(slope) <= -c2 * slope0:
            return t
        if slope >= 0.0:
            return zoom(t, t_prev)
        t_prev, f_prev = t, f
        t *= 2.0
        first = False
    best = smallest_armijo()
    return best if best is not None else backtrack_from(1.0)


def _quadratic_step(lo, f_lo, slope_lo, hi, f_hi) -> float:
    """Minimizer of the quadratic through (lo, f_lo, slope_lo) and (hi, f_hi),
    safeguarded to the middle 80% of the interval; bisection otherwise."""
    width = hi - lo
    denom = f_hi - f_lo - slope_lo * width
    if np.isfinite(denom) and abs(denom) > 1e-300:
        t = lo - slope_lo * width * width / (2.0 * denom)
        inner_lo = lo + 0.1 * width
        inner_hi = hi - 0.1 * width
        if min(inner_lo, inner_hi) <= t <= max(inner_lo, inner_hi):
            return t
    return lo + 0.5 * width


def wolfe_line_search(
    objective: Objective,
    point: np.ndarray,
    direction: np.ndarray,
    config: Optional[LbfgsConfig] = None,
) -> Optional[float]:
    """Step length along direction satisfying the strong Wolfe conditions.

    Returns None when no Armijo-acceptable step exists down to 1e-20
    (for example when the direction is not a descent direction).
    """
    config = config if config is not None else LbfgsConfig()
    ray = _RayEvaluations(objective, np.asarray(point, np.float64), direction, config)
    return _search(ray, config)


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    trace: List[float]
    iterations: int
    converged: bool
    line_search_failed: bool = False


def minimize(
    objective: Objective,
    x0: np.ndarray,
    config: Optional[LbfgsConfig] = None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
) -> MinimizeResult:
    """Minimize the objective from x0, honoring any box bounds.

    The trace holds the objective value at x0 and after every accepted
    step; it is non-increasing.  A persistent line-search failure (after
    a history reset) stops early and reports the best iterate with the
    ``line_search_failed`` flag set instead of raising.
    """
    config = config if config is not None else LbfgsConfig()
    x = project(np.asarray(x0, dtype=np.float64).copy(), config)
    value, gradient = objective(x)
    value = float(value)
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
        raise ValueError("objective is not finite at the (projected) start point")

    state = LbfgsState(x=x, gradient=project_gradient(gradient, x, config))
    state.pairs = deque(maxlen=config.history_size)
    state.best_x, state.best_value = x.copy(), value
    trace = [value]
    line_search_failed = False
    converged = False

    while state.iteration < config.max_iterations:
        grad_norm = float(np.max(np.abs(state.gradient))) if state.gradient.size else 0.0
        if grad_norm <= config.grad_tolerance * (1.0 + abs(value)):
            converged = True
            break

        direction = two_loop_direction(state)
        ray = _RayEvaluations(objective, state.x, direction, config)
        ray.log[0.0] = (state.x, value, state.gradient, float(np.sum(state.gradient * direction)))
        step = _search(ray, config)
        if step is None and state.pairs:
            # Retry once from a clean history along steepest descent.
            state.pairs.clear()
            direction = -state.gradient
            ray = _RayEvaluations(objective, state.x, direction, config)
            ray.log[0.0] = (state.x, value, state.gradient, float(np.sum(state.gradient * direction)))
            step = _search(ray, config)
        if step is None:
            line_search_failed = True
            break

        x_new, value_new, gradient_new, _ = ray(step)
        gradient_new_proj = project_gradient(gradient_new, x_new, config)
        s = x_new - state.x
        y = gradient_new_proj - state.gradient
        if not state.push_pair(s, y) and config.has_bounds:
            state.pairs.clear()

        state.x, state.gradient, value = x_new, gradient_new_proj, value_new
        state.iteration += 1
        trace.append(value)
        if value < state.best_value:
            state.best_value, state.best_x = value, x_new.copy()
        if callback is not None:
            callback(state.iteration, x_new, value)

    return MinimizeResult(
        x=state.best_x,
        fun=state.best_value,
        trace=trace,
        iterations=state.iteration,
        converged=converged,
        line_search_failed=line_search_failed,
    )
