"""Choosing the velocity weight: the weight that maximizes the critical
delay, closed-form bounds around it, bounds on the best achievable critical
delay, the weight beyond which velocity information becomes harmful, and
the weight minimizing oscillation amplitude at a fixed delay.

Everything here lives in the regime arrival_rate*sensitivity > N*service_rate,
where the critical delay is finite and depends on the weight.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from .errors import (InternalContradictionError, NumericDegeneracyError,
                     UnsupportedRegimeError)
from .model import SystemParams
from .spectral import critical_delay

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class DesignSummary:
    """Summary of the weight-design quantities for one parameter set."""

    optimal_weight: float             # weight maximizing the critical delay
    weight_lower: float               # closed-form lower bound on it
    weight_upper: float               # closed-form upper bound on it
    critical_delay_at_zero: float     # critical delay with no velocity info
    critical_delay_at_optimal: float
    delay_lower: float                # bounds on the best critical delay
    delay_upper: float
    harm_threshold: float             # weight beyond which info hurts


@dataclass(frozen=True)
class WeightChoice:
    """Result of amplitude-driven weight selection at a fixed delay."""

    weight: float
    stabilizing: bool                 # True when this weight removes the oscillation
    amplitude: float                  # predicted amplitude at the chosen weight


def _require_design_regime(params: SystemParams) -> None:
    if params.arrival_rate * params.sensitivity <= params.n_queues * params.service_rate:
        raise UnsupportedRegimeError(
            "weight design requires arrival_rate*sensitivity > n_queues*service_rate")


def _at_weight(params: SystemParams, weight: float) -> SystemParams:
    return replace(params, velocity_weight=weight)


def critical_delay_slope(params: SystemParams, weight: float) -> float:
    """Derivative of the first critical delay with respect to the weight.

    Equals 1 at weight 0 and decreases monotonically to -infinity as the
    weight approaches N/(arrival_rate*sensitivity).
    """
    _require_design_regime(params)
    lam_th = params.arrival_rate * params.sensitivity
    n, mu = params.n_queues, params.service_rate
    if not 0 <= weight < n / lam_th:
        raise UnsupportedRegimeError("weight must lie in [0, N/(arrival_rate*sensitivity))")
    dcr = critical_delay(_at_weight(params, weight))
    return 1 / (1 + weight * mu) - weight * lam_th ** 2 * dcr / (n ** 2 - (weight * lam_th) ** 2)


def optimal_weight_bounds(params: SystemParams) -> Tuple[float, float]:
    """Closed-form bounds bracketing the critical-delay-maximizing weight.

    Both come from replacing the critical delay in the stationarity
    condition by a constant: its value at weight zero for the upper bound,
    and that plus the weight-limit width for the lower bound.
    """
    _require_design_regime(params)
    lam_th = params.arrival_rate * params.sensitivity
    n, mu = params.n_queues, params.service_rate
    d0 = critical_delay(_at_weight(params, 0.0))

    def solve(t: float) -> float:
        # positive root of (lam_th^2 (1 + t mu)) w^2 + (lam_th^2 t) w - n^2 = 0
        disc = (lam_th * t) ** 2 + 4 * n ** 2 * t * mu + 4 * n ** 2
        return (-t * lam_th + math.sqrt(disc)) / (2 * lam_th * (1 + t * mu))

    lower = solve(d0 + n / lam_th)
    upper = solve(d0)
    return lower, upper


def _hybrid_root(f: Callable[[float], float], lo: float, hi: float,
                 rtol: float = 1e-12, max_iter: int = 200) -> float:
    """Bracketed regula-falsi with bisection fallback; f(lo) and f(hi)
    must have opposite signs."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise InternalContradictionError("root bracket does not change sign")
    bisect_next = False
    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
        mid = lo + (hi - lo) / 2
        if bisect_next:
            x = mid
        else:
            denom = f_hi - f_lo
            x = hi - f_hi * (hi - lo) / denom if denom != 0 else mid
            if not lo < x < hi:
                x = mid
        width = hi - lo
        fx = f(x)
        if fx == 0:
            return x
        if f_lo * fx < 0:
            hi, f_hi = x, fx
        else:
            lo, f_lo = x, fx
        # force a bisection whenever false position failed to halve the bracket
        bisect_next = (hi - lo) > 0.5 * width
    return lo + (hi - lo) / 2


def optimal_weight(params: SystemParams) -> float:
    """The unique weight in (0, N/(arrival_rate*sensitivity)) maximizing the
    first critical delay, located as the zero of the slope between its
    closed-form bounds."""
    lower, upper = optimal_weight_bounds(params)
    return _hybrid_root(lambda w: critical_delay_slope(params, w), lower, upper)


def max_critical_delay_bounds(params: SystemParams) -> Tuple[float, float]:
    """Bounds on the critical delay at the optimal weight.

    Lower bound: the larger critical delay at the two weight bounds.
    Upper bound: the smaller of the two tangent-line extrapolations from
    the weight bounds (valid because the slope decreases monotonically).
    """
    lower_w, upper_w = optimal_weight_bounds(params)
    d_lo = critical_delay(_at_weight(params, lower_w))
    d_hi = critical_delay(_at_weight(params, upper_w))
    s_lo = critical_delay_slope(params, lower_w)
    s_hi = critical_delay_slope(params, upper_w)
    if s_lo <= 0:
        raise InternalContradictionError(
            "slope at the lower weight bound must be positive")
    width = upper_w - lower_w
    upper_a = d_lo + width * s_lo
    upper_b = d_hi - width * s_hi
    return max(d_lo, d_hi), min(upper_a, upper_b)


def harm_threshold(params: SystemParams) -> float:
    """Weight above which the critical delay drops below its no-velocity
    value, so announcing velocity hurts stability.

    Unique zero of critical_delay(w) - critical_delay(0) to the right of
    the optimal weight.
    """
    _require_design_regime(params)
    lam_th = params.arrival_rate * params.sensitivity
    d0 = critical_delay(_at_weight(params, 0.0))
    w_opt = optimal_weight(params)
    hi = (1 - 1e-9) * params.n_queues / lam_th
    return _hybrid_root(
        lambda w: critical_delay(_at_weight(params, w)) - d0,
        w_opt + 1e-10, hi)


def _golden_section(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-8) -> float:
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return (lo + hi) / 2


def amplitude_minimizing_weight(params: SystemParams, delay: float,
                                order: int = 2) -> WeightChoice:
    """Weight minimizing the predicted oscillation amplitude at a delay.

    When the delay does not exceed the best achievable critical delay, the
    oscillation can be removed entirely; the optimal weight is returned
    flagged stabilizing.  Otherwise the chosen amplitude estimate (order 1
    or 2) is minimized over the admissible weights: a 2000-point grid scan
    locates the dominant interior dip and golden section refines it.  The
    estimate degenerates in a thin sliver at the weight limit (the
    expansion's small quantities blow up there), so an interior local
    minimum is preferred over the sliver; the global grid minimum is used
    only when no interior dip exists.
    """
    from .amplitude import first_order_amplitude, second_order_amplitude

    if params.n_queues != 2:
        raise UnsupportedRegimeError("amplitude-based selection is defined for 2 queues")
    _require_design_regime(params)
    if order not in (1, 2):
        raise UnsupportedRegimeError("order must be 1 or 2")
    if delay <= 0:
        raise UnsupportedRegimeError("delay must be positive")

    w_opt = optimal_weight(params)
    best_dcr = critical_delay(_at_weight(params, w_opt))
    if delay <= best_dcr:
        return WeightChoice(weight=w_opt, stabilizing=True, amplitude=0.0)

    hi = (1 - 1e-6) * params.n_queues / (params.arrival_rate * params.sensitivity)

    def objective(w: float) -> float:
        p = _at_weight(params, w)
        try:
            if order == 1:
                return first_order_amplitude(p, delay)
            return second_order_amplitude(p, delay).second_order
        except NumericDegeneracyError:
            return math.inf

    grid = np.linspace(0.0, hi, 2000)
    values = np.array([objective(w) for w in grid])

    interior = [i for i in range(1, len(grid) - 1)
                if values[i] <= values[i - 1] and values[i] <= values[i + 1]]
    if interior:
        i_best = min(interior, key=lambda i: values[i])
        w = _golden_section(objective, grid[i_best - 1], grid[i_best + 1])
    else:
        i_best = int(np.argmin(values))
        lo_i = max(i_best - 1, 0)
        hi_i = min(i_best + 1, len(grid) - 1)
        w = _golden_section(objective, grid[lo_i], grid[hi_i])
        if objective(w) > values[i_best]:
            w = float(grid[i_best])
    return WeightChoice(weight=float(w), stabilizing=False,
                        amplitude=float(objective(w)))


def design_summary(params: SystemParams) -> DesignSummary:
    """Assemble every weight-design quantity for one parameter set."""
    _require_design_regime(params)
    lower_w, upper_w = optimal_weight_bounds(params)
    w_opt = optimal_weight(params)
    d0 = critical_delay(_at_weight(params, 0.0))
    d_opt = critical_delay(_at_weight(params, w_opt))
    d_lower, d_upper = max_critical_delay_bounds(params)
    cap = harm_threshold(params)
    return DesignSummary(
        optimal_weight=w_opt, weight_lower=lower_w, weight_upper=upper_w,
        critical_delay_at_zero=d0, critical_delay_at_optimal=d_opt,
        delay_lower=d_lower, delay_upper=d_upper, harm_threshold=cap)
