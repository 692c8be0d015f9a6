"""Fluid model of N parallel queues joined through delayed announcements.

Customers arrive at a fixed rate and choose among N infinite-server queues
according to a multinomial-logit preference for the smallest announced value.
The announcement for each queue is its queue length plus a weighted queue
velocity, both observed one travel delay ago, which makes the queue-length
dynamics a system of neutral delay differential equations.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

# Relative tolerance used when deciding whether parameters sit exactly on a
# boundary between stability regimes.
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Constants of the N-queue announcement model.

    Attributes
    ----------
    arrival_rate : float
        Total customer arrival rate (customers per unit time, > 0).
    service_rate : float
        Per-customer service speed of the infinite-server queues (> 0).
    sensitivity : float
        Choice-model preference strength; larger values make customers
        favor the smallest announcement more sharply (> 0).
    n_queues : int
        Number of parallel queues (>= 2).
    velocity_weight : float
        Weight multiplying the announced queue velocity (>= 0).
    delay : float
        Age of the announced information (>= 0).
    """

    arrival_rate: float
    service_rate: float
    sensitivity: float
    n_queues: int
    velocity_weight: float
    delay: float

    def __post_init__(self):
        for name in ("arrival_rate", "service_rate", "sensitivity",
                     "velocity_weight", "delay"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.arrival_rate <= 0:
            raise DomainError("arrival_rate must be > 0")
        if self.service_rate <= 0:
            raise DomainError("service_rate must be > 0")
        if self.sensitivity <= 0:
            raise DomainError("sensitivity must be > 0")
        if int(self.n_queues) != self.n_queues or self.n_queues < 2:
            raise DomainError("n_queues must be an integer >= 2")
        if self.velocity_weight < 0:
            raise DomainError("velocity_weight must be >= 0")
        if self.delay < 0:
            raise DomainError("delay must be >= 0")

    @property
    def weight_limit(self) -> float:
        """N / (arrival_rate * sensitivity): weights at or above this destabilize."""
        return self.n_queues / (self.arrival_rate * self.sensitivity)

    @property
    def feedback_gain(self) -> float:
        """arrival_rate * sensitivity / (N * service_rate), the announcement loop gain."""
        return (self.arrival_rate * self.sensitivity
                / (self.n_queues * self.service_rate))


@dataclass(frozen=True)
class QueueState:
    """Queue lengths and their rates of change at one instant."""

    values: np.ndarray
    derivatives: np.ndarray
    time: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        d = np.asarray(self.derivatives, dtype=float)
        if v.shape != d.shape or v.ndim != 1:
            raise DomainError("values and derivatives must be equal-length vectors")
        if not (np.isfinite(v).all() and np.isfinite(d).all()):
            raise DomainError("queue state entries must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "derivatives", d)


class StabilityRegion(Enum):
    """Qualitative stability classification of the equilibrium.

    The classification depends on the loop gain arrival_rate*sensitivity
    versus N*service_rate and on the velocity weight versus N/(arrival_rate
    *sensitivity); the announcement delay plays no role here.
    """

    ALWAYS_STABLE = "always_stable"                    # gain low, weight below limit
    DELAY_LIMITED = "delay_limited"                    # stable only below the first critical delay
    NEVER_STABLE_LOW_GAIN = "never_stable_low_gain"    # weight above limit, gain low
    NEVER_STABLE_HIGH_GAIN = "never_stable_high_gain"  # weight above limit, gain high
    EDGE_STABLE = "edge_stable"                        # weight exactly at limit, stable for all delays
    EDGE_UNSTABLE = "edge_unstable"                    # weight exactly at limit, never stable
    EDGE_MARGINAL = "edge_marginal"                    # weight at limit and gain exactly 1

    @property
    def stable_for_all_delays(self) -> bool:
        return self in (StabilityRegion.ALWAYS_STABLE, StabilityRegion.EDGE_STABLE)

    @property
    def never_stable(self) -> bool:
        return self in (StabilityRegion.NEVER_STABLE_LOW_GAIN,
                        StabilityRegion.NEVER_STABLE_HIGH_GAIN,
                        StabilityRegion.EDGE_UNSTABLE)


def mnl_probabilities(info: np.ndarray, sensitivity: float) -> np.ndarray:
    """Multinomial-logit choice probabilities for announced values.

    Computed in log space with max subtraction, so arbitrarily large
    announcements cannot overflow.  Smaller announcements get larger
    probabilities.

    Parameters
    ----------
    info : array_like
        Announced value per queue.
    sensitivity : float
        Preference strength (> 0).

    Returns
    -------
    ndarray
        Probabilities, strictly positive and summing to 1.
    """
    info = np.asarray(info, dtype=float)
    if not np.isfinite(info).all():
        raise DomainError("announcement values must be finite")
    if not np.isfinite(sensitivity) or sensitivity <= 0:
        raise DomainError("sensitivity must be finite and > 0")
    logits = -sensitivity * info
    logits = logits - logits.max(axis=-1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=-1, keepdims=True)


def announcement(q_delayed: np.ndarray, qdot_delayed: np.ndarray,
                 velocity_weight: float) -> np.ndarray:
    """Announced value per queue: delayed length plus weighted delayed velocity."""
    q = np.asarray(q_delayed, dtype=float)
    qd = np.asarray(qdot_delayed, dtype=float)
    if q.shape != qd.shape:
        raise DomainError("queue values and derivatives must have matching shapes")
    if not (np.isfinite(q).all() and np.isfinite(qd).all()):
        raise DomainError("announcement inputs must be finite")
    return q + velocity_weight * qd


def rhs(values: np.ndarray, delayed_values: np.ndarray,
        delayed_rates: np.ndarray, params: SystemParams) -> np.ndarray:
    """Instantaneous queue-length rates of the delayed-announcement model.

    Each queue gains arrivals in proportion to its choice probability
    (computed from the delayed announcements) and loses customers at
    service_rate per customer present.  The rates always sum to
    arrival_rate - service_rate * sum(values) because the probabilities
    sum to one.
    """
    values = np.asarray(values, dtype=float)
    if not np.isfinite(values).all():
        raise DomainError("current queue values must be finite")
    info = announcement(delayed_values, delayed_rates, params.velocity_weight)
    p = mnl_probabilities(info, params.sensitivity)
    return params.arrival_rate * p - params.service_rate * values


def equilibrium(params: SystemParams) -> float:
    """The unique equilibrium queue length, arrival_rate / (N * service_rate)."""
    return params.arrival_rate / (params.n_queues * params.service_rate)


def _near(a: float, b: float, rtol: float = BOUNDARY_RTOL) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def classify_region(params: SystemParams) -> StabilityRegion:
    """Classify the stability regime from the rates and the velocity weight.

    Pure function of (arrival_rate, service_rate, sensitivity, n_queues,
    velocity_weight); the delay is ignored.  Boundary comparisons use a
    relative tolerance of 1e-12, and exact ties on the weight limit route
    to the edge variants, resolved by the sign of velocity_weight *
    service_rate - 1.
    """
    gain_num = params.arrival_rate * params.sensitivity   # lambda * theta
    gain_den = params.n_queues * params.service_rate      # N * mu
    # weight comparison done on delta*lambda*theta vs N to stay scale-free
    w_scaled = params.velocity_weight * gain_num
    n = float(params.n_queues)

    if _near(w_scaled, n):
        # at the weight limit, delta*mu - 1 has the sign of N*mu - lambda*theta
        if _near(gain_num, gain_den):
            return StabilityRegion.EDGE_MARGINAL
        if gain_den > gain_num:
            return StabilityRegion.EDGE_STABLE
        return StabilityRegion.EDGE_UNSTABLE

    if gain_num > gain_den and not _near(gain_num, gain_den):
        if w_scaled < n:
            return StabilityRegion.DELAY_LIMITED
        return StabilityRegion.NEVER_STABLE_HIGH_GAIN

    # gain_num <= gain_den (ties included: stable for all delays when the
    # weight is below the limit)
    if w_scaled < n:
        return StabilityRegion.ALWAYS_STABLE
    return StabilityRegion.NEVER_STABLE_LOW_GAIN
