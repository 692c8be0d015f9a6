"""Method-of-steps integrator for the neutral delayed-announcement system.

The delayed derivative term makes the system neutral: derivative jumps
introduced at t = 0 by the initial history propagate to every multiple of
the delay.  Windows of exactly one delay keep those breakpoints on grid
nodes, so classical RK4 retains its order inside each window.
"""

import io
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

import numpy as np

from .errors import DomainError, IntegrationDivergedError
from .model import SystemParams, equilibrium, mnl_probabilities

__all__ = [
    "HistorySegment", "Trajectory", "ConstantHistory", "EquilibriumPerturbed",
    "CustomHistory", "InitialHistory", "make_history", "integrate",
    "conservation_residual", "trajectory_to_csv",
]


@dataclass(frozen=True)
class HistorySegment:
    """Sampled piece of the solution: times, queue values, queue derivatives.

    Serves both as the initial condition on [-delay, 0] and as the per-window
    memory the integrator reads delayed values from.  Values are interpolated
    with cubic Hermite polynomials built from the stored (value, derivative)
    pairs; derivatives are interpolated with a cubic Lagrange stencil over
    the stored derivative samples so the stored derivatives are reproduced
    exactly at the nodes.
    """

    times: np.ndarray
    values: np.ndarray       # shape (M, N)
    derivatives: np.ndarray  # shape (M, N)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        d = np.atleast_2d(np.asarray(self.derivatives, dtype=float))
        if t.ndim != 1 or len(t) < 1:
            raise DomainError("times must be a non-empty 1-d array")
        if len(t) > 1 and not (np.diff(t) > 0).all():
            raise DomainError("times must be strictly increasing")
        if v.shape != d.shape or v.shape[0] != len(t):
            raise DomainError("values/derivatives must be congruent with times")
        if not (np.isfinite(v).all() and np.isfinite(d).all()):
            raise DomainError("history samples must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "derivatives", d)

    @property
    def n_queues(self) -> int:
        return self.values.shape[1]

    def sample(self, ts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Interpolate (values, derivatives) at the requested times.

        Queries must lie within [times[0], times[-1]] up to roundoff.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        t = self.times
        if len(t) == 1:
            vals = np.repeat(self.values, len(ts), axis=0)
            ders = np.repeat(self.derivatives, len(ts), axis=0)
            return vals, ders
        i = np.clip(np.searchsorted(t, ts, side="right") - 1, 0, len(t) - 2)
        t0 = t[i]
        h = t[i + 1] - t0
        u = (ts - t0) / h
        u2 = u * u
        u3 = u2 * u
        h00 = 2 * u3 - 3 * u2 + 1
        h10 = u3 - 2 * u2 + u
        h01 = -2 * u3 + 3 * u2
        h11 = u3 - u2
        vals = (h00[:, None] * self.values[i]
                + (h10 * h)[:, None] * self.derivatives[i]
                + h01[:, None] * self.values[i + 1]
                + (h11 * h)[:, None] * self.derivatives[i + 1])
        ders = self._sample_derivatives(ts, i)
        return vals, ders

    def _sample_derivatives(self, ts: np.ndarray, i: np.ndarray) -> np.ndarray:
        """Cubic Lagrange interpolation of the stored derivative channel."""
        t = self.times
        m = len(t)
        width = min(4, m)
        j0 = np.clip(i - (width - 2) // 2, 0, m - width)
        idx = j0[:, None] + np.arange(width)[None, :]
        tn = t[idx]                      # (Q, width)
        yn = self.derivatives[idx]       # (Q, width, N)
        w = np.ones((len(ts), width))
        for a in range(width):
            for b in range(width):
                if a != b:
                    w[:, a] *= (ts - tn[:, b]) / (tn[:, a] - tn[:, b])
        return np.einsum("qa,qan->qn", w, yn)


@dataclass(frozen=True)
class Trajectory:
    """Integrated solution on [0, horizon] plus the history it started from.

    Node derivatives equal the model right-hand side evaluated at the node;
    at window breakpoints (multiples of the delay) the stored derivative is
    the right-sided one.
    """

    times: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    params: SystemParams
    history: HistorySegment

    @property
    def n_queues(self) -> int:
        return self.values.shape[1]

    def sample(self, ts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Interpolate the solution anywhere in [-delay, horizon].

        Negative times are answered from the stored initial history, so the
        trajectory reproduces it exactly at its nodes.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        seg = HistorySegment(self.times, self.values, self.derivatives)
        vals = np.empty((len(ts), self.n_queues))
        ders = np.empty_like(vals)
        neg = ts < self.times[0]
        if neg.any():
            vals[neg], ders[neg] = self.history.sample(ts[neg])
        if (~neg).any():
            vals[~neg], ders[~neg] = seg.sample(ts[~neg])
        return vals, ders


@dataclass(frozen=True)
class ConstantHistory:
    """Queues held constant (zero derivative) over the whole history window."""
    values: Tuple[float, ...]


@dataclass(frozen=True)
class EquilibriumPerturbed:
    """Equilibrium shifted by epsilon, held constant over the history window.

    mode "antisymmetric" adds +epsilon to queue 1 and -epsilon to queue 2
    (other queues stay at equilibrium); mode "uniform" adds +epsilon to
    every queue.
    """
    epsilon: float
    mode: str = "antisymmetric"


@dataclass(frozen=True)
class CustomHistory:
    """History given by callables t -> values vector and t -> derivatives vector."""
    values_fn: Callable[[float], np.ndarray]
    derivatives_fn: Callable[[float], np.ndarray]


InitialHistory = Union[ConstantHistory, EquilibriumPerturbed, CustomHistory]


def make_history(kind: InitialHistory, params: SystemParams,
                 samples: int = 64) -> HistorySegment:
    """Sample an initial-history description onto [-delay, 0].

    All resulting queue values must be nonnegative; a perturbation large
    enough to push a queue negative is rejected.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    n = params.n_queues
    if params.delay == 0:
        times = np.array([0.0])
    else:
        times = np.linspace(-params.delay, 0.0, samples + 1)
    m = len(times)

    if isinstance(kind, ConstantHistory):
        base = np.asarray(kind.values, dtype=float)
        if base.shape != (n,):
            raise DomainError(f"constant history needs {n} values")
        values = np.tile(base, (m, 1))
        derivatives = np.zeros_like(values)
    elif isinstance(kind, EquilibriumPerturbed):
        qstar = equilibrium(params)
        base = np.full(n, qstar)
        if kind.mode == "antisymmetric":
            base[0] += kind.epsilon
            base[1] -= kind.epsilon
        elif kind.mode == "uniform":
            base += kind.epsilon
        else:
            raise DomainError(f"unknown perturbation mode {kind.mode!r}")
        values = np.tile(base, (m, 1))
        derivatives = np.zeros_like(values)
    elif isinstance(kind, CustomHistory):
        values = np.array([np.asarray(kind.values_fn(t), dtype=float) for t in times])
        derivatives = np.array([np.asarray(kind.derivatives_fn(t), dtype=float) for t in times])
        if values.shape != (m, n):
            raise DomainError(f"custom history must produce vectors of length {n}")
    else:
        raise DomainError(f"unknown history kind {type(kind).__name__}")

    if values.min() < 0:
        raise DomainError("history queue values must be nonnegative")
    return HistorySegment(times, values, derivatives)


def _rk4_weights(step: float, mu: float) -> Tuple[float, float, float]:
    """Affine RK4 update coefficients for q' = F(t) - mu*q.

    The arrival term depends only on delayed data, so within a window the
    four stages collapse to q_next = a*q + (h/6)*(c1*F(t) + c2*F(t+h/2)
    + F(t+h)) with scalar coefficients.
    """
    m = mu * step
    a = 1 - m + m ** 2 / 2 - m ** 3 / 6 + m ** 4 / 24
    c1 = 1 - m + m ** 2 / 2 - m ** 3 / 4
    c2 = 4 - 2 * m + m ** 2 / 2
    return a, c1, c2


def _window_forcing(params: SystemParams, prev: HistorySegment,
                    query_times: np.ndarray) -> np.ndarray:
    """Arrival forcing lam * p(announcement) at delayed stage times."""
    dv, dr = prev.sample(query_times)
    info = dv + params.velocity_weight * dr
    return params.arrival_rate * mnl_probabilities(info, params.sensitivity)


def integrate(params: SystemParams, history: HistorySegment, horizon: float,
              steps_per_delay: int = 64) -> Trajectory:
    """Integrate the neutral system over [0, horizon] by the method of steps.

    Each window [k*delay, (k+1)*delay] is advanced with classical RK4 at
    fixed step delay/steps_per_delay; delayed values come from the previous
    window via cubic Hermite interpolation and delayed derivatives from the
    stored derivative samples.  Mid-step stages query the midpoint of an
    already-computed window, so every lookup is interpolation, never
    extrapolation.

    For delay == 0 the system degenerates to an ODE and is stepped with a
    fixed absolute step of 0.01/service_rate (with a fixed-point solve of
    the implicit velocity term when the velocity weight is positive).
    """
    if horizon <= 0:
        raise DomainError("horizon must be > 0")
    if params.delay == 0:
        return _integrate_ode(params, history, horizon)
    if steps_per_delay < 8:
        raise DomainError("steps_per_delay must be >= 8")
    if history.n_queues != params.n_queues:
        raise DomainError("history width does not match n_queues")
    tol = 1e-9 * max(1.0, params.delay)
    if history.times[0] > -params.delay + tol or history.times[-1] < -tol:
        raise DomainError("history must cover [-delay, 0]")

    delay = params.delay
    mu = params.service_rate
    h = delay / steps_per_delay
    a, c1, c2 = _rk4_weights(h, mu)

    out_times: List[np.ndarray] = []
    out_values: List[np.ndarray] = []
    out_derivs: List[np.ndarray] = []

    prev = history
    q = history.sample(np.array([0.0]))[0][0]
    htol = 1e-12 * max(1.0, horizon)
    window = 0

    while window * delay < horizon - htol:
        t_start = window * delay
        full_window = (window + 1) * delay <= horizon + htol
        if full_window:
            # endpoints exact at multiples of the delay
            edges = np.linspace(t_start, t_start + delay, steps_per_delay + 1)
        else:
            remainder = horizon - t_start
            n_full = int(np.floor(remainder / h + 1e-12))
            inner = t_start + np.arange(n_full + 1) * h
            edges = inner if horizon - inner[-1] <= 1e-12 * delay \
                else np.concatenate((inner, [horizon]))
        steps = np.diff(edges)
        query = np.sort(np.concatenate((edges, edges[:-1] + steps / 2))) - delay
        F = _window_forcing(params, prev, query)

        n_steps = len(steps)
        w_values = np.empty((n_steps + 1, params.n_queues))
        w_values[0] = q
        for n in range(n_steps):
            if abs(steps[n] - h) < 1e-15 * h:
                an, c1n, c2n = a, c1, c2
            else:
                an, c1n, c2n = _rk4_weights(steps[n], mu)
            b = (steps[n] / 6) * (c1n * F[2 * n] + c2n * F[2 * n + 1] + F[2 * n + 2])
            q = an * q + b
            w_values[n + 1] = q
        if not np.isfinite(w_values).all():
            raise IntegrationDivergedError(
                f"non-finite state in window starting at t={t_start}", last_time=t_start)

        w_derivs = F[::2] - mu * w_values
        prev = HistorySegment(edges, w_values, w_derivs)

        out_times.append(edges if not out_times else edges[1:])
        out_values.append(w_values if not out_values else w_values[1:])
        out_derivs.append(w_derivs if not out_derivs else w_derivs[1:])
        window += 1

    return Trajectory(np.concatenate(out_times), np.vstack(out_values),
                      np.vstack(out_derivs), params, history)


def _ode_rates(params: SystemParams, q: np.ndarray) -> np.ndarray:
    """Queue rates for delay == 0, solving the implicit velocity term."""
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    d = params.velocity_weight
    v = lam * mnl_probabilities(q, th) - mu * q
    if d == 0:
        return v
    for _ in range(200):
        v_new = lam * mnl_probabilities(q + d * v, th) - mu * q
        if np.max(np.abs(v_new - v)) < 1e-13 * max(1.0, lam):
            return v_new
        v = 0.5 * (v + v_new)
    raise IntegrationDivergedError("implicit velocity solve did not converge",
                                   last_time=0.0)


def _integrate_ode(params: SystemParams, history: HistorySegment,
                   horizon: float) -> Trajectory:
    h = 0.01 / params.service_rate
    n_steps = max(1, int(np.ceil(horizon / h - 1e-12)))
    times = np.minimum(np.arange(n_steps + 1) * h, horizon)
    q = history.values[-1].copy()
    values = np.empty((n_steps + 1, params.n_queues))
    derivs = np.empty_like(values)
    values[0] = q
    derivs[0] = _ode_rates(params, q)
    for n in range(n_steps):
        step = times[n + 1] - times[n]
        k1 = _ode_rates(params, q)
        k2 = _ode_rates(params, q + 0.5 * step * k1)
        k3 = _ode_rates(params, q + 0.5 * step * k2)
        k4 = _ode_rates(params, q + step * k3)
        q = q + (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(q).all():
            raise IntegrationDivergedError(
                f"non-finite state at t={times[n + 1]}", last_time=times[n])
        values[n + 1] = q
        derivs[n + 1] = _ode_rates(params, q)
    return Trajectory(times, values, derivs, params, history)


def conservation_residual(traj: Trajectory) -> float:
    """Deviation of the total queue content from its exact closed form.

    The probabilities sum to one, so the total S = sum_i q_i obeys the
    delay-free equation S' = arrival_rate - service_rate * S regardless of
    the announcement dynamics.  Returns the max deviation of the integrated
    total from the exact exponential solution through S(0); an exact check
    of the integrator.
    """
    if len(traj.times) == 0:
        raise DomainError("trajectory is empty")
    lam, mu = traj.params.arrival_rate, traj.params.service_rate
    s = traj.values.sum(axis=1)
    target = lam / mu + (s[0] - lam / mu) * np.exp(-mu * (traj.times - traj.times[0]))
    return float(np.max(np.abs(s - target)))


def trajectory_to_csv(traj: Trajectory) -> str:
    """Serialize a trajectory to CSV: t,q1..qN,dq1..dqN at full precision."""
    n = traj.n_queues
    buf = io.StringIO()
    header = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"dq{i + 1}" for i in range(n)]
    buf.write(",".join(header) + "\n")
    for t, q, dq in zip(traj.times, traj.values, traj.derivatives):
        row = [f"{t:.17g}"] + [f"{x:.17g}" for x in q] + [f"{x:.17g}" for x in dq]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
