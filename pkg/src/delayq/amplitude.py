"""Limit-cycle amplitude theory for the two-queue system.

Near the first critical delay the difference of the two queues behaves like
a weakly nonlinear oscillator.  Averaging its radial equation proves the
bifurcation is supercritical and gives a first-order amplitude growing like
the square root of the delay excess; a strained-time expansion carried one
order further adds sin/cos corrections at the base and third harmonics and
a frequency shift, which extends the amplitude prediction much closer to
the weight limit.
"""

import math
from dataclasses import dataclass
from enum import Enum

from .errors import (DegenerateRegimeError, InternalContradictionError,
                     NumericDegeneracyError, UnsupportedRegimeError)
from .model import SystemParams
from .spectral import critical_delay, critical_frequency


class HopfSide(Enum):
    """Which side of a critical delay the stable cycle appears on."""

    CYCLE_FOR_LARGER_DELAY = "cycle_for_larger_delay"     # weight*service_rate < 1
    CYCLE_FOR_SMALLER_DELAY = "cycle_for_smaller_delay"   # weight*service_rate > 1


@dataclass(frozen=True)
class SlowFlowCoefficients:
    """Coefficients of the averaged radial equation dR/dt = -R(c1 R^2 - c2)/c3.

    c1 and c3 are positive whenever a crossing frequency exists; the sign
    of c2 matches the sign of alpha (the delay excess) when
    velocity_weight*service_rate < 1 and is opposite when > 1, which is
    what makes the bifurcation supercritical on the corresponding side.
    """

    c1: float
    c2: float
    c3: float
    alpha: float


@dataclass(frozen=True)
class LindstedtCoefficients:
    """Strained-time expansion coefficients of the queue-difference cycle.

    The cycle is base_amplitude*cos(tau) plus corrections a1*sin(tau)
    + a2*cos(tau) + a3*sin(3 tau) + a4*cos(3 tau), with the crest pinned at
    tau = 0 (a1 = -3 a3) and frequency shifted by frequency_shift.
    """

    base_amplitude: float
    frequency_shift: float
    a1: float
    a2: float
    a3: float
    a4: float


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Predicted per-queue oscillation amplitude near the first crossing."""

    first_order: float
    second_order: float
    omega_corrected: float
    coefficients: LindstedtCoefficients


def _require_two_queues(params: SystemParams) -> None:
    if params.n_queues != 2:
        raise UnsupportedRegimeError("amplitude theory is derived for exactly 2 queues")


def _critical_pair(params: SystemParams):
    w0 = critical_frequency(params)
    if w0 is None:
        raise UnsupportedRegimeError(
            "no imaginary-axis crossing exists for these parameters")
    return w0, critical_delay(params, 0)


def hopf_side(params: SystemParams) -> HopfSide:
    """Side of the critical delay on which the stable cycle is born."""
    _require_two_queues(params)
    dm = params.velocity_weight * params.service_rate
    if dm == 1:
        raise DegenerateRegimeError(
            "velocity_weight*service_rate == 1 makes the cycle side undefined")
    _critical_pair(params)
    if dm < 1:
        return HopfSide.CYCLE_FOR_LARGER_DELAY
    return HopfSide.CYCLE_FOR_SMALLER_DELAY


def slow_flow(params: SystemParams, delay: float) -> SlowFlowCoefficients:
    """Averaged radial-equation coefficients at a given operating delay."""
    _require_two_queues(params)
    w0, dcr = _critical_pair(params)
    lam, mu, d = params.arrival_rate, params.service_rate, params.velocity_weight
    alpha = delay - dcr
    w2 = w0 * w0
    ms = mu * mu + w2
    one = 1 + d * d * w2
    q = (1 - d * mu) * (mu - d * w2)
    c1 = ms * (ms * one * dcr + q)
    c2 = 4 * alpha * lam ** 2 * w2 * (1 - (d * mu) ** 2)
    c3 = 4 * lam ** 2 * (ms * one * dcr ** 2 + 2 * q * dcr + (1 - d * mu) ** 2)
    if c1 <= 0 or c3 <= 0:
        raise InternalContradictionError(
            f"slow-flow coefficients must be positive (c1={c1}, c3={c3})")
    return SlowFlowCoefficients(c1=c1, c2=c2, c3=c3, alpha=alpha)


def _amplitude_guards(params: SystemParams) -> None:
    _require_two_queues(params)
    lam_th = params.arrival_rate * params.sensitivity
    if params.velocity_weight * params.service_rate >= 1:
        raise UnsupportedRegimeError(
            "amplitude expansion is derived for velocity_weight*service_rate < 1")
    if params.velocity_weight >= 2 / lam_th:
        raise UnsupportedRegimeError(
            "weight must be below 2/(arrival_rate*sensitivity)")


def _growth_denominator(params: SystemParams, dcr: float) -> float:
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    d = params.velocity_weight
    lt2 = (lam * th) ** 2
    return 16 * mu + lt2 * (4 * dcr - 4 * d + d ** 3 * lt2
                            - 4 * d * d * mu - 4 * d * d * dcr * mu * mu)


def _base_amplitude(params: SystemParams, dcr: float, d1: float) -> float:
    """Leading cycle radius of the queue difference for delay excess d1."""
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    d = params.velocity_weight
    lt2 = (lam * th) ** 2
    num = 4 * d1 * (lt2 - 4 * mu * mu) * (4 - d * d * lt2) ** 2
    den = th * th * (1 - (d * mu) ** 2) * _growth_denominator(params, dcr)
    if den <= 0 or num < 0:
        raise NumericDegeneracyError("base amplitude radicand degenerated")
    return math.sqrt(num / den)


def first_order_amplitude(params: SystemParams, delay: float) -> float:
    """Per-queue amplitude: half the leading cycle radius of the difference.

    Returns 0 on the stable side (delay at or below the first critical
    delay).
    """
    _amplitude_guards(params)
    _, dcr = _critical_pair(params)
    if delay <= dcr:
        return 0.0
    return _base_amplitude(params, dcr, delay - dcr) / 2


def second_order_amplitude(params: SystemParams, delay: float) -> AmplitudeEstimate:
    """Amplitude estimate including the next-order harmonic corrections.

    The expansion bookkeeping drops the whole delay excess into the
    first-order slot (the second-order delay slot is set to zero), which
    was found to give nearly the most accurate truncation.  The per-queue
    amplitude is half the crest value of the queue difference at strained
    time zero, base_amplitude + a2 + a4.
    """
    _amplitude_guards(params)
    w0, d0 = _critical_pair(params)
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    d = params.velocity_weight
    d1 = delay - d0

    if d1 <= 0:
        coeffs = LindstedtCoefficients(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return AmplitudeEstimate(first_order=0.0, second_order=0.0,
                                 omega_corrected=w0, coefficients=coeffs)

    a = _base_amplitude(params, d0, d1)
    lt2 = (lam * th) ** 2
    g = _growth_denominator(params, d0)
    w1 = (4 * d1 * lt2 * ((d * mu) ** 2 - 1) * math.sqrt(lt2 - 4 * mu * mu)
          / (math.sqrt(4 - d * d * lt2) * g))

    w02 = w0 * w0
    dw1 = d * d * w02 + 1
    ms = mu * mu + w02

    den3 = (lt2 ** 2 * dw1 ** 3 * (mu * mu + 9 * w02)
            + 16 * (9 * d * d * w02 + 1) * ms ** 3
            + 8 * lt2 * (-9 * d ** 4 * w0 ** 8
                         - 6 * mu * mu * w02 * ((d * mu) ** 2 + 1)
                         + 2 * d * d * w0 ** 6 * (d * mu * (9 * d * mu - 32) + 9)
                         + 3 * w02 ** 2 * (d ** 4 * mu ** 4 - 12 * (d * mu) ** 2 + 1)
                         - mu ** 4))
    a1 = -(2 * a ** 3 * th * th * w0 ** 3
           * (lt2 * mu * dw1 ** 3 - 4 * d ** 3 * ms ** 3)) / den3
    a3 = -a1 / 3
    a4 = -(a ** 3 * th * th
           * (lt2 * dw1 ** 3 * (mu ** 4 + 6 * mu * mu * w02 - 3 * w02 ** 2)
              + 4 * (3 * d ** 4 * w02 ** 2 - 6 * d * d * w02 - 1) * ms ** 3)) / (12 * den3)

    num2 = (a ** 5 * th ** 4 * dw1 ** 2
            * (d * d * mu * w02
               + mu * mu * (d * (d * d0 * w02 - 1) + d0)
               + w02 * (d * (d * d0 * w02 - 1) + d0) + mu)
            - 12 * a ** 3 * th * th * w0
            * (w1 * (d * (3 * d ** 3 * d0 * w02 ** 2
                          + d * w02 * (d * (d * mu * (2 * d0 * mu + 3) - 3) + 4 * d0)
                          + d * mu * (-2 * d * mu + 2 * d0 * mu + 3) - 1) + d0)
               - d1 * w0 * ((d * mu) ** 2 - 1) * dw1)
            + 12 * a * a * th * th
            * (a1 * w0 * ((d * mu) ** 2 - 1) * dw1
               + a3 * w0 * (d * d * (w02 * (d * mu * (-3 * d * mu + 8 * d0 * mu + 8) - 5)
                                     + 8 * d * d0 * w02 ** 2 + mu * mu) - 1)
               + a4 * (3 * d ** 4 * d0 * w0 ** 6
                       + 3 * d * d * w02 ** 2 * (d * (d * mu * (d0 * mu + 1) - 1) - 2 * d0)
                       + w02 * (d * (d * mu * (5 * d * mu - 6 * d0 * mu - 6) + 1) - d0)
                       + mu * (d * mu - d0 * mu - 1)))
            - 96 * a
            * (2 * d1 * w0 * w1 * (mu * (mu * (2 * d * d - 2 * d * d0 + d0 * d0) - d + d0)
                                   + d * d * d0 * d0 * w02 ** 2
                                   + d0 * w02 * (d * (d * mu * (d0 * mu + 1) - 2) + d0) - 1)
               + d0 * w1 * w1 * (d * d * d0 * d0 * w02 ** 2
                                 + d0 * w02 * (d * (d * mu * (d0 * mu + 1) - 3) + d0)
                                 + mu * (2 * d - d0) * (d * mu - d0 * mu - 1))
               + d1 * d1 * w02 * (d * d * d0 * w02 ** 2
                                  + w02 * (d * (d * mu * (d0 * mu + 1) - 1) + d0)
                                  + mu * (-d * mu + d0 * mu + 1)))
            - 192 * a1
            * (w1 * (d * d * d0 * d0 * w02 ** 2
                     + d0 * w02 * (d * (d * mu * (d0 * mu + 2) - 2) + d0)
                     + (-d * mu + d0 * mu + 1) ** 2)
               + d1 * w0 * (d * d * d0 * w02 ** 2
                            + w02 * (d * (d * mu * (d0 * mu + 1) - 1) + d0)
                            + mu * (-d * mu + d0 * mu + 1))))
    den2 = (3 * a * a * th * th * dw1
            * (d * d * d0 * w02 ** 2
               + w02 * (d * (d * mu * (d0 * mu + 1) - 1) + d0)
               + mu * (-d * mu + d0 * mu + 1))
            + 16 * d1 * w02 * ((d * mu) ** 2 - 1))
    if den2 == 0 or not math.isfinite(num2):
        raise NumericDegeneracyError("second-order coefficient a2 degenerated")
    a2 = num2 / (12 * den2)

    for name, value in (("a1", a1), ("a2", a2), ("a3", a3), ("a4", a4), ("w1", w1)):
        if not math.isfinite(value):
            raise NumericDegeneracyError(f"coefficient {name} is not finite")

    coeffs = LindstedtCoefficients(base_amplitude=a, frequency_shift=w1,
                                   a1=a1, a2=a2, a3=a3, a4=a4)
    return AmplitudeEstimate(first_order=a / 2,
                             second_order=(a + a2 + a4) / 2,
                             omega_corrected=w0 + w1,
                             coefficients=coeffs)
