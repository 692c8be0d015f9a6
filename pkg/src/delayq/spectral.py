"""Characteristic-equation analysis: critical frequencies, critical delays,
crossing rates, and numerical root finding.

Linearizing the model about its equilibrium reduces stability to the roots
of a single transcendental function of one complex variable; a conjugate
pair on the imaginary axis marks the onset of oscillation.
"""

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import (NumericDegeneracyError, NumericDomainError,
                     RootNotFoundError, UnsupportedRegimeError)
from .model import SystemParams

ARCCOS_CLAMP_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class HopfPoint:
    """A critical (frequency, delay) pair where an eigenvalue pair crosses
    the imaginary axis, plus the branch index and the crossing rate."""

    omega_cr: float
    delta_cr: float
    root_index: int
    crossing_rate: float


@dataclass(frozen=True)
class CharacteristicRoot:
    """An accepted root of the characteristic equation with its residual."""

    real_part: float
    imag_part: float
    residual: float

    @property
    def value(self) -> complex:
        return complex(self.real_part, self.imag_part)


def characteristic_residual(root: complex, params: SystemParams) -> complex:
    """Value of the characteristic function at a candidate root.

    Zero exactly when `root` is an eigenvalue of the linearized dynamics at
    delay params.delay.
    """
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    n, d, delay = params.n_queues, params.velocity_weight, params.delay
    return (-root - (lam * th / n) * cmath.exp(-root * delay) * (1 + d * root) - mu)


def _char_derivative(root: complex, params: SystemParams) -> complex:
    lam, mu, th = params.arrival_rate, params.service_rate, params.sensitivity
    n, d, delay = params.n_queues, params.velocity_weight, params.delay
    return -1 - (lam * th / n) * cmath.exp(-root * delay) * (d - delay * (1 + d * root))


def critical_frequency(params: SystemParams) -> Optional[float]:
    """Frequency of the purely imaginary eigenvalue pair, when one exists.

    Returns None when no delay can place eigenvalues on the imaginary axis
    (the radicand of the closed form is not strictly positive); absence is
    a value, not an error.
    """
    lam_th = params.arrival_rate * params.sensitivity
    n, mu, d = params.n_queues, params.service_rate, params.velocity_weight
    num = lam_th ** 2 - (n * mu) ** 2
    den = n ** 2 - (d * lam_th) ** 2
    if den == 0:
        return None
    radicand = num / den
    if radicand <= 0:
        return None
    return math.sqrt(radicand)


def _crossing_angle(params: SystemParams) -> float:
    """Phase omega_cr * delta_cr of the first crossing, in (0, 2*pi).

    The cosine condition fixes the angle up to reflection; the sign of the
    companion sine condition (positive iff velocity_weight * service_rate
    < 1) selects the branch.
    """
    lam_th = params.arrival_rate * params.sensitivity
    n, mu, d = params.n_queues, params.service_rate, params.velocity_weight
    x = -(d * lam_th ** 2 + n ** 2 * mu) / (n * lam_th * (1 + d * mu))
    if abs(x) > 1 + ARCCOS_CLAMP_TOL:
        raise NumericDomainError(
            f"cosine condition value {x} outside [-1, 1]; no crossing in this regime")
    x = min(1.0, max(-1.0, x))
    angle = math.acos(x)
    if d * mu > 1:
        angle = 2 * math.pi - angle
    return angle


def critical_delay(params: SystemParams, root_index: int = 0) -> float:
    """The root_index-th critical delay, where an eigenvalue pair reaches
    the imaginary axis.

    Branches are spaced exactly 2*pi/omega_cr apart because the crossing
    frequency does not depend on the delay.
    """
    if root_index < 0:
        raise UnsupportedRegimeError("root_index must be >= 0")
    w = critical_frequency(params)
    if w is None:
        raise UnsupportedRegimeError(
            "no imaginary-axis crossing exists for these parameters")
    return (_crossing_angle(params) + 2 * math.pi * root_index) / w


def _crossing_rate_at(params: SystemParams, w: float, delay: float) -> float:
    lam_th = params.arrival_rate * params.sensitivity
    n, mu, d = params.n_queues, params.service_rate, params.velocity_weight
    w2 = w * w
    one = 1 + d * d * w2
    num = (n ** 2 - (d * lam_th) ** 2) * one * w2
    den = (lam_th ** 2 * one * ((d - delay) ** 2 + (d * delay) ** 2 * w2)
           + n ** 2 * (1 - 2 * d * mu + 2 * delay * mu + d * d * w2 * (2 * delay * mu - 1)))
    if abs(den) < 1e-14:
        raise NumericDegeneracyError("crossing-rate denominator degenerated")
    return num / den


def crossing_rate(params: SystemParams, at: "HopfPoint") -> float:
    """Rate d(Re eigenvalue)/d(delay) at a critical point.

    Positive (crossing toward instability) iff the velocity weight is below
    N/(arrival_rate*sensitivity); negative above it.  The denominator is
    provably positive, so a near-zero denominator signals a bug.
    """
    return _crossing_rate_at(params, at.omega_cr, at.delta_cr)


def hopf_point(params: SystemParams, root_index: int = 0) -> HopfPoint:
    """Assemble and verify a critical point for the given branch index.

    The returned pair satisfies the characteristic equation on the
    imaginary axis to within 1e-9.
    """
    w = critical_frequency(params)
    if w is None:
        raise UnsupportedRegimeError(
            "no imaginary-axis crossing exists for these parameters")
    delay = critical_delay(params, root_index)
    probe = SystemParams(params.arrival_rate, params.service_rate,
                         params.sensitivity, params.n_queues,
                         params.velocity_weight, delay)
    residual = abs(characteristic_residual(1j * w, probe))
    if residual > ROOT_RESIDUAL_TOL:
        raise NumericDegeneracyError(
            f"critical pair residual {residual:.3e} exceeds {ROOT_RESIDUAL_TOL}")
    return HopfPoint(omega_cr=w, delta_cr=delay, root_index=root_index,
                     crossing_rate=_crossing_rate_at(params, w, delay))


def find_root_near(params: SystemParams, seed: complex,
                   tol: float = ROOT_RESIDUAL_TOL,
                   max_iter: int = 100) -> CharacteristicRoot:
    """Damped Newton iteration on the characteristic function from a seed.

    The step is halved while it fails to reduce the residual; accepted only
    if the residual drops below `tol` within `max_iter` iterations.
    """
    r = complex(seed)
    f = characteristic_residual(r, params)
    for _ in range(max_iter):
        if abs(f) < tol:
            return CharacteristicRoot(r.real, r.imag, abs(f))
        fp = _char_derivative(r, params)
        if fp == 0:
            break
        step = f / fp
        scale = 1.0
        for _ in range(40):
            r_new = r - scale * step
            f_new = characteristic_residual(r_new, params)
            if abs(f_new) < abs(f):
                break
            scale /= 2
        else:
            break
        r, f = r_new, f_new
    if abs(f) < tol:
        return CharacteristicRoot(r.real, r.imag, abs(f))
    raise RootNotFoundError(
        f"Newton iteration stalled at residual {abs(f):.3e} from seed {seed}")


def scan_unstable_roots(params: SystemParams, a_min: float = 0.05,
                        n_real: int = 8, max_imag_multiple: int = 40,
                        merge_tol: float = 1e-6) -> List[CharacteristicRoot]:
    """Search the right half-plane for characteristic roots.

    Seeds a grid of Newton starts with real parts up to the analytic bound
    on unstable roots and imaginary parts at multiples of pi/delay (where
    unstable roots accumulate), then merges converged roots.  Returns only
    roots with positive real part, deduplicated, sorted by imaginary part.
    """
    if params.delay <= 0:
        raise UnsupportedRegimeError("root scan requires a positive delay")
    lam_th = params.arrival_rate * params.sensitivity
    n, delay = params.n_queues, params.delay
    growth = params.velocity_weight * lam_th / n
    a_max = math.log(max(growth, 2.0)) / delay
    a_grid = np.linspace(a_min, max(a_max, 2 * a_min), n_real)
    b_grid = (math.pi / delay) * np.arange(1, max_imag_multiple + 1)

    found: List[CharacteristicRoot] = []
    for a in a_grid:
        for b in b_grid:
            try:
                root = find_root_near(params, complex(a, b))
            except RootNotFoundError:
                continue
            if root.real_part <= 0:
                continue
            if any(abs(root.value - other.value) < merge_tol for other in found):
                continue
            found.append(root)
    found.sort(key=lambda r: (r.imag_part, r.real_part))
    return found
