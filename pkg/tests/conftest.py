"""Shared fixtures and independent numerical oracles.

The oracles re-derive critical quantities straight from the characteristic
function written out inline, so they share no code path with the package
functions they check.
"""

import cmath
import math

import numpy as np
import pytest

from delayq import SystemParams


@pytest.fixture
def figure_params() -> SystemParams:
    """Two queues with strong feedback; the workhorse oscillatory setup."""
    return SystemParams(arrival_rate=10.0, service_rate=1.0, sensitivity=1.0,
                        n_queues=2, velocity_weight=0.0, delay=0.0)


def char_fn(root: complex, lam: float, mu: float, th: float, n: int,
            d: float, delay: float) -> complex:
    """The characteristic function, written independently of the package."""
    return -root - (lam * th / n) * cmath.exp(-root * delay) * (1 + d * root) - mu


def hopf_oracle(lam: float, mu: float, th: float, n: int, d: float,
                n_roots: int = 2) -> list:
    """Critical (omega, delay) pairs by grid scan plus 2-d Newton on the
    characteristic function restricted to the imaginary axis.

    Returns the first n_roots pairs ordered by delay.
    """

    def system(w, delay):
        v = char_fn(1j * w, lam, mu, th, n, d, delay)
        return np.array([v.real, v.imag])

    def newton(w, delay):
        x = np.array([w, delay], dtype=float)
        for _ in range(80):
            f = system(*x)
            if np.linalg.norm(f) < 1e-13:
                break
            h = 1e-7
            j = np.empty((2, 2))
            j[:, 0] = (system(x[0] + h, x[1]) - system(x[0] - h, x[1])) / (2 * h)
            j[:, 1] = (system(x[0], x[1] + h) - system(x[0], x[1] - h)) / (2 * h)
            try:
                step = np.linalg.solve(j, f)
            except np.linalg.LinAlgError:
                return None
            x = x - step
            if not np.isfinite(x).all() or x[0] <= 0 or x[1] <= 0:
                return None
        return x if np.linalg.norm(system(*x)) < 1e-11 else None

    ws = np.linspace(0.05, 40.0, 400)
    ds = np.linspace(0.005, 6.0, 600)
    vals = np.abs([[char_fn(1j * w, lam, mu, th, n, d, delay)
                    for delay in ds] for w in ws])
    vals = np.asarray(vals)
    # polish every interior local minimum of the residual grid
    interior = vals[1:-1, 1:-1]
    is_min = ((interior <= vals[:-2, 1:-1]) & (interior <= vals[2:, 1:-1])
              & (interior <= vals[1:-1, :-2]) & (interior <= vals[1:-1, 2:]))
    found = []
    for iw, idd in np.argwhere(is_min):
        res = newton(ws[iw + 1], ds[idd + 1])
        if res is None:
            continue
        if any(abs(res[1] - f[1]) < 1e-6 for f in found):
            continue
        found.append((res[0], res[1]))
    found.sort(key=lambda p: p[1])
    return found[:n_roots]


def track_root_real_part(lam: float, mu: float, th: float, n: int, d: float,
                         seed: complex, delay: float) -> float:
    """Newton-polish a characteristic root at one delay; returns Re(root).

    Used for finite-difference transversality checks; independent Newton
    in one complex variable with numerical derivative.
    """
    r = complex(seed)
    for _ in range(100):
        f = char_fn(r, lam, mu, th, n, d, delay)
        if abs(f) < 1e-13:
            break
        h = 1e-7
        fp = (char_fn(r + h, lam, mu, th, n, d, delay)
              - char_fn(r - h, lam, mu, th, n, d, delay)) / (2 * h)
        r = r - f / fp
    assert abs(char_fn(r, lam, mu, th, n, d, delay)) < 1e-10
    return r.real
