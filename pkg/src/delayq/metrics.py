"""Steady-state oscillation measurements extracted from trajectories.

Everything formula-vs-simulation in this package compares against the
amplitude and period produced here, so one convention is used throughout:
peaks of queue 1 located by sign changes of its stored derivative, refined
by a local quadratic fit, amplitude as half the mean peak-to-trough swing.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InconclusiveMeasurementError, MeasurementStateError
from .model import equilibrium
from .ndde import Trajectory

DECAY_THRESHOLD = 1e-3          # absolute, on |q1 - equilibrium|
CONVERGENCE_SPREAD = 0.01       # relative spread of the last 5 peak heights


@dataclass(frozen=True)
class OscillationMeasurement:
    """Amplitude/period verdict for the trailing window of a trajectory.

    amplitude is half the peak-to-trough swing of queue 1 around the
    equilibrium; period is the spacing of successive maxima; converged
    means the last five peak heights agree to 1 percent; decayed means the
    signal stayed below the decay threshold throughout the window.
    """

    amplitude: float
    period: Optional[float]
    converged: bool
    decayed: bool


def _refine_extremum(t: np.ndarray, y: np.ndarray, j: int) -> tuple:
    """Vertex of the parabola through nodes j-1, j, j+1."""
    j = min(max(j, 1), len(t) - 2)
    ts = t[j - 1:j + 2] - t[j]
    c = np.polyfit(ts, y[j - 1:j + 2], 2)
    if c[0] == 0:
        return t[j], y[j]
    tv = -c[1] / (2 * c[0])
    yv = c[2] - c[1] ** 2 / (4 * c[0])
    return t[j] + tv, yv


def measure(traj: Trajectory, window_fraction: float = 0.25) -> OscillationMeasurement:
    """Measure steady-state oscillation of queue 1 over the trailing window.

    Parameters
    ----------
    traj : Trajectory
        Integrated solution; only the trailing window_fraction of it is used.
    window_fraction : float
        Fraction of the time span to examine, in (0, 1].

    Raises
    ------
    InconclusiveMeasurementError
        Fewer than two peaks in the window and the signal has not decayed;
        the caller should extend the horizon.
    """
    if not 0 < window_fraction <= 1:
        raise MeasurementStateError("window_fraction must be in (0, 1]")
    qstar = equilibrium(traj.params)
    t = traj.times
    y = traj.values[:, 0] - qstar
    yd = traj.derivatives[:, 0]
    t_lo = t[-1] - window_fraction * (t[-1] - t[0])
    w = t >= t_lo
    tw, yw, ydw = t[w], y[w], yd[w]

    if np.max(np.abs(yw)) < DECAY_THRESHOLD:
        return OscillationMeasurement(amplitude=0.0, period=None,
                                      converged=False, decayed=True)

    peak_t, peak_y, trough_y = [], [], []
    for i in range(len(tw) - 1):
        if ydw[i] > 0 >= ydw[i + 1]:
            j = i if yw[i] >= yw[i + 1] else i + 1
            pt, pv = _refine_extremum(tw, yw, j)
            peak_t.append(pt)
            peak_y.append(pv)
        elif ydw[i] < 0 <= ydw[i + 1]:
            j = i if yw[i] <= yw[i + 1] else i + 1
            _, pv = _refine_extremum(tw, yw, j)
            trough_y.append(pv)

    if len(peak_y) < 2 or len(trough_y) < 1:
        raise InconclusiveMeasurementError(
            f"only {len(peak_y)} peaks in the window; extend the horizon")

    amplitude = (float(np.mean(peak_y)) - float(np.mean(trough_y))) / 2
    period = float(np.mean(np.diff(peak_t))) if len(peak_t) >= 2 else None

    converged = False
    if len(peak_y) >= 5:
        last = np.array(peak_y[-5:])
        scale = np.mean(np.abs(last))
        if scale > 0:
            converged = bool((last.max() - last.min()) / scale < CONVERGENCE_SPREAD)

    return OscillationMeasurement(amplitude=amplitude, period=period,
                                  converged=converged, decayed=False)


def measured_frequency(measurement: OscillationMeasurement) -> float:
    """Angular frequency 2*pi/period of a converged measurement."""
    if not measurement.converged or measurement.period is None:
        raise MeasurementStateError("frequency requires a converged oscillation")
    return 2 * np.pi / measurement.period
