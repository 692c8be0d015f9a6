"""Numerical laboratory for N parallel queues fed by delayed announcements.

Simulates the neutral delay system produced by announcing queue length plus
weighted queue velocity, locates its stability boundaries, solves the
velocity-weight design problem, and predicts limit-cycle amplitudes.
"""

from .amplitude import (AmplitudeEstimate, HopfSide, LindstedtCoefficients,
                        SlowFlowCoefficients, first_order_amplitude, hopf_side,
                        second_order_amplitude, slow_flow)
from .design import (DesignSummary, WeightChoice, amplitude_minimizing_weight,
                     critical_delay_slope, design_summary, harm_threshold,
                     max_critical_delay_bounds, optimal_weight,
                     optimal_weight_bounds)
from .errors import (DegenerateRegimeError, DelayQError, DomainError,
                     InconclusiveMeasurementError, IntegrationDivergedError,
                     InternalContradictionError, MeasurementStateError,
                     NumericDegeneracyError, NumericDomainError,
                     RootNotFoundError, UnsupportedRegimeError)
from .metrics import OscillationMeasurement, measure, measured_frequency
from .model import (QueueState, StabilityRegion, SystemParams, announcement,
                    classify_region, equilibrium, mnl_probabilities, rhs)
from .ndde import (ConstantHistory, CustomHistory, EquilibriumPerturbed,
                   HistorySegment, InitialHistory, Trajectory,
                   conservation_residual, integrate, make_history,
                   trajectory_to_csv)
from .spectral import (CharacteristicRoot, HopfPoint, characteristic_residual,
                       critical_delay, critical_frequency, crossing_rate,
                       find_root_near, hopf_point, scan_unstable_roots)

__version__ = "0.1.0"
