"""Exception types shared across the package."""


class DelayQError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DelayQError, ValueError):
    """Invalid input values (non-finite entries, length mismatches, bad ranges)."""


class UnsupportedRegimeError(DelayQError):
    """Operation requested outside the parameter regime where it is defined."""


class NumericDomainError(DelayQError):
    """An intermediate quantity left its mathematical domain by more than roundoff."""


class NumericDegeneracyError(DelayQError):
    """A denominator or coefficient degenerated; results would be meaningless."""


class DegenerateRegimeError(DelayQError):
    """Parameters sit exactly on a degenerate boundary (e.g. velocity_weight * service_rate == 1)."""


class InternalContradictionError(DelayQError):
    """A quantity violated a property that is proven to hold; indicates an implementation bug."""


class RootNotFoundError(DelayQError):
    """Iterative root search failed to converge."""


class IntegrationDivergedError(DelayQError):
    """Integration produced non-finite state values."""

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


class InconclusiveMeasurementError(DelayQError):
    """Trajectory window contained too few oscillations to measure; extend the horizon."""


class MeasurementStateError(DelayQError):
    """Measurement does not support the requested quantity (e.g. frequency of a decayed run)."""
