"""Exception types shared across the toolkit."""


class PhonoctlError(Exception):
    """Base class for all toolkit errors."""


class OutOfBand(PhonoctlError):
    """Frequency outside [omega_min, omega_max]."""


class BandEdge(PhonoctlError):
    """Wavenumber too close to a zero of omega', where rates are undefined."""


class DomainError(PhonoctlError):
    """Complex argument outside the Laplace half-plane Re(Z) > 0."""


class AssumptionL1Violated(PhonoctlError):
    """Feedback transfer value has nonnegative real part."""


class NonPhysical(PhonoctlError):
    """A probability landed outside [0, 1] beyond tolerance."""


class DegenerateTH(PhonoctlError):
    """Frequency-design denominator collapsed below its guaranteed bound."""


class HorizonExceeded(PhonoctlError):
    """Cutoff horizon does not fit inside the sampled time grid."""


class HistoryUnderflow(PhonoctlError):
    """Feedback convolution requested history the buffer does not hold."""


class UnsupportedMeasure(PhonoctlError):
    """Initial measure has no spectral mass outside the band-edge margin."""


class GridMismatch(PhonoctlError):
    """Requested Wigner offsets are not representable on the mode grid."""


class BudgetExceeded(PhonoctlError):
    """Simulation would exceed the configured step cap."""


class PacketNotSeparated(PhonoctlError):
    """Transmitted/reflected lobes still overlap the margin band."""
