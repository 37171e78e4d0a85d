"""Phonon scattering at a thermostatted boundary: rates, control synthesis,
Monte-Carlo chain simulation and Wigner-distribution kinetics."""

from .dispersion import DispersionSpec

__all__ = ["DispersionSpec"]
__version__ = "0.1.0"
