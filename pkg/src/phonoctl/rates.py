"""Absorption, transmission and reflection rates at the thermostatted site."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionSpec, wrap_torus
from .errors import BandEdge, NonPhysical
from .spectral import theta, theta_f

RATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RateTriple:
    """Scattering probabilities of a phonon of wavenumber k."""

    k: float
    r_a: float
    r_t: float
    r_r: float

    @property
    def total(self) -> float:
        return self.r_a + self.r_t + self.r_r


def _clamp_triple(k: float, r_a: float, r_t: float, r_r: float) -> RateTriple:
    for name, val in (("r_a", r_a), ("r_t", r_t), ("r_r", r_r)):
        if val < -RATE_TOLERANCE or val > 1.0 + RATE_TOLERANCE:
            raise NonPhysical(f"{name}(k={k}) = {val} outside [0, 1]")
    clipped = np.clip([r_a, r_t, r_r], 0.0, 1.0)
    if not np.allclose(clipped, [r_a, r_t, r_r], atol=0.0, rtol=0.0):
        warnings.warn(f"rates at k={k} clamped to [0, 1]", stacklevel=3)
    return RateTriple(k=k, r_a=float(clipped[0]), r_t=float(clipped[1]), r_r=float(clipped[2]))


def rates_uncontrolled(spec: DispersionSpec, nu: float, k: float) -> RateTriple:
    """Rates of the pure Langevin thermostat with friction nu."""
    if nu < 0:
        raise ValueError("friction nu must be nonnegative")
    k = wrap_torus(k)
    th = theta(spec, nu, abs(k))
    v = abs(float(spec.v_g(k)))
    r_a = nu * abs(th) ** 2 / v
    r_r = nu * r_a / (4.0 * v)
    r_t = 1.0 - th.real * nu / v + nu * r_a / (4.0 * v)
    return _clamp_triple(k, r_a, r_t, r_r)


def rates_feedback(spec: DispersionSpec, fhat_at_k: complex, k: float) -> RateTriple:
    """Rates under a memory-feedback control with transfer value Fhat at omega(k)/2pi."""
    k = wrap_torus(k)
    fh = complex(fhat_at_k)
    th = theta_f(spec, fh, abs(k))
    v = abs(float(spec.v_g(k)))
    r_a = -fh.real * abs(th) ** 2 / v
    r_r = abs(fh) ** 2 * abs(th) ** 2 / (4.0 * v**2)
    r_t = 1.0 + (np.conj(fh) * th).real / v + r_r
    return _clamp_triple(k, r_a, r_t, r_r)


def rate_grid(spec: DispersionSpec, control, k_grid) -> list:
    """Vectorize the pointwise rate computations over a wavenumber grid.

    ``control`` is either ``("uncontrolled", nu)`` or ``("feedback", fhat_fn)``
    with ``fhat_fn(k) -> complex``.  Per-point failures are collected as
    exception instances in the returned list, not raised.
    """
    kind = control[0]
    out = []
    for k in np.atleast_1d(np.asarray(k_grid, dtype=float)):
        try:
            if kind == "uncontrolled":
                out.append(rates_uncontrolled(spec, control[1], float(k)))
            elif kind == "feedback":
                out.append(rates_feedback(spec, control[1](float(k)), float(k)))
            else:
                raise ValueError(f"unknown control kind {kind!r}")
        except (BandEdge, NonPhysical) as exc:
            out.append(exc)
    return out
