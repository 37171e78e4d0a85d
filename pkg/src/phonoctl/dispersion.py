"""Nearest-neighbour dispersion relation on the unit torus.

The chain carries omega(k) = sqrt(omega0^2 + gamma*(1 - cos(2*pi*k))) for
k in [-1/2, 1/2].  Everything downstream consumes omega, its derivative,
the group velocity and the two inverse branches, so those are the only
quantities exposed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfBand


def wrap_torus(k):
    """Wrap wavenumbers to the centered representative in [-1/2, 1/2].

    Ties at +-1/2 map to +1/2 so band-edge behaviour is deterministic.
    """
    k = np.asarray(k, dtype=float)
    wrapped = k - np.round(k)
    wrapped = np.where(wrapped == -0.5, 0.5, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class DispersionSpec:
    """Parameters of the nearest-neighbour dispersion family."""

    omega0: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.omega0 > 0 and self.gamma > 0):
            raise ValueError("omega0 and gamma must be positive")

    @property
    def omega_min(self) -> float:
        return self.omega0

    @property
    def omega_max(self) -> float:
        return float(np.sqrt(self.omega0**2 + 2.0 * self.gamma))

    def omega(self, k):
        k = wrap_torus(k)
        return np.sqrt(self.omega0**2 + self.gamma * (1.0 - np.cos(2.0 * np.pi * np.asarray(k))))

    def omega_prime(self, k):
        k = wrap_torus(k)
        return self.gamma * np.pi * np.sin(2.0 * np.pi * np.asarray(k)) / self.omega(k)

    def omega_second(self, k):
        # omega'' = (2*gamma*pi^2*cos(2*pi*k) - omega'^2) / omega
        k = wrap_torus(k)
        w = self.omega(k)
        wp = self.omega_prime(k)
        return (2.0 * self.gamma * np.pi**2 * np.cos(2.0 * np.pi * np.asarray(k)) - wp**2) / w

    def v_g(self, k):
        return self.omega_prime(k) / (2.0 * np.pi)


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    omega: float
    omega_prime: float
    v_g: float


def evaluate(spec: DispersionSpec, k: float) -> DispersionPoint:
    """Evaluate omega, omega' and the group velocity at one wavenumber."""
    k = wrap_torus(k)
    w = float(spec.omega(k))
    wp = float(spec.omega_prime(k))
    return DispersionPoint(k=k, omega=w, omega_prime=wp, v_g=wp / (2.0 * np.pi))


def phi_inverse(spec: DispersionSpec, wbar: float, branch: int = +1) -> float:
    """Invert omega on the positive (branch=+1) or negative (branch=-1) branch."""
    if not (spec.omega_min <= wbar <= spec.omega_max):
        raise OutOfBand(
            f"frequency {wbar} outside band [{spec.omega_min}, {spec.omega_max}]"
        )
    arg = (wbar**2 - spec.omega0**2) / (2.0 * spec.gamma)
    k = np.arcsin(np.sqrt(np.clip(arg, 0.0, 1.0))) / np.pi
    return float(np.sign(branch) * k)


def phi_prime(spec: DispersionSpec, wbar, branch: int = +1):
    """Derivative of the inverse branch, wbar / (pi*sqrt(2g+w0^2-wbar^2)*sqrt(wbar^2-w0^2))."""
    wbar = np.asarray(wbar, dtype=float)
    num = wbar
    den = np.pi * np.sqrt(2.0 * spec.gamma + spec.omega0**2 - wbar**2) * np.sqrt(
        wbar**2 - spec.omega0**2
    )
    return np.sign(branch) * num / den


def d_epsilon(spec: DispersionSpec, k: float, xi: float, eps: float, variant: str = "central") -> float:
    """Scaled difference quotient of omega; converges to omega'(k)*xi as eps -> 0."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if variant == "central":
        return float((spec.omega(k + eps * xi / 2.0) - spec.omega(k - eps * xi / 2.0)) / eps)
    if variant == "plus":
        return float((spec.omega(k + eps * xi) - spec.omega(k)) / eps)
    if variant == "minus":
        return float((spec.omega(k) - spec.omega(k - eps * xi)) / eps)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass
class AssumptionReport:
    """Outcome of the structural checks on the coupling and dispersion."""

    sigma_hat_even: bool
    sigma_hat_positive: bool
    omega_monotone: bool
    edge_products_continuous: bool
    details: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (
            self.sigma_hat_even
            and self.sigma_hat_positive
            and self.omega_monotone
            and self.edge_products_continuous
        )


def check_assumptions(spec: DispersionSpec, n_grid: int = 1024) -> AssumptionReport:
    """Verify evenness/positivity of sigma_hat = omega^2, monotonicity of omega,
    and the regularized band-edge behaviour of the inverse-branch derivatives."""
    kk = np.linspace(-0.5, 0.5, n_grid, endpoint=False)
    sigma_hat = spec.omega(kk) ** 2
    even_err = float(np.max(np.abs(spec.omega(kk) - spec.omega(-kk))))
    positive = bool(np.all(sigma_hat > 0))

    k_pos = np.linspace(1e-4, 0.5 - 1e-4, n_grid)
    mono = bool(np.all(np.diff(spec.omega(k_pos)) > 0))

    # phi'_+ diverges like (wbar - w_min)^{-1/2} and (w_max - wbar)^{-1/2};
    # the products below must extend continuously to the edges.
    w_min, w_max = spec.omega_min, spec.omega_max
    steps = np.array([1e-4, 1e-5, 1e-6])
    lo = phi_prime(spec, w_min + steps) * np.sqrt(steps)
    hi = phi_prime(spec, w_max - steps) * np.sqrt(steps)
    phi1_at_min = w_min / (np.pi * np.sqrt(2.0 * spec.gamma) * np.sqrt(2.0 * w_min))
    phi2_at_max = w_max / (np.pi * np.sqrt(2.0 * w_max) * np.sqrt(w_max**2 - spec.omega0**2))
    lo_ok = abs(lo[-1] - phi1_at_min) < 1e-3 * abs(phi1_at_min)
    hi_ok = abs(hi[-1] - phi2_at_max) < 1e-3 * abs(phi2_at_max)

    return AssumptionReport(
        sigma_hat_even=even_err < 1e-12,
        sigma_hat_positive=positive,
        omega_monotone=mono,
        edge_products_continuous=bool(lo_ok and hi_ok),
        details={
            "even_error": even_err,
            "edge_product_min": float(lo[-1]),
            "edge_product_min_limit": float(phi1_at_min),
            "edge_product_max": float(hi[-1]),
            "edge_product_max_limit": float(phi2_at_max),
        },
    )
