import numpy as np
import pytest

from phonoctl.dispersion import (
    DispersionSpec,
    check_assumptions,
    d_epsilon,
    evaluate,
    phi_inverse,
    phi_prime,
    wrap_torus,
)
from phonoctl.errors import OutOfBand

SPEC = DispersionSpec(omega0=1.0, gamma=1.0)


def test_wrap_torus_centered_representative():
    assert wrap_torus(0.3) == pytest.approx(0.3)
    assert wrap_torus(0.7) == pytest.approx(-0.3)
    assert wrap_torus(-1.25) == pytest.approx(-0.25)
    # ties at +-1/2 map to +1/2
    assert wrap_torus(0.5) == 0.5
    assert wrap_torus(-0.5) == 0.5
    assert wrap_torus(1.5) == 0.5


def test_band_limits():
    assert SPEC.omega_min == pytest.approx(1.0)
    assert SPEC.omega_max == pytest.approx(np.sqrt(3.0))
    assert SPEC.omega(0.0) == pytest.approx(SPEC.omega_min)
    assert SPEC.omega(0.5) == pytest.approx(SPEC.omega_max)


def test_omega_even_and_monotone():
    kk = np.linspace(0.0, 0.5, 257)
    assert np.allclose(SPEC.omega(kk), SPEC.omega(-kk), atol=0, rtol=0)
    assert np.all(np.diff(SPEC.omega(kk)) > 0)


def test_derivatives_match_finite_differences():
    kk = np.linspace(0.05, 0.45, 21)
    h = 1e-6
    fd1 = (SPEC.omega(kk + h) - SPEC.omega(kk - h)) / (2 * h)
    assert np.max(np.abs(SPEC.omega_prime(kk) - fd1)) < 1e-8
    h2 = 1e-4
    fd2 = (SPEC.omega(kk + h2) - 2 * SPEC.omega(kk) + SPEC.omega(kk - h2)) / h2**2
    assert np.max(np.abs(SPEC.omega_second(kk) - fd2)) < 1e-5


def test_group_velocity_scaling():
    k = 0.25
    pt = evaluate(SPEC, k)
    assert pt.v_g == pytest.approx(pt.omega_prime / (2 * np.pi))
    # spec constant used downstream: |v_g(0.25)| for omega0 = gamma = 1
    assert abs(pt.v_g) == pytest.approx(0.3535534, abs=1e-7)


def test_phi_inverse_round_trip():
    kk = np.linspace(-0.5 + 1e-9, 0.5 - 1e-9, 401)
    kk = kk[kk != 0.0]
    for k in kk:
        w = float(SPEC.omega(k))
        k_back = phi_inverse(SPEC, w, +1 if k > 0 else -1)
        assert abs(SPEC.omega(k_back) - w) < 1e-12


def test_phi_inverse_out_of_band():
    with pytest.raises(OutOfBand):
        phi_inverse(SPEC, 0.5)
    with pytest.raises(OutOfBand):
        phi_inverse(SPEC, 2.0)


def test_phi_prime_matches_inverse_derivative():
    ww = np.linspace(1.05, 1.65, 13)
    h = 1e-7
    fd = np.array(
        [(phi_inverse(SPEC, w + h) - phi_inverse(SPEC, w - h)) / (2 * h) for w in ww]
    )
    assert np.max(np.abs(phi_prime(SPEC, ww) - fd)) < 1e-6


def test_d_epsilon_converges_to_derivative():
    k, xi = 0.2, 1.7
    target = float(SPEC.omega_prime(k)) * xi
    errs = [abs(d_epsilon(SPEC, k, xi, eps) - target) for eps in (1e-2, 1e-3, 1e-4)]
    assert errs[2] < errs[0]
    assert errs[2] < 1e-6
    for variant in ("plus", "minus"):
        assert abs(d_epsilon(SPEC, k, xi, 1e-5, variant) - target) < 1e-3


def test_check_assumptions_all_pass():
    report = check_assumptions(SPEC)
    assert report.all_pass
    assert report.details["even_error"] == 0.0


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        DispersionSpec(omega0=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        DispersionSpec(omega0=1.0, gamma=-1.0)
