import numpy as np
import pytest

from phonoctl.control import (
    FrequencyDesign,
    SynthesizedControl,
    TargetRates,
    apply_cutoff,
    build_frequency_design,
    causal_completion,
    check_h6,
    check_targets,
    default_time_grid,
    fhat_of_control,
    half_line_transforms,
    roundtrip_rates,
    smoothstep_quintic,
    synthesize_f,
)
from phonoctl.dispersion import DispersionSpec
from phonoctl.errors import BandEdge, HorizonExceeded
from phonoctl.rates import RateTriple, rates_feedback

SPEC = DispersionSpec(omega0=1.0, gamma=1.0)
K_GRID = np.linspace(0.05, 0.45, 41)
CONSTANT = TargetRates.constant(K_GRID, r_a=0.35, r_t=0.49, r_r=0.16)


def test_constant_targets_admissible():
    report = check_targets(CONSTANT)
    assert report.admissible
    assert report.h2_sum_to_one and report.h3_positive
    assert report.h4_continuous and report.h5_sqrt_sum


def test_sum_violation_detected():
    bad = TargetRates.constant(K_GRID, r_a=0.35, r_t=0.49, r_r=0.17)
    report = check_targets(bad)
    assert not report.h2_sum_to_one and not report.admissible


def test_sqrt_bound_violation_detected():
    # r_t + r_r + r_a = 1 but sqrt(r_t) + sqrt(r_r) < 1
    bad = TargetRates.constant(K_GRID, r_a=0.5, r_t=0.49, r_r=0.01)
    report = check_targets(bad)
    assert not report.h5_sqrt_sum and not report.admissible


def test_jump_violation_detected():
    r_t = np.full_like(K_GRID, 0.49)
    r_t[20:] = 0.75
    r_a = np.full_like(K_GRID, 0.35)
    r_a[20:] = 0.14
    bad = TargetRates(k_grid=K_GRID, r_a=r_a, r_t=r_t, r_r=np.full_like(K_GRID, 0.16), c1=0.14)
    report = check_targets(bad)
    assert not report.h4_continuous


def test_frequency_design_reference_values():
    # frozen values at k = 1/4 for targets (0.35, 0.49, 0.16), omega0 = gamma = 1
    design = build_frequency_design(CONSTANT, SPEC)
    i = int(np.argmin(np.abs(K_GRID - 0.25)))
    assert K_GRID[i] == pytest.approx(0.25)
    v = abs(float(SPEC.v_g(0.25)))
    assert design.RE[i] == pytest.approx(-0.2368808, abs=1e-6)
    assert design.RE[i] == pytest.approx(v * (0.49 - 0.16 - 1.0), abs=1e-12)
    assert abs(design.IM[i]) == pytest.approx(v * np.sqrt(4 * 0.16 - 0.67**2), abs=1e-12)
    assert abs(design.IM[i]) == pytest.approx(0.1545558, abs=1e-6)
    # default branch is the causal (negative) one
    assert design.IM[i] < 0


def test_frequency_design_solves_target_rates():
    # the boundary response Fbar = FT/TH equals conj(Fhat) on the band, so
    # feeding conj(Fbar(omega(k))) into the feedback rate formulas must return
    # the targets (up to interpolation error on the frequency grid)
    design = build_frequency_design(CONSTANT, SPEC)
    for i in (10, 20, 30):
        om = float(SPEC.omega(K_GRID[i]))
        fb = complex(
            np.interp(om, design.u_grid, design.Fbar.real),
            np.interp(om, design.u_grid, design.Fbar.imag),
        )
        triple = rates_feedback(SPEC, fb.conjugate(), float(K_GRID[i]))
        assert triple.r_a == pytest.approx(0.35, abs=1e-5)
        assert triple.r_t == pytest.approx(0.49, abs=1e-5)
        assert triple.r_r == pytest.approx(0.16, abs=1e-5)


def test_fbar_magnitude_bound():
    design = build_frequency_design(CONSTANT, SPEC)
    from phonoctl.dispersion import phi_inverse

    k_of_u = np.array([phi_inverse(SPEC, u, +1) for u in design.u_grid])
    bound = 8.0 * np.abs(SPEC.v_g(k_of_u)) * 0.16 / CONSTANT.c1
    assert np.all(np.abs(design.Fbar) <= bound * (1 + 1e-12))


def test_smoothstep_endpoints_and_symmetry():
    assert smoothstep_quintic(-1.0) == 1.0
    assert smoothstep_quintic(0.0) == 1.0
    assert smoothstep_quintic(1.0) == 0.0
    assert smoothstep_quintic(2.0) == 0.0
    assert smoothstep_quintic(0.5) == pytest.approx(0.5)
    # C^2: first two derivatives vanish at the ends
    h = 1e-5
    for x0 in (0.0, 1.0):
        d1 = (smoothstep_quintic(x0 + h) - smoothstep_quintic(x0 - h)) / (2 * h)
        assert abs(d1) < 1e-8


def test_synthesize_f_box_closed_form():
    # Re(Fbar) = 1 on [a, b] gives F(t) = (2/pi) (sin bt - sin at)/t
    a, b = 1.1, 1.6
    u = np.linspace(a, b, 4001)
    design = FrequencyDesign(
        targets=CONSTANT, spec=SPEC, RE=None, IM=None, FT=None, TH=None,
        u_grid=u, Fbar=np.ones_like(u) + 0j,
    )
    t = np.linspace(0.1, 20.0, 57)
    control = synthesize_f(design, t)
    expect = (2.0 / np.pi) * (np.sin(b * t) - np.sin(a * t)) / t
    assert np.max(np.abs(control.F - expect)) < 1e-6


def test_apply_cutoff_window_support():
    t = np.linspace(0.0, 20.0, 2001)
    control = SynthesizedControl(t_grid=t, F=np.ones_like(t))
    cut = apply_cutoff(control, 8)
    assert np.allclose(cut.F_N[t <= 8.0], 1.0)
    assert np.allclose(cut.F_N[t >= 9.0], 0.0)
    assert np.all(np.diff(cut.F_N[(t >= 8.0) & (t <= 9.0)]) <= 1e-12)
    with pytest.raises(HorizonExceeded):
        apply_cutoff(control, 25)


def test_half_line_transforms_of_unit_box():
    # F_N = 1 on [0, L]: f_c(s) = sin(sL)/s, f_s(s) = (1 - cos(sL))/s
    L = 5.0
    t = np.linspace(0.0, L, 20001)
    control = SynthesizedControl(t_grid=t, F=np.ones_like(t), N=4, F_N=np.ones_like(t))
    s = np.array([0.7, 1.3, 2.9])
    fc, fs = half_line_transforms(control, s)
    assert np.max(np.abs(fc - np.sin(s * L) / s)) < 1e-6
    assert np.max(np.abs(fs - (1 - np.cos(s * L)) / s)) < 1e-6


def test_h6_identity_fails_for_constant_targets():
    # the causal-existence identity does not hold for this admissible target;
    # this is why the synthesis needs the staged time-domain completion
    design = build_frequency_design(CONSTANT, SPEC)
    report = check_h6(design, np.linspace(0.5, 10.0, 20))
    assert report.max_discrepancy > 0.05


def _l2_error(control, n_max, targets):
    kk = np.linspace(0.05, 0.45, 64)
    cut = apply_cutoff(control, n_max)
    rows = roundtrip_rates(cut, SPEC, kk)
    assert all(isinstance(r, RateTriple) for r in rows)
    rt = np.array([r.r_t for r in rows])
    rr = np.array([r.r_r for r in rows])
    tt = np.interp(kk, targets.k_grid, targets.r_t)
    tr = np.interp(kk, targets.k_grid, targets.r_r)
    dk = kk[1] - kk[0]
    return float(np.sqrt(np.sum((rt - tt) ** 2 + (rr - tr) ** 2) * dk))


def test_causal_completion_roundtrip_converges():
    design = build_frequency_design(CONSTANT, SPEC)
    t = default_time_grid(SPEC, 64)
    control = causal_completion(synthesize_f(design, t), design)
    errs = [_l2_error(control, n, CONSTANT) for n in (8, 16, 32, 64)]
    assert all(e2 <= e1 + 1e-12 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] < 5e-2


def test_roundtrip_collects_band_edge():
    t = np.linspace(0.0, 20.0, 2001)
    control = SynthesizedControl(t_grid=t, F=-np.exp(-t))
    cut = apply_cutoff(control, 8)
    rows = roundtrip_rates(cut, SPEC, np.array([0.0, 0.25]))
    assert isinstance(rows[0], BandEdge)


def test_fhat_of_exponential_control():
    # F(t) = -exp(-t): Fhat(omega) = -1/(1 + i omega), so Re(Fhat) < 0 (causal,
    # dissipative) and the transform matches the closed form
    t = np.linspace(0.0, 60.0, 120001)
    control = SynthesizedControl(t_grid=t, F=-np.exp(-t), N=50, F_N=-np.exp(-t))
    kk = np.array([0.1, 0.25, 0.4])
    fhat = fhat_of_control(control, SPEC, kk)
    expect = -1.0 / (1.0 + 1j * SPEC.omega(kk))
    assert np.max(np.abs(fhat - expect)) < 1e-6
