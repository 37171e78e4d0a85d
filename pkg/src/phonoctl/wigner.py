"""Wigner distribution estimation and the closed-form kinetic fields.

The empirical side estimates W_hat(t, xi, k) = (eps/2) E[conj(psi_hat)(k -
eps*xi/2) psi_hat(k + eps*xi/2)] from simulation ensembles; with eps = 1/n the
offsets land on half-grid points reached by zero-padded discrete Fourier
interpolation.  The theoretical side evaluates the kinetic-limit fields: the
initial profile transported ballistically outside the interval [0, v_g t] and
split into thermal/transmitted/reflected pieces inside it, plus (impulsive
case only) a delta term on x = v_g t kept as a per-k atom channel that only
ever enters pairings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionSpec
from .errors import GridMismatch, PacketNotSeparated
from .rates import rates_feedback, rates_uncontrolled


# ---------------------------------------------------------------------------
# empirical estimate


@dataclass
class WignerGrid:
    """Sampled Wigner data, either spectral (xi, k) or positional (x, k)."""

    t: float
    eps: float
    k_grid: np.ndarray
    values: np.ndarray  # (n_axis0, n_k); complex for xi-space, real for x-space
    stderr: np.ndarray
    space: str  # "xi" or "x"
    xi_grid: np.ndarray | None = None
    x_grid: np.ndarray | None = None


def _interpolate_half_grid(psi: np.ndarray) -> np.ndarray:
    """Band-limited values of psi_hat on the doubled wavenumber grid.

    Input samples live on k_j = j/n - 1/2; the output lives on
    kappa_i = i/(2n) - 1/2 with output[2j] == input[j] exactly.
    """
    n = psi.shape[-1]
    coeff = np.fft.ifft(psi, axis=-1)
    padded = np.concatenate([coeff, np.zeros_like(coeff)], axis=-1)
    return np.fft.fft(padded, axis=-1)


def estimate_wigner(
    psi_ensemble: np.ndarray,
    t_macro: float,
    eps: float,
    xi_grid=None,
) -> WignerGrid:
    """Ensemble Wigner estimate on the full (xi, k) grid.

    ``psi_ensemble`` is (n_realizations, n_modes); requires eps = 1/n_modes so
    that k +- eps*xi/2 for integer xi are exact half-grid points.
    """
    psi_ensemble = np.atleast_2d(np.asarray(psi_ensemble))
    m, n = psi_ensemble.shape
    if abs(eps * n - 1.0) > 1e-12:
        raise GridMismatch(f"eps = {eps} is not 1/n_modes = 1/{n}")
    if xi_grid is None:
        # half the representable range: offsets then never wrap more than a
        # quarter band, which keeps torus ghost images (pairings of a packet
        # with its own wrap-around at |xi| ~ n) out of the estimate
        xi_grid = np.arange(-(n // 2), n // 2)
    xi_grid = np.asarray(xi_grid)
    if not np.all(xi_grid == np.round(xi_grid)):
        raise GridMismatch("xi values must be integers")
    xi_int = xi_grid.astype(int)

    fine = _interpolate_half_grid(psi_ensemble)  # (m, 2n)
    j2 = 2 * np.arange(n)  # fine index of each k_j
    values = np.empty((xi_int.size, n), dtype=complex)
    stderr = np.zeros((xi_int.size, n), dtype=float)
    chunk = max(1, int(2**22 // max(1, m * n)))  # bound temporary size
    for start in range(0, xi_int.size, chunk):
        xs = xi_int[start : start + chunk]
        minus = (j2[None, :] - xs[:, None]) % (2 * n)  # (chunk, n_k)
        plus = (j2[None, :] + xs[:, None]) % (2 * n)
        prod = (eps / 2.0) * np.conj(fine[:, minus]) * fine[:, plus]
        mean = np.mean(prod, axis=0)
        values[start : start + chunk] = mean
        if m > 1:
            dev = prod - mean
            stderr[start : start + chunk] = np.sqrt(
                np.mean(np.abs(dev) ** 2, axis=0) / (m - 1) / m
            )
    k_grid = np.arange(n) / n - 0.5
    return WignerGrid(
        t=t_macro, eps=eps, k_grid=k_grid, values=values, stderr=stderr,
        space="xi", xi_grid=xi_grid,
    )


def to_position(grid: WignerGrid) -> WignerGrid:
    """Inverse Fourier transform in xi to the macroscopic position torus.

    Needs a contiguous symmetric integer xi range [-L, L); returns a real
    field on x_i = i/(2L) (unit torus, thermostat at x = 0).
    """
    if grid.space != "xi":
        raise GridMismatch("grid is already positional")
    if grid.xi_grid is None or grid.xi_grid.size < 2:
        raise GridMismatch("position transform needs an xi grid")
    L = int(-grid.xi_grid[0])
    if not np.array_equal(grid.xi_grid, np.arange(-L, L)):
        raise GridMismatch("position transform needs a contiguous xi grid [-L, L)")
    x_grid = np.arange(2 * L) / (2 * L)
    phases = np.exp(2j * np.pi * np.outer(x_grid, grid.xi_grid))
    values = np.real(phases @ grid.values)
    stderr = np.full_like(values, float(np.mean(grid.stderr)) * np.sqrt(2 * L))
    return WignerGrid(
        t=grid.t, eps=grid.eps, k_grid=grid.k_grid, values=values,
        stderr=stderr, space="x", x_grid=x_grid,
    )


# ---------------------------------------------------------------------------
# closed-form kinetic fields


@dataclass
class KineticField:
    """Closed-form kinetic-limit field: regular part on (x, k) plus the
    per-k weight of the singular term living on x = v_g(k) t."""

    t: float
    x_grid: np.ndarray
    k_grid: np.ndarray
    regular: np.ndarray  # (n_x, n_k)
    atom_weight: np.ndarray  # (n_k,)
    v_g: np.ndarray  # (n_k,)


def _assemble_field(w0_fn, spec, t, x_grid, k_grid, r_t, r_r, thermal_coeff):
    x_grid = np.asarray(x_grid, dtype=float)
    k_grid = np.asarray(k_grid, dtype=float)
    vg = np.asarray(spec.v_g(k_grid), dtype=float)
    lo = np.minimum(0.0, vg * t)
    hi = np.maximum(0.0, vg * t)
    x = x_grid[:, None]
    inside = (x >= lo[None, :]) & (x <= hi[None, :])
    ballistic = w0_fn(x - vg[None, :] * t, k_grid[None, :])
    reflected = w0_fn(-x + vg[None, :] * t, -k_grid[None, :])
    regular = np.where(
        inside,
        thermal_coeff[None, :] + r_t[None, :] * ballistic + r_r[None, :] * reflected,
        ballistic,
    )
    return regular, vg


def _rate_arrays(k_grid, triple_fn, edge_policy):
    """Per-k (r_a, r_t, r_r, ok) with the chosen band-edge handling.

    edge_policy "raise" propagates BandEdge; "ballistic" marks the point so
    the field falls back to pure transport there (for mode grids that contain
    the band-edge wavenumbers, where the initial measure carries no mass).
    """
    from .errors import BandEdge

    r_a = np.zeros(k_grid.size)
    r_t = np.zeros(k_grid.size)
    r_r = np.zeros(k_grid.size)
    ok = np.ones(k_grid.size, dtype=bool)
    for i, k in enumerate(k_grid):
        try:
            tr = triple_fn(float(k))
            r_a[i], r_t[i], r_r[i] = tr.r_a, tr.r_t, tr.r_r
        except BandEdge:
            if edge_policy == "raise":
                raise
            ok[i] = False
            r_t[i] = 1.0  # pure ballistic transport
    return r_a, r_t, r_r, ok


def kinetic_impulsive(
    w0_fn,
    spec: DispersionSpec,
    nu: float,
    temperature: float,
    script_f_fn,
    t: float,
    x_grid,
    k_grid,
    edge_policy: str = "raise",
) -> KineticField:
    """Kinetic field under the thermostat with an (optional) impulsive control.

    ``script_f_fn(k) -> complex`` is the limiting pulse transform; pass None
    for no control (atom weight zero).
    """
    k_grid = np.asarray(k_grid, dtype=float)
    r_a, r_t, r_r, ok = _rate_arrays(
        k_grid, lambda k: rates_uncontrolled(spec, nu, k), edge_policy
    )
    thermal = np.where(ok, r_a * temperature, 0.0)
    regular, vg = _assemble_field(w0_fn, spec, t, x_grid, k_grid, r_t, r_r, thermal)
    if script_f_fn is None or nu == 0.0:
        atom = np.zeros_like(k_grid)
    else:
        fsq = np.array([abs(complex(script_f_fn(float(k)))) ** 2 for k in k_grid])
        atom = np.where(ok, np.abs(vg) * r_a * fsq / nu, 0.0)
    return KineticField(
        t=t, x_grid=np.asarray(x_grid, dtype=float), k_grid=k_grid,
        regular=regular, atom_weight=atom, v_g=vg,
    )


def kinetic_feedback(
    w0_fn,
    spec: DispersionSpec,
    fhat_fn,
    nu: float,
    temperature: float,
    t: float,
    x_grid,
    k_grid,
    edge_policy: str = "raise",
) -> KineticField:
    """Kinetic field under a memory-feedback control with transfer values
    fhat_fn(k); thermal plateau -nu*T*r_a^F / Re(Fhat), no atom channel."""
    k_grid = np.asarray(k_grid, dtype=float)
    re_fhat = np.array([complex(fhat_fn(float(k))).real for k in k_grid])
    r_a, r_t, r_r, ok = _rate_arrays(
        k_grid, lambda k: rates_feedback(spec, complex(fhat_fn(k)), k), edge_policy
    )
    thermal = np.where(ok, -nu * temperature * r_a / re_fhat, 0.0)
    regular, vg = _assemble_field(w0_fn, spec, t, x_grid, k_grid, r_t, r_r, thermal)
    return KineticField(
        t=t, x_grid=np.asarray(x_grid, dtype=float), k_grid=k_grid,
        regular=regular, atom_weight=np.zeros_like(k_grid), v_g=vg,
    )


# ---------------------------------------------------------------------------
# pairings and observables


def _wrap_x(x):
    return x - np.round(x)


def pair_with_test_function(obj, o_fn) -> float:
    """Pair a kinetic field or a positional Wigner grid against O(x, k).

    The atom channel pairs as sum_k atom_weight(k) * O(v_g(k) t, k) * dk.
    Positions are compared on the macroscopic torus (wrapped to [-1/2, 1/2)).
    """
    if isinstance(obj, KineticField):
        x = _wrap_x(obj.x_grid)
        kk = obj.k_grid
        o_vals = o_fn(x[:, None], kk[None, :])
        dx = obj.x_grid[1] - obj.x_grid[0]
        dk = kk[1] - kk[0] if kk.size > 1 else 1.0
        bulk = float(np.sum(o_vals * obj.regular) * dx * dk)
        atom = float(
            np.sum(obj.atom_weight * o_fn(_wrap_x(obj.v_g * obj.t), kk)) * dk
        )
        return bulk + atom
    grid = obj
    if grid.space != "x":
        raise GridMismatch("pairing needs a positional grid; call to_position")
    x = _wrap_x(grid.x_grid)
    o_vals = o_fn(x[:, None], grid.k_grid[None, :])
    dx = grid.x_grid[1] - grid.x_grid[0]
    dk = grid.k_grid[1] - grid.k_grid[0]
    return float(np.sum(o_vals * np.real(grid.values)) * dx * dk)


def gaussian_battery(n: int = 8):
    """Fixed battery of Gaussian test functions on the (x, k) torus strip."""
    centers_x = np.array([-0.3, -0.15, 0.0, 0.15, 0.3, 0.0, -0.2, 0.2])
    centers_k = np.array([0.25, 0.25, 0.25, 0.25, 0.25, -0.25, -0.25, 0.25])
    widths_x = np.array([0.08, 0.08, 0.05, 0.08, 0.08, 0.05, 0.1, 0.05])
    widths_k = np.array([0.06, 0.06, 0.06, 0.06, 0.06, 0.06, 0.08, 0.03])

    def make(cx, ck, wx, wk):
        def o_fn(x, k):
            return np.exp(
                -(_wrap_x(x - cx) ** 2) / (2.0 * wx**2) - (k - ck) ** 2 / (2.0 * wk**2)
            )

        return o_fn

    return [
        (f"gauss_{i}", make(centers_x[i], centers_k[i], widths_x[i], widths_k[i]))
        for i in range(n)
    ]


def _mass(obj, region_fn) -> float:
    """Integral of the field over the region (indicator on wrapped x and k)."""
    if isinstance(obj, KineticField):
        x = _wrap_x(obj.x_grid)
        sel = region_fn(x[:, None], obj.k_grid[None, :])
        dx = obj.x_grid[1] - obj.x_grid[0]
        dk = obj.k_grid[1] - obj.k_grid[0] if obj.k_grid.size > 1 else 1.0
        bulk = float(np.sum(np.where(sel, obj.regular, 0.0)) * dx * dk)
        atom_sel = region_fn(_wrap_x(obj.v_g * obj.t), obj.k_grid)
        atom = float(np.sum(np.where(atom_sel, obj.atom_weight, 0.0)) * dk)
        return bulk + atom
    grid = obj
    x = _wrap_x(grid.x_grid)
    sel = region_fn(x[:, None], grid.k_grid[None, :])
    dx = grid.x_grid[1] - grid.x_grid[0]
    dk = grid.k_grid[1] - grid.k_grid[0]
    return float(np.sum(np.where(sel, np.real(grid.values), 0.0)) * dx * dk)


def energy_fractions(
    obj,
    k0: float,
    initial_mass: float,
    margin_x: float = 0.05,
    separation_tol: float = 0.05,
):
    """(transmitted, reflected, absorbed) fractions of an incident packet.

    Transmitted: mass at x > margin with k > 0; reflected: x < -margin with
    k < 0; absorbed: complement relative to the initial packet mass.  Raises
    PacketNotSeparated if more than ``separation_tol`` of the initial mass
    still sits in the margin band |x| <= margin.
    """
    if initial_mass <= 0:
        raise ValueError("initial_mass must be positive")
    trans = _mass(obj, lambda x, k: (x > margin_x) & (k > 0)) / initial_mass
    refl = _mass(obj, lambda x, k: (x < -margin_x) & (k < 0)) / initial_mass
    stuck = _mass(obj, lambda x, k: np.abs(x) <= margin_x) / initial_mass
    if abs(stuck) > separation_tol:
        raise PacketNotSeparated(
            f"{stuck:.3f} of the initial mass remains within |x| <= {margin_x}"
        )
    return trans, refl, 1.0 - trans - refl
