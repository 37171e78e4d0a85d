"""Monte-Carlo simulation of the thermostatted chain in Fourier space.

The dynamics is diagonal in k up to a rank-one coupling through the boundary
momentum alpha0 = mean_k Im(psi_hat), so the state is a complex amplitude per
discrete wavenumber and each step costs O(n).  Three boundary regimes:

* none/impulsive: d psi_hat = -i*omega*psi_hat dt - i*nu*alpha0 dt + i*F(t) dt
  + i*sqrt(2*nu*T) dR, with the nu, F and noise terms flat in k (the boundary
  site couples to every mode equally).
* feedback: d psi_hat = -i*omega*psi_hat dt + i*(F*alpha0)(t) dt
  + i*sqrt(2*nu*T) dR, with the friction replaced by a causal convolution of a
  compactly supported kernel against the alpha0 history.

Integrator: exact phase rotation for the -i*omega term composed with explicit
Euler-Maruyama for coupling/forcing/noise; one shared real Gaussian increment
per step across all modes (a single Wiener process drives the boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionSpec
from .errors import BudgetExceeded, HistoryUnderflow, UnsupportedMeasure

DT_OMEGA_MAX = 0.1


# ---------------------------------------------------------------------------
# initial measures


@dataclass(frozen=True)
class WavePacket:
    """Gaussian wave packet: center x0, spatial width sigma_x, carrier k0.

    The spectral envelope width is s = eps / (4*pi*sigma_x), the minimum-
    uncertainty partner of sigma_x at scale eps.
    """

    x0: float
    sigma_x: float
    k0: float
    amplitude: float = 1.0

    def spectral_width(self, eps: float) -> float:
        return eps / (4.0 * np.pi * self.sigma_x)


@dataclass(frozen=True)
class InitialMeasure:
    """Random initial data with zero mean and prescribed Wigner profile.

    kinds: "zero", "thermal" (W0 = temperature, constant in x and k) and
    "wave_packet".  Amplitudes vanish within ``support_margin`` of the
    band-edge wavenumbers {0, +-1/2} where the group velocity degenerates.
    """

    kind: str = "zero"
    temperature: float = 0.0
    packet: WavePacket | None = None
    support_margin: float = 0.02

    def edge_mask(self, k_grid: np.ndarray) -> np.ndarray:
        """True where the measure is allowed to carry mass."""
        dist = np.minimum(np.abs(k_grid), np.abs(np.abs(k_grid) - 0.5))
        return dist >= self.support_margin


def packet_w0(measure: InitialMeasure, eps: float, x, k):
    """Closed-form initial Wigner profile of the wave-packet measure.

    W0(x, k) = (a^2/2) * exp(-(k-k0)^2/(2 s^2))
               * exp(-(x-x0)^2/(2 sigma_x^2)) / (sigma_x*sqrt(2*pi)),
    the exact phase-space profile of the sampler below (the sampler's
    quadratic expectation factorizes into these two Gaussians).
    """
    p = measure.packet
    if p is None:
        raise UnsupportedMeasure("measure has no packet")
    s = p.spectral_width(eps)
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    amp = 0.5 * p.amplitude**2 / (p.sigma_x * np.sqrt(2.0 * np.pi))
    return (
        amp
        * np.exp(-((k - p.k0) ** 2) / (2.0 * s**2))
        * np.exp(-((x - p.x0) ** 2) / (2.0 * p.sigma_x**2))
    )


# ---------------------------------------------------------------------------
# boundary controls


@dataclass(frozen=True)
class NoControl:
    kind: str = "none"


@dataclass(frozen=True)
class ImpulsivePulse:
    """Impulsive control F(t) = eps^{-1/2} * eta_w(t), eta_w a unit-mass
    smooth bump supported on [0, width].

    Its scaled transform converges (as eps -> 0) to the continuous,
    Z-independent limit script-F(k) = eta_hat(omega(k)), and
    int_0^{t/eps} eps * F^2 = int eta_w^2 is eps-independent.
    """

    width: float
    eps: float
    kind: str = "impulsive"

    def bump(self, t):
        t = np.asarray(t, dtype=float)
        x = t / self.width
        inside = (x > 0.0) & (x < 1.0)
        xs = np.where(inside, x, 0.5)
        raw = np.where(inside, np.exp(-1.0 / (xs * (1.0 - xs))), 0.0)
        # normalize to unit mass once per call (cheap, width-only)
        xx = np.linspace(0.0, 1.0, 2049)[1:-1]
        norm = np.trapezoid(np.exp(-1.0 / (xx * (1.0 - xx))), xx) * self.width
        return raw / norm

    def value(self, t):
        return self.bump(t) / np.sqrt(self.eps)

    def transform(self, omega):
        """eta_hat(omega) = int eta_w(t) e^{-i omega t} dt by quadrature."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        tt = np.linspace(0.0, self.width, 4097)
        eta = self.bump(tt)
        ker = np.exp(-1j * np.outer(omega, tt))
        out = np.trapezoid(ker * eta, tt, axis=1)
        return out if out.size > 1 else complex(out[0])

    def script_f(self, spec: DispersionSpec, k):
        return self.transform(spec.omega(k))


@dataclass(frozen=True)
class FeedbackControl:
    """Memory-feedback kernel: samples of the cutoff control F_N on a uniform
    time grid; support is [0, N+1] in microscopic time."""

    t_grid: np.ndarray
    F_N: np.ndarray
    kind: str = "feedback"

    @property
    def support(self) -> float:
        nz = np.flatnonzero(np.abs(self.F_N) > 0)
        return float(self.t_grid[nz[-1]]) if nz.size else 0.0

    def resample(self, dt: float) -> np.ndarray:
        """Kernel samples on the step grid j*dt covering the support."""
        sup = self.support
        if sup > self.t_grid[-1] + 1e-12:
            raise HistoryUnderflow("control samples do not span the kernel support")
        n = int(np.ceil(sup / dt)) + 1
        tt = np.arange(n) * dt
        if tt[-1] > self.t_grid[-1] + 1e-12:
            raise HistoryUnderflow(
                f"step grid reaches {tt[-1]} beyond control samples {self.t_grid[-1]}"
            )
        return np.interp(tt, self.t_grid, self.F_N)


# ---------------------------------------------------------------------------
# configuration and state


@dataclass(frozen=True)
class SimConfig:
    n_modes: int
    eps: float
    nu: float
    temperature: float
    dt: float
    n_realizations: int
    seed: int
    control: object = field(default_factory=NoControl)
    max_steps: int = 50_000_000  # cap on steps x realizations per run

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ValueError("eps must be in (0, 1]")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.temperature < 0.0:
            raise ValueError("temperature must be >= 0")

    def k_grid(self) -> np.ndarray:
        j = np.arange(self.n_modes)
        return j / self.n_modes - 0.5

    def validate_dt(self, spec: DispersionSpec):
        if self.dt * spec.omega_max >= DT_OMEGA_MAX:
            raise ValueError(
                f"dt*omega_max = {self.dt * spec.omega_max} must be < {DT_OMEGA_MAX}"
            )


@dataclass
class Realization:
    """State of one trajectory: mode amplitudes, boundary-momentum history."""

    psi_hat: np.ndarray
    alpha0_history: np.ndarray
    t_micro: float

    def alpha0(self) -> float:
        return float(np.mean(np.imag(self.psi_hat)))


def energy(psi_hat: np.ndarray, eps: float) -> float:
    """eps * sum_j |psi_hat(k_j)|^2 * dk with dk = 1/n_modes."""
    psi_hat = np.asarray(psi_hat)
    return float(eps * np.mean(np.abs(psi_hat) ** 2, axis=-1))


def free_boundary_signal(psi_hat: np.ndarray, spec: DispersionSpec, k_grid, t: float) -> float:
    """Diagnostic: boundary momentum of the freely rotated initial state."""
    return float(np.mean(np.imag(psi_hat * np.exp(-1j * spec.omega(k_grid) * t))))


def _sample_modes(config: SimConfig, measure: InitialMeasure, rng: np.random.Generator) -> np.ndarray:
    kk = config.k_grid()
    mask = measure.edge_mask(kk)
    if measure.kind == "zero":
        return np.zeros(config.n_modes, dtype=complex)
    if measure.kind == "thermal":
        # envelope 2*T/eps in |psi_hat|^2 makes W_hat(0, k) = T and the
        # thermal state stationary (energy drift -2*nu*E[alpha0^2] + 2*nu*T = 0)
        env = np.where(mask, 2.0 * measure.temperature / config.eps, 0.0)
        phases = rng.uniform(0.0, 2.0 * np.pi, config.n_modes)
        return np.sqrt(env) * np.exp(1j * phases)
    if measure.kind == "wave_packet":
        p = measure.packet
        if p is None:
            raise UnsupportedMeasure("wave_packet measure needs a packet spec")
        s = p.spectral_width(config.eps)
        c = p.amplitude * np.exp(-((kk - p.k0) ** 2) / (4.0 * s**2))
        c = np.where(mask, c, 0.0)
        # one global uniform phase: kills <psi psi> (I1) while keeping the
        # quadratic profile deterministic
        phase = rng.uniform(0.0, 2.0 * np.pi)
        carrier = np.exp(-2j * np.pi * kk * p.x0 / config.eps)
        return (c / np.sqrt(config.eps)) * carrier * np.exp(1j * phase)
    raise UnsupportedMeasure(f"unknown measure kind {measure.kind!r}")


def init_realization(config: SimConfig, measure: InitialMeasure, rng: np.random.Generator) -> Realization:
    psi = _sample_modes(config, measure, rng)
    if measure.kind != "zero" and not np.any(np.abs(psi) > 0):
        raise UnsupportedMeasure("measure carries no spectral mass off the band-edge margin")
    return Realization(psi_hat=psi, alpha0_history=np.zeros(0), t_micro=0.0)


# ---------------------------------------------------------------------------
# single-trajectory steps (reference implementations used by tests)


def step_impulsive(
    state: Realization,
    config: SimConfig,
    spec: DispersionSpec,
    f_value: float,
    rng: np.random.Generator,
) -> Realization:
    """One Euler-Maruyama step of the impulsive/uncontrolled dynamics."""
    omega = spec.omega(config.k_grid())
    xi = rng.standard_normal()
    alpha0 = state.alpha0()
    drift = (-1j * config.nu * alpha0 + 1j * f_value) * config.dt
    noise = 1j * np.sqrt(2.0 * config.nu * config.temperature * config.dt) * xi
    psi = np.exp(-1j * omega * config.dt) * state.psi_hat + drift + noise
    return Realization(
        psi_hat=psi,
        alpha0_history=np.append(state.alpha0_history, alpha0),
        t_micro=state.t_micro + config.dt,
    )


def _convolve_history(kernel: np.ndarray, history: np.ndarray, dt: float) -> float:
    """(F * alpha0)(t) = int_0^t F(t-s) alpha0(s) ds by trapezoid.

    ``history`` holds alpha0 at times t, t-dt, ..., most recent first,
    truncated to the kernel length.
    """
    m = min(kernel.shape[0], history.shape[0])
    if m == 0:
        return 0.0
    w = np.full(m, dt)
    w[0] *= 0.5
    if m > 1:
        w[-1] *= 0.5
    return float(np.dot(kernel[:m] * w, history[:m]))


def step_feedback(
    state: Realization,
    config: SimConfig,
    spec: DispersionSpec,
    kernel: np.ndarray,
    rng: np.random.Generator,
) -> Realization:
    """One step of the memory-feedback dynamics.

    ``kernel`` is the control resampled on the step grid
    (``FeedbackControl.resample(dt)``).
    """
    omega = spec.omega(config.k_grid())
    xi = rng.standard_normal()
    alpha0 = state.alpha0()
    history = np.concatenate([[alpha0], state.alpha0_history[::-1]])
    conv = _convolve_history(kernel, history, config.dt)
    drift = 1j * conv * config.dt
    noise = 1j * np.sqrt(2.0 * config.nu * config.temperature * config.dt) * xi
    psi = np.exp(-1j * omega * config.dt) * state.psi_hat + drift + noise
    return Realization(
        psi_hat=psi,
        alpha0_history=np.append(state.alpha0_history, alpha0),
        t_micro=state.t_micro + config.dt,
    )


# ---------------------------------------------------------------------------
# vectorized ensemble driver


@dataclass
class EnsembleSummary:
    times_macro: np.ndarray
    energy_mean: np.ndarray
    energy_stderr: np.ndarray
    snapshots: dict  # t_macro -> (n_realizations, n_modes) complex array
    config: SimConfig


def _rng_streams(seed: int, n: int) -> list:
    root = np.random.SeedSequence(entropy=seed)
    return [np.random.Generator(np.random.PCG64(s)) for s in root.spawn(n)]


def run_ensemble(
    spec: DispersionSpec,
    config: SimConfig,
    measure: InitialMeasure,
    horizon_macro: float,
    snapshot_times=(),
    n_energy_samples: int = 201,
    noise_chunk: int = 2048,
) -> EnsembleSummary:
    """Run all realizations in lockstep to macroscopic time ``horizon_macro``.

    Each realization owns an RNG stream spawned from the seed by counter, and
    draws exactly one uniform block at init plus one Gaussian per step, so the
    result is bitwise reproducible and independent of any parallel schedule.
    """
    config.validate_dt(spec)
    m = config.n_realizations
    n_steps = int(round(horizon_macro / (config.eps * config.dt)))
    if n_steps * m > config.max_steps:
        raise BudgetExceeded(
            f"{n_steps} steps x {m} realizations exceeds cap {config.max_steps}"
        )

    streams = _rng_streams(config.seed, m)
    psi = np.stack(
        [init_realization(config, measure, rng).psi_hat for rng in streams]
    )

    omega = spec.omega(config.k_grid())
    phase = np.exp(-1j * omega * config.dt)
    sig = np.sqrt(2.0 * config.nu * config.temperature * config.dt)

    control = config.control
    kind = getattr(control, "kind", "none")
    kernel = None
    hist = None
    pos = 0
    if kind == "feedback":
        kernel = control.resample(config.dt)
        w = np.full(kernel.shape[0], config.dt)
        w[0] *= 0.5
        kernel_w = kernel * w  # endpoint correction applied per step below
        hist = np.zeros((kernel.shape[0], m))

    snap_steps = {int(round(t / (config.eps * config.dt))): t for t in snapshot_times}
    energy_steps = np.unique(
        np.round(np.linspace(0, n_steps, n_energy_samples)).astype(int)
    )
    energy_set = set(int(s) for s in energy_steps)

    times, means, errs = [], [], []
    snapshots = {}

    def record(step):
        if step in energy_set:
            e = config.eps * np.mean(np.abs(psi) ** 2, axis=1)
            times.append(step * config.eps * config.dt)
            means.append(float(np.mean(e)))
            errs.append(float(np.std(e, ddof=1) / np.sqrt(m)) if m > 1 else 0.0)
        if step in snap_steps:
            snapshots[snap_steps[step]] = psi.copy()

    record(0)
    step = 0
    while step < n_steps:
        chunk = min(noise_chunk, n_steps - step)
        noise = np.stack(
            [rng.standard_normal(chunk) for rng in streams], axis=1
        )  # (chunk, m)
        for j in range(chunk):
            t_now = step * config.dt
            alpha0 = np.mean(np.imag(psi), axis=1)  # (m,)
            if kind == "feedback":
                hist[pos] = alpha0
                span = min(kernel.shape[0], step + 1)
                idx = (pos - np.arange(span)) % hist.shape[0]
                kw = kernel_w[:span].copy()
                if span > 1:
                    kw[-1] = kernel[span - 1] * config.dt * 0.5
                force = kw @ hist[idx]
                pos = (pos + 1) % hist.shape[0]
                drift = 1j * force * config.dt
            else:
                f_val = (
                    float(control.value(t_now))
                    if kind == "impulsive" and t_now < control.width
                    else 0.0
                )
                drift = (-1j * config.nu * alpha0 + 1j * f_val) * config.dt
            psi = phase * psi + (drift + 1j * sig * noise[j])[:, None]
            step += 1
            record(step)

    return EnsembleSummary(
        times_macro=np.array(times),
        energy_mean=np.array(means),
        energy_stderr=np.array(errs),
        snapshots=snapshots,
        config=config,
    )
