"""Quadrature of the biphoton correlation and of the coherent SFG signal.

Both quantities are integrals over w = (q, Omega) with measure
d^3w / (2 pi)^3.  With every amplitude and transfer element depending on q
only through |q|, the transverse part reduces to

    int d^2q / (2 pi)^2 f(|q|) = int_0 du f(sqrt(u)) / (4 pi),   u = q^2,

(times J0(q dx) for a transverse offset dx).  The u-integral is done per
frequency row with the aperture limits (mirror gap, pinhole, grid q_max)
as integration bounds, so hard edges never fall between nodes.  Composite
Simpson weights are used in u and in Omega; the box window likewise sets
the Omega bounds.  A delay enters only through exp(-i Omega dt) in the
final Omega sum, which is where it is applied.

Work is split into fixed-size blocks of frequency rows (and of delays);
the block layout never depends on the worker count, so results are
bit-identical for any number of threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import j0

from .dispersion import Medium
from .phasematch import Crystal, f_pdc, f_sfg
from .propagation import (
    BOX,
    TransferSpec,
    defocus_phase,
    pinhole_q_max,
    window_weight,
)

RADIAL = "radial"
CARTESIAN = "cartesian"
ROW_BLOCK = 32
DELAY_BLOCK = 64
WORKERS_ENV = "TWINSFG_WORKERS"


class GridError(ValueError):
    """Grid violates its sampling invariants."""


@dataclass(frozen=True)
class Grid:
    """Sampling of the (q, Omega) domain.

    ``n_q`` and ``n_omega`` count Simpson nodes and must be odd; ``2**m + 1``
    keeps the Omega line FFT friendly.
    """

    q_max: float = 4e5
    n_q: int = 1025
    omega_max: float = 0.9e15
    n_omega: int = 4097
    reduction: str = RADIAL

    def __post_init__(self):
        for name in ("n_q", "n_omega"):
            n = getattr(self, name)
            if n < 16:
                raise GridError(f"{name} = {n}: at least 16 samples required")
            if n % 2 == 0:
                raise GridError(f"{name} = {n}: Simpson rule needs an odd sample count")
        if not self.q_max > 0 or not self.omega_max > 0:
            raise GridError("q_max and omega_max must be positive")
        if self.reduction not in (RADIAL, CARTESIAN):
            raise GridError(f"reduction must be {RADIAL!r} or {CARTESIAN!r}")

    def doubled(self):
        """Same domain with twice as many intervals on both axes."""
        return replace(self, n_q=2 * self.n_q - 1, n_omega=2 * self.n_omega - 1)

    def validate(self, medium: Medium):
        if self.omega_max >= medium.omega1:
            raise GridError("omega_max must stay below omega1")
        k_min = float(np.min(medium.k_signal(np.array([-self.omega_max, self.omega_max]))))
        if self.q_max >= k_min:
            raise GridError(f"q_max = {self.q_max:.6g} rad/m reaches evanescent modes (k1 >= {k_min:.6g})")


@dataclass
class CorrelationProfile:
    delays: np.ndarray
    intensity: np.ndarray
    baseline: float = 0.0
    grid_used: Grid | None = None
    transfer_used: TransferSpec | None = None

    def __post_init__(self):
        self.delays = np.asarray(self.delays, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.delays.shape != self.intensity.shape:
            raise ValueError("delays and intensity must have the same shape")
        if self.delays.size > 1 and np.any(np.diff(self.delays) <= 0):
            raise ValueError("delays must be strictly increasing")

    @property
    def coherent(self):
        return self.intensity - self.baseline

    @property
    def normalized(self):
        peak = np.max(self.intensity)
        return self.intensity / peak if peak > 0 else np.zeros_like(self.intensity)


@dataclass
class SpectralLine:
    """The q-reduced integrand on the Omega nodes.

    ``weights`` already include dOmega / (2 pi); a delay dt gives the
    integral ``sum(weights * amplitude * exp(-i omega dt))``.
    """

    omega: np.ndarray
    weights: np.ndarray
    amplitude: np.ndarray

    def at_delays(self, delays, workers=None):
        delays = np.atleast_1d(np.asarray(delays, dtype=float))
        wa = self.weights * self.amplitude

        def block(sl):
            ph = np.exp(-1j * np.multiply.outer(delays[sl], self.omega))
            return (ph * wa).sum(axis=1)

        blocks = [slice(i, i + DELAY_BLOCK) for i in range(0, delays.size, DELAY_BLOCK)]
        return np.concatenate(_run_blocks(block, blocks, workers)) if blocks else np.zeros(0, complex)


def simpson_weights(n):
    """Composite Simpson weights for n (odd) equispaced nodes on [0, 1]."""
    if n < 3 or n % 2 == 0:
        raise GridError("Simpson rule needs an odd number (>= 3) of nodes")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * (n - 1))


def resolve_workers(workers=None):
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else min(8, os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def _run_blocks(fn, blocks, workers):
    workers = resolve_workers(workers)
    if workers == 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def omega_nodes(grid: Grid, spec: TransferSpec | None):
    hi = grid.omega_max
    if spec is not None and spec.window is not None and spec.window_shape == BOX:
        hi = min(hi, 0.5 * spec.window)
    omega = np.linspace(-hi, hi, grid.n_omega)
    weights = simpson_weights(grid.n_omega) * (2.0 * hi) / (2.0 * math.pi)
    return omega, weights


def q_limits(medium: Medium, omega, grid: Grid, spec: TransferSpec | None):
    lo = np.zeros_like(omega)
    hi = np.full_like(omega, grid.q_max)
    if spec is not None:
        lo = lo + spec.gap_q_min
        hi = np.minimum(hi, pinhole_q_max(medium, omega, spec))
    return lo, np.maximum(hi, lo)


def _reduce_q(medium, omega, grid, spec, integrand, dx=0.0, workers=None):
    """Per-row transverse integral of ``integrand(q, Omega)`` (complex)."""
    if grid.reduction == CARTESIAN:
        return _reduce_q_cartesian(medium, omega, grid, spec, integrand, dx, workers)
    lo, hi = q_limits(medium, omega, grid, spec)
    u_lo, u_hi = lo**2, hi**2
    s = np.linspace(0.0, 1.0, grid.n_q)
    wq = simpson_weights(grid.n_q)

    def block(sl):
        span = u_hi[sl] - u_lo[sl]
        u = u_lo[sl, None] + span[:, None] * s[None, :]
        q = np.sqrt(u)
        vals = integrand(q, omega[sl, None])
        if dx != 0.0:
            vals = vals * j0(q * dx)
        return (vals * wq).sum(axis=1) * span / (4.0 * math.pi)

    blocks = [slice(i, i + ROW_BLOCK) for i in range(0, omega.size, ROW_BLOCK)]
    return np.concatenate(_run_blocks(block, blocks, workers))


def _reduce_q_cartesian(medium, omega, grid, spec, integrand, dx, workers):
    # square (qx, qy) lattice; the annulus lo <= |q| <= hi is applied as a mask
    lo, hi = q_limits(medium, omega, grid, spec)
    x = np.linspace(-grid.q_max, grid.q_max, grid.n_q)
    wx = simpson_weights(grid.n_q) * 2.0 * grid.q_max
    qx, qy = np.meshgrid(x, x, indexing="ij")
    qr = np.hypot(qx, qy)
    w2 = np.outer(wx, wx) / (2.0 * math.pi) ** 2
    phase_x = np.exp(1j * qx * dx) if dx != 0.0 else None

    def row(i):
        mask = (qr >= lo[i]) & (qr <= hi[i])
        vals = np.zeros(qr.shape, dtype=complex)
        vals[mask] = integrand(qr[mask], omega[i])
        if phase_x is not None:
            vals = vals * phase_x
        return (vals * w2).sum()

    blocks = [slice(i, i + ROW_BLOCK) for i in range(0, omega.size, ROW_BLOCK)]
    out = _run_blocks(lambda sl: np.array([row(i) for i in range(omega.size)[sl]]), blocks, workers)
    return np.concatenate(out)


def _static_factor(medium, spec):
    """Transfer factor evaluated on the nodes (aperture limits are the bounds)."""

    def factor(q, Omega):
        out = defocus_phase(medium, q, Omega, spec) * spec.transmission
        if spec.window is not None and spec.window_shape != BOX:
            out = out * window_weight(Omega, spec)
        return out

    return factor


def sfg_line(pdc: Crystal, sfg: Crystal, spec: TransferSpec, grid: Grid, workers=None):
    """Spectral line of H+(w) H-(-w) F_PDC(w) F_SFG(-w), delay excluded."""
    medium = pdc.medium
    grid.validate(medium)
    omega, weights = omega_nodes(grid, spec)
    if np.any(np.abs(omega) >= medium.omega1):
        raise GridError("Omega nodes reach omega1")
    factor = _static_factor(medium, spec)

    def integrand(q, Om):
        return factor(q, Om) * f_pdc(pdc, q, Om) * f_sfg(sfg, q, -Om)

    amp = _reduce_q(medium, omega, grid, spec, integrand, workers=workers)
    return SpectralLine(omega, weights, amp)


def coherent_sfg_intensity(pdc: Crystal, sfg: Crystal, spec: TransferSpec, grid: Grid, workers=None):
    """|int d^3w/(2 pi)^3 H+(w) H-(-w) F_PDC(w) F_SFG(-w)|^2."""
    line = sfg_line(pdc, sfg, spec, grid, workers)
    return float(np.abs(line.at_delays([spec.delay], workers)[0]) ** 2)


def ideal_imaging_intensity(pdc: Crystal, sfg: Crystal, delay, grid: Grid, window=None, workers=None):
    """Perfect imaging: H+ = 1, H- = exp(i Omega dt), optional box window.

    Goes through exactly the same path as :func:`coherent_sfg_intensity`.
    """
    return coherent_sfg_intensity(pdc, sfg, TransferSpec(delay=delay, window=window), grid, workers)


def delay_sweep(pdc: Crystal, sfg: Crystal, delays, spec_template: TransferSpec, grid: Grid,
                baseline=0.0, workers=None):
    delays = np.asarray(delays, dtype=float)
    if delays.size == 0:
        raise ValueError("delay list is empty")
    if np.any(np.diff(delays) <= 0):
        raise ValueError("delays must be strictly increasing")
    if baseline < 0:
        raise ValueError("baseline must be >= 0")
    line = sfg_line(pdc, sfg, spec_template, grid, workers)
    intensity = np.abs(line.at_delays(delays, workers)) ** 2 + baseline
    return CorrelationProfile(delays, intensity, baseline, grid, spec_template)


def biphoton_line(pdc: Crystal, grid: Grid, transfer: TransferSpec | None = None, amplitude=None,
                  dx=0.0, workers=None):
    """Spectral line of F_PDC (or ``amplitude(q, Omega)``) for psi_PDC."""
    medium = pdc.medium
    grid.validate(medium)
    omega, weights = omega_nodes(grid, transfer)
    if amplitude is None:
        amplitude = lambda q, Om: f_pdc(pdc, q, Om)
    if transfer is not None:
        factor = _static_factor(medium, transfer)
        integrand = lambda q, Om: factor(q, Om) * amplitude(q, Om)
    else:
        integrand = amplitude
    amp = _reduce_q(medium, omega, grid, transfer, integrand, dx=dx, workers=workers)
    return SpectralLine(omega, weights, amp)


def biphoton_correlation(pdc: Crystal, dx, dt, grid: Grid, transfer: TransferSpec | None = None,
                         amplitude=None, workers=None):
    """psi_PDC(dx, dt) = int d^3w/(2 pi)^3 exp(i (q.dx - Omega dt)) F_PDC(w).

    ``dt`` may be an array; a scalar ``dt`` returns a complex scalar.
    """
    line = biphoton_line(pdc, grid, transfer, amplitude, dx=float(dx), workers=workers)
    vals = line.at_delays(dt, workers)
    return complex(vals[0]) if np.ndim(dt) == 0 else vals


@dataclass
class FFTCheckReport:
    delays: np.ndarray
    fft_values: np.ndarray
    direct_values: np.ndarray
    max_rel_deviation: float
    extras: dict = field(default_factory=dict)


def fft_backend_check(pdc: Crystal, grid: Grid, transfer: TransferSpec | None = None, amplitude=None,
                      t_max=60e-15, dt_max=0.25e-15, workers=None):
    """Cross-check the FFT evaluation of psi_PDC(0, .) against direct summation.

    The FFT runs on the zero-padded Omega line; its natural delays are
    t_k = 2 pi k / (M h).  Both paths are compared on the t_k with
    |t_k| <= t_max; the deviation is normalized to the largest direct value.
    """
    line = biphoton_line(pdc, grid, transfer, amplitude, workers=workers)
    n = line.omega.size
    if n < 2:
        raise GridError("FFT check needs more than one frequency sample")
    h = (line.omega[-1] - line.omega[0]) / (n - 1)
    M = 1 << max(int(n - 1).bit_length(), math.ceil(math.log2(2 * math.pi / (h * dt_max))))
    coeff = np.zeros(M, dtype=complex)
    coeff[:n] = line.weights * line.amplitude
    t = 2.0 * math.pi * np.fft.fftfreq(M, d=h)
    spectrum = np.fft.fft(coeff) * np.exp(-1j * line.omega[0] * t)
    keep = np.abs(t) <= t_max
    order = np.argsort(t[keep])
    t_keep = t[keep][order]
    fft_vals = spectrum[keep][order]
    direct = line.at_delays(t_keep, workers)
    dev = float(np.max(np.abs(fft_vals - direct)) / np.max(np.abs(direct)))
    return FFTCheckReport(t_keep, fft_vals, direct, dev, {"fft_length": M, "omega_step": h})
