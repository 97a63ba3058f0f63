"""Scenario layer: the three measured configurations and their summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from .correlator import CorrelationProfile, Grid, delay_sweep
from .phasematch import Crystal, sinc
from .propagation import TransferSpec, effective_bandwidth, pinhole_from_geometry

#: sinc^2(x) = 1/2 at x = SINC2_HALF_POINT
SINC2_HALF_POINT = brentq(lambda x: float(sinc(x)) ** 2 - 0.5, 1.0, 2.0, xtol=1e-15)
#: FWHM * (full box width) for the sinc^2 profile of a box spectrum
TIME_BANDWIDTH = 4.0 * SINC2_HALF_POINT

DEFAULT_WINDOW = 0.9e15  # rad/s
DEFAULT_DEFOCUS = (0.0, 100e-6, 200e-6, 400e-6)


class FWHMError(ValueError):
    """Profile has no measurable full width at half maximum."""


class FitError(RuntimeError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass
class Sinc2Fit:
    """A sinc^2(width (t - center) / 2) + baseline, width in rad/s."""

    amplitude: float
    width: float
    center: float
    baseline: float
    residual_norm: float
    converged: bool = True
    nfev: int = 0

    def __call__(self, t):
        return sinc2_model(np.asarray(t, dtype=float), self.amplitude, self.width, self.center, self.baseline)


def sinc2_model(t, amplitude, width, center, baseline):
    return amplitude * sinc(0.5 * width * (t - center)) ** 2 + baseline


def extract_fwhm(profile: CorrelationProfile):
    """Width between the linearly interpolated half-height crossings.

    Half height is ``baseline + (max - baseline) / 2`` with the profile's own
    baseline.  Exactly tied maxima (a symmetric split peak) are measured
    between the outermost crossings.
    """
    t, y = profile.delays, profile.intensity
    if t.size < 5:
        raise FWHMError("need at least 5 points")
    peak = np.max(y)
    if not peak > profile.baseline or peak == np.min(y):
        raise FWHMError("profile is flat or has no maximum above baseline")
    tops = np.flatnonzero(y == peak)
    if tops[0] == 0 or tops[-1] == t.size - 1:
        raise FWHMError("maximum at sweep edge; width unreliable")
    half = profile.baseline + 0.5 * (peak - profile.baseline)

    def crossing(step):
        j = tops[-1] if step > 0 else tops[0]
        while y[j] >= half:
            j += step
            if j < 0 or j >= t.size:
                raise FWHMError("half maximum not reached inside the sweep")
        a, b = j - step, j
        return t[a] + (half - y[a]) * (t[b] - t[a]) / (y[b] - y[a])

    return float(crossing(1) - crossing(-1))


def fit_sinc2(profile: CorrelationProfile, baseline=None, max_nfev=2000):
    """Least-squares sinc^2 fit (Levenberg-Marquardt).

    Initial guess: amplitude = max - min, width = TIME_BANDWIDTH / crude FWHM,
    center = argmax, baseline = min.  Passing ``baseline`` holds it fixed.
    Internally delays are in fs and widths in 1e15 rad/s.
    """
    t = profile.delays * 1e15
    y = np.asarray(profile.intensity, dtype=float)
    if t.size < 8:
        raise ValueError("sinc^2 fit needs at least 8 points")
    scale = float(np.max(np.abs(y))) or 1.0
    ys = y / scale
    lo = float(np.min(y))
    crude = CorrelationProfile(profile.delays, y, lo)
    try:
        w0 = TIME_BANDWIDTH / (extract_fwhm(crude) * 1e15)
    except FWHMError:
        w0 = TIME_BANDWIDTH / (0.25 * (t[-1] - t[0]))
    a0 = (float(np.max(y)) - lo) / scale
    c0 = float(t[int(np.argmax(y))])
    fixed = baseline is not None

    def unpack(p):
        if fixed:
            return p[0], p[1], p[2], baseline / scale
        return p

    def resid(p):
        a, w, c0_, b = unpack(p)
        return a * sinc(0.5 * w * (t - c0_)) ** 2 + b - ys

    p0 = [a0, w0, c0] if fixed else [a0, w0, c0, lo / scale]
    sol = least_squares(resid, p0, method="lm", max_nfev=max_nfev, xtol=1e-14, ftol=1e-14, gtol=1e-14)
    a, w, c0_, b = unpack(sol.x)
    fit = Sinc2Fit(
        amplitude=float(a * scale),
        width=float(abs(w) * 1e15),
        center=float(c0_ * 1e-15),
        baseline=float(b * scale),
        residual_norm=float(np.linalg.norm(sol.fun) * scale),
        converged=bool(sol.status > 0),
        nfev=int(sol.nfev),
    )
    if not fit.converged:
        raise FitError(f"sinc^2 fit did not converge after {sol.nfev} evaluations", fit)
    return fit


@dataclass
class ScenarioResult:
    profile: CorrelationProfile
    fwhm: float
    fit: Sinc2Fit | None
    peak_intensity: float
    extras: dict = field(default_factory=dict)


@dataclass
class Setup:
    """Everything a scenario needs; defaults reproduce the measured set-up."""

    pdc: Crystal = field(default_factory=Crystal)
    sfg: Crystal = field(default_factory=Crystal)
    transfer: TransferSpec = field(default_factory=lambda: TransferSpec(window=DEFAULT_WINDOW))
    grid: Grid = field(default_factory=Grid)
    delays: np.ndarray = field(default_factory=lambda: default_delays())
    pinhole_half_angle: float = field(default_factory=lambda: pinhole_from_geometry(4e-3, 0.29))
    defocus_list: tuple = DEFAULT_DEFOCUS
    baseline: float = 0.0
    workers: int | None = None


def default_delays(start=-60e-15, stop=60e-15, step=0.5e-15):
    """Delays from ``start`` to ``stop``; integer multiples of ``step`` when
    the ends are, so a symmetric sweep is exactly symmetric about zero."""
    if not step > 0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    k0, k1 = start / step, stop / step
    if abs(k0 - round(k0)) < 1e-9 and abs(k1 - round(k1)) < 1e-9:
        return step * np.arange(round(k0), round(k1) + 1)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def run_profile(setup: Setup, spec: TransferSpec, fit_baseline=None):
    profile = delay_sweep(setup.pdc, setup.sfg, setup.delays, spec, setup.grid, setup.baseline, setup.workers)
    fwhm = extract_fwhm(profile)
    try:
        fit = fit_sinc2(profile, baseline=fit_baseline)
    except FitError as err:
        fit = err.best
    return ScenarioResult(profile, fwhm, fit, float(np.max(profile.intensity)))


def scenario_fig2(setup: Setup):
    """Perfect imaging behind the box window."""
    spec = setup.transfer.replace(pinhole_half_angle=None, defocus=0.0)
    return run_profile(setup, spec)


def scenario_fig3(setup: Setup):
    """Far-field pinhole clipping the spatial bandwidth."""
    spec = setup.transfer.replace(pinhole_half_angle=setup.pinhole_half_angle, defocus=0.0)
    result = run_profile(setup, spec)
    result.extras["effective_bandwidth"] = effective_bandwidth(setup.pdc.medium, spec)
    result.extras["pinhole_half_angle"] = setup.pinhole_half_angle
    return result


def scenario_fig4(setup: Setup, defocus_model=None):
    """One sweep per SFG-crystal displacement; the baseline fitted on the
    least displaced profile is held for the rest of the family."""
    spec0 = setup.transfer.replace(pinhole_half_angle=None)
    if defocus_model is not None:
        spec0 = spec0.replace(defocus_model=defocus_model)
    order = sorted(range(len(setup.defocus_list)), key=lambda i: abs(setup.defocus_list[i]))
    results = [None] * len(setup.defocus_list)
    shared = None
    for i in order:
        dz = setup.defocus_list[i]
        res = run_profile(setup, spec0.replace(defocus=dz), fit_baseline=shared)
        if shared is None and res.fit is not None:
            shared = res.fit.baseline
        res.extras["defocus"] = dz
        results[i] = res
    return results


def scenario_window_sweep(setup: Setup, widths):
    """Box-window-only scenarios at several window widths."""
    out = []
    for w in widths:
        res = run_profile(setup, setup.transfer.replace(window=w, pinhole_half_angle=None, defocus=0.0))
        res.extras["window"] = w
        out.append(res)
    return out


def time_bandwidth_product(result: ScenarioResult):
    return result.fwhm * result.extras.get("window", math.nan)
