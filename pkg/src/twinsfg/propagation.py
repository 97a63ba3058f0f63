"""Optical transfer between the PDC and SFG crystals.

Only the product H+(w) H-(-w) enters the coherent SFG signal, and every
element modelled here depends on the mode through (|q|, Omega) alone, so
the two far-field halves selected by the mirrors need no separate
bookkeeping.  The product is

    T * W(Omega) * P(q, Omega) * G(q) * exp(-i Omega dt) * D(q, Omega)

with T the amplitude transmission, W the spectral window, P the pinhole
(shared by both arms, it sits in the common far field), G the gap between
the mirrors, and D the defocus propagation phase

    D = exp[-i q^2 c dz / (omega1 (1 - Omega^2/omega1^2))]

or, with ``defocus_model="chirp"``, the same phase after substituting the
phase-matched q^2 = k1 k1'' Omega^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c

from .dispersion import Medium

BOX = "box"
SMOOTH = "smooth"
PROPAGATION = "propagation"
CHIRP = "chirp"


class TransferDomainError(ValueError):
    """Frequency offset outside |Omega| < omega1."""


@dataclass(frozen=True)
class TransferSpec:
    """Optical path between the crystals (SI units).

    ``window`` is the full width of the spectral window centred on
    degeneracy (rad/s), ``None`` for no window.  ``window_edge`` is the
    10-90 % edge width of the smooth window.
    """

    delay: float = 0.0
    defocus: float = 0.0
    window: float | None = None
    window_shape: str = BOX
    window_edge: float = 0.05e15
    pinhole_half_angle: float | None = None
    gap_q_min: float = 0.0
    transmission: float = 1.0
    defocus_model: str = PROPAGATION

    def __post_init__(self):
        if self.window is not None and not self.window > 0:
            raise ValueError("window width must be > 0")
        if self.pinhole_half_angle is not None and not 0 < self.pinhole_half_angle < math.pi / 2:
            raise ValueError("pinhole half-angle must lie in (0, pi/2)")
        if not 0 <= self.transmission <= 1:
            raise ValueError("amplitude transmission must lie in [0, 1]")
        if self.gap_q_min < 0:
            raise ValueError("gap_q_min must be >= 0")
        if self.window_shape not in (BOX, SMOOTH):
            raise ValueError(f"window_shape must be {BOX!r} or {SMOOTH!r}")
        if self.defocus_model not in (PROPAGATION, CHIRP):
            raise ValueError(f"defocus_model must be {PROPAGATION!r} or {CHIRP!r}")

    def replace(self, **changes):
        return replace(self, **changes)


def _check_domain(medium, Omega):
    if np.any(np.abs(Omega) >= medium.omega1):
        raise TransferDomainError("|Omega| must stay below omega1")


def delay_phase(Omega, delay):
    return np.exp(-1j * np.asarray(Omega, dtype=float) * delay)


def window_weight(Omega, spec: TransferSpec):
    """Spectral window: hard box on |Omega| <= window/2, or a logistic edge."""
    Omega = np.asarray(Omega, dtype=float)
    if spec.window is None:
        return np.ones_like(Omega)
    half = 0.5 * spec.window
    if spec.window_shape == BOX:
        return (np.abs(Omega) <= half).astype(float)
    # logistic edge; 10-90 % rise over window_edge
    s = spec.window_edge / (2.0 * math.log(9.0))
    return 1.0 / (1.0 + np.exp((np.abs(Omega) - half) / s))


def pinhole_q_max(medium: Medium, Omega, spec: TransferSpec):
    """q cut-off of the pinhole, k1(Omega) sin(half angle); inf if absent."""
    if spec.pinhole_half_angle is None:
        return np.full(np.shape(Omega), np.inf)[()]
    return medium.k_signal(Omega) * math.sin(spec.pinhole_half_angle)


def defocus_phase(medium: Medium, q, Omega, spec: TransferSpec):
    Omega = np.asarray(Omega, dtype=float)
    q = np.asarray(q, dtype=float)
    if spec.defocus == 0.0:
        return np.ones(np.broadcast_shapes(q.shape, Omega.shape), dtype=complex)
    w1 = medium.omega1
    denom = 1.0 - (Omega / w1) ** 2
    if spec.defocus_model == PROPAGATION:
        phi = q**2 * c / (w1 * denom) * spec.defocus
    else:
        phi = Omega**2 * medium.gvd_signal() * medium.signal_index() / denom * spec.defocus
        phi = np.broadcast_to(phi, np.broadcast_shapes(q.shape, Omega.shape))
    return np.exp(-1j * phi)


def aperture_indicator(medium: Medium, q, Omega, spec: TransferSpec):
    q = np.asarray(q, dtype=float)
    ok = q >= spec.gap_q_min
    if spec.pinhole_half_angle is not None:
        ok = ok & (q <= pinhole_q_max(medium, Omega, spec))
    return ok.astype(float)


def static_transfer(medium: Medium, q, Omega, spec: TransferSpec):
    """Everything in the product except the delay phase."""
    _check_domain(medium, Omega)
    return (
        spec.transmission
        * window_weight(Omega, spec)
        * aperture_indicator(medium, q, Omega, spec)
        * defocus_phase(medium, q, Omega, spec)
    )


def transfer_product(medium: Medium, q, Omega, spec: TransferSpec):
    """H+(w) H-(-w) at modes (q, Omega)."""
    return static_transfer(medium, q, Omega, spec) * delay_phase(Omega, spec.delay)


def pinhole_from_geometry(diameter, distance):
    """Half-angle (rad) subtended by a circular pinhole of ``diameter`` at ``distance``."""
    if not (diameter > 0 and distance > 0):
        raise ValueError("pinhole diameter and distance must be positive")
    half = math.atan(0.5 * diameter / distance)
    if half >= 0.5 * math.pi:
        raise ValueError("pinhole half-angle must be below pi/2")
    return half


def effective_bandwidth(medium: Medium, spec: TransferSpec):
    """Full temporal bandwidth (rad/s) left on the phase-matching locus by the pinhole.

    The locus q = sqrt(k1 k1'') |Omega| leaves the pinhole at
    q_max = k1 sin(half angle); the result is clipped by the window.
    """
    if spec.pinhole_half_angle is None:
        raise ValueError("effective bandwidth requires a pinhole")
    k1 = float(medium.k_signal(0.0))
    q_max = k1 * math.sin(spec.pinhole_half_angle)
    width = 2.0 * q_max / math.sqrt(k1 * medium.gvd_signal())
    if spec.window is not None:
        width = min(width, spec.window)
    return width
