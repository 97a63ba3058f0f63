"""Refractive indices and wave numbers in a negative uniaxial crystal.

Sellmeier sheets are evaluated with the wavelength in microns, in the form

    n^2 = A + sum_i B_i L / (L - C_i) - D L,      L = lambda_um^2

which covers both the pure Sellmeier form (A = 1, D = 0) and the common
BBO form ``A + B/(L - C) - D L`` after the rewrite
``B/(L - C) = (B/C) [L/(L - C) - 1]``.

The default coefficients are the BBO fit of Tamosauskas et al., Opt. Mater.
Express 8, 1410 (2018), valid from 0.188 um to 5.2 um:

    n_o^2 - 1 = 0.90291 L/(L - 0.003926) + 0.83155 L/(L - 0.018786)
                + 0.76536 L/(L - 60.01)
    n_e^2 - 1 = 1.151075 L/(L - 0.007142) + 0.21803 L/(L - 0.02259)
                + 0.656 L/(L - 263)

Type-I convention: signal and idler are ordinary waves, the pump is
extraordinary.  Everything here is SI (m, s, rad/s, rad/m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq

ORDINARY = "ordinary"
EXTRAORDINARY = "extraordinary"


class DispersionRangeError(ValueError):
    """Wavelength or frequency outside the validity range of a model."""


class EvanescentModeError(ValueError):
    """Transverse wave vector exceeds the wave number (non-propagating mode)."""


@dataclass(frozen=True)
class SellmeierSheet:
    """One polarization sheet; ``poles`` in um^2, ``ir`` in um^-2."""

    constant: float = 1.0
    strengths: tuple[float, ...] = ()
    poles: tuple[float, ...] = ()
    ir: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "strengths", tuple(float(b) for b in self.strengths))
        object.__setattr__(self, "poles", tuple(float(p) for p in self.poles))
        if len(self.strengths) != len(self.poles):
            raise ValueError("Sellmeier strengths and poles must have equal length")

    def index_squared(self, lam_um):
        L = np.asarray(lam_um, dtype=float) ** 2
        n2 = self.constant - self.ir * L
        for b, p in zip(self.strengths, self.poles):
            n2 = n2 + b * L / (L - p)
        return n2

    def derivatives(self, lam_um):
        """Return n, dn/dlambda, d2n/dlambda2 with lambda in microns."""
        lam = np.asarray(lam_um, dtype=float)
        L = lam**2
        n2 = self.index_squared(lam)
        dN_dL = -self.ir + np.zeros_like(L)
        d2N_dL2 = np.zeros_like(L)
        for b, p in zip(self.strengths, self.poles):
            dN_dL = dN_dL - b * p / (L - p) ** 2
            d2N_dL2 = d2N_dL2 + 2.0 * b * p / (L - p) ** 3
        dN = 2.0 * lam * dN_dL
        d2N = 2.0 * dN_dL + 4.0 * L * d2N_dL2
        n = np.sqrt(n2)
        dn = dN / (2.0 * n)
        d2n = (d2N - 2.0 * dn**2) / (2.0 * n)
        return n, dn, d2n


def _check_range(valid_range, lam):
    lam = np.asarray(lam, dtype=float)
    lo, hi = valid_range
    if np.any(lam < lo):
        raise DispersionRangeError(f"wavelength {np.min(lam):.6g} m below lower bound {lo:.6g} m")
    if np.any(lam > hi):
        raise DispersionRangeError(f"wavelength {np.max(lam):.6g} m above upper bound {hi:.6g} m")


BBO_ORDINARY = SellmeierSheet(1.0, (0.90291, 0.83155, 0.76536), (0.003926, 0.018786, 60.01))
BBO_EXTRAORDINARY = SellmeierSheet(1.0, (1.151075, 0.21803, 0.656), (0.007142, 0.02259, 263.0))


@dataclass(frozen=True)
class DispersionModel:
    """Two-sheet uniaxial Sellmeier model with a hard validity range (meters)."""

    ordinary: SellmeierSheet = BBO_ORDINARY
    extraordinary: SellmeierSheet = BBO_EXTRAORDINARY
    valid_range: tuple[float, float] = (188e-9, 5200e-9)

    def _sheet(self, polarization):
        if polarization == ORDINARY:
            return self.ordinary
        if polarization == EXTRAORDINARY:
            return self.extraordinary
        raise ValueError(f"unknown polarization {polarization!r}")

    def check_range(self, lam):
        _check_range(self.valid_range, lam)

    def refractive_index(self, lam, polarization=ORDINARY):
        self.check_range(lam)
        n2 = self._sheet(polarization).index_squared(np.asarray(lam) * 1e6)
        return np.sqrt(n2)

    def index_derivatives(self, lam, polarization=ORDINARY):
        """n, dn/dlambda [1/m] and d2n/dlambda2 [1/m^2] at ``lam`` meters."""
        self.check_range(lam)
        n, dn, d2n = self._sheet(polarization).derivatives(np.asarray(lam) * 1e6)
        return n, dn * 1e6, d2n * 1e12


@dataclass(frozen=True)
class ConstantIndex:
    """Dispersionless medium; ``n = 1`` is vacuum."""

    n_ordinary: float = 1.0
    n_extraordinary: float | None = None
    valid_range: tuple[float, float] = (1e-9, 1.0)

    def check_range(self, lam):
        _check_range(self.valid_range, lam)

    def refractive_index(self, lam, polarization=ORDINARY):
        self.check_range(lam)
        n = self.n_ordinary
        if polarization == EXTRAORDINARY and self.n_extraordinary is not None:
            n = self.n_extraordinary
        return np.full(np.shape(lam), n, dtype=float)[()]

    def index_derivatives(self, lam, polarization=ORDINARY):
        n = self.refractive_index(lam, polarization)
        zero = np.zeros_like(n)
        return n, zero, zero


@dataclass(frozen=True)
class FieldParams:
    """Degenerate type-I configuration set by the pump wavelength."""

    pump_wavelength: float = 527.5e-9

    @property
    def omega0(self):
        return 2.0 * math.pi * c / self.pump_wavelength

    @property
    def omega1(self):
        return 0.5 * self.omega0


@dataclass(frozen=True)
class Medium:
    """A dispersion model bound to a degenerate field configuration.

    ``gvd_override`` (s^2/m) replaces the computed k'' wherever the quadratic
    phase-matching model is used; the exact wave numbers are unaffected.
    """

    model: DispersionModel | ConstantIndex = field(default_factory=DispersionModel)
    fields: FieldParams = field(default_factory=FieldParams)
    signal_polarization: str = ORDINARY
    pump_polarization: str = EXTRAORDINARY
    gvd_override: float | None = None

    @property
    def omega1(self):
        return self.fields.omega1

    @property
    def omega0(self):
        return self.fields.omega0

    def _wavelength(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega <= 0):
            raise DispersionRangeError("optical frequency must be positive")
        return 2.0 * math.pi * c / omega

    def k_signal(self, Omega):
        """Signal wave number k1(Omega) at absolute frequency omega1 + Omega."""
        w = self.omega1 + np.asarray(Omega, dtype=float)
        n = self.model.refractive_index(self._wavelength(w), self.signal_polarization)
        return n * w / c

    def k_z(self, q, Omega):
        """Longitudinal wave vector sqrt(k1(Omega)^2 - q^2)."""
        q = np.asarray(q, dtype=float)
        if np.any(q < 0):
            raise ValueError("transverse wave vector magnitude must be >= 0")
        k = self.k_signal(Omega)
        if np.any(q > k):
            raise EvanescentModeError("q exceeds k1(Omega): evanescent mode")
        return np.sqrt(k * k - q * q)

    def signal_index(self):
        """n1(omega1)."""
        return float(self.model.refractive_index(self._wavelength(self.omega1), self.signal_polarization))

    def gvd_signal(self):
        """k1'' at degeneracy [s^2/m], from k'' = lambda^3/(2 pi c^2) d2n/dlambda2."""
        if self.gvd_override is not None:
            return float(self.gvd_override)
        lam = self._wavelength(self.omega1)
        _, _, d2n = self.model.index_derivatives(lam, self.signal_polarization)
        return float(lam**3 / (2.0 * math.pi * c**2) * d2n)

    def pump_index(self, theta):
        """Extraordinary index of the pump at angle ``theta`` to the optic axis."""
        lam0 = self.fields.pump_wavelength
        no = self.model.refractive_index(lam0, ORDINARY)
        ne = self.model.refractive_index(lam0, EXTRAORDINARY)
        inv2 = np.cos(theta) ** 2 / no**2 + np.sin(theta) ** 2 / ne**2
        return float(1.0 / np.sqrt(inv2))

    def solve_pump_wavenumber(self, mode="tuned"):
        """Pump wave number k0.

        ``mode`` is ``"tuned"`` (k0 = 2 k1(0), the crystal angle assumed set for
        collinear degenerate phase matching) or a float angle theta in radians.
        """
        if mode == "tuned":
            return 2.0 * float(self.k_signal(0.0))
        theta = float(mode)
        return self.pump_index(theta) * self.omega0 / c

    def tuning_angle(self):
        """Angle theta at which the extraordinary pump satisfies k0 = 2 k1(0)."""
        target = 2.0 * float(self.k_signal(0.0))
        f = lambda th: self.solve_pump_wavenumber(th) - target
        lo, hi = f(0.0), f(0.5 * math.pi)
        if lo * hi > 0:
            raise ValueError("no real phase-matching angle for this pump and signal")
        return brentq(f, 0.0, 0.5 * math.pi, xtol=1e-15)
