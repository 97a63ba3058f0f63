"""Phase mismatch and pair amplitudes for the PDC and SFG crystals.

``sinc`` is the unnormalized ``sin(x)/x`` throughout.  Modes are given as a
transverse wave-vector magnitude ``q`` (rad/m) and a frequency offset
``Omega`` (rad/s) from the degenerate frequency; both broadcast as numpy
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .dispersion import EvanescentModeError, Medium

SINC_FULL = "full"  # sinc(Delta_SFG), as printed for the up-conversion amplitude
SINC_HALF = "half"  # sinc(Delta_SFG / 2), same form as the PDC amplitude


class SpectralMode(NamedTuple):
    q: float
    Omega: float


def sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class Crystal:
    """A crystal of ``length`` meters with a dimensionless ``coupling``.

    For the PDC crystal ``coupling`` is the low-gain parameter g; for the SFG
    crystal it is the prefactor sigma * l_c'.  ``pump_mode`` is ``"tuned"`` or
    an angle in radians (see :meth:`Medium.solve_pump_wavenumber`).
    ``sinc_argument`` only affects :func:`f_sfg`.
    """

    length: float = 4e-3
    coupling: float = 1e-3
    medium: Medium = field(default_factory=Medium)
    pump_mode: str | float = "tuned"
    mismatch_offset: float = 0.0
    sinc_argument: str = SINC_FULL

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("crystal length must be positive")
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        if self.sinc_argument not in (SINC_FULL, SINC_HALF):
            raise ValueError(f"sinc_argument must be {SINC_FULL!r} or {SINC_HALF!r}")

    @property
    def k0(self):
        return self.medium.solve_pump_wavenumber(self.pump_mode)

    def replace(self, **changes):
        return replace(self, **changes)


def delta_pdc(crystal: Crystal, q, Omega):
    """Delta = l_c [k_z(q, Omega) + k_z(q, -Omega) - k0] + offset."""
    m = crystal.medium
    Omega = np.asarray(Omega, dtype=float)
    kz_sum = m.k_z(q, Omega) + m.k_z(q, -Omega)
    return crystal.length * (kz_sum - crystal.k0) + crystal.mismatch_offset


def delta_quadratic(crystal: Crystal, q, Omega):
    """Expansion near degeneracy: -q^2 l_c / k1 + k1'' l_c Omega^2."""
    m = crystal.medium
    k1 = float(m.k_signal(0.0))
    q = np.asarray(q, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    return -(q**2) * crystal.length / k1 + m.gvd_signal() * crystal.length * Omega**2


def f_pdc(crystal: Crystal, q, Omega):
    """Low-gain pair amplitude g sinc(Delta/2) exp(i Delta/2); assumes g << 1."""
    d = delta_pdc(crystal, q, Omega)
    return crystal.coupling * sinc(0.5 * d) * np.exp(0.5j * d)


def f_sfg(crystal: Crystal, q, Omega):
    """Up-conversion amplitude sigma l_c' sinc(arg) exp(i Delta/2).

    ``arg`` is Delta for ``sinc_argument="full"`` and Delta/2 for ``"half"``.
    """
    d = delta_pdc(crystal, q, Omega)
    arg = d if crystal.sinc_argument == SINC_FULL else 0.5 * d
    return crystal.coupling * sinc(arg) * np.exp(0.5j * d)


def max_propagating_q(crystal: Crystal, Omega):
    """Largest q that propagates at both +Omega and -Omega."""
    m = crystal.medium
    return np.minimum(m.k_signal(Omega), m.k_signal(-np.asarray(Omega, dtype=float)))


def phase_matching_locus(crystal: Crystal, Omegas, *, xtol=1e-9):
    """Roots q >= 0 of Delta(q, Omega) = 0, one per Omega.

    Returns a list of ``(Omega, q_pm)`` pairs; ``q_pm`` is ``None`` where
    the mismatch does not change sign on the propagating interval.
    """
    out = []
    for Om in np.atleast_1d(np.asarray(Omegas, dtype=float)):
        Om = float(Om)
        d0 = float(delta_pdc(crystal, 0.0, Om))
        if d0 == 0.0:
            out.append((Om, 0.0))
            continue
        q_hi = float(max_propagating_q(crystal, Om)) * (1.0 - 1e-12)
        try:
            d_hi = float(delta_pdc(crystal, q_hi, Om))
        except EvanescentModeError:
            out.append((Om, None))
            continue
        if d0 * d_hi > 0:
            out.append((Om, None))
            continue
        f = lambda q: float(delta_pdc(crystal, q, Om))
        q_pm = brentq(f, 0.0, q_hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        out.append((Om, q_pm))
    return out
