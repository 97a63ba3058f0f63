"""Simulator of twin-beam PDC correlations measured by sum-frequency generation."""

from .correlator import CorrelationProfile, Grid, delay_sweep, fft_backend_check
from .dispersion import DispersionModel, FieldParams, Medium
from .experiments import Setup, extract_fwhm, fit_sinc2, scenario_fig2, scenario_fig3, scenario_fig4
from .phasematch import Crystal
from .propagation import TransferSpec

__version__ = "0.1.0"

__all__ = [
    "CorrelationProfile",
    "Crystal",
    "DispersionModel",
    "FieldParams",
    "Grid",
    "Medium",
    "Setup",
    "TransferSpec",
    "delay_sweep",
    "extract_fwhm",
    "fft_backend_check",
    "fit_sinc2",
    "scenario_fig2",
    "scenario_fig3",
    "scenario_fig4",
]
