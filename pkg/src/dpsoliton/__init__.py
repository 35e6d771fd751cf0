"""Numerical laboratory for the Degasperis-Procesi equation.

Exact N-solitons from a reflectionless Riemann-Hilbert problem, long-time
asymptotic formulas, forward scattering, and a pseudo-spectral PDE oracle.
"""
from .nsoliton import NSoliton, single_soliton, speed
from .scattering import DiscreteSpectrum, Pole, ReflectionSamples, ScatteringData, solitons
from .spectral import classify_region, phase_points

__all__ = ["NSoliton", "single_soliton", "speed", "DiscreteSpectrum", "Pole",
           "ReflectionSamples", "ScatteringData", "solitons", "classify_region", "phase_points"]
__version__ = "0.1.0"
