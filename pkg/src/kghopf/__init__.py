"""kghopf: spectral stability of periodic traveling Klein-Gordon waves.

Computes the Floquet spectrum of the linearization about a periodic
traveling wave and locates dynamical Hamiltonian-Hopf instability points on
the imaginary axis through the Hill-discriminant criterion nu = F(nu).
"""

__version__ = "0.1.0"

from .potentials import Potential, polynomial, sine_gordon
from .waveform import (
    HillCoefficient,
    WaveParameters,
    WaveProfile,
    build_profile,
    classify_regime,
    compute_period,
    hill_coefficient,
)
from .hill import (
    Band,
    BandStructure,
    MonodromyResult,
    band_structure,
    discriminant,
    monodromy,
)
from .hhcriterion import (
    ExtendedFValue,
    HHPoint,
    Indices,
    asymptotic_check,
    compute_indices,
    corollary_report,
    extended_F,
    lambda_of_nu,
    nu_of_lambda,
    scan_hh_points,
    small_nu_check,
)
from .spectrum2d import (
    MultiplierPair,
    SpectralCurves,
    evaluate_evans,
    multipliers,
    off_axis_probe,
    trace_spectrum,
)

__all__ = [
    "__version__",
    "Potential", "polynomial", "sine_gordon",
    "WaveParameters", "WaveProfile", "HillCoefficient",
    "classify_regime", "compute_period", "build_profile", "hill_coefficient",
    "MonodromyResult", "Band", "BandStructure",
    "monodromy", "discriminant", "band_structure",
    "ExtendedFValue", "HHPoint", "Indices",
    "nu_of_lambda", "lambda_of_nu", "extended_F", "scan_hh_points",
    "compute_indices", "corollary_report", "asymptotic_check",
    "small_nu_check",
    "MultiplierPair", "SpectralCurves",
    "multipliers", "trace_spectrum", "off_axis_probe", "evaluate_evans",
]
