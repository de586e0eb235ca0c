"""Cooperative light scattering by spherical cold-atom clouds.

Two models of the same driven system: the exact N-atom coupled-dipole
equations (`coopscatter.discrete`) and the analytic mean-field mode
expansion (`coopscatter.meanfield`), plus the shared special functions
(`coopscatter.specfun`), cloud sampling (`coopscatter.cloud`) and the
experiment runner behind the `coopscatter` CLI (`coopscatter.harness`).
"""

from .cloud import AtomEnsemble, CloudProfile
from .meanfield import DriveParams, ModeSpectrum, mode_evolution, mode_spectrum

__version__ = "0.1.0"

__all__ = [
    "AtomEnsemble",
    "CloudProfile",
    "DriveParams",
    "ModeSpectrum",
    "mode_evolution",
    "mode_spectrum",
    "__version__",
]
