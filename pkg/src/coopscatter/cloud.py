"""Spherical density profiles and reproducible atom-position sampling.

All lengths are dimensionless (pre-multiplied by the laser wavenumber k0):
sigma is k0*R for the uniform and parabolic spheres and k0*sigma_R for the
Gaussian cloud.  Sampling is inverse-CDF in radius plus an isotropic
direction, with a minimum pair separation enforced by rejection so the
1/(k0 r) coupling kernel can never blow up on a coincident pair.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "PROFILE_KINDS",
    "CloudProfile",
    "AtomEnsemble",
    "PackingError",
    "density",
    "radial_cdf",
    "sample",
    "write_ensemble_csv",
    "read_ensemble_csv",
]

PROFILE_KINDS = ("uniform", "parabolic", "gaussian")

DEFAULT_R_MIN = 1e-3


class PackingError(RuntimeError):
    """Raised when the minimum-separation constraint cannot be satisfied."""

    def __init__(self, atom_index: int, retries: int):
        super().__init__(
            f"could not place atom {atom_index} after {retries} retries; "
            "the cloud is too dense for the requested minimum pair separation"
        )
        self.atom_index = atom_index
        self.retries = retries


@dataclass(frozen=True)
class CloudProfile:
    """Spherical cloud: kind in {uniform, parabolic, gaussian}, size sigma, atom count."""

    kind: str
    sigma: float
    n_atoms: int

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")


@dataclass(frozen=True, eq=False)
class AtomEnsemble:
    """One random realization: positions (N, 3) in units of 1/k0."""

    positions: np.ndarray
    seed: int
    r_min: float = DEFAULT_R_MIN

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


def density(profile: CloudProfile, r):
    """Number density n(r) in k0^3 units; integrates to n_atoms over all space."""
    r = np.asarray(r, dtype=float)
    sig, n = profile.sigma, profile.n_atoms
    if profile.kind == "uniform":
        n0 = 3.0 * n / (4.0 * math.pi * sig**3)
        out = np.where(r < sig, n0, 0.0)
    elif profile.kind == "parabolic":
        n0 = 15.0 * n / (8.0 * math.pi * sig**3)
        out = np.where(r < sig, n0 * (1.0 - (r / sig) ** 2), 0.0)
    else:
        n0 = n / ((2.0 * math.pi) ** 1.5 * sig**3)
        out = n0 * np.exp(-0.5 * (r / sig) ** 2)
    return out if out.ndim else float(out)


def radial_cdf(profile: CloudProfile, r):
    """Fraction of atoms with radius below r (monotone, 0 at the origin, -> 1)."""
    r = np.asarray(r, dtype=float)
    q = np.clip(r / profile.sigma, 0.0, None)
    if profile.kind == "uniform":
        out = np.minimum(q, 1.0) ** 3
    elif profile.kind == "parabolic":
        qc = np.minimum(q, 1.0)
        out = 2.5 * qc**3 - 1.5 * qc**5
    else:
        out = _sp.erf(q / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * q * np.exp(-0.5 * q**2)
    return out if out.ndim else float(out)


def _radial_pdf_scaled(profile: CloudProfile, q: np.ndarray) -> np.ndarray:
    """d(radial_cdf)/dq at q = r/sigma."""
    if profile.kind == "uniform":
        return 3.0 * q**2
    if profile.kind == "parabolic":
        return 7.5 * q**2 * (1.0 - q**2)
    return math.sqrt(2.0 / math.pi) * q**2 * np.exp(-0.5 * q**2)


def _make_radius_inverter(profile: CloudProfile):
    """Inverse of the radial CDF, in sigma units (table lookup + Newton polish)."""
    if profile.kind == "uniform":
        return np.cbrt
    unit = CloudProfile(profile.kind, 1.0, 1)
    q_max = 1.0 if profile.kind == "parabolic" else 9.0  # gaussian: 1 - F(9) ~ 1e-16
    grid = np.linspace(0.0, q_max, 4097)
    table = radial_cdf(unit, grid)

    def invert(u: np.ndarray) -> np.ndarray:
        q = np.interp(u, table, grid)
        for _ in range(3):
            f = radial_cdf(unit, q) - u
            df = _radial_pdf_scaled(unit, q)
            step = np.where(df > 0.0, f / np.where(df > 0.0, df, 1.0), 0.0)
            q = np.clip(q - step, 0.0, q_max)
        return q

    return invert


def _draw_positions(profile, invert, rng: np.random.Generator, m: int) -> np.ndarray:
    r = profile.sigma * invert(rng.random(m))
    cos_t = rng.uniform(-1.0, 1.0, m)
    phi = rng.uniform(0.0, 2.0 * math.pi, m)
    sin_t = np.sqrt(1.0 - cos_t**2)
    return np.column_stack([r * sin_t * np.cos(phi), r * sin_t * np.sin(phi), r * cos_t])


def sample(
    profile: CloudProfile,
    seed: int,
    r_min: float = DEFAULT_R_MIN,
    max_retries: int = 10_000,
) -> AtomEnsemble:
    """Draw one ensemble of atom positions, reproducibly.

    Atoms are inserted one at a time; a candidate closer than r_min to any
    accepted atom is redrawn, up to max_retries per atom.  The generator is
    numpy's default (PCG64) seeded with `seed`, which the run manifests
    record, so equal seeds give bit-identical ensembles.
    """
    n = profile.n_atoms
    if n * r_min**3 > 0.3 * profile.sigma**3:
        raise PackingError(0, 0)
    rng = np.random.default_rng(seed)
    invert = _make_radius_inverter(profile)
    positions = np.empty((n, 3))
    for k in range(n):
        for attempt in range(max_retries + 1):
            cand = _draw_positions(profile, invert, rng, 1)[0]
            if k == 0:
                break
            d2 = np.sum((positions[:k] - cand) ** 2, axis=1)
            if d2.min() >= r_min**2:
                break
        else:
            raise PackingError(k, max_retries)
        positions[k] = cand
    return AtomEnsemble(positions=positions, seed=int(seed), r_min=float(r_min))


def write_ensemble_csv(ensemble: AtomEnsemble, path) -> None:
    """Serialize positions as (atom_index, x, y, z) in 1/k0 units."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom_index", "x", "y", "z"])
        for i, row in enumerate(ensemble.positions):
            w.writerow([i, repr(float(row[0])), repr(float(row[1])), repr(float(row[2]))])


def read_ensemble_csv(path, seed: int = -1, r_min: float = DEFAULT_R_MIN) -> AtomEnsemble:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    pos = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
    return AtomEnsemble(positions=pos, seed=seed, r_min=r_min)
