"""Cloud profile and sampling tests: normalization, CDFs, moments, determinism."""

import math

import numpy as np
import pytest
from scipy import integrate

from coopscatter.cloud import (
    AtomEnsemble,
    CloudProfile,
    PackingError,
    density,
    radial_cdf,
    read_ensemble_csv,
    sample,
    write_ensemble_csv,
)

PROFILES = [
    CloudProfile("uniform", 20.0, 1000),
    CloudProfile("parabolic", 20.0, 1000),
    CloudProfile("gaussian", 20.0, 1000),
]


class TestProfileValidation:
    def test_bad_kind(self):
        with pytest.raises(ValueError):
            CloudProfile("cubic", 1.0, 10)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            CloudProfile("uniform", 0.0, 10)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            CloudProfile("uniform", 1.0, 0)


class TestDensity:
    def test_uniform_outside_sphere(self):
        assert density(CloudProfile("uniform", 1.0, 1), 2.0) == 0.0

    def test_parabolic_vanishes_at_edge(self):
        p = CloudProfile("parabolic", 7.0, 123)
        assert density(p, 7.0) == pytest.approx(0.0, abs=1e-300)

    def test_gaussian_origin_value(self):
        # closed form: 1 / (2 pi)^{3/2} for sigma = N = 1
        want = 1.0 / (2.0 * math.pi) ** 1.5
        assert density(CloudProfile("gaussian", 1.0, 1), 0.0) == pytest.approx(want, rel=1e-14)
        assert want == pytest.approx(0.0634936359342, rel=1e-10)

    @pytest.mark.parametrize("profile", PROFILES, ids=lambda p: p.kind)
    def test_integrates_to_n_atoms(self, profile):
        val, _ = integrate.quad(
            lambda r: 4.0 * math.pi * r**2 * density(profile, r),
            0.0,
            np.inf if profile.kind == "gaussian" else profile.sigma,
            epsabs=1e-12,
            epsrel=1e-12,
            limit=200,
        )
        assert val == pytest.approx(profile.n_atoms, rel=1e-10)


class TestRadialCdf:
    def test_uniform_values(self):
        p = CloudProfile("uniform", 4.0, 5)
        assert radial_cdf(p, 4.0) == 1.0
        assert radial_cdf(p, 2.0) == pytest.approx(1.0 / 8.0, rel=1e-14)

    def test_parabolic_full_mass(self):
        p = CloudProfile("parabolic", 4.0, 5)
        assert radial_cdf(p, 4.0) == pytest.approx(1.0, rel=1e-14)
        assert radial_cdf(p, 40.0) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("profile", PROFILES, ids=lambda p: p.kind)
    def test_monotone_and_limits(self, profile):
        r = np.linspace(0.0, 9.0 * profile.sigma, 400)
        c = radial_cdf(profile, r)
        assert np.all(np.diff(c) >= -1e-15)
        assert c[0] == 0.0
        assert c[-1] == pytest.approx(1.0, abs=1e-12)  # gaussian 3D tail needs r ~ 9 sigma

    @pytest.mark.parametrize("profile", PROFILES, ids=lambda p: p.kind)
    def test_derivative_matches_density(self, profile):
        # d(cdf)/dr should equal 4 pi r^2 n(r) / N; centered finite differences
        radii = np.linspace(0.1, 0.95, 10) * profile.sigma
        h = 1e-6 * profile.sigma
        for r in radii:
            num = (radial_cdf(profile, r + h) - radial_cdf(profile, r - h)) / (2.0 * h)
            want = 4.0 * math.pi * r**2 * density(profile, r) / profile.n_atoms
            assert num == pytest.approx(want, rel=1e-6)


class TestSampling:
    # analytic <r^2>: uniform 3 sigma^2/5, parabolic 3 sigma^2/7, gaussian 3 sigma^2
    MOMENTS = {"uniform": 0.6, "parabolic": 3.0 / 7.0, "gaussian": 3.0}

    @pytest.mark.parametrize("kind", ["uniform", "parabolic", "gaussian"])
    def test_radial_second_moment(self, kind):
        sigma, n = 20.0, 10_000
        ens = sample(CloudProfile(kind, sigma, n), seed=11)
        r2 = np.sum(ens.positions**2, axis=1)
        want = self.MOMENTS[kind] * sigma**2
        stderr = np.std(r2) / math.sqrt(n)
        assert abs(np.mean(r2) - want) < 3.0 * stderr

    def test_isotropy(self):
        ens = sample(CloudProfile("uniform", 20.0, 10_000), seed=5)
        mean = np.mean(ens.positions, axis=0)
        r2 = np.mean(np.sum(ens.positions**2, axis=1))
        assert np.all(np.abs(mean) < 3.0 * math.sqrt(r2 / 3.0 / 10_000) + 1e-12)

    def test_equal_seeds_bit_identical(self):
        p = CloudProfile("gaussian", 5.0, 200)
        a = sample(p, seed=99)
        b = sample(p, seed=99)
        assert np.array_equal(a.positions, b.positions)

    def test_different_seeds_differ(self):
        p = CloudProfile("gaussian", 5.0, 200)
        assert not np.array_equal(sample(p, seed=1).positions, sample(p, seed=2).positions)

    def test_min_separation_enforced(self):
        ens = sample(CloudProfile("uniform", 5.0, 100), seed=3, r_min=0.5)
        d = np.linalg.norm(ens.positions[:, None] - ens.positions[None, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        assert d.min() >= 0.5

    def test_packing_infeasible_raises(self):
        with pytest.raises(PackingError):
            sample(CloudProfile("uniform", 1.0, 500), seed=0, r_min=0.5)


class TestEnsembleCsv:
    def test_round_trip(self, tmp_path):
        ens = sample(CloudProfile("parabolic", 3.0, 50), seed=21)
        path = tmp_path / "ens.csv"
        write_ensemble_csv(ens, path)
        back = read_ensemble_csv(path)
        assert np.array_equal(back.positions, ens.positions)
        header = path.read_text().splitlines()[0]
        assert header == "atom_index,x,y,z"

    def test_manual_ensemble(self):
        ens = AtomEnsemble(positions=np.zeros((3, 3)), seed=0)
        assert ens.n_atoms == 3
