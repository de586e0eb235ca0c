"""Coupled-dipole model tests: kernel, assembly, solves, evolution, observables."""

import math

import numpy as np
import pytest

from coopscatter.cloud import AtomEnsemble, CloudProfile, sample
from coopscatter.discrete import (
    BetaSeries,
    DipoleState,
    IllConditionedError,
    Protocol,
    assemble,
    coupling_kernel,
    evolve,
    mean_excitation,
    angular_power,
    realization_average,
    solid_angle_power,
    spectral,
    steady_state,
    total_power,
)
from coopscatter.meanfield import DriveParams


def _pair_on_axis(d: float) -> AtomEnsemble:
    z = np.array([-d / 2.0, d / 2.0])
    return AtomEnsemble(positions=np.column_stack([np.zeros(2), np.zeros(2), z]), seed=0)


def _two_atom_matrix(d: float, delta: float, rabi: float = 1.0):
    g = coupling_kernel(d)
    a = 1j * delta - 0.5
    mat = np.array([[a, -g / 2.0], [-g / 2.0, a]])
    z = np.array([-d / 2.0, d / 2.0])
    b = -0.5j * rabi * np.exp(1j * z)
    return mat, b


class TestKernel:
    def test_at_pi(self):
        # sin(pi) = 0, cos(pi) = -1: purely imaginary, +i/pi
        assert coupling_kernel(math.pi) == pytest.approx(1j / math.pi, abs=1e-16)

    def test_at_half_pi(self):
        assert coupling_kernel(math.pi / 2.0) == pytest.approx(2.0 / math.pi, abs=1e-16)

    def test_short_range_real_limit(self):
        assert coupling_kernel(1e-8).real == pytest.approx(1.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            coupling_kernel(0.0)
        with pytest.raises(ValueError):
            coupling_kernel(np.array([1.0, -2.0]))

    def test_vectorized(self):
        vals = coupling_kernel(np.array([math.pi, math.pi / 2.0]))
        assert vals.shape == (2,)


class TestAssemble:
    def test_single_atom(self):
        ens = AtomEnsemble(positions=np.array([[0.0, 0.0, 0.3]]), seed=0)
        sys1 = assemble(ens, DriveParams(2.0, 1.0))
        assert sys1.matrix[0, 0] == 2.0j - 0.5
        assert sys1.drive_vector[0] == pytest.approx(-0.5j * np.exp(0.3j), rel=1e-15)

    def test_two_atom_symmetry(self):
        sys2 = assemble(_pair_on_axis(1.7), DriveParams(0.0))
        assert sys2.matrix[0, 1] == sys2.matrix[1, 0]

    def test_trace_is_diagonal(self):
        ens = sample(CloudProfile("uniform", 5.0, 25), seed=1)
        sys25 = assemble(ens, DriveParams(3.0))
        assert np.trace(sys25.matrix) == pytest.approx(25 * (3.0j - 0.5), rel=1e-14)


class TestSteadyState:
    def test_single_atom_lorentzian(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        st = steady_state(assemble(ens, DriveParams(10.0)))
        assert abs(st.beta[0]) ** 2 == pytest.approx(1.0 / 401.0, rel=1e-12)
        assert 1.0 / 401.0 == pytest.approx(2.4937655e-3, rel=1e-7)

    @pytest.mark.parametrize("d", [0.5, math.pi, 10.0])
    def test_two_atom_closed_form(self, d):
        mat, b = _two_atom_matrix(d, 0.7)
        want = np.linalg.solve(mat, -b)
        st = steady_state(assemble(_pair_on_axis(d), DriveParams(0.7)))
        assert np.max(np.abs(st.beta - want)) < 1e-10

    def test_residual_contract(self):
        ens = sample(CloudProfile("gaussian", 8.0, 60), seed=4)
        system = assemble(ens, DriveParams(0.0))
        st = steady_state(system)
        resid = np.linalg.norm(system.matrix @ st.beta + system.drive_vector)
        assert resid / np.linalg.norm(system.drive_vector) < 1e-10

    def test_ill_conditioned_raises(self):
        # a sub-wavelength pair with the detuning tuned onto the antisymmetric
        # resonance makes the matrix numerically singular
        d = 1e-4
        delta = math.cos(d) / (2.0 * d)
        with pytest.raises(IllConditionedError) as err:
            steady_state(assemble(_pair_on_axis(d), DriveParams(delta)))
        assert err.value.condition > 1e12


class TestSpectral:
    def test_single_atom_eigenvalue(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        dec = spectral(assemble(ens, DriveParams(4.0)))
        assert dec.eigenvalues[0] == pytest.approx(4.0j - 0.5, rel=1e-14)

    @pytest.mark.parametrize("d", [0.5, math.pi, 10.0])
    def test_two_atom_eigenvalues(self, d):
        g = coupling_kernel(d)
        a = 1j * 0.7 - 0.5
        dec = spectral(assemble(_pair_on_axis(d), DriveParams(0.7)))
        for want in (a - g / 2.0, a + g / 2.0):
            assert np.min(np.abs(dec.eigenvalues - want)) < 1e-10

    def test_trace_rule_and_reconstruction(self):
        ens = sample(CloudProfile("uniform", 10.0, 120), seed=9)
        system = assemble(ens, DriveParams(1.0))
        dec = spectral(system)
        assert abs(np.sum(-2.0 * dec.eigenvalues.real) - 120) / 120 < 1e-8
        resid = np.linalg.norm(system.matrix @ dec.vectors - dec.vectors * dec.eigenvalues)
        assert resid / np.linalg.norm(system.matrix) < 1e-8


class TestEvolve:
    def test_single_atom_driven_closed_form(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        system = assemble(ens, DriveParams(10.0))
        t = np.linspace(0.0, 3.0, 7)
        series = evolve(system, DipoleState(np.zeros(1, complex), 0.0), t, "driven")
        a = 10.0j - 0.5
        bss = -system.drive_vector[0] / a
        want = bss * (1.0 - np.exp(a * t))
        assert np.max(np.abs(series.beta[:, 0] - want)) < 1e-12

    def test_two_atom_symmetric_free_decay(self):
        d = 2.3
        system = assemble(_pair_on_axis(d), DriveParams(0.0))
        sym = DipoleState(np.array([1.0, 1.0], complex) / math.sqrt(2.0), 0.0)
        t = np.linspace(0.0, 4.0, 9)
        series = evolve(system, sym, t, "free")
        rate = 1.0 + math.sin(d) / d
        norms = np.sum(np.abs(series.beta) ** 2, axis=1)
        assert np.max(np.abs(norms - np.exp(-rate * t))) < 1e-10

    @pytest.mark.parametrize("n_atoms", [40, 200])
    @pytest.mark.parametrize("mode", ["driven", "free"])
    def test_spectral_matches_direct_integration(self, n_atoms, mode):
        ens = sample(CloudProfile("uniform", 6.0, n_atoms), seed=13)
        system = assemble(ens, DriveParams(5.0))
        if mode == "driven":
            init = DipoleState(np.zeros(n_atoms, complex), 0.0)
        else:
            init = steady_state(system)
        t = np.linspace(0.0, 2.0, 11)
        b_spec = evolve(system, init, t, mode, method="spectral").beta
        b_ivp = evolve(system, init, t, mode, method="ivp").beta
        scale = np.max(np.abs(b_spec))
        assert np.max(np.abs(b_spec - b_ivp)) / scale < 1e-6

    def test_zero_drive_zero_state_stays_zero(self):
        ens = sample(CloudProfile("uniform", 5.0, 10), seed=2)
        system = assemble(ens, DriveParams(3.0, rabi=0.0))
        series = evolve(system, DipoleState(np.zeros(10, complex), 0.0), [0.0, 1.0, 2.0], "driven")
        assert np.all(series.beta == 0.0)

    def test_validation(self):
        ens = sample(CloudProfile("uniform", 5.0, 5), seed=2)
        system = assemble(ens, DriveParams(0.0))
        state = DipoleState(np.zeros(5, complex), 0.0)
        with pytest.raises(ValueError):
            evolve(system, state, [1.0, 0.5], "driven")
        with pytest.raises(ValueError):
            evolve(system, state, [0.0, 1.0], "sideways")
        with pytest.raises(ValueError):
            evolve(system, state, [0.0, 1.0], "free", method="telepathy")


class TestObservables:
    def test_mean_excitation_zero_state(self):
        assert mean_excitation(DipoleState(np.zeros(4, complex), 0.0)) == 0.0

    def test_mean_excitation_single_atom_steady(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        st = steady_state(assemble(ens, DriveParams(10.0)))
        assert mean_excitation(st) == pytest.approx(2.4937655e-3, rel=1e-7)

    def test_mean_excitation_permutation_invariant(self):
        rng = np.random.default_rng(8)
        beta = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        perm = rng.permutation(20)
        a = mean_excitation(DipoleState(beta, 0.0))
        b = mean_excitation(DipoleState(beta[perm], 0.0))
        assert a == pytest.approx(b, rel=1e-15)

    def test_angular_power_single_atom_isotropic(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        st = DipoleState(np.array([0.3 - 0.4j]), 0.0)
        want = 0.25 / (4.0 * math.pi)
        for theta, phi in [(0.0, 0.0), (1.0, 2.0), (math.pi, 0.5)]:
            assert angular_power(st, ens, theta, phi) == pytest.approx(want, rel=1e-14)

    def test_forward_lobe_coherent_enhancement(self):
        # far detuned: beta_j ~ e^{i z_j}, so the forward amplitude adds up to ~N
        n_atoms = 50
        ens = sample(CloudProfile("uniform", 5.0, n_atoms), seed=17)
        st = steady_state(assemble(ens, DriveParams(50.0)))
        forward = angular_power(st, ens, 0.0, 0.0)
        coherent_scale = n_atoms**2 * mean_excitation(st) / (4.0 * math.pi)
        assert forward == pytest.approx(coherent_scale, rel=0.2)
        assert forward > 10.0 * n_atoms * mean_excitation(st) / (4.0 * math.pi)

    def test_total_power_single_atom(self):
        ens = AtomEnsemble(positions=np.zeros((1, 3)), seed=0)
        st = DipoleState(np.array([0.3 - 0.4j]), 0.0)
        assert total_power(st, ens) == pytest.approx(0.25, rel=1e-14)

    def test_total_power_two_atoms_at_pi(self):
        # sinc(pi) = 0: cross terms vanish
        ens = _pair_on_axis(math.pi)
        st = DipoleState(np.array([0.5 + 0.1j, -0.2 + 0.3j]), 0.0)
        want = 0.5**2 + 0.1**2 + 0.2**2 + 0.3**2
        assert total_power(st, ens) == pytest.approx(want, rel=1e-14)

    def test_total_power_nonnegative(self):
        rng = np.random.default_rng(5)
        ens = sample(CloudProfile("gaussian", 4.0, 30), seed=6)
        for _ in range(5):
            beta = rng.standard_normal(30) + 1j * rng.standard_normal(30)
            assert total_power(DipoleState(beta, 0.0), ens) >= 0.0

    def test_total_power_matches_solid_angle_quadrature(self):
        ens = sample(CloudProfile("uniform", 4.0, 20), seed=14)
        st = steady_state(assemble(ens, DriveParams(10.0)))
        quad = solid_angle_power(st, ens, n_theta=60, n_phi=120)
        assert quad == pytest.approx(total_power(st, ens), rel=1e-6)

    def test_total_power_rotation_invariant_about_z(self):
        ens = sample(CloudProfile("uniform", 5.0, 40), seed=15)
        system = assemble(ens, DriveParams(2.0))
        st = steady_state(system)
        ang = 0.9182
        rot = np.array(
            [
                [math.cos(ang), -math.sin(ang), 0.0],
                [math.sin(ang), math.cos(ang), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        ens_rot = AtomEnsemble(positions=ens.positions @ rot.T, seed=ens.seed)
        st_rot = steady_state(assemble(ens_rot, DriveParams(2.0)))
        assert total_power(st_rot, ens_rot) == pytest.approx(total_power(st, ens), rel=1e-10)


class TestRealizationAverage:
    def test_single_realization_reproduces_evolve(self):
        profile = CloudProfile("uniform", 5.0, 12)
        drive = DriveParams(3.0)
        t = np.linspace(0.0, 1.0, 6)
        obs = realization_average(profile, drive, Protocol("driven", t), n_real=1, seed=77)
        from coopscatter.discrete import realization_seeds

        ens = sample(profile, seed=realization_seeds(77, 1)[0])
        series = evolve(assemble(ens, drive), DipoleState(np.zeros(12, complex), 0.0), t, "driven")
        want = np.mean(np.abs(series.beta) ** 2, axis=1)
        assert np.array_equal(obs.mean_beta2, want)
        assert np.all(obs.stderr_beta2 == 0.0)

    def test_identical_seeds_bit_identical(self):
        profile = CloudProfile("gaussian", 4.0, 10)
        drive = DriveParams(1.0)
        proto = Protocol("free", np.linspace(0.0, 2.0, 5))
        a = realization_average(profile, drive, proto, n_real=3, seed=5)
        b = realization_average(profile, drive, proto, n_real=3, seed=5)
        assert np.array_equal(a.mean_beta2, b.mean_beta2)
        assert np.array_equal(a.power, b.power)

    def test_stderr_shrinks_with_realizations(self):
        # doubling n_real should shrink the standard error by about sqrt(2)
        profile = CloudProfile("uniform", 5.0, 16)
        drive = DriveParams(2.0)
        proto = Protocol("free", np.linspace(0.0, 2.0, 21))
        small = realization_average(profile, drive, proto, n_real=64, seed=3)
        large = realization_average(profile, drive, proto, n_real=128, seed=3)
        ratio = np.mean(large.stderr_beta2[1:] / small.stderr_beta2[1:])
        assert ratio == pytest.approx(1.0 / math.sqrt(2.0), rel=0.25)

    def test_drive_then_cut_phases(self):
        profile = CloudProfile("uniform", 4.0, 8)
        t = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
        obs = realization_average(
            profile, DriveParams(1.0), Protocol("drive_then_cut", t, t_on=1.0), n_real=2, seed=1
        )
        assert list(obs.phase) == ["driven", "driven", "driven", "free", "free"]

    def test_protocol_validation(self):
        with pytest.raises(ValueError):
            Protocol("driven", np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            Protocol("sideways", np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            Protocol("drive_then_cut", np.array([0.0, 1.0]), t_on=0.0)
        with pytest.raises(ValueError):
            realization_average(
                CloudProfile("uniform", 4.0, 8),
                DriveParams(1.0),
                Protocol("driven", np.array([0.0, 1.0])),
                n_real=0,
                seed=1,
            )
