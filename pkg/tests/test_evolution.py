import cmath
import math

import numpy as np
import pytest

from nhentangle import NumericalFailure, PostSelectionExtinct, ValidationError
from nhentangle.evolution import (
    density_matrix, evolve, normalize, spectrum, substep_evolve, time_series,
)
from nhentangle.model import (
    SIGMA_X, SystemConfig, basis_state, build_hamiltonian, ghz_state, product_state,
    spin_coherent_state,
)


def sym_h(n=3, omega=0.0, gamma=0.0, **kw):
    return build_hamiltonian(SystemConfig.symmetric(n, omega=omega, gamma=gamma, **kw))


class TestEvolve:
    def test_zero_time(self):
        psi0 = spin_coherent_state(0.3, 3)
        res = evolve(sym_h(omega=5, gamma=1), psi0, 0.0)
        assert np.array_equal(res.state, psi0)
        assert res.survival_probability == pytest.approx(1.0, abs=1e-15)

    def test_rabi_half_flip(self):
        res = evolve(3.0 * SIGMA_X, basis_state("f"), math.pi / 6)
        assert np.allclose(res.state, [-1j, 0], atol=1e-14)
        assert res.survival_probability == pytest.approx(1.0, abs=1e-14)

    def test_against_substep_oracle(self):
        H = sym_h(omega=10, gamma=1)
        psi0 = basis_state("fff")
        ref = substep_evolve(H, psi0, math.pi, steps=10_000)
        assert np.abs(evolve(H, psi0, math.pi).state - ref).max() < 1e-8

    def test_pure_decay_of_excited_qubit(self):
        H = build_hamiltonian(SystemConfig(1, gamma=0.8))
        res = evolve(H, basis_state("e"), 2.5)
        assert res.survival_probability == pytest.approx(math.exp(-0.8 * 2.5), rel=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="does not match"):
            evolve(sym_h(), basis_state("ff"), 1.0)

    def test_unnormalized_initial_state(self):
        with pytest.raises(ValidationError, match="normalized"):
            evolve(sym_h(), 2 * basis_state("fff"), 1.0)


class TestNormalize:
    def test_unit_vector_unchanged(self):
        psi = ghz_state(3)
        out, surv = normalize(psi)
        assert np.allclose(out, psi) and surv == pytest.approx(1.0)

    def test_rescales(self):
        out, surv = normalize(np.array([2, 0, 0, 0], dtype=complex))
        assert np.array_equal(out, [1, 0, 0, 0]) and surv == 4

    def test_zero_vector_extinct(self):
        with pytest.raises(PostSelectionExtinct):
            normalize(np.zeros(4))

    def test_below_threshold_extinct(self):
        with pytest.raises(PostSelectionExtinct) as info:
            normalize(np.array([1e-13, 0]))
        assert info.value.survival == pytest.approx(1e-26)


class TestDensityMatrix:
    def test_basis(self):
        assert np.array_equal(density_matrix(basis_state("e")).matrix, [[1, 0], [0, 0]])

    def test_plus(self):
        assert np.allclose(density_matrix(product_state([(1, 1)])).matrix, 0.5)

    def test_ghz_corners(self):
        rho = density_matrix(ghz_state(3)).matrix
        corners = [(0, 0), (0, 7), (7, 0), (7, 7)]
        for i, j in corners:
            assert rho[i, j] == pytest.approx(0.5)
        rest = rho.copy()
        for i, j in corners:
            rest[i, j] = 0
        assert np.count_nonzero(rest) == 0

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            density_matrix(np.array([1.0, 1.0]))


class TestTimeSeries:
    def test_single_point(self):
        psi0 = basis_state("fff")
        (pt,) = time_series(sym_h(omega=1), psi0, [0.0])
        assert np.array_equal(pt.state, psi0) and pt.survival == 1.0

    def test_uniform_grid_matches_direct_evolution(self):
        H = sym_h(omega=10, gamma=1)
        psi0 = basis_state("fff")
        grid = np.linspace(0, 4 * math.pi, 1001)
        last = time_series(H, psi0, grid)[-1]
        direct = evolve(H, psi0, grid[-1])
        ref, surv = normalize(direct.state)
        assert np.abs(last.state - ref).max() < 1e-8
        assert last.survival == pytest.approx(surv, rel=1e-8)

    def test_non_uniform_grid(self):
        H = sym_h(omega=2, gamma=0.5)
        psi0 = spin_coherent_state(0.5, 3)
        times = [0.0, 0.1, 0.5, 2.0]
        for pt in time_series(H, psi0, times):
            ref, surv = normalize(evolve(H, psi0, pt.time).state)
            assert np.abs(pt.state - ref).max() < 1e-12
            assert pt.survival == pytest.approx(surv, rel=1e-12)

    def test_unitary_limit(self):
        pts = time_series(sym_h(omega=50), basis_state("fff"), np.linspace(0, 2 * math.pi, 201))
        assert max(abs(p.survival - 1) for p in pts) < 1e-9

    def test_norm_monotone(self):
        pts = time_series(sym_h(omega=10, gamma=6), basis_state("fff"), np.linspace(0, math.pi, 501))
        surv = np.array([p.survival for p in pts])
        assert np.all(np.diff(surv) <= 1e-9)

    def test_extinction_raises_with_time(self):
        H = build_hamiltonian(SystemConfig(1, gamma=100.0))
        with pytest.raises(PostSelectionExtinct) as info:
            time_series(H, basis_state("e"), np.linspace(0, 1, 11))
        assert 0 < info.value.time <= 1

    def test_descending_grid_rejected(self):
        with pytest.raises(ValidationError):
            time_series(sym_h(), basis_state("fff"), [1.0, 0.5])


class TestSpectrum:
    def test_hermitian_is_real(self):
        rep = spectrum(sym_h(omega=3), 1e-9)
        assert np.abs(rep.eigenvalues.imag).max() < 1e-12
        assert rep.is_pt_symmetric_phase
        assert len(rep.eigenvalues) == 8

    @pytest.mark.parametrize("omega,gamma", [(1.0, 0.4), (0.1, 2.0), (2.0, 7.0)])
    def test_single_qubit_closed_form(self, omega, gamma):
        rep = spectrum(build_hamiltonian(SystemConfig(1, omega=omega, gamma=gamma)), 1e-9)
        root = cmath.sqrt(omega ** 2 - gamma ** 2 / 16)
        expected = np.array([-0.25j * gamma + root, -0.25j * gamma - root])
        got = rep.eigenvalues
        assert np.allclose(np.sort_complex(np.round(got, 12)), np.sort_complex(np.round(expected, 12)), atol=1e-12)
        assert rep.is_pt_symmetric_phase == (omega >= gamma / 4)

    def test_uniform_shift_removed(self):
        H = sym_h(omega=2) - 0.7j * np.eye(8)
        rep = spectrum(H, 1e-9)
        assert rep.is_pt_symmetric_phase
        assert rep.residual_imag < 1e-12

    def test_tolerance_must_be_positive(self):
        with pytest.raises(ValidationError):
            spectrum(sym_h(), 0.0)

    def test_solver_failure_is_numerical(self, monkeypatch):
        def boom(_):
            raise np.linalg.LinAlgError("no convergence")
        monkeypatch.setattr(np.linalg, "eigvals", boom)
        with pytest.raises(NumericalFailure):
            spectrum(sym_h(), 1e-6)
