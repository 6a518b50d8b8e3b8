import numpy as np
import pytest

from spinladder.dynamics import SpectralEvolution, TimeGrid
from spinladder.errors import StepSizeError
from spinladder.hamiltonians import (
    three_level_basis,
    three_level_initial_state,
    three_level_spec,
    build_three_level,
)
from spinladder.rotframe import (
    RotatingFrameSnapshot,
    accumulate_phase,
    decompose,
    distinct_site_subset,
    effective_dynamics_check,
    effective_hamiltonian,
    emergent_potential_series,
)
from spinladder.spectra import diagonalize


def evolved_state(spec, t, site=None):
    basis = three_level_basis(spec.L)
    H = build_three_level(spec, basis)
    evo = SpectralEvolution(diagonalize(H), three_level_initial_state(basis, site))
    return basis, evo.state_at(t)


class TestDecompose:
    def test_initial_point_mass(self):
        basis = three_level_basis(9)
        snap = decompose(three_level_initial_state(basis), basis)
        assert snap.valid.tolist() == [False] * 4 + [True] + [False] * 4
        assert np.isclose(snap.c[4], 1.0)

    def test_amplitudes_are_normalized(self):
        spec = three_level_spec(6, h=0.3)
        basis, psi = evolved_state(spec, 7.0)
        snap = decompose(psi, basis)
        assert np.isclose(np.sum(np.abs(snap.c) ** 2), 1.0, atol=1e-10)
        for j in np.nonzero(snap.valid)[0]:
            assert np.isclose(np.linalg.norm(snap.phi[j]), 1.0, atol=1e-10)

    def test_reconstruction_is_exact(self):
        spec = three_level_spec(6, h=0.3)
        basis, psi = evolved_state(spec, 3.0)
        snap = decompose(psi, basis)
        assert np.abs(snap.reconstruct() - psi).max() < 1e-12


class TestAccumulatePhase:
    def make_snapshot(self, t, phi_row, c=1.0, R=0.0):
        L, B = 2, len(phi_row)
        phi = np.zeros((L, B), dtype=complex)
        phi[0] = phi_row
        valid = np.array([True, False])
        return RotatingFrameSnapshot(
            t=t,
            c=np.array([c, 0.0], dtype=complex),
            phi=phi,
            R=np.array([R, 0.0]),
            valid=valid,
        )

    def test_constant_vacuum_accumulates_nothing(self):
        v = np.array([1.0, 1.0j]) / np.sqrt(2)
        a = self.make_snapshot(0.0, v)
        b = accumulate_phase(a, self.make_snapshot(0.1, v))
        assert np.isclose(b.R[0], 0.0)

    def test_pure_phase_rotation(self):
        # phi(t) = exp(i w t) phi(0)  =>  R(t) = -w t
        w, dt = 0.8, 0.05
        v = np.array([1.0, 1.0j]) / np.sqrt(2)
        snap = self.make_snapshot(0.0, v)
        for k in range(1, 60):
            t = k * dt
            snap = accumulate_phase(
                snap, self.make_snapshot(t, np.exp(1j * w * t) * v)
            )
        assert np.isclose(snap.R[0], -w * 59 * dt, atol=1e-9)

    def test_reconstruction_survives_accumulation(self):
        spec = three_level_spec(6, h=0.3)
        basis = three_level_basis(6)
        H = build_three_level(spec, basis)
        evo = SpectralEvolution(diagonalize(H), three_level_initial_state(basis))
        snap = decompose(evo.state_at(0.0), basis)
        for t in np.arange(0.02, 1.0, 0.02):
            psi = evo.state_at(t)
            snap = accumulate_phase(snap, decompose(psi, basis, t=t))
            err = np.abs(snap.reconstruct() - psi).max()
            if snap.valid.all():
                assert err < 1e-12
            else:
                # invalid blocks are truncated at the validity threshold
                assert err < np.sqrt(6 * 1e-12)

    def test_small_overlap_raises(self):
        v1 = np.array([1.0, 0.0])
        v2 = np.array([0.0, 1.0])  # orthogonal vacuum states
        a = self.make_snapshot(0.0, v1)
        with pytest.raises(StepSizeError):
            accumulate_phase(a, self.make_snapshot(1.0, v2))


class TestEffectiveHamiltonian:
    def test_initial_diagonal_in_closed_form(self):
        # all-|0> vacuum: every Z is +1, so M_jj(0) = -g (L - 3) in the bulk
        L, g = 9, 0.7
        spec = three_level_spec(L, h=0.1, J=1.0, g=g)
        basis = three_level_basis(L)
        h0 = build_three_level(spec, basis, terms="h0")
        h1 = build_three_level(spec, basis, terms="h1")
        snap = decompose(three_level_initial_state(basis), basis)
        M = effective_hamiltonian(snap, h0, h1)
        assert np.isclose(M[4, 4].real, -g * (L - 3))
        assert np.isnan(M[0, 0])  # invalid sites are marked missing

    def test_hermitian_and_nearest_neighbor(self):
        spec = three_level_spec(6, h=0.4)
        basis, psi = evolved_state(spec, 9.0)
        h0 = build_three_level(spec, basis, terms="h0")
        h1 = build_three_level(spec, basis, terms="h1")
        snap = decompose(psi, basis)
        assert snap.valid.all()
        M = effective_hamiltonian(snap, h0, h1)
        assert np.abs(M - M.conj().T).max() < 1e-9
        for j in range(6):
            for k in range(6):
                if abs(j - k) > 1:
                    assert M[j, k] == 0.0

    def test_no_hopping_means_no_off_diagonal(self):
        spec = three_level_spec(6, h=0.0)
        basis, psi = evolved_state(spec, 5.0)
        h0 = build_three_level(spec, basis, terms="h0")
        h1 = build_three_level(spec, basis, terms="h1")
        snap = decompose(psi, basis)
        M = effective_hamiltonian(snap, h0, h1, missing=0.0)
        off = M - np.diag(np.diag(M))
        assert np.abs(off).max() == 0.0


class TestEmergentPotential:
    def test_series_is_deterministic_and_site_dependent(self):
        spec = three_level_spec(7, h=0.1)
        grid = TimeGrid.log_spaced(1.0, 1e4, 10)
        s1 = emergent_potential_series(spec, grid, late_window=(1e2, 1e4))
        s2 = emergent_potential_series(spec, grid, late_window=(1e2, 1e4))
        assert np.array_equal(
            np.nan_to_num(s1.diagonal), np.nan_to_num(s2.diagonal)
        )
        means = s1.late_means
        assert np.nanstd(means) > 0.01  # site-dependent averages

    def test_rows_format(self):
        spec = three_level_spec(5, h=0.2)
        grid = TimeGrid.log_spaced(1.0, 10.0, 4)
        series = emergent_potential_series(spec, grid, late_window=(1.0, 10.0))
        rows = series.to_rows()
        assert len(rows) == len(grid) * 5
        t, site, m, valid = rows[0]
        assert isinstance(site, int) and isinstance(valid, int)


def test_distinct_site_subset_logic():
    means = np.array([0.0, 1.0, 1.05, 3.0])
    ses = np.array([0.01, 0.01, 0.01, 0.01])
    subset = distinct_site_subset(means, ses, n_sigma=2.0)
    # 1.0 vs 1.05 are separated (0.05 > 2*hypot), all four qualify
    assert subset == [0, 1, 2, 3]
    ses2 = np.array([0.02, 0.02, 0.02, 0.02])
    subset2 = distinct_site_subset(means, ses2, n_sigma=2.0)
    assert len(subset2) == 3  # 1.0 and 1.05 collide at 2 sigma


def test_effective_dynamics_short_horizon():
    """i dc/dt = M(t) c reproduces the exact occupations (smoke scale)."""
    result = effective_dynamics_check(
        three_level_spec(5, h=0.1), t_final=5.0, dt=2e-3, compare_every=500
    )
    assert result.max_abs_error < 1e-4
