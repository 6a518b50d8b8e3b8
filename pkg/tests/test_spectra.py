import warnings

import numpy as np
import pytest

from spinladder.basis import SymmetrySector, enumerate_sector
from spinladder.errors import ParameterError
from spinladder.hamiltonians import build_chain, chain_spec
from spinladder.spectra import (
    R_GOE,
    R_POISSON,
    diagonalize,
    gap_ratios,
    goe_mean_r_oracle,
    mean_gap_ratio,
    poisson_mean_r_oracle,
    pooled_gap_ratios,
)


def test_two_level_analytic():
    g, h = 0.8, 0.25
    decomp = diagonalize(np.array([[-g, 2 * h], [2 * h, -g]]))
    assert np.allclose(decomp.eigenvalues, [-g - 2 * h, -g + 2 * h])


def test_eigensum_equals_trace(rng):
    a = rng.standard_normal((60, 60))
    H = a + a.T
    decomp = diagonalize(H)
    assert np.isclose(decomp.eigenvalues.sum(), np.trace(H), rtol=1e-10)


def test_residuals_and_orthonormality(rng):
    L = 8
    basis = enumerate_sector(L, SymmetrySector(sz=0))
    H = build_chain(chain_spec(L, rng.uniform(-1, 1, L // 2)), basis).matrix
    decomp = diagonalize(H)
    scale = decomp.spectral_range
    residual = H @ decomp.eigenvectors - decomp.eigenvectors * decomp.eigenvalues
    assert np.abs(residual).max() < 1e-10 * scale
    gram = decomp.eigenvectors.T @ decomp.eigenvectors
    assert np.abs(gram - np.eye(decomp.dim)).max() < 1e-10


def test_gap_ratio_examples():
    assert np.allclose(gap_ratios(np.array([0.0, 1.0, 2.0, 3.0])).values, 1.0)
    assert np.allclose(gap_ratios(np.array([0.0, 1.0, 3.0])).values, [0.5])


def test_gap_ratio_degenerate_pairs_dropped():
    # triple degeneracy: the (0, 0) spacing pair is dropped, not divided
    sample = gap_ratios(np.array([0.0, 0.0, 0.0, 1.0, 2.0]), degeneracy_tol=1e-12)
    assert sample.dropped == 1
    assert np.allclose(sorted(sample.values), [0.0, 1.0])


def test_gap_ratio_unsorted_raises():
    with pytest.raises(ParameterError):
        gap_ratios(np.array([0.0, 2.0, 1.0]))
    with pytest.raises(ParameterError):
        gap_ratios(np.array([0.0, 1.0]))


def test_gap_ratio_middle_fraction():
    E = np.arange(100, dtype=float) ** 2
    full = gap_ratios(E)
    middle = gap_ratios(E, middle_fraction=0.5)
    assert middle.n < full.n
    assert np.all((middle.values >= 0) & (middle.values <= 1))


def test_values_live_in_unit_interval(rng):
    E = np.sort(rng.standard_normal(500))
    sample = gap_ratios(E)
    assert np.all((sample.values >= 0) & (sample.values <= 1))


def test_poisson_oracle_matches_surmise():
    sampled = poisson_mean_r_oracle(n_spacings=100_000, seed=7)
    assert abs(sampled - R_POISSON) < 3e-3


def test_goe_oracle_matches_constant(goe_reference):
    assert abs(goe_reference - R_GOE) < 5e-3


def test_goe_oracle_small_run_consistency():
    # cheaper run, looser band; guards the oracle itself against regressions
    sampled = goe_mean_r_oracle(n_matrices=60, dim=120, seed=3)
    assert abs(sampled - R_GOE) < 0.01


def test_mean_gap_ratio_pools_parity_blocks(rng):
    L = 10
    spec = chain_spec(
        L, rng.uniform(-1.5, 1.5, L // 2), boundary="periodic"
    )
    stats = mean_gap_ratio(spec)
    assert 0.0 < stats.mean_r < 1.0
    assert stats.n_values > 200
    assert len(stats.blocks) == 2
    pooled = pooled_gap_ratios(spec)
    assert np.isclose(stats.mean_r, pooled.values.mean())


def test_mean_gap_ratio_skips_small_blocks():
    spec = chain_spec(6, np.full(3, 0.4), boundary="periodic")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with pytest.raises(ParameterError):
            mean_gap_ratio(spec, min_block_dim=20)  # blocks have dim 10
    assert any("skipping block" in str(w.message) for w in caught)
    stats = mean_gap_ratio(spec, min_block_dim=5)
    assert stats.n_values > 0


def test_mixing_parity_blocks_pushes_statistics_toward_poisson():
    """Unresolved-parity pooling must sit strictly below the resolved value."""
    from functools import partial

    from spinladder.ensemble import run_ensemble
    from spinladder.experiments import mean_r_task

    means = {}
    for resolved in (True, False):
        task = partial(
            mean_r_task,
            L=12,
            D=3.0,
            J=1.0,
            g=1.0,
            boundary="periodic",
            master_seed=606,
            n_samples=50,
            resolve_parity=resolved,
        )
        result = run_ensemble(task, 50, workers=2)
        means[resolved] = result.means["mean_r"][0]
    assert means[True] > means[False] + 0.02
