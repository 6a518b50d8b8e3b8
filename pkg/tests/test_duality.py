import numpy as np
import pytest

from spinladder.duality import (
    chain_spectrum_all_sectors,
    trace_moments,
    verify_duality,
)
from spinladder.errors import ParameterError
from spinladder.hamiltonians import (
    build_chain,
    build_ladder,
    chain_spec,
    ladder_spec,
)
from spinladder.basis import full_basis


def test_minimal_ladder_without_fields():
    report = verify_duality(2, J=0.9, g=1.3, fields=[0.0])
    expected = np.array([-1.3, -1.3, 1.3, 1.3])
    assert np.allclose(report.spectrum_ladder, expected)
    assert np.allclose(report.spectrum_chain, expected)
    assert report.max_mismatch < 1e-12
    assert report.multiplicities_agree
    # both degenerate doublets appear on both sides
    assert all(a == b == 2 for _, a, b in report.multiplicity_table)


def test_weak_disorder_spectra_agree(rng):
    fields = rng.uniform(-0.15, 0.15, 3)
    report = verify_duality(6, J=1.0, g=1.0, fields=fields)
    assert report.dims_match
    assert report.max_mismatch < 1e-10


def test_disorder_free_spectra_agree():
    report = verify_duality(6, J=1.0, g=1.0, fields=np.full(3, 0.1))
    assert report.max_mismatch < 1e-10


def test_strong_disorder_spectra_agree(rng):
    fields = rng.uniform(-5.0, 5.0, 4)
    report = verify_duality(8, J=1.0, g=1.0, fields=fields)
    assert report.max_mismatch < 1e-10


def test_trace_moments_agree_without_diagonalization(rng):
    L = 6
    fields = rng.uniform(-1, 1, L // 2)
    ladder = build_ladder(ladder_spec(L, fields, J=1.1, g=0.9)).matrix
    chain = build_chain(
        chain_spec(L, fields, J=1.1, g=0.9), full_basis(L)
    ).matrix
    m_ladder = trace_moments(ladder)
    m_chain = trace_moments(chain)
    scale = np.maximum(np.abs(m_ladder), 1.0)
    assert np.all(np.abs(m_ladder - m_chain) / scale < 1e-9)


def test_chain_union_has_full_dimension():
    spectrum = chain_spectrum_all_sectors(4, [0.2, -0.1])
    assert len(spectrum) == 16
    assert np.all(np.diff(spectrum) >= 0)


def test_large_L_is_rejected():
    with pytest.raises(ParameterError):
        verify_duality(12, 1.0, 1.0, np.zeros(6))
