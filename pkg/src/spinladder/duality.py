"""Spectral verification that the ladder and the dual chain are the same model.

The check is by spectrum multiset, not by constructing the explicit unitary:
the full 2^L spectrum of the ladder is compared against the union of the
chain's magnetization-sector spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import SymmetrySector, enumerate_sector
from .errors import ParameterError
from .hamiltonians import build_chain, build_ladder, chain_spec, ladder_spec
from .spectra import eigenvalues_only


@dataclass(frozen=True)
class DualityReport:
    L: int
    J: float
    g: float
    fields: np.ndarray = field(repr=False)
    spectrum_ladder: np.ndarray = field(repr=False)
    spectrum_chain: np.ndarray = field(repr=False)
    max_mismatch: float
    dims_match: bool
    multiplicity_table: tuple[tuple[float, int, int], ...] = field(repr=False)

    @property
    def multiplicities_agree(self) -> bool:
        return all(a == b for _, a, b in self.multiplicity_table)

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "J": self.J,
            "g": self.g,
            "fields": list(map(float, self.fields)),
            "dim": len(self.spectrum_ladder),
            "max_mismatch": self.max_mismatch,
            "dims_match": self.dims_match,
            "multiplicities_agree": self.multiplicities_agree,
            "multiplicity_table": [
                {"energy": e, "ladder": a, "chain": b}
                for e, a, b in self.multiplicity_table
            ],
        }


def chain_spectrum_all_sectors(L, fields, J=1.0, g=1.0, boundary="open") -> np.ndarray:
    """Chain spectrum as the sorted union over every magnetization sector."""
    spec = chain_spec(L, fields, J=J, g=g, boundary=boundary)
    pieces = []
    for sz in range(-L, L + 1, 2):
        basis = enumerate_sector(L, SymmetrySector(sz=sz))
        ham = build_chain(spec, basis)
        pieces.append(eigenvalues_only(ham, block_label=basis.label()))
    return np.sort(np.concatenate(pieces))


def verify_duality(
    L: int,
    J: float,
    g: float,
    fields,
    cluster_tol: float | None = None,
) -> DualityReport:
    """Diagonalize both forms and compare sorted spectra as multisets.

    A multiplicity table is always produced: eigenvalues of both sides are
    clustered with a shared tolerance and the per-cluster counts reported, so
    a hypothetical sector-wise 2-to-1 mapping would show up rather than fail
    silently.
    """
    if L > 10:
        raise ParameterError("duality check does full 2^L diagonalization; L <= 10")
    fields = np.asarray(fields, dtype=float)
    ladder = build_ladder(ladder_spec(L, fields, J=J, g=g))
    spectrum_ladder = np.sort(eigenvalues_only(ladder, block_label="ladder"))
    spectrum_chain = chain_spectrum_all_sectors(L, fields, J=J, g=g, boundary="open")
    dims_match = len(spectrum_ladder) == len(spectrum_chain)
    if dims_match:
        max_mismatch = float(np.max(np.abs(spectrum_ladder - spectrum_chain)))
    else:
        max_mismatch = float("nan")
    scale = max(
        spectrum_ladder[-1] - spectrum_ladder[0],
        spectrum_chain[-1] - spectrum_chain[0],
        1.0,
    )
    if cluster_tol is None:
        cluster_tol = 1e-8 * scale
    table = _multiplicity_table(spectrum_ladder, spectrum_chain, cluster_tol)
    return DualityReport(
        L=L,
        J=J,
        g=g,
        fields=fields,
        spectrum_ladder=spectrum_ladder,
        spectrum_chain=spectrum_chain,
        max_mismatch=max_mismatch,
        dims_match=dims_match,
        multiplicity_table=table,
    )


def _multiplicity_table(a: np.ndarray, b: np.ndarray, tol: float):
    """Cluster the merged spectra by gaps > tol and count members per side."""
    merged = np.concatenate([a, b])
    side = np.concatenate([np.zeros(len(a), dtype=int), np.ones(len(b), dtype=int)])
    order = np.argsort(merged, kind="stable")
    merged, side = merged[order], side[order]
    rows = []
    start = 0
    for i in range(1, len(merged) + 1):
        if i == len(merged) or merged[i] - merged[i - 1] > tol:
            chunk = side[start:i]
            rows.append(
                (
                    float(merged[start:i].mean()),
                    int(np.sum(chunk == 0)),
                    int(np.sum(chunk == 1)),
                )
            )
            start = i
    return tuple(rows)


def trace_moments(matrix: np.ndarray, k_max: int = 4) -> np.ndarray:
    """tr(H^k) for k = 1..k_max, computable without diagonalization."""
    moments = []
    power = np.eye(matrix.shape[0])
    for _ in range(k_max):
        power = power @ matrix
        moments.append(np.trace(power))
    return np.array(moments)
