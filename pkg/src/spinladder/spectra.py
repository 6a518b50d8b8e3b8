"""Full symmetric eigendecomposition and adjacent-gap-ratio level statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import log

import numpy as np
import scipy.linalg

from .basis import SymmetrySector, enumerate_sector
from .errors import NumericsError, ParameterError
from .hamiltonians import DenseHamiltonian, HamiltonianSpec, build_chain

R_POISSON = 2.0 * log(2.0) - 1.0  # mean adjacent-gap ratio, Poisson spacings
R_GOE = 0.5307  # mean adjacent-gap ratio, Gaussian orthogonal ensemble


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def diagonalize(ham: DenseHamiltonian | np.ndarray, block_label: str = "") -> SpectralDecomposition:
    """Complete spectrum and eigenbasis of a real symmetric matrix."""
    matrix = ham.matrix if isinstance(ham, DenseHamiltonian) else ham
    if not block_label and isinstance(ham, DenseHamiltonian):
        block_label = ham.label()
    try:
        w, v = scipy.linalg.eigh(matrix, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericsError(f"eigensolver failed on block {block_label}: {exc}") from exc
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def eigenvalues_only(ham: DenseHamiltonian | np.ndarray, block_label: str = "") -> np.ndarray:
    matrix = ham.matrix if isinstance(ham, DenseHamiltonian) else ham
    try:
        return scipy.linalg.eigh(matrix, eigvals_only=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericsError(f"eigensolver failed on block {block_label}: {exc}") from exc


@dataclass(frozen=True)
class GapRatioSample:
    """Adjacent-gap ratios r_n = min(d_n, d_{n-1}) / max(d_n, d_{n-1}).

    Pairs whose larger spacing falls below the degeneracy threshold are
    dropped (0/0 is meaningless for exact degeneracies) and counted.
    """

    values: np.ndarray = field(repr=False)
    block_label: str = ""
    dropped: int = 0

    @property
    def n(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values)) if self.n else float("nan")


def gap_ratios(
    spectrum: np.ndarray,
    degeneracy_tol: float | None = None,
    block_label: str = "",
    middle_fraction: float | None = None,
) -> GapRatioSample:
    """Gap ratios of an ascending spectrum.

    ``middle_fraction`` optionally keeps only the central fraction of levels
    before forming spacings (off by default).
    """
    E = np.asarray(spectrum, dtype=float)
    if len(E) < 3:
        raise ParameterError("need at least 3 levels for gap ratios")
    if np.any(np.diff(E) < 0):
        raise ParameterError("spectrum must be sorted ascending")
    if middle_fraction is not None:
        if not 0 < middle_fraction <= 1:
            raise ParameterError("middle_fraction must be in (0, 1]")
        keep = max(3, int(round(len(E) * middle_fraction)))
        lo = (len(E) - keep) // 2
        E = E[lo : lo + keep]
    if degeneracy_tol is None:
        degeneracy_tol = 1e-10 * float(E[-1] - E[0])
    d = np.diff(E)
    lo = np.minimum(d[:-1], d[1:])
    hi = np.maximum(d[:-1], d[1:])
    keep = hi >= degeneracy_tol
    dropped = int(np.sum(~keep))
    values = lo[keep] / hi[keep]
    return GapRatioSample(values=values, block_label=block_label, dropped=dropped)


@dataclass(frozen=True)
class GapRatioStats:
    mean_r: float
    stderr_r: float
    n_values: int
    dropped: int
    blocks: tuple[str, ...]

    @property
    def dropped_fraction(self) -> float:
        total = self.n_values + self.dropped
        return self.dropped / total if total else 0.0


def pooled_gap_ratios(
    spec: HamiltonianSpec,
    min_block_dim: int = 20,
    degeneracy_tol: float | None = None,
    middle_fraction: float | None = None,
    resolve_parity: bool = True,
) -> GapRatioSample:
    """Gap ratios of one chain instance, pooled over its sz=0 symmetry blocks.

    With ``resolve_parity`` the sz = 0 block is split into its global-flip
    parity sub-blocks and statistics are computed per block before pooling;
    without it the mixed block is used (useful only to demonstrate why
    resolution matters).  Blocks smaller than ``min_block_dim`` are skipped
    with a warning.
    """
    if spec.variant != "chain":
        raise ParameterError("level statistics are defined for the chain variant")
    sectors = (
        [SymmetrySector(sz=0, parity=+1), SymmetrySector(sz=0, parity=-1)]
        if resolve_parity
        else [SymmetrySector(sz=0)]
    )
    samples = []
    for sector in sectors:
        basis = enumerate_sector(spec.L, sector)
        if basis.dim < min_block_dim:
            warnings.warn(
                f"skipping block {basis.label()} with dim {basis.dim} < {min_block_dim}",
                stacklevel=2,
            )
            continue
        ham = build_chain(spec, basis)
        w = eigenvalues_only(ham, block_label=basis.label())
        samples.append(gap_ratios(w, degeneracy_tol, basis.label(), middle_fraction))
    if not samples:
        raise ParameterError("all symmetry blocks were below the minimum dimension")
    return GapRatioSample(
        values=np.concatenate([s.values for s in samples]),
        block_label=";".join(s.block_label for s in samples),
        dropped=sum(s.dropped for s in samples),
    )


def mean_gap_ratio(
    spec: HamiltonianSpec,
    min_block_dim: int = 20,
    degeneracy_tol: float | None = None,
    middle_fraction: float | None = None,
    resolve_parity: bool = True,
) -> GapRatioStats:
    """Mean gap ratio of one chain instance; see ``pooled_gap_ratios``."""
    pooled = pooled_gap_ratios(
        spec, min_block_dim, degeneracy_tol, middle_fraction, resolve_parity
    )
    values = pooled.values
    stderr = (
        float(np.std(values, ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    )
    return GapRatioStats(
        mean_r=float(values.mean()),
        stderr_r=stderr,
        n_values=len(values),
        dropped=pooled.dropped,
        blocks=tuple(pooled.block_label.split(";")),
    )


# ---------------------------------------------------------------------------
# reference-constant oracles (sampled, never trusted blindly)
# ---------------------------------------------------------------------------

def goe_mean_r_oracle(n_matrices: int = 500, dim: int = 200, seed: int = 1234) -> float:
    """Monte Carlo estimate of the GOE mean gap ratio from random matrices."""
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(n_matrices):
        a = rng.standard_normal((dim, dim))
        w = np.linalg.eigvalsh(a + a.T)
        values.append(gap_ratios(w).values)
    return float(np.concatenate(values).mean())


def poisson_mean_r_oracle(n_spacings: int = 100_000, seed: int = 1234) -> float:
    """Monte Carlo estimate of the Poisson mean gap ratio from exponential spacings."""
    rng = np.random.default_rng(seed)
    E = np.cumsum(rng.exponential(size=n_spacings))
    return gap_ratios(E).mean()
