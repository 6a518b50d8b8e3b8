"""Computational bases, symmetry sectors, and the paired-site quasiparticle encoding.

Conventions used throughout the package:

* Sites are 0-based, ``0..L-1``.  A basis configuration is an integer whose
  bit ``i`` stores the sigma^z eigenvalue of site ``i``: bit 1 = up (+1),
  bit 0 = down (-1).
* The chain groups sites into L/2 "even-bond" pairs.  Pair ``k`` consists of
  sites ``(2k+1, (2k+2) % L)``; the last pair wraps onto site 0.  This is a
  labeling convention only and is used for both boundary conditions.
* Pair contents: anti-aligned pairs are the two vacuum states, aligned pairs
  are the two quasiparticle states:

      up,down -> VAC0      down,up -> VAC1
      up,up   -> QBAR0     down,down -> QBAR1

  The quasiparticle number of a configuration counts its aligned pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ParameterError

# pair content codes (int8 in content matrices)
VAC0, VAC1, QBAR0, QBAR1 = 0, 1, 2, 3

CONTENT_NAMES = {VAC0: "0", VAC1: "1", QBAR0: "0bar", QBAR1: "1bar"}

# sigma^z of a pair's first / second site as a function of content code
PAIR_Z_FIRST = np.array([+1, -1, +1, -1], dtype=np.int8)
PAIR_Z_SECOND = np.array([-1, +1, +1, -1], dtype=np.int8)


def flip_all(config: int, L: int) -> int:
    """Global spin flip (the Z2 generator prod_i sigma^x_i)."""
    return config ^ ((1 << L) - 1)


def sz_of(config: int, L: int) -> int:
    """Total sigma^z eigenvalue: up count minus down count."""
    return 2 * int(config).bit_count() - L


def pair_sites(L: int) -> list[tuple[int, int]]:
    """Site pairs (first, second) for pair k = 0..L/2-1; the last pair wraps."""
    return [(2 * k + 1, (2 * k + 2) % L) for k in range(L // 2)]


def pair_content(config: int, L: int, k: int) -> int:
    s1, s2 = 2 * k + 1, (2 * k + 2) % L
    b1 = (config >> s1) & 1
    b2 = (config >> s2) & 1
    if b1 and not b2:
        return VAC0
    if b2 and not b1:
        return VAC1
    return QBAR0 if b1 else QBAR1


def quasiparticle_count(config: int, L: int) -> int:
    """Number of quasiparticles (aligned pairs) in a configuration."""
    return sum(
        1 for k in range(L // 2) if pair_content(config, L, k) in (QBAR0, QBAR1)
    )


def neel_config(L: int) -> int:
    """The alternating down,up,down,up,... configuration (site 0 down)."""
    c = 0
    for i in range(1, L, 2):
        c |= 1 << i
    return c


@dataclass(frozen=True)
class SymmetrySector:
    """U(1) magnetization sector, optionally resolved by the global-flip Z2 parity.

    ``parity`` is +1, -1, or None (unresolved).  Parity resolution is only
    defined inside the sz = 0 block, where the global flip acts.
    """

    sz: int
    parity: int | None = None

    def __post_init__(self):
        if self.parity not in (None, +1, -1):
            raise ParameterError(f"parity must be +1, -1 or None, got {self.parity}")
        if self.parity is not None and self.sz != 0:
            raise ParameterError("parity resolution requires sz = 0")

    def label(self) -> str:
        if self.parity is None:
            return f"sz={self.sz}"
        return f"sz={self.sz},parity={'+' if self.parity > 0 else '-'}"


@dataclass(frozen=True)
class SpinBasis:
    """Ordered basis of one symmetry sector (or of the full 2^L space).

    For unresolved bases, ``configs[i]`` is the i-th basis configuration.
    For parity-resolved bases, ``configs[i]`` is the representative ``c`` of
    the normalized pair (|c> + parity*|flip c>)/sqrt(2) with c < flip(c);
    no configuration at sz = 0 is its own flip, so every basis vector is a
    two-configuration superposition.
    """

    L: int
    sector: SymmetrySector | None  # None = full 2^L space
    configs: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.configs)

    @property
    def parity_resolved(self) -> bool:
        return self.sector is not None and self.sector.parity is not None

    def index(self) -> dict[int, int]:
        """Configuration -> row lookup (representative -> row for parity bases)."""
        return {int(c): i for i, c in enumerate(self.configs)}

    def label(self) -> str:
        return "full" if self.sector is None else self.sector.label()


def enumerate_sector(L: int, sector: SymmetrySector) -> SpinBasis:
    """Enumerate the complete ordered basis of one symmetry sector.

    Configurations are listed in ascending integer order, which is
    deterministic across runs and platforms.
    """
    _check_L(L)
    if abs(sector.sz) > L or (sector.sz - L) % 2 != 0:
        raise ParameterError(f"sector sz={sector.sz} is unsatisfiable for L={L}")
    n_up = (L + sector.sz) // 2
    configs = np.array(
        [c for c in range(1 << L) if int(c).bit_count() == n_up], dtype=np.uint32
    )
    if sector.parity is None:
        return SpinBasis(L=L, sector=sector, configs=configs)
    mask = (1 << L) - 1
    reps = configs[configs < (configs ^ mask)]
    return SpinBasis(L=L, sector=sector, configs=reps)


def full_basis(L: int) -> SpinBasis:
    """The full 2^L computational basis in ascending configuration order."""
    _check_L(L, allow_odd=True)
    return SpinBasis(L=L, sector=None, configs=np.arange(1 << L, dtype=np.uint32))


def _check_L(L: int, allow_odd: bool = False):
    if not 2 <= L <= 20:
        raise ParameterError(f"site count L={L} out of supported range")
    if L % 2 != 0 and not allow_odd:
        raise ParameterError(f"site count must be even, got L={L}")


def sector_dim(L: int, sz: int) -> int:
    return comb(L, (L + sz) // 2)


def contents_matrix(basis: SpinBasis) -> np.ndarray:
    """Pair-content codes for every basis configuration, shape (dim, L/2)."""
    if basis.parity_resolved:
        raise ParameterError("pair contents are defined on configuration bases only")
    L = basis.L
    cfg = basis.configs.astype(np.int64)
    out = np.empty((basis.dim, L // 2), dtype=np.int8)
    for k, (s1, s2) in enumerate(pair_sites(L)):
        b1 = ((cfg >> s1) & 1).astype(bool)
        b2 = ((cfg >> s2) & 1).astype(bool)
        out[:, k] = np.select(
            [b1 & ~b2, ~b1 & b2, b1 & b2],
            [VAC0, VAC1, QBAR0],
            default=QBAR1,
        )
    return out


def quasiparticle_counts(basis: SpinBasis) -> np.ndarray:
    """Quasiparticle number of every basis configuration."""
    cm = contents_matrix(basis)
    return ((cm == QBAR0) | (cm == QBAR1)).sum(axis=1).astype(np.int64)


def neel_state(L: int) -> tuple[np.ndarray, SpinBasis]:
    """Unit vector on the Neel configuration in the sz=0 unresolved basis."""
    _check_L(L)
    basis = enumerate_sector(L, SymmetrySector(sz=0))
    psi = np.zeros(basis.dim)
    psi[basis.index()[neel_config(L)]] = 1.0
    return psi, basis
