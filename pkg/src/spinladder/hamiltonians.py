"""Dense Hamiltonian matrices for the ladder, the dual chain, and related models.

Matrix-element conventions (fixed here, tested against two-site oracles):

* ``sigma^x sigma^x + sigma^y sigma^y`` on two sites contributes an
  off-diagonal 2 between the anti-aligned states up,down <-> down,up and
  nothing elsewhere.
* ``sigma^z sigma^z`` contributes +1 (aligned) / -1 (anti-aligned) on the
  diagonal.

All matrices are real symmetric.  Energies are in units of J unless the
caller rescales.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .basis import (
    PAIR_Z_FIRST,
    PAIR_Z_SECOND,
    QBAR0,
    SpinBasis,
    contents_matrix,
    full_basis,
)
from .errors import ParameterError, ResourceLimitError, UnsupportedModelError

DEFAULT_DIM_CAP = 16384

VARIANTS = ("chain", "ladder", "vacuum_h0", "three_level")


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters defining one Hamiltonian instance.

    ``fields`` holds the per-pair couplings h_i (length L/2, identical on both
    ladder legs) for the ladder/chain variants; the three-level model uses the
    scalar hopping ``h`` instead.
    """

    L: int
    variant: str
    J: float = 1.0
    g: float = 1.0
    fields: np.ndarray | None = None
    h: float | None = None
    boundary: str = "open"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}")
        if self.boundary not in ("open", "periodic"):
            raise ParameterError(f"unknown boundary {self.boundary!r}")
        if self.variant == "three_level":
            if self.L < 2:
                raise ParameterError("three-level model needs L >= 2")
            if self.h is None:
                raise ParameterError("three-level model needs the scalar hopping h")
        else:
            if self.L < 2 or self.L % 2:
                raise ParameterError(f"L must be even and >= 2, got {self.L}")
            if self.fields is None or len(self.fields) != self.L // 2:
                raise ParameterError("fields must have length L/2")
        if self.fields is not None:
            object.__setattr__(
                self, "fields", np.asarray(self.fields, dtype=float)
            )

    def label(self) -> str:
        return f"{self.variant}(L={self.L},J={self.J},g={self.g},{self.boundary})"


def chain_spec(L, fields, J=1.0, g=1.0, boundary="open") -> HamiltonianSpec:
    return HamiltonianSpec(L=L, variant="chain", J=J, g=g, fields=fields, boundary=boundary)


def ladder_spec(L, fields, J=1.0, g=1.0) -> HamiltonianSpec:
    return HamiltonianSpec(L=L, variant="ladder", J=J, g=g, fields=fields)


def vacuum_spec(L, J=1.0, g=1.0, boundary="open") -> HamiltonianSpec:
    return HamiltonianSpec(
        L=L, variant="vacuum_h0", J=J, g=g, fields=np.zeros(L // 2), boundary=boundary
    )


def three_level_spec(L, h, J=1.0, g=1.0) -> HamiltonianSpec:
    return HamiltonianSpec(L=L, variant="three_level", J=J, g=g, h=h)


@dataclass(frozen=True)
class ThreeLevelBasis:
    """Single-quasiparticle basis of the three-level chain.

    Basis state (j, bits): the quasiparticle sits on site j and ``bits`` is an
    (L-1)-bit integer holding the vacuum states of the remaining sites in
    ascending site order (bit value 0 = local |0>, 1 = local |1>).  The flat
    index is ``j * 2**(L-1) + bits``.
    """

    L: int

    @property
    def block_dim(self) -> int:
        return 1 << (self.L - 1)

    @property
    def dim(self) -> int:
        return self.L * self.block_dim

    def flat_index(self, j: int, bits: int) -> int:
        return j * self.block_dim + bits

    def block(self, j: int) -> slice:
        return slice(j * self.block_dim, (j + 1) * self.block_dim)

    def bit_position(self, j: int, site: int) -> int:
        """Position of ``site``'s vacuum bit when the quasiparticle is at j."""
        return site if site < j else site - 1


def three_level_basis(L: int, dim_cap: int = DEFAULT_DIM_CAP) -> ThreeLevelBasis:
    if L < 2:
        raise ParameterError("three-level model needs L >= 2")
    dim = L * (1 << (L - 1))
    if dim > dim_cap:
        raise ResourceLimitError(
            f"three-level basis dimension {dim} exceeds cap {dim_cap}"
        )
    return ThreeLevelBasis(L=L)


@dataclass(frozen=True)
class DenseHamiltonian:
    """A dense real-symmetric Hamiltonian block tied to its basis."""

    basis: SpinBasis | ThreeLevelBasis
    matrix: np.ndarray = field(repr=False)
    spec: HamiltonianSpec | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def label(self) -> str:
        spec = self.spec.label() if self.spec else "matrix"
        return f"{spec}[{self.basis.label() if isinstance(self.basis, SpinBasis) else 'qp'}]"


# ---------------------------------------------------------------------------
# dual chain (the workhorse)
# ---------------------------------------------------------------------------

def _chain_elements(c: int, spec: HamiltonianSpec) -> Iterator[tuple[int, float]]:
    """Yield (target config, amplitude) for H|c>, diagonal included once."""
    L, J, g = spec.L, spec.J, spec.g
    h = spec.fields
    diag = 0.0
    # odd bonds (2k, 2k+1): XX+YY with coupling h_k, ZZ with coupling g
    for k in range(L // 2):
        s1, s2 = 2 * k, 2 * k + 1
        b1 = (c >> s1) & 1
        b2 = (c >> s2) & 1
        diag += g * (2 * b1 - 1) * (2 * b2 - 1)
        if b1 != b2 and h[k] != 0.0:
            yield c ^ ((1 << s1) | (1 << s2)), 2.0 * h[k]
    # even bonds (2k+1, 2k+2): XX+YY with coupling -J; last bond wraps if periodic
    n_even = L // 2 if spec.boundary == "periodic" else L // 2 - 1
    for k in range(n_even):
        s1, s2 = 2 * k + 1, (2 * k + 2) % L
        b1 = (c >> s1) & 1
        b2 = (c >> s2) & 1
        if b1 != b2:
            yield c ^ ((1 << s1) | (1 << s2)), -2.0 * J
    yield c, diag


def build_chain(spec: HamiltonianSpec, basis: SpinBasis) -> DenseHamiltonian:
    """Dual-chain Hamiltonian in the given (sector, full, or parity) basis."""
    if spec.variant != "chain":
        raise ParameterError(f"expected chain spec, got {spec.variant}")
    if basis.L != spec.L:
        raise ParameterError(f"basis L={basis.L} does not match spec L={spec.L}")
    if basis.parity_resolved:
        return _build_parity_block(spec, basis)
    index = basis.index()
    H = np.zeros((basis.dim, basis.dim))
    for row, c in enumerate(basis.configs):
        for d, amp in _chain_elements(int(c), spec):
            H[row, index[d]] += amp
    return DenseHamiltonian(basis=basis, matrix=H, spec=spec)


def _build_parity_block(spec: HamiltonianSpec, basis: SpinBasis) -> DenseHamiltonian:
    """Chain Hamiltonian in a parity-resolved sz=0 block.

    With basis vectors (|a> +- |flip a>)/sqrt(2) and a flip-invariant H, the
    block elements are H[a,b] +- H[a, flip(b)].
    """
    L = spec.L
    sign = basis.sector.parity
    index = basis.index()
    mask = (1 << L) - 1
    H = np.zeros((basis.dim, basis.dim))
    for row, c in enumerate(basis.configs):
        for d, amp in _chain_elements(int(c), spec):
            df = d ^ mask
            if d < df:
                H[row, index[d]] += amp
            else:
                H[row, index[df]] += sign * amp
    return DenseHamiltonian(basis=basis, matrix=H, spec=spec)


# ---------------------------------------------------------------------------
# original two-leg ladder
# ---------------------------------------------------------------------------

def build_ladder(spec: HamiltonianSpec) -> DenseHamiltonian:
    """Two-leg transverse-field Ising ladder over the full 2^L space.

    Qubit layout: rung i (0-based, i < L/2), leg a in {0,1} -> bit 2*i + a.
    Only the open boundary is defined for this variant.
    """
    if spec.variant != "ladder":
        raise ParameterError(f"expected ladder spec, got {spec.variant}")
    if spec.boundary != "open":
        raise UnsupportedModelError(
            "the periodic ladder is a different model and is not provided"
        )
    L, J, g = spec.L, spec.J, spec.g
    h = spec.fields
    R = L // 2
    dim = 1 << L
    H = np.zeros((dim, dim))
    for c in range(dim):
        diag = 0.0
        for i in range(R - 1):
            for a in (0, 1):
                z1 = 2 * ((c >> (2 * i + a)) & 1) - 1
                z2 = 2 * ((c >> (2 * (i + 1) + a)) & 1) - 1
                diag += -J * z1 * z2
        H[c, c] = diag
        for i in range(R):
            for a in (0, 1):
                H[c, c ^ (1 << (2 * i + a))] += h[i]
            H[c, c ^ (1 << (2 * i)) ^ (1 << (2 * i + 1))] += -g
    return DenseHamiltonian(basis=full_basis(L), matrix=H, spec=spec)


# ---------------------------------------------------------------------------
# quasiparticle-conserving vacuum Hamiltonian (chain at h_i = 0)
# ---------------------------------------------------------------------------

def build_vacuum_h0(spec: HamiltonianSpec, basis: SpinBasis) -> DenseHamiltonian:
    """The h_i = 0 chain, built independently in pair-content language.

    Per pair: -2J X_k exchanges the two vacuum states (even bonds, so the last
    term exists only with the periodic boundary); each odd bond couples the
    sigma^z of neighboring pairs' adjacent sites, g * z_second(k-1) * z_first(k),
    for all L/2 odd bonds under either boundary.  Equality with the direct
    chain construction at h_i = 0 is a regression test, not an assumption.
    """
    if spec.variant != "vacuum_h0":
        raise ParameterError(f"expected vacuum_h0 spec, got {spec.variant}")
    if basis.L != spec.L:
        raise ParameterError(f"basis L={basis.L} does not match spec L={spec.L}")
    if basis.parity_resolved:
        raise ParameterError("pair-content construction needs a configuration basis")
    L, J, g = spec.L, spec.J, spec.g
    P = L // 2
    index = basis.index()
    cm = contents_matrix(basis)
    H = np.zeros((basis.dim, basis.dim))
    zf = PAIR_Z_FIRST.astype(float)
    zs = PAIR_Z_SECOND.astype(float)
    n_x = P if spec.boundary == "periodic" else P - 1
    for row, c in enumerate(basis.configs):
        c = int(c)
        contents = cm[row]
        diag = 0.0
        for k in range(P):
            diag += g * zs[contents[k - 1]] * zf[contents[k]]
        H[row, row] += diag
        for k in range(n_x):
            if contents[k] < QBAR0:  # vacuum pair: X exchanges |0> <-> |1>
                s1, s2 = 2 * k + 1, (2 * k + 2) % L
                d = c ^ ((1 << s1) | (1 << s2))
                H[row, index[d]] += -2.0 * J
    return DenseHamiltonian(basis=basis, matrix=H, spec=spec)


# ---------------------------------------------------------------------------
# three-level single-quasiparticle model
# ---------------------------------------------------------------------------

def build_three_level(
    spec: HamiltonianSpec,
    basis: ThreeLevelBasis,
    terms: str = "full",
) -> DenseHamiltonian:
    """Three-level chain restricted to the single-quasiparticle sector.

    Local operators X_i, Z_i act on the two vacuum states and annihilate the
    quasiparticle state, so bond terms touching the quasiparticle site only
    contribute through their number-operator pieces.  ``terms`` selects
    "h0" (static part), "h1" (hopping part), or "full".

    The hopping moves the quasiparticle by one site; the transferred vacuum
    bit lands on the vacated site toggled, which in this bit layout is a
    single XOR at the bit position between the two sites.
    """
    if spec.variant != "three_level":
        raise ParameterError(f"expected three_level spec, got {spec.variant}")
    if basis.L != spec.L:
        raise ParameterError(f"basis L={basis.L} does not match spec L={spec.L}")
    if terms not in ("full", "h0", "h1"):
        raise ParameterError(f"terms must be full|h0|h1, got {terms!r}")
    L, J, g, h = spec.L, spec.J, spec.g, spec.h
    B = basis.block_dim
    H = np.zeros((basis.dim, basis.dim))
    if terms in ("full", "h0"):
        for j in range(L):
            base = j * B
            for bits in range(B):
                n = base + bits
                diag = 0.0
                for i in range(L - 1):
                    if i == j:  # number operator piece: +g * 1 * z_{i+1}
                        p = basis.bit_position(j, i + 1)
                        diag += g * (1.0 - 2.0 * ((bits >> p) & 1))
                    elif i + 1 == j:  # -g * z_i * 1
                        p = basis.bit_position(j, i)
                        diag += -g * (1.0 - 2.0 * ((bits >> p) & 1))
                    else:  # -g * z_i * z_{i+1}, both vacuum sites
                        p1 = basis.bit_position(j, i)
                        p2 = basis.bit_position(j, i + 1)
                        z1 = 1.0 - 2.0 * ((bits >> p1) & 1)
                        z2 = 1.0 - 2.0 * ((bits >> p2) & 1)
                        diag += -g * z1 * z2
                H[n, n] += diag
                for i in range(L - 1):  # -2J X_i; X annihilates the quasiparticle
                    if i == j:
                        continue
                    p = basis.bit_position(j, i)
                    H[n, base + (bits ^ (1 << p))] += -2.0 * J
    if terms in ("full", "h1") and h != 0.0:
        for j in range(L - 1):  # hop j <-> j+1, vacated/entered bit toggles
            for bits in range(B):
                n = basis.flat_index(j, bits)
                m = basis.flat_index(j + 1, bits ^ (1 << j))
                H[n, m] += -h
                H[m, n] += -h
    return DenseHamiltonian(basis=basis, matrix=H, spec=spec)


def three_level_initial_state(basis: ThreeLevelBasis, site: int | None = None) -> np.ndarray:
    """Quasiparticle at ``site`` (default: center), all vacuum sites in |0>."""
    if site is None:
        site = (basis.L - 1) // 2
    if not 0 <= site < basis.L:
        raise ParameterError(f"site {site} out of range for L={basis.L}")
    psi = np.zeros(basis.dim)
    psi[basis.flat_index(site, 0)] = 1.0
    return psi


# ---------------------------------------------------------------------------
# misc
# ---------------------------------------------------------------------------

def save_matrix_dump(ham: DenseHamiltonian, path) -> None:
    """Debug dump: uint64 dimension header, then the row-major float64 matrix."""
    with open(path, "wb") as fh:
        fh.write(np.uint64(ham.dim).tobytes())
        fh.write(np.ascontiguousarray(ham.matrix, dtype=np.float64).tobytes())


def load_matrix_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        dim = int(np.frombuffer(fh.read(8), dtype=np.uint64)[0])
        mat = np.frombuffer(fh.read(), dtype=np.float64).reshape(dim, dim)
    return mat.copy()
