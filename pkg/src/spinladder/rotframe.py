"""Rotating-frame analysis of the single-quasiparticle three-level chain.

The state is split per quasiparticle position j as

    psi_j = c_j * exp(i R_j) * phi_j,

where phi_j is the normalized vacuum component in the raw numerical gauge
(phi_j = psi_j / ||psi_j||, so it carries the full phase of the block) and
R_j is the accumulated Berry phase of that gauge,

    R_j(t) = - sum_steps arg <phi_j(t_k) | phi_j(t_{k+1})>,

the discrete form of i * integral <phi_j | d/dt phi_j>.  The residual
amplitude c_j = ||psi_j|| * exp(-i R_j) is then the dynamical quasiparticle
coefficient: it starts real non-negative at the anchor time and obeys
i dc/dt = M(t) c with

    M_jj = <phi_j| H0^(j) |phi_j>,
    M_jk = exp(-i (R_j - R_k)) <phi_j| H1^(jk) |phi_k>    (|j - k| = 1),

which is Hermitian by construction.  The diagonal (the emergent on-site
potential) is gauge invariant and needs no phase accumulation, so late-time
potential averages are evaluated directly at arbitrary spectrally-evolved
times; only the effective-dynamics cross-check integrates phases on a fine
grid.

Sites whose occupation falls below the validity threshold have an undefined
vacuum state; their R is stale and is re-anchored (reset to zero, c_j real)
when the site revalidates.  Constant per-site phase offsets are a symmetry
of the effective equations, so re-anchoring is exact, not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import SpectralEvolution, TimeGrid
from .errors import ParameterError, StepSizeError
from .hamiltonians import (
    ThreeLevelBasis,
    DenseHamiltonian,
    HamiltonianSpec,
    three_level_basis,
    three_level_initial_state,
    build_three_level,
)
from .spectra import diagonalize

VALIDITY_THRESHOLD = 1e-12  # on |c_j|^2
MIN_OVERLAP = 0.99


@dataclass(frozen=True)
class RotatingFrameSnapshot:
    """Per-site decomposition of a single-quasiparticle state at one time.

    ``c[j]`` is the complex quasiparticle amplitude (real non-negative at an
    anchor), ``phi[j]`` the raw-gauge normalized vacuum state, ``R[j]`` the
    accumulated phase.  Rows of ``phi`` are zero where ``valid`` is False.
    """

    t: float
    c: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    @property
    def occupations(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    def reconstruct(self) -> np.ndarray:
        """Flat state vector sum_j c_j exp(i R_j) |qp at j> |phi_j>."""
        return ((self.c * np.exp(1j * self.R))[:, None] * self.phi).reshape(-1)


def decompose(
    psi: np.ndarray,
    basis: ThreeLevelBasis,
    t: float = 0.0,
    threshold: float = VALIDITY_THRESHOLD,
) -> RotatingFrameSnapshot:
    """Anchor snapshot: R = 0, amplitudes real non-negative."""
    if psi.shape != (basis.dim,):
        raise ParameterError("state does not match the single-quasiparticle basis")
    blocks = psi.reshape(basis.L, basis.block_dim)
    norms = np.linalg.norm(blocks, axis=1)
    valid = norms**2 >= threshold
    phi = np.zeros_like(blocks, dtype=complex)
    phi[valid] = blocks[valid] / norms[valid, None]
    return RotatingFrameSnapshot(
        t=t,
        c=norms.astype(complex),
        phi=phi,
        R=np.zeros(basis.L),
        valid=valid,
    )


def accumulate_phase(
    prev: RotatingFrameSnapshot,
    curr: RotatingFrameSnapshot,
    min_overlap: float = MIN_OVERLAP,
) -> RotatingFrameSnapshot:
    """Carry the accumulated phases from ``prev`` into the snapshot ``curr``.

    Where both snapshots are valid, R is incremented by the discrete Berry
    connection -arg<phi(t)|phi(t+dt)>; where either is invalid the site is
    re-anchored (R = 0).  Raises when the geometric overlap of consecutive
    vacuum states is too small to trust the phase increment.
    """
    both = prev.valid & curr.valid
    R = np.zeros_like(prev.R)
    c = curr.c.copy()
    for j in np.nonzero(both)[0]:
        ov = np.vdot(prev.phi[j], curr.phi[j])
        if abs(ov) < min_overlap:
            raise StepSizeError(
                f"vacuum overlap |{abs(ov):.3f}| < {min_overlap} at site {j}, "
                f"t = {curr.t}; refine the accumulation grid"
            )
        R[j] = prev.R[j] - np.angle(ov)
        c[j] = c[j] * np.exp(-1j * R[j])
    return RotatingFrameSnapshot(t=curr.t, c=c, phi=curr.phi, R=R, valid=curr.valid)


def effective_hamiltonian(
    snap: RotatingFrameSnapshot,
    h0: DenseHamiltonian,
    h1: DenseHamiltonian,
    missing: float = np.nan,
) -> np.ndarray:
    """The L x L quasiparticle Hamiltonian M(t) of one snapshot.

    Rows/columns of invalid sites are filled with ``missing`` (NaN by
    default; pass 0.0 to get a propagation-ready matrix).
    """
    basis = h0.basis
    L = basis.L
    M = np.full((L, L), missing, dtype=complex)
    for j in range(L):
        if not snap.valid[j]:
            continue
        bj = basis.block(j)
        M[j, j] = np.real(np.vdot(snap.phi[j], h0.matrix[bj, bj] @ snap.phi[j]))
        for k in (j - 1, j + 1):
            if 0 <= k < L and snap.valid[k]:
                bk = basis.block(k)
                amp = np.vdot(snap.phi[j], h1.matrix[bj, bk] @ snap.phi[k])
                M[j, k] = np.exp(-1j * (snap.R[j] - snap.R[k])) * amp
        for k in range(L):
            if abs(k - j) > 1 and snap.valid[k]:
                M[j, k] = 0.0
    return M


# ---------------------------------------------------------------------------
# emergent on-site potential (diagonal only; no phase accumulation needed)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveHamiltonianSeries:
    """Per-time diagonal of M plus late-window per-site statistics."""

    times: np.ndarray = field(repr=False)
    diagonal: np.ndarray = field(repr=False)  # (T, L), NaN where invalid
    valid: np.ndarray = field(repr=False)  # (T, L) bool
    late_window: tuple[float, float]
    late_means: np.ndarray
    late_stderrs: np.ndarray
    late_counts: np.ndarray

    def to_rows(self) -> list[tuple[float, int, float, int]]:
        """(t, site, M_jj, valid) rows for CSV emission."""
        rows = []
        for ti, t in enumerate(self.times):
            for j in range(self.diagonal.shape[1]):
                rows.append(
                    (float(t), j, float(self.diagonal[ti, j]), int(self.valid[ti, j]))
                )
        return rows


def emergent_potential_series(
    spec: HamiltonianSpec,
    grid: TimeGrid,
    late_window: tuple[float, float] = (1e3, 1e6),
    initial_site: int | None = None,
    threshold: float = VALIDITY_THRESHOLD,
    dim_cap: int | None = None,
) -> EffectiveHamiltonianSeries:
    """On-site potential M_jj(t) along the quench and its late-window averages.

    The temporal standard error of each site's late-window mean treats the
    sampled times as independent; the sampling grid should be log-spaced.
    """
    basis = three_level_basis(spec.L) if dim_cap is None else three_level_basis(spec.L, dim_cap)
    h0 = build_three_level(spec, basis, terms="h0")
    full = build_three_level(spec, basis)
    decomp = diagonalize(full)
    psi0 = three_level_initial_state(basis, initial_site)
    evo = SpectralEvolution(decomp, psi0)
    L, B = basis.L, basis.block_dim
    T = len(grid)
    diagonal = np.full((T, L), np.nan)
    valid = np.zeros((T, L), dtype=bool)
    h0_blocks = [h0.matrix[basis.block(j), basis.block(j)] for j in range(L)]
    chunk = 128
    for start in range(0, T, chunk):
        stop = min(start + chunk, T)
        states = evo.states(grid.times[start:stop])
        for ti in range(start, stop):
            blocks = states[:, ti - start].reshape(L, B)
            w = np.einsum("jb,jb->j", blocks.conj(), blocks).real
            ok = w >= threshold
            valid[ti] = ok
            for j in np.nonzero(ok)[0]:
                diagonal[ti, j] = (
                    np.real(np.vdot(blocks[j], h0_blocks[j] @ blocks[j])) / w[j]
                )
    in_window = (grid.times >= late_window[0]) & (grid.times <= late_window[1])
    window_diag = diagonal[in_window]
    counts = np.sum(~np.isnan(window_diag), axis=0)
    means = np.full(L, np.nan)
    stderrs = np.full(L, np.nan)
    for j in range(L):
        vals = window_diag[:, j]
        vals = vals[~np.isnan(vals)]
        if len(vals):
            means[j] = vals.mean()
            stderrs[j] = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
    return EffectiveHamiltonianSeries(
        times=grid.times,
        diagonal=diagonal,
        valid=valid,
        late_window=late_window,
        late_means=means,
        late_stderrs=stderrs,
        late_counts=counts,
    )


def distinct_site_subset(means: np.ndarray, stderrs: np.ndarray, n_sigma: float = 2.0) -> list[int]:
    """Greedy largest set of sites whose means are pairwise separated.

    Two sites are distinct when |mean_i - mean_j| exceeds n_sigma times the
    combined standard error.  Sites are visited in order of ascending stderr.
    """
    order = np.argsort(stderrs)
    chosen: list[int] = []
    for j in order:
        if np.isnan(means[j]):
            continue
        sep = all(
            abs(means[j] - means[k]) > n_sigma * np.hypot(stderrs[j], stderrs[k])
            for k in chosen
        )
        if sep:
            chosen.append(int(j))
    return sorted(chosen)


# ---------------------------------------------------------------------------
# effective-dynamics cross-check (fine grid, phases integrated)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveDynamicsResult:
    times: np.ndarray
    full_occupations: np.ndarray  # (T, L) from the exact evolution
    effective_occupations: np.ndarray  # (T, L) from i dc/dt = M(t) c

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.full_occupations - self.effective_occupations)))


def effective_dynamics_check(
    spec: HamiltonianSpec,
    t_final: float = 50.0,
    dt: float = 5e-4,
    compare_every: int = 1000,
    initial_site: int | None = None,
    threshold: float = VALIDITY_THRESHOLD,
    min_overlap: float = MIN_OVERLAP,
    chunk: int = 4096,
) -> EffectiveDynamicsResult:
    """Integrate the quasiparticle amplitudes under M(t) and compare occupations.

    The effective equation is propagated with midpoint-exponential steps on
    the same fine grid used for phase accumulation.  Newly validated sites
    are re-anchored to the exact amplitudes (their accumulated history is a
    constant phase offset, which the equations do not feel).
    """
    basis = three_level_basis(spec.L)
    h0 = build_three_level(spec, basis, terms="h0")
    h1 = build_three_level(spec, basis, terms="h1")
    full = build_three_level(spec, basis)
    decomp = diagonalize(full)
    psi0 = three_level_initial_state(basis, initial_site)
    evo = SpectralEvolution(decomp, psi0)

    n_steps = int(round(t_final / dt))
    times = np.arange(n_steps + 1) * dt
    snap = decompose(psi0, basis, t=0.0, threshold=threshold)
    M_prev = effective_hamiltonian(snap, h0, h1, missing=0.0)
    c_eff = snap.c.copy()
    c_eff[~snap.valid] = 0.0

    compare_idx = list(range(0, n_steps + 1, compare_every))
    if compare_idx[-1] != n_steps:
        compare_idx.append(n_steps)
    comp_times, full_occ, eff_occ = [], [], []
    full_occ.append(snap.occupations)
    eff_occ.append(np.abs(c_eff) ** 2)
    comp_times.append(0.0)

    for start in range(1, n_steps + 1, chunk):
        stop = min(start + chunk, n_steps + 1)
        states = evo.states(times[start:stop])
        for k in range(start, stop):
            prev_valid = snap.valid.copy()
            raw = decompose(states[:, k - start], basis, t=times[k], threshold=threshold)
            snap = accumulate_phase(snap, raw, min_overlap=min_overlap)
            M_curr = effective_hamiltonian(snap, h0, h1, missing=0.0)
            M_mid = 0.5 * (M_prev + M_curr)
            w, u = np.linalg.eigh(M_mid)
            c_eff = (u * np.exp(-1j * w * dt)) @ (u.conj().T @ c_eff)
            newly_valid = snap.valid & ~prev_valid
            if np.any(newly_valid):
                c_eff[newly_valid] = snap.c[newly_valid]
            M_prev = M_curr
            if k in compare_idx:
                comp_times.append(times[k])
                full_occ.append(snap.occupations)
                eff_occ.append(np.abs(c_eff) ** 2)
    return EffectiveDynamicsResult(
        times=np.array(comp_times),
        full_occupations=np.array(full_occ),
        effective_occupations=np.array(eff_occ),
    )
