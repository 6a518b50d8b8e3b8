"""Exact quench evolution via the spectral decomposition, plus all observables.

The evolved state is |psi(t)> = V exp(-i E t) V^T |psi(0)>, so arbitrary times
cost one matrix-vector product each.  For very large E*t the phase argument is
reduced modulo 2*pi in extended precision before being handed to complex
exponentiation; quantitative use is still limited to |E*t| where the reduced
argument keeps sub-1e-6 accuracy (about 1e12 with 80-bit long double).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import QBAR0, QBAR1, SpinBasis, contents_matrix, quasiparticle_counts
from .errors import NumericsError, ParameterError
from .hamiltonians import ThreeLevelBasis
from .spectra import SpectralDecomposition

# 2*pi at long-double precision (arctan2 evaluates in extended precision)
_TWO_PI_LONG = 2.0 * np.arctan2(np.longdouble(0.0), np.longdouble(-1.0))
_PHASE_REDUCTION_THRESHOLD = 1e8


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing simulation times, t >= 0."""

    times: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) == 0:
            raise ParameterError("time grid must be a non-empty 1d array")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise ParameterError("times must be strictly increasing and >= 0")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def log_spaced(
        cls,
        tmin: float,
        tmax: float,
        points_per_decade: int = 40,
        include_zero: bool = False,
    ) -> "TimeGrid":
        if tmin <= 0 or tmax <= tmin:
            raise ParameterError("need 0 < tmin < tmax for a log grid")
        n = max(2, int(round(np.log10(tmax / tmin) * points_per_decade)) + 1)
        t = np.geomspace(tmin, tmax, n)
        if include_zero:
            t = np.concatenate([[0.0], t])
        return cls(times=t)


def phase_factors(eigenvalues: np.ndarray, t: float) -> np.ndarray:
    """exp(-i E t) with extended-precision argument reduction at huge t."""
    E = np.asarray(eigenvalues)
    if t != 0.0 and np.max(np.abs(E)) * abs(t) > _PHASE_REDUCTION_THRESHOLD:
        theta = np.mod(E.astype(np.longdouble) * np.longdouble(t), _TWO_PI_LONG)
        return np.exp(-1j * theta.astype(float))
    return np.exp(-1j * E * t)


@dataclass(frozen=True)
class ObservableSeries:
    """Per-time values of one observable; (T,) scalars or (T, K) vectors."""

    name: str
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    labels: tuple[str, ...] | None = None


class SpectralEvolution:
    """Evolves one initial state under a fixed spectral decomposition."""

    def __init__(self, decomp: SpectralDecomposition, psi0: np.ndarray):
        psi0 = np.asarray(psi0)
        if psi0.shape != (decomp.dim,):
            raise ParameterError(
                f"state dimension {psi0.shape} does not match block dimension {decomp.dim}"
            )
        if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
            raise ParameterError("initial state must be normalized")
        self.decomp = decomp
        self.coeffs = decomp.eigenvectors.T.conj() @ psi0

    def state_at(self, t: float) -> np.ndarray:
        ph = phase_factors(self.decomp.eigenvalues, t)
        return self.decomp.eigenvectors @ (self.coeffs * ph)

    def states(self, times: np.ndarray) -> np.ndarray:
        """All states as columns, shape (dim, T)."""
        E = self.decomp.eigenvalues
        if np.max(np.abs(E)) * np.max(np.abs(times)) > _PHASE_REDUCTION_THRESHOLD:
            ph = np.column_stack([phase_factors(E, t) for t in times])
        else:
            ph = np.exp(-1j * np.outer(E, times))
        return self.decomp.eigenvectors @ (self.coeffs[:, None] * ph)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2 * self.decomp.eigenvalues))


def evolve_expectations(
    decomp: SpectralDecomposition,
    psi0: np.ndarray,
    grid: TimeGrid,
    observables: Sequence["Observable"],
    chunk: int = 256,
) -> list[ObservableSeries]:
    """Evaluate observables along the quench; checks norm conservation."""
    evo = SpectralEvolution(decomp, psi0)
    results: dict[str, list] = {obs.name: [] for obs in observables}
    times = grid.times
    for start in range(0, len(times), chunk):
        block = times[start : start + chunk]
        states = evo.states(block)
        norms = np.linalg.norm(states, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise NumericsError("evolved state norm drifted beyond 1e-10")
        for obs in observables:
            for col in range(states.shape[1]):
                results[obs.name].append(obs(states[:, col]))
    return [
        ObservableSeries(
            name=obs.name,
            times=times,
            values=np.asarray(results[obs.name]),
            labels=obs.labels,
        )
        for obs in observables
    ]


class Observable:
    """Callable psi -> scalar or vector, with a name and component labels."""

    name: str = "observable"
    labels: tuple[str, ...] | None = None

    def __call__(self, psi: np.ndarray):  # pragma: no cover - interface
        raise NotImplementedError


class EntanglementEntropy(Observable):
    """Von Neumann entropy of the left block of the chain.

    The sector state is scattered into a 2^nA x 2^nB matrix indexed by the
    subsystem bit patterns; the entropy comes from its singular values.
    Schmidt weights below 1e-14 are excluded from the logarithm.
    """

    def __init__(self, basis: SpinBasis, cut_sites: int | None = None, base: str = "nats"):
        if basis.parity_resolved:
            raise ParameterError("entropy evaluation needs a configuration basis")
        if base not in ("nats", "bits"):
            raise ParameterError("base must be 'nats' or 'bits'")
        L = basis.L
        self.n_a = L // 2 if cut_sites is None else int(cut_sites)
        if not 0 < self.n_a < L:
            raise ParameterError(f"cut at {self.n_a} sites is outside the chain")
        cfg = basis.configs.astype(np.int64)
        self.rows = (cfg & ((1 << self.n_a) - 1)).astype(np.intp)
        self.cols = (cfg >> self.n_a).astype(np.intp)
        self.shape = (1 << self.n_a, 1 << (L - self.n_a))
        self.scale = 1.0 if base == "nats" else 1.0 / np.log(2.0)
        self.name = "entropy"

    def __call__(self, psi: np.ndarray) -> float:
        m = np.zeros(self.shape, dtype=complex)
        m[self.rows, self.cols] = psi
        s = np.linalg.svd(m, compute_uv=False)
        p = s * s
        p = p[p > 1e-14]
        return float(-(p * np.log(p)).sum() * self.scale)


def half_chain_entropy(psi: np.ndarray, basis: SpinBasis, cut_sites: int | None = None,
                       base: str = "nats") -> float:
    return EntanglementEntropy(basis, cut_sites, base)(psi)


class QuasiparticlePopulations(Observable):
    """P(2n): weight of the state in each fixed-quasiparticle-number subspace."""

    def __init__(self, basis: SpinBasis):
        nbar = quasiparticle_counts(basis)
        self.n_max = basis.L // 4
        self.masks = [nbar == 2 * n for n in range(self.n_max + 1)]
        self.name = "populations"
        self.labels = tuple(f"P{2 * n}" for n in range(self.n_max + 1))

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        w = np.abs(psi) ** 2
        return np.array([w[m].sum() for m in self.masks])


def population_series(psi: np.ndarray, basis: SpinBasis) -> np.ndarray:
    return QuasiparticlePopulations(basis)(psi)


def _correlator_weights(basis: SpinBasis, x: int, y: int, d: int) -> np.ndarray:
    """Diagonal weights of the pair correlator at distance d.

    The correlator is (2/Nbar) sum_i P_i^{xbar} P_{i+d}^{ybar} with the pair
    index modulo L/2; the operator inverse 2/Nbar is taken on the Nbar >= 2
    eigenspaces and annihilates the vacuum sector.
    """
    cm = contents_matrix(basis)
    nbar = quasiparticle_counts(basis)
    P = basis.L // 2
    cx = QBAR0 if x == 0 else QBAR1
    cy = QBAR0 if y == 0 else QBAR1
    counts = np.zeros(basis.dim)
    for i in range(P):
        counts += (cm[:, i] == cx) & (cm[:, (i + d) % P] == cy)
    w = np.zeros(basis.dim)
    occupied = nbar > 0
    w[occupied] = 2.0 * counts[occupied] / nbar[occupied]
    return w


class PairCorrelators(Observable):
    """C_{xbar,ybar}(d) for the requested (x, y) species pairs and distances."""

    def __init__(
        self,
        basis: SpinBasis,
        pairs: Sequence[tuple[int, int]] = ((0, 1), (1, 0)),
        distances: Sequence[int] | None = None,
    ):
        P = basis.L // 2
        if distances is None:
            distances = range(1, P)
        if any(not 1 <= d <= P - 1 for d in distances):
            raise ParameterError(f"distances must lie in 1..{P - 1}")
        self.entries = [(x, y, d) for (x, y) in pairs for d in distances]
        self.weights = np.stack(
            [_correlator_weights(basis, x, y, d) for (x, y, d) in self.entries]
        )
        self.name = "correlators"
        self.labels = tuple(f"C{x}{y}_d{d}" for (x, y, d) in self.entries)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self.weights @ (np.abs(psi) ** 2)


def quasi_correlator(psi: np.ndarray, basis: SpinBasis, x: int, y: int, d: int) -> float:
    if x not in (0, 1) or y not in (0, 1):
        raise ParameterError("species labels x, y must be 0 or 1")
    return float(_correlator_weights(basis, x, y, d) @ (np.abs(psi) ** 2))


class OrderParameter(Observable):
    """Inversion-imbalance order parameter sum_{d<=L/4} [C01(d) - C10(d)].

    ``normalization`` chooses between the per-sector operator inverse 2/Nbar
    (default) and the global 2/<Nbar> variant kept for sensitivity checks.
    """

    def __init__(self, basis: SpinBasis, normalization: str = "inverse_nbar"):
        if normalization not in ("inverse_nbar", "mean_nbar"):
            raise ParameterError("normalization must be inverse_nbar or mean_nbar")
        if basis.L < 4:
            raise ParameterError("order parameter needs L/4 >= 1")
        self.normalization = normalization
        dmax = basis.L // 4
        if normalization == "inverse_nbar":
            w = np.zeros(basis.dim)
            for d in range(1, dmax + 1):
                w += _correlator_weights(basis, 0, 1, d)
                w -= _correlator_weights(basis, 1, 0, d)
            self.weights = w
            self.raw_counts = None
        else:
            cm = contents_matrix(basis)
            P = basis.L // 2
            counts = np.zeros(basis.dim)
            for d in range(1, dmax + 1):
                for i in range(P):
                    counts += (cm[:, i] == QBAR0) & (cm[:, (i + d) % P] == QBAR1)
                    counts -= (cm[:, i] == QBAR1) & (cm[:, (i + d) % P] == QBAR0)
            self.raw_counts = counts
            self.nbar = quasiparticle_counts(basis).astype(float)
        self.name = "order_parameter"

    def __call__(self, psi: np.ndarray) -> float:
        w2 = np.abs(psi) ** 2
        if self.normalization == "inverse_nbar":
            return float(self.weights @ w2)
        mean_nbar = float(self.nbar @ w2)
        if mean_nbar == 0.0:
            return 0.0
        return float(2.0 * (self.raw_counts @ w2) / mean_nbar)


def order_parameter(psi: np.ndarray, basis: SpinBasis,
                    normalization: str = "inverse_nbar") -> float:
    return OrderParameter(basis, normalization)(psi)


class SiteOccupation(Observable):
    """Per-site quasiparticle occupation of a single-quasiparticle state."""

    def __init__(self, basis: ThreeLevelBasis):
        self.basis = basis
        self.name = "site_occupation"
        self.labels = tuple(f"n{j}" for j in range(basis.L))

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        b = self.basis
        return np.array(
            [np.sum(np.abs(psi[b.block(j)]) ** 2) for j in range(b.L)]
        )


def site_occupation(psi: np.ndarray, basis: ThreeLevelBasis) -> np.ndarray:
    return SiteOccupation(basis)(psi)


class EnergyExpectation(Observable):
    """<psi|H|psi>; used by conservation checks."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.name = "energy"

    def __call__(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


# ---------------------------------------------------------------------------
# series diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogFit:
    """Least-squares fit of values = intercept + slope * ln(t) over a window."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


def log_time_fit(
    times: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float],
    bins_per_decade: int | None = None,
) -> LogFit:
    """Fit a + b ln t on the samples inside ``window``.

    The fit uses the raw grid samples by default; ``bins_per_decade``
    optionally averages the curve in logarithmic bins first, which tames
    coherent oscillations when judging slow trends.
    """
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 3:
        raise ParameterError("log fit needs at least 3 points inside the window")
    t, v = times[mask], values[mask]
    if bins_per_decade:
        t, v = log_binned_means(t, v, bins_per_decade)
    x = np.log(t)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((v - pred) ** 2))
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return LogFit(
        slope=float(coef[0]), intercept=float(coef[1]), r_squared=r2, n_points=len(t)
    )


def log_binned_means(
    times: np.ndarray, values: np.ndarray, bins_per_decade: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-bin averages of a series; values may be (T,) or (T, K)."""
    times = np.asarray(times, dtype=float)
    if times[0] <= 0:
        raise ParameterError("log binning needs strictly positive times")
    k0 = np.floor(np.log10(times[0]) * bins_per_decade)
    k1 = np.ceil(np.log10(times[-1]) * bins_per_decade)
    edges = 10.0 ** (np.arange(k0, k1 + 1) / bins_per_decade)
    centers, means = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (times >= a) & (times < b)
        if not sel.any():
            continue
        centers.append(float(np.exp(np.mean(np.log(times[sel])))))
        means.append(np.mean(values[sel], axis=0))
    return np.array(centers), np.array(means)


def decade_means(times: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-decade averages: geometric bin centers and means over [10^k, 10^{k+1})."""
    return log_binned_means(times, values, bins_per_decade=1)
