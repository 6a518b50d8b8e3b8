"""Named experiment presets and the generic runner behind the CLI and service.

Each preset pins the parameters of one figure-style experiment; overrides are
applied on top, and every run yields plot-ready tables plus a manifest that is
sufficient to replay the run bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from functools import partial

import numpy as np

from . import __version__
from .basis import SymmetrySector, enumerate_sector, neel_config
from .duality import verify_duality
from .dynamics import (
    EntanglementEntropy,
    OrderParameter,
    PairCorrelators,
    QuasiparticlePopulations,
    SiteOccupation,
    TimeGrid,
    evolve_expectations,
)
from .ensemble import DisorderModel, draw_fields, run_ensemble
from .errors import ParameterError
from .hamiltonians import (
    DEFAULT_DIM_CAP,
    three_level_basis,
    three_level_initial_state,
    three_level_spec,
    build_three_level,
    build_chain,
    chain_spec,
)
from .rotframe import emergent_potential_series
from .spectra import R_GOE, R_POISSON, diagonalize, pooled_gap_ratios
from .tables import SeriesTable

HIST_BINS = 25


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved parameters of one experiment run."""

    preset: str
    kind: str  # level_stats | chain_dynamics | qp_occupation | qp_potential | duality
    L_list: tuple[int, ...]
    J: float = 1.0
    g_list: tuple[float, ...] = (1.0,)
    D_list: tuple[float, ...] = ()
    h_list: tuple[float, ...] = ()
    boundary: str = "open"
    samples: int = 200
    seed: int = 20240
    grid: tuple[float, float, int] = (0.1, 1e4, 20)  # tmin, tmax, points/decade
    observables: tuple[str, ...] = ("entropy",)
    late_window: tuple[float, float] = (1e3, 1e6)
    n_draws: int = 20
    dim_cap: int = DEFAULT_DIM_CAP

    def time_grid(self) -> TimeGrid:
        tmin, tmax, ppd = self.grid
        return TimeGrid.log_spaced(tmin, tmax, int(ppd))


def _presets() -> dict[str, ExperimentConfig]:
    return {
        "fig1a": ExperimentConfig(
            preset="fig1a",
            kind="level_stats",
            L_list=(12,),
            D_list=(0.3, 3.0, 30.0),
            boundary="periodic",
            samples=100,
        ),
        "fig1b": ExperimentConfig(
            preset="fig1b",
            kind="chain_dynamics",
            L_list=(12,),
            D_list=(0.3, 3.0, 30.0),
            samples=200,
            grid=(0.1, 1e4, 20),
            observables=("entropy",),
        ),
        "fig2": ExperimentConfig(
            preset="fig2",
            kind="chain_dynamics",
            L_list=(12,),
            D_list=(0.1, 0.5, 3.0),
            samples=200,
            grid=(0.1, 1e8, 12),  # reaches past the final imbalance relaxation
            observables=("entropy", "populations", "correlators"),
        ),
        "fig3": ExperimentConfig(
            preset="fig3",
            kind="chain_dynamics",
            L_list=(12,),
            D_list=(0.1,),
            g_list=(1.0, 0.5, 0.1),
            samples=200,
            grid=(0.1, 1e6, 16),
            observables=("entropy", "order_parameter"),
        ),
        "fig4": ExperimentConfig(
            preset="fig4",
            kind="chain_dynamics",
            L_list=(12,),
            h_list=(0.1, 0.5, 1.0),
            samples=1,
            grid=(0.1, 1e4, 20),
            observables=("entropy",),
        ),
        "fig5": ExperimentConfig(
            preset="fig5",
            kind="level_stats",
            L_list=(8, 10, 12),
            D_list=(0.3, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 13.0, 16.0, 20.0, 26.0, 30.0),
            boundary="periodic",
            samples=200,
        ),
        "fig6": ExperimentConfig(
            preset="fig6",
            kind="chain_dynamics",
            L_list=(8, 10, 12),
            D_list=(0.1, 0.3),
            samples=200,
            grid=(0.1, 1e5, 16),
            observables=("entropy",),
        ),
        "figA1": ExperimentConfig(
            preset="figA1",
            kind="qp_occupation",
            L_list=(9,),
            h_list=(0.1, 0.5, 1.0),
            samples=1,
            grid=(0.1, 1e6, 16),
        ),
        "figA2": ExperimentConfig(
            preset="figA2",
            kind="qp_potential",
            L_list=(9,),
            h_list=(0.1,),
            samples=1,
            grid=(0.1, 1e6, 24),
            late_window=(1e3, 1e6),
        ),
        "duality_check": ExperimentConfig(
            preset="duality_check",
            kind="duality",
            L_list=(4, 6, 8),
            D_list=(0.1, 1.0, 10.0),
            n_draws=20,
        ),
    }


def preset_names() -> list[str]:
    return sorted(_presets())


def preset_config(name: str) -> ExperimentConfig:
    try:
        return _presets()[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Resolve user overrides onto a preset; scalars become one-element sweeps."""
    updates = {}
    scalar_to_list = {"L": "L_list", "D": "D_list", "g": "g_list", "h": "h_list"}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in scalar_to_list:
            updates[scalar_to_list[key]] = (value,)
        elif key in ("L_list", "D_list", "g_list", "h_list"):
            updates[key] = tuple(value)
        elif key in ("J", "boundary", "samples", "seed", "n_draws", "dim_cap"):
            updates[key] = value
        elif key == "grid":
            updates["grid"] = tuple(value)
        elif key == "late_window":
            updates["late_window"] = tuple(value)
        elif key == "observables":
            updates["observables"] = tuple(value)
        else:
            raise ParameterError(f"unknown override {key!r}")
    return replace(config, **updates)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    tables: tuple[SeriesTable, ...]
    manifest: dict


# ---------------------------------------------------------------------------
# ensemble tasks (module level so worker processes can unpickle them)
# ---------------------------------------------------------------------------

def mean_r_task(
    sample_index, *, L, D, J, g, boundary, master_seed, n_samples, resolve_parity=True
):
    model = DisorderModel("uniform_box", master_seed, n_samples, D=D)
    fields = draw_fields(model, sample_index, L // 2)
    spec = chain_spec(L, fields, J=J, g=g, boundary=boundary)
    pooled = pooled_gap_ratios(spec, resolve_parity=resolve_parity)
    hist, _ = np.histogram(pooled.values, bins=HIST_BINS, range=(0.0, 1.0))
    total = len(pooled.values) + pooled.dropped
    return {
        "mean_r": np.array([pooled.values.mean()]),
        "n_values": np.array([float(len(pooled.values))]),
        "dropped_fraction": np.array([pooled.dropped / total if total else 0.0]),
        "hist": hist.astype(float),
    }


def _make_observables(names, basis):
    mapping = {
        "entropy": lambda: EntanglementEntropy(basis),
        "populations": lambda: QuasiparticlePopulations(basis),
        "correlators": lambda: PairCorrelators(basis),
        "order_parameter": lambda: OrderParameter(basis),
    }
    try:
        return [mapping[name]() for name in names]
    except KeyError as exc:
        raise ParameterError(f"unknown observable {exc.args[0]!r}") from None


def _chain_dynamics_task(
    sample_index,
    *,
    L,
    J,
    g,
    boundary,
    disorder_kind,
    strength,
    master_seed,
    n_samples,
    times,
    observables,
):
    if disorder_kind == "constant":
        model = DisorderModel("constant", master_seed, n_samples, h=strength)
    else:
        model = DisorderModel("uniform_box", master_seed, n_samples, D=strength)
    fields = draw_fields(model, sample_index, L // 2)
    basis = enumerate_sector(L, SymmetrySector(sz=0))
    spec = chain_spec(L, fields, J=J, g=g, boundary=boundary)
    decomp = diagonalize(build_chain(spec, basis))
    psi0 = np.zeros(basis.dim)
    psi0[basis.index()[neel_config(L)]] = 1.0
    obs = _make_observables(observables, basis)
    series = evolve_expectations(decomp, psi0, TimeGrid(times), obs)
    return {s.name: s.values for s in series}


def observable_labels(names, L) -> dict[str, tuple[str, ...]]:
    basis = enumerate_sector(L, SymmetrySector(sz=0))
    out = {}
    for ob in _make_observables(names, basis):
        out[ob.name] = ob.labels if ob.labels else (ob.name,)
    return out


# ---------------------------------------------------------------------------
# per-kind runners
# ---------------------------------------------------------------------------

def _interleave(times, means, stderrs):
    """Columns t, x1_mean, x1_stderr, x2_mean, ... as a row matrix."""
    if means.ndim == 1:
        means = means[:, None]
        stderrs = stderrs[:, None]
    cols = [times]
    for k in range(means.shape[1]):
        cols.append(means[:, k])
        cols.append(stderrs[:, k])
    return np.column_stack(cols)


def _run_level_stats(config: ExperimentConfig, workers):
    tables = []
    summary_rows = []
    hist_rows = []
    statuses = {}
    for L in config.L_list:
        for D in config.D_list:
            task = partial(
                mean_r_task,
                L=L,
                D=D,
                J=config.J,
                g=config.g_list[0],
                boundary=config.boundary,
                master_seed=config.seed,
                n_samples=config.samples,
            )
            result = run_ensemble(task, config.samples, workers=workers)
            statuses[f"L{L}_D{D}"] = _status_counts(result.sample_status)
            summary_rows.append(
                [
                    D,
                    L,
                    config.samples,
                    result.means["mean_r"][0],
                    result.stderrs["mean_r"][0],
                    result.means["dropped_fraction"][0],
                ]
            )
            edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
            mean_hist = result.means["hist"]
            density = mean_hist / (mean_hist.sum() * np.diff(edges))
            hist_rows.extend(
                [D, L, edges[i], edges[i + 1], density[i]] for i in range(HIST_BINS)
            )
    tables.append(
        SeriesTable(
            name=f"{config.preset}_mean_r",
            columns=("D", "L", "n_samples", "mean_r", "stderr_r", "dropped_fraction"),
            rows=np.array(summary_rows),
        )
    )
    tables.append(
        SeriesTable(
            name=f"{config.preset}_r_histogram",
            columns=("D", "L", "bin_lo", "bin_hi", "density"),
            rows=np.array(hist_rows),
        )
    )
    return tables, {
        "references": {"poisson": R_POISSON, "goe": R_GOE},
        "sample_status": statuses,
    }


def _combo_tag(L, g, kind, strength):
    tag = f"L{L}"
    if g != 1.0:
        tag += f"_g{g:g}"
    tag += f"_{'h' if kind == 'constant' else 'D'}{strength:g}"
    return tag


def _run_chain_dynamics(config: ExperimentConfig, workers):
    grid = config.time_grid()
    sweeps = [("constant", h) for h in config.h_list] + [
        ("uniform_box", D) for D in config.D_list
    ]
    if not sweeps:
        raise ParameterError("chain dynamics needs a D list or an h list")
    tables = []
    statuses = {}
    for L in config.L_list:
        labels = observable_labels(config.observables, L)
        for g in config.g_list:
            for kind, strength in sweeps:
                samples = 1 if kind == "constant" else config.samples
                task = partial(
                    _chain_dynamics_task,
                    L=L,
                    J=config.J,
                    g=g,
                    boundary=config.boundary,
                    disorder_kind=kind,
                    strength=strength,
                    master_seed=config.seed,
                    n_samples=samples,
                    times=grid.times,
                    observables=config.observables,
                )
                result = run_ensemble(task, samples, workers=workers)
                tag = _combo_tag(L, g, kind, strength)
                statuses[tag] = _status_counts(result.sample_status)
                for name in config.observables:
                    cols = ["t"]
                    for lab in labels[name]:
                        cols.extend([f"{lab}_mean", f"{lab}_stderr"])
                    tables.append(
                        SeriesTable(
                            name=f"{config.preset}_{name}_{tag}",
                            columns=tuple(cols),
                            rows=_interleave(
                                grid.times, result.means[name], result.stderrs[name]
                            ),
                        )
                    )
    return tables, {"sample_status": statuses}


def _run_qp_occupation(config: ExperimentConfig, workers):
    grid = config.time_grid()
    tables = []
    for L in config.L_list:
        basis = three_level_basis(L, config.dim_cap)
        for h in config.h_list:
            spec = three_level_spec(L, h, J=config.J, g=config.g_list[0])
            decomp = diagonalize(build_three_level(spec, basis))
            psi0 = three_level_initial_state(basis)
            series = evolve_expectations(
                decomp, psi0, grid, [SiteOccupation(basis)]
            )[0]
            tables.append(
                SeriesTable(
                    name=f"{config.preset}_occupation_L{L}_h{h:g}",
                    columns=("t",) + series.labels,
                    rows=np.column_stack([grid.times, series.values]),
                )
            )
    return tables, {"initial_site": {L: (L - 1) // 2 for L in config.L_list}}


def _run_qp_potential(config: ExperimentConfig, workers):
    grid = config.time_grid()
    tables = []
    summaries = {}
    for L in config.L_list:
        for h in config.h_list:
            spec = three_level_spec(L, h, J=config.J, g=config.g_list[0])
            series = emergent_potential_series(
                spec, grid, late_window=config.late_window, dim_cap=config.dim_cap
            )
            tag = f"L{L}_h{h:g}"
            tables.append(
                SeriesTable(
                    name=f"{config.preset}_potential_{tag}",
                    columns=("t", "site", "m_jj", "valid"),
                    rows=np.array(series.to_rows()),
                )
            )
            tables.append(
                SeriesTable(
                    name=f"{config.preset}_late_average_{tag}",
                    columns=("site", "mean", "stderr", "n_times"),
                    rows=np.column_stack(
                        [
                            np.arange(L),
                            series.late_means,
                            series.late_stderrs,
                            series.late_counts,
                        ]
                    ),
                )
            )
            summaries[tag] = {
                "late_window": list(config.late_window),
                "means": series.late_means.tolist(),
                "stderrs": series.late_stderrs.tolist(),
            }
    return tables, {"late_averages": summaries}


def _run_duality(config: ExperimentConfig, workers):
    rows = []
    reports = []
    for L in config.L_list:
        for D in config.D_list:
            model = DisorderModel(
                "uniform_box", config.seed, max(1, config.n_draws), D=D
            )
            for draw in range(config.n_draws):
                fields = draw_fields(model, draw, L // 2)
                report = verify_duality(L, config.J, config.g_list[0], fields)
                rows.append(
                    [
                        L,
                        D,
                        draw,
                        report.max_mismatch,
                        float(report.dims_match),
                        float(report.multiplicities_agree),
                    ]
                )
                reports.append(report.to_dict())
    tables = [
        SeriesTable(
            name=f"{config.preset}_summary",
            columns=("L", "D", "draw", "max_mismatch", "dims_match", "multiplicities_agree"),
            rows=np.array(rows),
        )
    ]
    worst = max(r["max_mismatch"] for r in reports)
    return tables, {"n_reports": len(reports), "worst_mismatch": worst}


def _status_counts(manifest) -> dict:
    counts: dict[str, int] = {}
    for entry in manifest:
        counts[entry["status"]] = counts.get(entry["status"], 0) + 1
    return counts


_RUNNERS = {
    "level_stats": _run_level_stats,
    "chain_dynamics": _run_chain_dynamics,
    "qp_occupation": _run_qp_occupation,
    "qp_potential": _run_qp_potential,
    "duality": _run_duality,
}


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    runner = _RUNNERS.get(config.kind)
    if runner is None:
        raise ParameterError(f"unknown experiment kind {config.kind!r}")
    tables, extra = runner(config, workers)
    manifest = {
        "preset": config.preset,
        "kind": config.kind,
        "package_version": __version__,
        "config": asdict(config),
        **extra,
    }
    return ExperimentResult(config=config, tables=tuple(tables), manifest=manifest)


def run_preset(name: str, workers: int | None = None, **overrides) -> ExperimentResult:
    return run_experiment(apply_overrides(preset_config(name), **overrides), workers)
