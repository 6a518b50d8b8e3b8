"""Exact diagonalization of a disordered two-leg Ising ladder and its dual chain.

Core entry points:

* :mod:`spinladder.basis` -- symmetry sectors and the paired-site encoding
* :mod:`spinladder.hamiltonians` -- dense matrices for all model variants
* :mod:`spinladder.duality` -- ladder/chain spectral-equivalence checks
* :mod:`spinladder.spectra` -- eigensolver wrapper and gap-ratio statistics
* :mod:`spinladder.dynamics` -- quench evolution and observables
* :mod:`spinladder.rotframe` -- rotating-frame effective quasiparticle analysis
* :mod:`spinladder.ensemble` -- seeded disorder ensembles, parallel execution
* :mod:`spinladder.experiments` -- named presets behind the CLI and service
"""

__version__ = "0.1.0"

from .basis import SpinBasis, SymmetrySector, enumerate_sector, neel_state
from .duality import DualityReport, verify_duality
from .dynamics import ObservableSeries, TimeGrid, evolve_expectations
from .ensemble import DisorderModel, EnsembleResult, draw_fields, run_ensemble
from .errors import (
    EnsembleError,
    NumericsError,
    ParameterError,
    ResourceLimitError,
    SpinLadderError,
    StepSizeError,
    UnsupportedModelError,
)
from .experiments import preset_config, preset_names, run_experiment, run_preset
from .hamiltonians import (
    ThreeLevelBasis,
    DenseHamiltonian,
    HamiltonianSpec,
    three_level_spec,
    build_three_level,
    build_chain,
    build_ladder,
    build_vacuum_h0,
    chain_spec,
    ladder_spec,
    vacuum_spec,
)
from .spectra import (
    R_GOE,
    R_POISSON,
    GapRatioSample,
    SpectralDecomposition,
    diagonalize,
    gap_ratios,
    mean_gap_ratio,
)

__all__ = [
    "__version__",
    "SpinBasis",
    "SymmetrySector",
    "enumerate_sector",
    "neel_state",
    "DualityReport",
    "verify_duality",
    "ObservableSeries",
    "TimeGrid",
    "evolve_expectations",
    "DisorderModel",
    "EnsembleResult",
    "draw_fields",
    "run_ensemble",
    "SpinLadderError",
    "ParameterError",
    "UnsupportedModelError",
    "ResourceLimitError",
    "NumericsError",
    "StepSizeError",
    "EnsembleError",
    "preset_config",
    "preset_names",
    "run_experiment",
    "run_preset",
    "HamiltonianSpec",
    "DenseHamiltonian",
    "ThreeLevelBasis",
    "chain_spec",
    "ladder_spec",
    "vacuum_spec",
    "three_level_spec",
    "build_chain",
    "build_ladder",
    "build_vacuum_h0",
    "build_three_level",
    "R_GOE",
    "R_POISSON",
    "GapRatioSample",
    "SpectralDecomposition",
    "diagonalize",
    "gap_ratios",
    "mean_gap_ratio",
]
