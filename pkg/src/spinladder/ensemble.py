"""Disorder sampling and deterministic parallel ensemble execution.

Every disorder sample is a pure function of (master_seed, sample_index):
field values come from a counter-based generator keyed per site, so any
sample can be reconstructed in isolation on any platform.  Aggregation
stacks per-sample arrays in sample order before reducing, making results
independent of worker scheduling; each sample runs under a single BLAS
thread so serial and parallel runs agree bit for bit.
"""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import EnsembleError, ParameterError

WORKERS_ENV = "SPINLADDER_WORKERS"


@dataclass(frozen=True)
class DisorderModel:
    """Field ensemble: uniform box of width D, or a site-independent constant."""

    kind: str
    master_seed: int
    n_samples: int
    D: float | None = None
    h: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform_box", "constant"):
            raise ParameterError(f"unknown disorder kind {self.kind!r}")
        if self.n_samples < 1:
            raise ParameterError("n_samples must be >= 1")
        if self.kind == "uniform_box":
            if self.D is None or self.D < 0:
                raise ParameterError("uniform_box needs D >= 0")
        elif self.h is None:
            raise ParameterError("constant fields need the value h")


def _site_key(master_seed: int, sample_index: int, site: int) -> np.ndarray:
    lo = (np.uint64(sample_index) << np.uint64(32)) ^ np.uint64(site)
    return np.array([np.uint64(master_seed), lo], dtype=np.uint64)


def draw_fields(model: DisorderModel, sample_index: int, n_fields: int) -> np.ndarray:
    """Deterministic per-sample field values h_i, one generator per site."""
    if not 0 <= sample_index < model.n_samples:
        raise ParameterError(f"sample index {sample_index} out of range")
    if model.kind == "constant":
        return np.full(n_fields, model.h, dtype=float)
    if model.D == 0.0:
        return np.zeros(n_fields)
    half = model.D / 2.0
    out = np.empty(n_fields)
    for site in range(n_fields):
        gen = np.random.Generator(
            np.random.Philox(key=_site_key(model.master_seed, sample_index, site))
        )
        out[site] = gen.uniform(-half, half)
    return out


@dataclass(frozen=True)
class EnsembleResult:
    """Disorder-averaged arrays with standard errors and the run manifest."""

    means: dict[str, np.ndarray] = field(repr=False)
    stderrs: dict[str, np.ndarray] = field(repr=False)
    n_samples: int = 0
    sample_status: tuple[dict, ...] = ()
    samples: dict[str, np.ndarray] | None = field(default=None, repr=False)


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_limited(task: Callable[[int], dict], index: int) -> dict:
    with threadpool_limits(limits=1):
        return task(index)


def run_ensemble(
    task: Callable[[int], dict],
    n_samples: int,
    workers: int | None = None,
    store_samples: bool = False,
    completed: dict[int, dict] | None = None,
) -> EnsembleResult:
    """Run ``task(sample_index)`` for every sample and aggregate the arrays.

    ``task`` must be picklable (a module-level function or a partial of one)
    and return a dict of equally-shaped-per-key float arrays.  Failed samples
    are retried once; a second failure aborts with the status manifest.
    ``completed`` allows resuming: indices present there are not recomputed.
    """
    workers = resolve_workers(workers)
    results: dict[int, dict] = dict(completed or {})
    status = {i: "resumed" for i in results}
    pending = [i for i in range(n_samples) if i not in results]

    failures: dict[int, str] = {}
    if workers == 1 or len(pending) <= 1:
        for i in pending:
            try:
                results[i] = _run_limited(task, i)
                status[i] = "ok"
            except Exception as exc:  # retry once
                try:
                    results[i] = _run_limited(task, i)
                    status[i] = "retried"
                except Exception:
                    failures[i] = repr(exc)
                    status[i] = "failed"
    else:
        # fork where available and safe (Linux main thread); spawn when called
        # from a service worker thread -- tasks are module-level either way
        import threading

        methods = multiprocessing.get_all_start_methods()
        use_fork = (
            "fork" in methods
            and threading.current_thread() is threading.main_thread()
        )
        ctx = multiprocessing.get_context("fork" if use_fork else "spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = {i: pool.submit(_run_limited, task, i) for i in pending}
            retry = []
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                    status[i] = "ok"
                except Exception as exc:
                    retry.append((i, repr(exc)))
            for i, err in retry:
                try:
                    results[i] = pool.submit(_run_limited, task, i).result()
                    status[i] = "retried"
                except Exception:
                    failures[i] = err
                    status[i] = "failed"

    manifest = tuple(
        {"index": i, "status": status.get(i, "missing"), "error": failures.get(i)}
        for i in range(n_samples)
    )
    if failures:
        raise EnsembleError(
            f"{len(failures)} samples failed twice; aborting", manifest=manifest
        )

    keys = list(results[0])
    stacked = {
        k: np.stack([np.asarray(results[i][k], dtype=float) for i in range(n_samples)])
        for k in keys
    }
    means = {k: v.mean(axis=0) for k, v in stacked.items()}
    if n_samples > 1:
        stderrs = {
            k: v.std(axis=0, ddof=1) / np.sqrt(n_samples) for k, v in stacked.items()
        }
    else:
        stderrs = {k: np.zeros_like(means[k]) for k in keys}
    return EnsembleResult(
        means=means,
        stderrs=stderrs,
        n_samples=n_samples,
        sample_status=manifest,
        samples=stacked if store_samples else None,
    )
