import numpy as np
import pytest

from spinladder.ensemble import (
    DisorderModel,
    draw_fields,
    resolve_workers,
    run_ensemble,
)
from spinladder.errors import EnsembleError, ParameterError

# module-level tasks so worker processes can unpickle them


def noise_task(index):
    rng = np.random.Generator(np.random.Philox(key=np.array([99, index], dtype=np.uint64)))
    return {"x": rng.standard_normal(16)}


def failing_task(index):
    if index == 3:
        raise RuntimeError("sample 3 is cursed")
    return {"x": np.ones(2) * index}


_flaky_dir = {}


def flaky_once_task(index):
    import os

    flag = _flaky_dir["path"] / f"flag{index}"
    if index == 2 and not flag.exists():
        flag.write_text("tried")
        raise RuntimeError("transient")
    return {"x": np.array([float(index)])}


class TestDrawFields:
    def test_zero_width_box(self):
        model = DisorderModel("uniform_box", master_seed=1, n_samples=4, D=0.0)
        assert np.array_equal(draw_fields(model, 0, 6), np.zeros(6))

    def test_constant_fields(self):
        model = DisorderModel("constant", master_seed=1, n_samples=1, h=0.37)
        assert np.array_equal(draw_fields(model, 0, 5), np.full(5, 0.37))

    def test_determinism(self):
        model = DisorderModel("uniform_box", master_seed=42, n_samples=10, D=2.0)
        a = draw_fields(model, 7, 8)
        b = draw_fields(model, 7, 8)
        assert np.array_equal(a, b)
        c = draw_fields(model, 6, 8)
        assert not np.array_equal(a, c)

    def test_box_moments(self):
        model = DisorderModel("uniform_box", master_seed=5, n_samples=20000, D=1.0)
        values = np.concatenate(
            [draw_fields(model, i, 6) for i in range(20000)]
        )
        assert abs(values.mean()) < 0.005
        assert abs(values.var() - 1.0 / 12.0) < 0.002
        assert values.min() >= -0.5 and values.max() <= 0.5

    def test_validation(self):
        with pytest.raises(ParameterError):
            DisorderModel("gaussian", master_seed=0, n_samples=1, D=1.0)
        with pytest.raises(ParameterError):
            DisorderModel("uniform_box", master_seed=0, n_samples=0, D=1.0)
        with pytest.raises(ParameterError):
            DisorderModel("uniform_box", master_seed=0, n_samples=2, D=-1.0)
        model = DisorderModel("uniform_box", master_seed=0, n_samples=2, D=1.0)
        with pytest.raises(ParameterError):
            draw_fields(model, 5, 4)


class TestRunEnsemble:
    def test_single_sample(self):
        result = run_ensemble(noise_task, 1, workers=1)
        assert result.n_samples == 1
        assert np.array_equal(result.stderrs["x"], np.zeros(16))
        assert np.array_equal(result.means["x"], noise_task(0)["x"])

    def test_clt_scaling(self):
        r1 = run_ensemble(noise_task, 200, workers=1)
        r2 = run_ensemble(noise_task, 800, workers=1)
        ratio = np.mean(r1.stderrs["x"]) / np.mean(r2.stderrs["x"])
        assert 1.6 < ratio < 2.4  # stderr ~ 1/sqrt(n)

    def test_serial_and_parallel_agree_bitwise(self):
        serial = run_ensemble(noise_task, 12, workers=1)
        parallel = run_ensemble(noise_task, 12, workers=4)
        assert np.array_equal(serial.means["x"], parallel.means["x"])
        assert np.array_equal(serial.stderrs["x"], parallel.stderrs["x"])

    def test_parallel_physics_sample_matches_serial(self):
        # end-to-end check on a real observable task
        from functools import partial

        from spinladder.dynamics import TimeGrid
        from spinladder.experiments import _chain_dynamics_task

        grid = TimeGrid.log_spaced(0.1, 10.0, 4)
        task = partial(
            _chain_dynamics_task,
            L=8,
            J=1.0,
            g=1.0,
            boundary="open",
            disorder_kind="uniform_box",
            strength=0.5,
            master_seed=3,
            n_samples=6,
            times=grid.times,
            observables=("entropy",),
        )
        serial = run_ensemble(task, 6, workers=1)
        parallel = run_ensemble(task, 6, workers=2)
        assert np.array_equal(serial.means["entropy"], parallel.means["entropy"])

    def test_persistent_failure_aborts_with_manifest(self):
        with pytest.raises(EnsembleError) as err:
            run_ensemble(failing_task, 5, workers=1)
        manifest = err.value.manifest
        assert [e["status"] for e in manifest] == ["ok", "ok", "ok", "failed", "ok"]

    def test_transient_failure_is_retried(self, tmp_path):
        _flaky_dir["path"] = tmp_path
        result = run_ensemble(flaky_once_task, 4, workers=1)
        assert [e["status"] for e in result.sample_status] == [
            "ok",
            "ok",
            "retried",
            "ok",
        ]
        assert np.isclose(result.means["x"][0], np.mean([0, 1, 2, 3]))

    def test_resume_from_completed_matches_full_run(self):
        full = run_ensemble(noise_task, 10, workers=1)
        first = {i: noise_task(i) for i in range(4)}
        resumed = run_ensemble(noise_task, 10, workers=1, completed=first)
        assert np.array_equal(full.means["x"], resumed.means["x"])
        assert np.array_equal(full.stderrs["x"], resumed.stderrs["x"])
        statuses = [e["status"] for e in resumed.sample_status]
        assert statuses[:4] == ["resumed"] * 4 and statuses[4:] == ["ok"] * 6

    def test_store_samples(self):
        result = run_ensemble(noise_task, 3, workers=1, store_samples=True)
        assert result.samples["x"].shape == (3, 16)


def test_resolve_workers(monkeypatch):
    assert resolve_workers(3) == 3
    monkeypatch.setenv("SPINLADDER_WORKERS", "5")
    assert resolve_workers(None) == 5
    monkeypatch.delenv("SPINLADDER_WORKERS")
    assert resolve_workers(None) >= 1
