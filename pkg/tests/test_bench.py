"""Harness tests: estimator calibration, grid semantics, CSV stability."""

import math

import numpy as np
import pytest

from reckit.bench import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRow,
    knn_kl_estimate,
    mixture_pair,
    rows_to_csv,
    run_bias_grid,
    run_mode_sweep,
    run_runtime_grid,
    summarize_rows,
    verify_shrinkage,
    write_rows,
)
from reckit.errors import DomainError
from reckit.tree import PartitionKind

GOLDEN_HEADER = (
    "algorithm,family,d_kl_nats,d_inf_nats,n_modes,t_extra_bits,"
    "trial_index,steps,depth,payload_bits,kl_bias_estimate,error"
)


def small_config(**kw) -> ExperimentConfig:
    base = dict(algorithms=("as", "ad", "pfr"), trials=20, seed=20260817,
                gaussian_cells=((0.5, 1.0),))
    base.update(kw)
    return ExperimentConfig(**base)


# ------------------------------------------------------------- estimator

def test_knn_guards():
    x = [0.1, 0.2, 0.3, 0.4]
    with pytest.raises(DomainError):
        knn_kl_estimate(x, x, k=0)
    with pytest.raises(DomainError):
        knn_kl_estimate(x, x, k=3)  # k = n - 1 leaves no self-excluded kNN
    with pytest.raises(DomainError):
        knn_kl_estimate([0.1, 0.2], x, k=1)
    with pytest.raises(DomainError):
        knn_kl_estimate(x, [0.5], k=1)


def test_knn_duplicate_jitter_warns():
    rng = np.random.default_rng(1)
    x = rng.normal(size=50)
    x[7] = x[3]  # exact tie
    with pytest.warns(UserWarning, match="jitter"):
        est = knn_kl_estimate(x, rng.normal(size=50))
    assert math.isfinite(est)


def test_knn_null_calibration():
    rng = np.random.default_rng(42)
    estimates = [
        knn_kl_estimate(rng.normal(size=1000), rng.normal(size=1000))
        for _ in range(100)
    ]
    assert abs(float(np.mean(estimates))) < 0.05


def test_knn_shift_calibration():
    rng = np.random.default_rng(7)
    for kl in (0.0, 0.25, 0.5, 1.0):
        shift = math.sqrt(2.0 * kl)
        estimates = [
            knn_kl_estimate(rng.normal(shift, 1.0, size=5000),
                            rng.normal(0.0, 1.0, size=5000))
            for _ in range(100)
        ]
        assert float(np.mean(estimates)) == pytest.approx(kl, abs=0.1)


def test_knn_higher_k():
    rng = np.random.default_rng(3)
    est = knn_kl_estimate(rng.normal(1.0, 1.0, 3000), rng.normal(0.0, 1.0, 3000), k=5)
    assert est == pytest.approx(0.5, abs=0.15)


# ------------------------------------------------------------------ config

def test_config_validation():
    with pytest.raises(DomainError):
        small_config(trials=0)
    with pytest.raises(DomainError):
        ExperimentConfig(algorithms=("as",), trials=5, seed=1)  # no cells
    with pytest.raises(DomainError):
        small_config(algorithms=("as", "bogus"))


def test_config_from_json():
    text = """{
        "algorithms": ["ad", "pfr"],
        "trials": 12,
        "seed": 99,
        "gaussian_cells": [{"kl_nats": 0.5, "dinf_nats": 1.0}],
        "uniform_cells": [{"kl_nats": 0.25}],
        "mixture_cells": [{"n_modes": 2, "dinf_nats": 0.7}],
        "extra_bits": [0, 2],
        "batch": 64
    }"""
    config = ExperimentConfig.from_json(text)
    assert config.algorithms == ("ad", "pfr")
    assert config.gaussian_cells == ((0.5, 1.0),)
    assert config.uniform_cells == (0.25,)
    assert config.mixture_cells == ((2, 0.7),)
    assert config.extra_bits == (0, 2)
    assert config.batch == 64 and config.repeats == 50
    with pytest.raises(DomainError):
        ExperimentConfig.from_json('{"seed": 1}')  # trials missing
    with pytest.raises(DomainError):
        ExperimentConfig.from_json('{"trials": "many", "seed": 1}')


def test_mixture_pair_properties():
    pair = mixture_pair(4, 1.0)
    assert pair.analytic_dinf() == pytest.approx(1.0, abs=1e-12)
    assert pair.analytic_kl() == pytest.approx(1.0, abs=1e-12)
    assert len(pair.target.components) == 4
    with pytest.raises(DomainError):
        mixture_pair(0, 1.0)
    with pytest.raises(DomainError):
        mixture_pair(2, 0.0)


# ------------------------------------------------------------- runtime grid

def test_runtime_grid_identity_cell_takes_one_step():
    rows = run_runtime_grid(small_config(gaussian_cells=((0.0, 0.0),), trials=50))
    assert len(rows) == 150
    for row in rows:
        assert row.error is None
        assert row.steps == 1
        assert row.depth == 1 and row.payload_bits == 1


def test_runtime_grid_csv_deterministic():
    config = small_config()
    first = rows_to_csv(run_runtime_grid(config))
    second = rows_to_csv(run_runtime_grid(config))
    assert first == second
    assert first.splitlines()[0] == GOLDEN_HEADER
    assert len(first.splitlines()) == 1 + 3 * 20


def test_runtime_grid_pfr_near_expected_arrivals():
    dinf = math.log(4.0)
    config = ExperimentConfig(
        algorithms=("pfr",), trials=1000, seed=11,
        gaussian_cells=((0.6, dinf),),
    )
    rows = run_runtime_grid(config)
    mean_steps = float(np.mean([r.steps for r in rows]))
    assert 2.0 <= mean_steps <= 8.0  # within factor 2 of e^dinf = 4


def test_runtime_grid_error_rows_on_step_budget():
    config = small_config(gaussian_cells=((1.5, 3.0),), algorithms=("as",),
                          trials=30, max_steps=1)
    rows = run_runtime_grid(config)
    errors = [r for r in rows if r.error is not None]
    assert errors and all(r.steps is None for r in errors)
    assert "exceeded" in errors[0].error
    assert "exceeded" in rows_to_csv(rows)


def test_runtime_grid_skips_intractable_pfr():
    config = small_config(gaussian_cells=((1.0, 8.0),), trials=5)
    rows = run_runtime_grid(config)
    assert {r.algorithm for r in rows} == {"as", "ad"}
    assert len(rows) == 10


def test_runtime_grid_ignores_depth_limited_algorithms():
    config = small_config(algorithms=("ad", "dad", "mrc"), trials=4)
    rows = run_runtime_grid(config)
    assert {r.algorithm for r in rows} == {"ad"}


# --------------------------------------------------------------- mode sweep

def test_mode_sweep_shared_dinf():
    config = ExperimentConfig(
        algorithms=("ad",), trials=10, seed=5,
        mixture_cells=((1, 0.7), (2, 0.7), (4, 0.7)),
    )
    rows = run_mode_sweep(config)
    assert len(rows) == 30
    assert {r.n_modes for r in rows} == {1, 2, 4}
    assert all(r.family == "uniform_mixture" for r in rows)
    assert all(r.d_inf_nats == 0.7 for r in rows)


def test_mode_sweep_rejects_mixed_dinf():
    config = ExperimentConfig(
        algorithms=("ad",), trials=5, seed=5,
        mixture_cells=((1, 0.7), (2, 0.8)),
    )
    with pytest.raises(DomainError):
        run_mode_sweep(config)
    with pytest.raises(DomainError):
        run_mode_sweep(small_config())  # no mixture cells


# ---------------------------------------------------------------- bias grid

def test_bias_grid_shape_and_budgets():
    config = ExperimentConfig(
        algorithms=("dad", "mrc"), trials=1, seed=3,
        gaussian_cells=((1.0, 2.0),), extra_bits=(0, 3), repeats=3, batch=40,
    )
    rows = run_bias_grid(config)
    assert len(rows) == 12  # 1 cell x 2 t x 2 algorithms x 3 repeats
    base_bits = math.ceil(1.0 / math.log(2.0))
    for row in rows:
        assert row.error is None
        assert row.depth == row.payload_bits == base_bits + row.t_extra_bits
        assert math.isfinite(row.kl_bias_estimate)
    mrc = [r for r in rows if r.algorithm == "mrc" and r.t_extra_bits == 3]
    dad = [r for r in rows if r.algorithm == "dad" and r.t_extra_bits == 3]
    for r in mrc:
        assert r.steps == float(1 << (base_bits + 3))  # MRC always scans 2^D
    assert np.mean([r.steps for r in dad]) < np.mean([r.steps for r in mrc])


def test_bias_grid_deterministic():
    config = ExperimentConfig(
        algorithms=("dad",), trials=1, seed=8,
        gaussian_cells=((0.7, 1.4),), extra_bits=(1,), repeats=2, batch=30,
    )
    assert rows_to_csv(run_bias_grid(config)) == rows_to_csv(run_bias_grid(config))


# ---------------------------------------------------------------- shrinkage

def test_shrinkage_dyadic_exact():
    report = verify_shrinkage(PartitionKind.DYADIC, depth_max=5, trials=50)
    assert report.passed
    assert report.depths == (1, 2, 3, 4, 5)
    assert report.mean_mass == (1.0, 0.5, 0.25, 0.125, 0.0625)
    assert report.bounds == report.mean_mass


def test_shrinkage_global_bound_never_shrinks():
    report = verify_shrinkage(PartitionKind.GLOBAL_BOUND, depth_max=4, trials=30)
    assert report.passed
    assert report.mean_mass == (1.0, 1.0, 1.0, 1.0)


def test_shrinkage_sample_split_rate():
    report = verify_shrinkage(PartitionKind.SAMPLE_SPLIT, depth_max=8, trials=400)
    assert report.passed
    for d, mean, bound in zip(report.depths, report.mean_mass, report.bounds):
        assert mean <= bound
        assert bound == pytest.approx(0.75 ** (d - 1), rel=0.2)
    with pytest.raises(DomainError):
        verify_shrinkage(PartitionKind.DYADIC, trials=0)


# ---------------------------------------------------------------------- CSV

def test_summarize_rows():
    rows = [
        ResultRow("ad", "gaussian", 1.0, 2.0, trial_index=i, steps=s,
                  payload_bits=3, kl_bias_estimate=0.1 * i)
        for i, s in enumerate((1.0, 2.0, 3.0, 4.0))
    ]
    rows.append(ResultRow("ad", "gaussian", 1.0, 2.0, trial_index=9, error="boom"))
    (entry,) = summarize_rows(rows)
    assert entry["trials"] == 4  # the error row is excluded
    assert entry["steps_mean"] == 2.5
    assert entry["steps_q1"] == 1.75
    assert entry["steps_median"] == 2.5
    assert entry["steps_q3"] == 3.25
    assert entry["payload_bits_mean"] == 3.0
    assert entry["bias_mean"] == pytest.approx(0.15)
    assert entry["bias_se"] > 0.0


def test_write_rows(tmp_path):
    rows = run_runtime_grid(small_config(trials=3))
    path = tmp_path / "out.csv"
    write_rows(rows, str(path))
    assert path.read_text() == rows_to_csv(rows)
    assert path.read_text().startswith(GOLDEN_HEADER + "\n")
