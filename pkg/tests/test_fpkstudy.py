"""Experiment registry and suite runner: parameter resolution, bundle
layout, failure recording, reproducibility."""

import json

import numpy as np
import pytest

from markovlab.fpkstudy import (
    EXPERIMENTS,
    ExperimentSuite,
    dichotomy_study,
    list_experiments,
    resolve_params,
    run_experiment,
    run_suite,
)
from markovlab.tables import read_csv

REGISTRY_ORDER = [
    "dichotomy_study",
    "kernel_conditions",
    "mixed_convergence",
    "generator_consistency",
    "domain_criterion",
    "resolvent_euler",
    "fpk_residual",
    "mehler_fourier",
    "mehler_truncation",
    "lescot_generator",
    "hjb_hopf_cole",
    "convex_semigroup",
    "viscosity",
]


def test_registry_order_is_frozen():
    assert [name for name, _ in list_experiments()] == REGISTRY_ORDER
    assert all(desc for _, desc in list_experiments())


def test_registry_model_kinds():
    kinds = {name: spec.model_kind for name, spec in EXPERIMENTS.items()}
    assert kinds["dichotomy_study"] == "sde"
    assert kinds["kernel_conditions"] == "kernel"
    assert kinds["mehler_fourier"] == "mehler"
    assert kinds["viscosity"] == "control"


def test_resolve_params_merges_and_validates():
    p = resolve_params("dichotomy_study", {"a": 2.0})
    assert p["a"] == 2.0
    assert p["sigma"] == 1.0  # untouched default
    with pytest.raises(ValueError, match="unknown experiment"):
        resolve_params("nonsense")
    with pytest.raises(ValueError, match="unknown parameter keys"):
        resolve_params("dichotomy_study", {"a": 1.0, "bogus": 2, "also_bogus": 3})


def test_dichotomy_study_rows():
    rows = dichotomy_study(t_ladder=(0.5, 0.1))
    assert len(rows) == 2
    ts = [r[0] for r in rows]
    assert ts == [0.5, 0.1]
    # near-field deviation shrinks with t, far-field stays pinned
    assert rows[1][1] < rows[0][1]
    assert min(r[2] for r in rows) > 0.9


def test_run_experiment_returns_tables():
    res = run_experiment("mehler_truncation")
    assert res.passed
    assert "gaps" in res.tables
    header, rows = res.tables["gaps"]
    assert header == ["eps", "sup_gap"]
    assert len(rows) == 3


def test_run_suite_writes_bundle(tmp_path):
    out = tmp_path / "bundle"
    suite = ExperimentSuite(
        name="smoke",
        out_dir=str(out),
        master_seed=3,
        experiments=(("dichotomy_study", {}), ("mehler_truncation", {})),
    )
    manifest = run_suite(suite)
    assert manifest["suite"] == "smoke"
    assert manifest["seed"] == 3
    assert {r["name"] for r in manifest["experiments"]} == {"dichotomy_study", "mehler_truncation"}
    assert (out / "manifest.json").exists()
    assert (out / "dichotomy_study__ladder.csv").exists()
    assert (out / "mehler_truncation__gaps.csv").exists()
    header, rows = read_csv(out / "dichotomy_study__ladder.csv")
    assert header == ["t", "compact_sup", "far_sup"]
    assert len(rows) == 4
    on_disk = json.loads((out / "manifest.json").read_text())
    # tuples in memory serialize as lists; compare post round-trip
    assert on_disk == json.loads(json.dumps(manifest))


def test_run_suite_records_runtime_errors(tmp_path):
    out = tmp_path / "errs"
    suite = ExperimentSuite(
        name="one-bad",
        out_dir=str(out),
        experiments=(
            ("resolvent_euler", {"lam": 0.0}),  # refused by the quadrature
            ("mehler_truncation", {}),
        ),
    )
    manifest = run_suite(suite)
    bad, good = manifest["experiments"]
    assert bad["name"] == "resolvent_euler"
    assert not bad["pass"]
    assert bad["error"].startswith("ValueError")
    # the suite keeps going after a failure
    assert good["pass"]
    assert (out / "mehler_truncation__gaps.csv").exists()
    assert not list(out.glob("resolvent_euler__*.csv"))


def test_run_suite_validates_before_writing(tmp_path):
    out = tmp_path / "never"
    dup = ExperimentSuite("dup", str(out),
                          experiments=(("mehler_truncation", {}), ("mehler_truncation", {})))
    with pytest.raises(ValueError, match="duplicate experiment names"):
        run_suite(dup)
    bad = ExperimentSuite("bad", str(out),
                          experiments=(("mehler_truncation", {"bogus": 1}),))
    with pytest.raises(ValueError, match="unknown parameter keys"):
        run_suite(bad)
    assert not out.exists()


def test_run_suite_empty(tmp_path):
    out = tmp_path / "empty"
    manifest = run_suite(ExperimentSuite("empty", str(out)))
    assert manifest["experiments"] == []
    assert (out / "manifest.json").exists()


def test_suite_reruns_are_byte_identical(tmp_path):
    """Same seed, fresh directory: every output file matches byte for byte."""
    def bundle(d):
        suite = ExperimentSuite(
            name="repeat", out_dir=str(d), master_seed=5,
            experiments=(("dichotomy_study", {}), ("mehler_truncation", {})),
        )
        run_suite(suite)
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    a = bundle(tmp_path / "a")
    b = bundle(tmp_path / "b")
    assert a == b
