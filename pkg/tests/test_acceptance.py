"""Acceptance gate: every experiment in the registry at its shipped
defaults, asserted at the stated tolerances, with wall-clock guards.

Each test re-asserts the numeric gates on the emitted metrics instead of
trusting the experiment's own pass flag alone, so a silently weakened
gate in the registry would still fail here.
"""

import time

from markovlab.fpkstudy import ExperimentSuite, run_experiment, run_suite


def _timed(name, budget_s, overrides=None):
    t0 = time.monotonic()
    res = run_experiment(name, overrides)
    elapsed = time.monotonic() - t0
    assert elapsed < budget_s, f"{name} took {elapsed:.1f}s, budget {budget_s}s"
    return res


def test_dichotomy_compact_vs_far():
    res = _timed("dichotomy_study", 10.0)
    assert res.passed
    assert res.metrics["compact_final"] < 0.05
    assert res.metrics["compact_monotone"]
    assert res.metrics["far_min"] >= 0.9
    assert res.metrics["image_gap"] <= 1e-9


def test_kernel_condition_fingerprints():
    res = _timed("kernel_conditions", 30.0)
    assert res.passed
    header, rows = res.tables["flags"]
    got = {r[0]: (r[3], r[4], r[5]) for r in rows}
    assert got["ou-gauss"] == (True, True, True)
    assert got["ou-gauss-alt"] == (True, True, True)
    # the jump family fails exactly the continuity condition
    assert got["unit-jump"] == (True, True, False)
    # the escaping-mass family fails exactly the tightness condition
    assert got["mass-escape"] == (True, False, True)


def test_sequential_convergence_flags():
    res = _timed("mixed_convergence", 30.0)
    assert res.passed
    assert res.metrics["flat_verdict"] == "converges"
    assert res.metrics["runaway_verdict"] == "diverges"
    assert res.metrics["oscillating_verdict"] == "diverges"


def test_generator_two_route_agreement():
    res = _timed("generator_consistency", 30.0)
    assert res.passed
    assert res.metrics["worst_abs_err"] <= 1e-2
    assert not res.metrics["any_inconclusive"]


def test_domain_evidence_switches_with_weight():
    res = _timed("domain_criterion", 60.0)
    assert res.passed
    assert res.metrics["unit_verdict"] == "out-of-domain-evidence"
    assert res.metrics["poly_verdict"] == "in-domain-evidence"
    assert res.metrics["limit_gap"] <= 1e-6


def test_resolvent_value_and_euler_order():
    res = _timed("resolvent_euler", 60.0)
    assert res.passed
    assert res.metrics["resolvent_x_err"] <= 1e-6
    assert res.metrics["identity_residual"] <= 1e-8
    assert res.metrics["euler_err_at_100"] < 0.006
    assert 1.7 <= res.metrics["euler_ratio_min"]
    assert res.metrics["euler_ratio_max"] <= 2.3


def test_forward_equation_residuals():
    res = _timed("fpk_residual", 120.0)
    assert res.passed
    m = res.metrics
    assert m["ou_residual"] <= m["ou_budget"]
    assert m["double_well_residual"] <= m["double_well_budget"]
    # negated drift must blow past ten times the healthy budget
    assert m["negated_floor"] == 10.0 * m["ou_budget"]
    assert m["negated_residual"] > m["negated_floor"]


def test_fourier_side_semigroup():
    res = _timed("mehler_fourier", 120.0)
    assert res.passed
    assert res.metrics["charfn_gap"] <= 1e-10
    assert res.metrics["flow_gap"] <= 1e-8
    assert res.metrics["ks"] <= 0.02
    assert abs(res.metrics["fft_mass_gap"]) <= 1e-6


def test_truncation_gaps_strictly_decrease():
    res = _timed("mehler_truncation", 60.0)
    assert res.passed
    gaps = res.metrics["gaps"]
    assert gaps[0] > gaps[1] > gaps[2] > 0.0
    assert res.metrics["strictly_decreasing"]


def test_spectral_generator_agreement():
    res = _timed("lescot_generator", 60.0)
    assert res.passed
    assert res.metrics["worst_vs_operator"] <= 1e-8
    assert res.metrics["worst_vs_fd"] <= 1e-2


def test_transform_oracle_agreement():
    res = _timed("hjb_hopf_cole", 300.0)
    assert res.passed
    assert res.metrics["worst_abs_err"] <= 5e-3


def test_convex_semigroup_structure():
    res = _timed("convex_semigroup", 300.0)
    assert res.passed
    header, rows = res.tables["checks"]
    checks = {r[0]: (r[1], r[2], r[3]) for r in rows}
    assert all(ok for _, _, ok in checks.values())
    value, gate, _ = checks["heat_oracle_gap"]
    assert value <= gate
    assert checks["constant_gap"][0] == 0.0
    assert checks["convexity_margin"][0] >= -1e-9
    assert checks["monotone_margin"][0] >= -1e-9
    assert checks["dp_two_stage"][0] <= 1e-2
    assert checks["dp_zero_stage"][0] == 0.0


def test_viscosity_harness():
    res = _timed("viscosity", 300.0)
    assert res.passed
    assert res.metrics["n_violations"] == 0
    assert res.metrics["n_run"] >= res.params["n_tests"] // 2
    assert res.metrics["counterexample_residual"] >= res.metrics["counterexample_floor"]


def test_suite_bundles_are_byte_identical(tmp_path):
    """Rerunning a suite that includes Monte Carlo content reproduces every
    output file exactly."""
    experiments = (
        ("dichotomy_study", {}),
        ("mehler_fourier", {"n_mc": 20_000}),
        ("mehler_truncation", {}),
    )

    def bundle(d):
        run_suite(ExperimentSuite("identical", str(d), master_seed=7, experiments=experiments))
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    a = bundle(tmp_path / "a")
    b = bundle(tmp_path / "b")
    assert set(a) == set(b)
    for name in a:
        assert a[name] == b[name], f"{name} differs between reruns"
