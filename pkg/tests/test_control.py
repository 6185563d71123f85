"""Convex dynamic-programming semigroup: scheme invariants, oracles,
convexity/monotonicity margins, and the touching-function harness."""

import math

import numpy as np
import pytest

from markovlab.control import (
    ControlProblem,
    convexity_monotonicity_check,
    dp_semigroup,
    dynamic_programming_check,
    frozen_value_field,
    heat_oracle,
    heat_problem,
    hjb_generator,
    hopf_cole_oracle,
    quadratic_control_problem,
    viscosity_test,
)
from markovlab.statespace import (
    Grid,
    RngPolicy,
    ScalarField,
    TailEnvelope,
    constant_field,
    cos_field,
    gaussian_field,
)

FROZEN_CONST = 0.7368421052631579


def test_quadratic_problem_shape():
    prob = quadratic_control_problem(1.0, 4.0, 41)
    assert 0.0 in prob.controls
    assert len(prob.controls) == 41
    assert prob.cost(2.0) == 2.0
    # dual of a^2/2 on a grid containing y itself: y^2/2
    assert prob.dual_bound(1.0) == pytest.approx(0.5, abs=1e-12)


def test_quadratic_problem_rejects_even_grid():
    with pytest.raises(ValueError, match="odd number of controls"):
        quadratic_control_problem(1.0, 4.0, 40)


def test_dp_initial_slice_is_exact():
    grid = Grid.regular(-4.0, 4.0, 0.05)
    vf = dp_semigroup(heat_problem(1.0), cos_field(), 0.1, grid)
    nodes = grid.node_points()
    assert np.array_equal(vf.values[0], np.cos(nodes[:, 0]))
    assert vf.cfl_ratio == pytest.approx(1.0 / 3.0)


def test_dp_heat_reduction_matches_closed_form():
    # singleton zero control: pure heat flow; frozen e^{-t/2} cos(0.3)
    grid = Grid.regular(-6.0, 6.0, 0.01)
    vf = dp_semigroup(heat_problem(1.0), cos_field(), 0.25, grid)
    assert abs(vf.final_field(0.3) - 0.8430814925793894) <= 1e-10


def test_dp_preserves_constants_exactly():
    vf = dp_semigroup(
        quadratic_control_problem(1.0, 4.0, 41),
        constant_field(FROZEN_CONST),
        0.25,
        Grid.regular(-6.0, 6.0, 0.02),
    )
    assert vf.final_field(0.5) == FROZEN_CONST


def test_dp_rejects_multidim_grid():
    grid = Grid.regular(-1.0, 1.0, 0.5, dim=2)
    with pytest.raises(ValueError):
        dp_semigroup(heat_problem(1.0), constant_field(1.0, dim=2), 0.1, grid)


def test_heat_oracle_frozen():
    assert heat_oracle(1.0, cos_field(), 0.25, 0.3) == pytest.approx(
        0.8430814925793894, abs=1e-12
    )


def test_hopf_cole_oracle_self_validates():
    ov = hopf_cole_oracle(1.0, cos_field(), 0.25, 0.0)
    assert ov.resolution_gap <= 1e-8
    assert ov.value == pytest.approx(0.8933895827262393, abs=1e-10)


def test_hopf_cole_reduces_to_heat_without_controls():
    """With the control term absent the transform is the plain heat image."""
    ov = hopf_cole_oracle(1.0, cos_field(), 0.25, 0.3)
    heat = heat_oracle(1.0, cos_field(), 0.25, 0.3)
    # running-max structure keeps the value above the passive flow
    assert ov.value >= heat - 1e-12


def test_hjb_generator_quadratic_field():
    # (sigma^2/2) u'' + sup_a (a u' - a^2/2) = sigma^2 + 2 x^2 with u = x^2
    prob = quadratic_control_problem(1.0, 8.0, 81)
    x = 0.7
    sq = ScalarField.from_function(lambda p: p[:, 0] ** 2, dim=1)
    got = hjb_generator(prob, sq, x)
    assert got == pytest.approx(1.0 + 2.0 * x * x, abs=1e-3)


def test_dynamic_programming_two_stage_gap():
    gap = dynamic_programming_check(
        quadratic_control_problem(1.0, 4.0, 41), cos_field(), 0.125, 0.25,
        Grid.regular(-8.0, 8.0, 0.02), probes=(-1.0, 0.0, 1.0),
    )
    assert gap <= 1e-3


def test_convexity_and_monotonicity_margins():
    prob = quadratic_control_problem(1.0, 4.0, 41)
    phi = cos_field()
    psi = ScalarField.from_function(
        lambda p: np.cos(p[:, 0]) + 0.8 * np.exp(-p[:, 0] ** 2),
        dim=1, tail=TailEnvelope(0.0, 1.8), name="cos-plus-bump",
    )
    rep = convexity_monotonicity_check(
        prob, phi, psi, lam=0.4, t=0.25, grid=Grid.regular(-8.0, 8.0, 0.02),
        probes=(-1.0, 0.0, 1.0),
    )
    assert rep.convexity_margin >= -1e-9
    assert rep.monotone_applicable
    assert rep.monotone_margin >= -1e-9
    assert rep.constant_gap == 0.0


def test_viscosity_no_violations_on_scheme_solution():
    prob = quadratic_control_problem(1.0, 4.0, 41)
    vf = dp_semigroup(prob, cos_field(), 0.25, Grid.regular(-8.0, 8.0, 0.02))
    rep = viscosity_test(vf, prob, n_tests=20, rng=RngPolicy(1).generator(77),
                         x_range=(-2.0, 2.0))
    assert rep.n_violations == 0
    assert rep.n_run >= 10
    assert rep.max_violation() <= rep.tol


def test_viscosity_flags_frozen_field():
    """A field pinned at its initial condition violates the evolution
    inequality by about half the diffusion term."""
    prob = quadratic_control_problem(1.0, 4.0, 41)
    grid = Grid.regular(0.0, 2.0 * math.pi, 0.01)
    fv = frozen_value_field(cos_field(), grid, 0.25)
    rep = viscosity_test(fv, prob, points=[("super", 0.125, math.pi)],
                         curvature=0.05, tol=0.0)
    case = rep.cases[0]
    assert case.violated and not case.skipped
    # residual concentrates at (sigma^2/2)|phi''(pi)| less the curvature margin
    assert case.residual >= 0.5 * 1.0 * abs(math.cos(math.pi)) - 0.05 - 5e-3
    assert rep.n_violations == 1


def test_viscosity_skips_points_outside_windows():
    prob = quadratic_control_problem(1.0, 4.0, 41)
    vf = dp_semigroup(prob, cos_field(), 0.25, Grid.regular(-8.0, 8.0, 0.05))
    # t too close to the initial slice: no interior window to fit
    rep = viscosity_test(vf, prob, points=[("sub", 0.0, 0.0)], curvature=0.1)
    assert rep.cases[0].skipped
    assert rep.cases[0].reason != ""
    assert rep.n_run == 0
