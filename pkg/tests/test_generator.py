"""Finite-difference generator, domain evidence, resolvent, Euler formula,
and the forward-equation residual."""

import math

import numpy as np
import pytest

from markovlab.generator import (
    SemigroupEvaluator,
    domain_check,
    euler_reconstruct,
    fd_generator,
    fpk_residual,
    kolmogorov_apply,
    kolmogorov_field,
    mc_evaluator,
    ou_evaluator,
    resolvent_identity_check,
    resolvent_quadrature,
)
from markovlab.sde import ou_model
from markovlab.statespace import (
    Grid,
    RngPolicy,
    ScalarField,
    TailEnvelope,
    Weight,
    gaussian_field,
    identity_field,
    make_exhaustion,
    monomial_field,
    sin_field,
)

T_LADDER = (1e-2, 5e-3, 2.5e-3)


# ---------------------------------------------------------------------------
# quadrature evaluator


def test_evaluator_t0_is_identity():
    P = ou_evaluator()
    vals, bars = P.eval_many(0.0, sin_field(), np.array([[0.3], [1.1]]))
    assert np.array_equal(vals, np.sin([0.3, 1.1]))
    assert np.array_equal(bars, [0.0, 0.0])


def test_evaluator_rejects_negative_time():
    with pytest.raises(ValueError):
        ou_evaluator().eval(-0.1, sin_field(), 0.0)


def test_evaluator_sin_image_frozen():
    # sin(e^{-0.1} 2) exp(-(1 - e^{-0.2})/4)
    v, bar = ou_evaluator().eval(0.1, sin_field(), 2.0)
    assert v == pytest.approx(0.9285562364512338, abs=1e-12)
    assert bar == 0.0


def test_evaluator_quadratic_image_frozen():
    # e^{-2at} x^2 + v_t at t=0.3, x=1.5
    v, _ = ou_evaluator().eval(0.3, monomial_field(2), 1.5)
    assert v == pytest.approx(1.460420363164546, abs=1e-12)


def test_mc_evaluator_tracks_quadrature():
    P_mc = mc_evaluator(ou_model(), RngPolicy(4), dt=2e-3, n_paths=20_000)
    v, bar = P_mc.eval(0.25, sin_field(), 1.0)
    exact, _ = ou_evaluator().eval(0.25, sin_field(), 1.0)
    assert bar > 0.0
    assert abs(v - exact) <= 4.0 * bar + 5e-3


# ---------------------------------------------------------------------------
# generator via extrapolated difference quotients


def test_fd_generator_matches_closed_form():
    # L sin(x) = -a x cos(x) - (sigma^2/2) sin(x), frozen at x = 0.8
    est = fd_generator(ou_evaluator(), sin_field(), 0.8, T_LADDER)
    assert est.value == pytest.approx(-0.9160434129274937, abs=1e-6)
    assert not est.inconclusive
    assert est.order_used >= 1


def test_fd_generator_polynomial_exact_direction():
    # L x^2 = -2a x^2 + sigma^2; quotient in t is smooth, extrapolation tight
    est = fd_generator(ou_evaluator(), monomial_field(2), 1.0, T_LADDER)
    assert est.value == pytest.approx(-1.0, abs=1e-7)


def test_fd_generator_reports_inconclusive_on_dominating_bars():
    def _eval(t, phi, pts):
        vals = phi.eval_many(pts)  # frozen semigroup, quotients are zero
        return vals, np.full(len(pts), 10.0)

    P = SemigroupEvaluator(dim=1, source="kernel", _eval_many=_eval)
    est = fd_generator(P, sin_field(), 0.5, T_LADDER)
    assert est.inconclusive
    assert est.error >= abs(est.value)


def test_kolmogorov_apply_uses_exact_derivatives():
    # monomial carries analytic grad/hess, so no finite-difference error at all
    model = ou_model(a=1.0, sigma=1.0)
    got = kolmogorov_apply(model, monomial_field(2), 1.5)
    assert got == pytest.approx(-2.0 * 1.5**2 + 1.0, abs=1e-12)
    field = kolmogorov_field(model, sin_field())
    assert field(0.8) == pytest.approx(-0.9160434129274937, abs=1e-9)


# ---------------------------------------------------------------------------
# domain evidence


def test_domain_check_unit_weight_pushes_out():
    v = domain_check(ou_evaluator(), sin_field(), Weight.unit(),
                     exhaustion=make_exhaustion(1.0, 2.0, 4))
    assert v.verdict == "out-of-domain-evidence"
    assert v.radius_ratio > 1.3


def test_domain_check_polynomial_weight_pulls_in():
    v = domain_check(ou_evaluator(), sin_field(), Weight.polynomial(1.0),
                     exhaustion=make_exhaustion(1.0, 2.0, 4))
    assert v.verdict == "in-domain-evidence"
    assert v.cauchy_ok
    assert v.radius_ratio < 1.15


# ---------------------------------------------------------------------------
# resolvent and reconstruction


def test_resolvent_linear_field_frozen():
    # integral of e^{-t} e^{-at} x dt = x / (lam + a) = 0.35 at x = 0.7
    r = resolvent_quadrature(ou_evaluator(), 1.0, identity_field(), 0.7,
                             kappa=Weight.polynomial(1.0))
    assert r.value == pytest.approx(0.35, abs=1e-8)
    assert r.tail_bound <= 1e-8


def test_resolvent_quadratic_field_frozen():
    r = resolvent_quadrature(ou_evaluator(), 1.0, monomial_field(2), 0.7,
                             kappa=Weight.polynomial(2.0))
    assert r.value == pytest.approx(0.4966666666666667, abs=1e-7)


def test_resolvent_refuses_small_lambda():
    with pytest.raises(ValueError, match="must exceed the declared growth rate"):
        resolvent_quadrature(ou_evaluator(), 0.0, identity_field(), 0.7,
                             kappa=Weight.polynomial(1.0))


def test_resolvent_identity_small_residual():
    res = resolvent_identity_check(ou_model(), ou_evaluator(), 1.0, identity_field(), 0.5,
                                   kappa=Weight.polynomial(1.0))
    assert abs(res) <= 1e-8


def test_euler_reconstruct_contracts_identity():
    grid = Grid.regular(-12.0, 12.0, 0.02)
    rec = euler_reconstruct(ou_model(), identity_field(), t=1.0, n=100, grid=grid)
    exact = math.exp(-1.0) * 1.0
    assert abs(rec(1.0) - exact) / abs(exact) < 0.006


def test_euler_reconstruct_error_shrinks_with_n():
    grid = Grid.regular(-12.0, 12.0, 0.02)
    exact = math.exp(-1.0)
    errs = [abs(euler_reconstruct(ou_model(), identity_field(), 1.0, n, grid)(1.0) - exact)
            for n in (25, 50)]
    assert errs[1] < errs[0]


# ---------------------------------------------------------------------------
# forward-equation residual


def _fpk_budget(res_dt, res_half):
    # statistical term plus twice the observed step-size sensitivity
    return 3.0 * res_dt.stderr + 2.0 * abs(res_dt.mean - res_half.mean)


def test_fpk_residual_within_budget():
    policy = RngPolicy(8)
    kw = dict(x=2.0, t=0.5, n_paths=4_000, policy=policy)
    res = fpk_residual(ou_model(), identity_field(), dt=2e-3, stream_id=50, **kw)
    half = fpk_residual(ou_model(), identity_field(), dt=1e-3, stream_id=51, **kw)
    assert res.n == 4_000
    assert res.stderr > 0.0
    assert res.residual <= _fpk_budget(res, half)


def test_fpk_residual_flags_wrong_operator():
    policy = RngPolicy(8)
    base = ou_model()
    flipped = type(base)(
        dim=base.dim, noise_dim=base.noise_dim,
        drift=lambda p: p, diffusion=base.diffusion,
        local_K=base.local_K, growth_C=base.growth_C, growth_m=base.growth_m,
        ratio_bound=base.ratio_bound, moment_degree=base.moment_degree,
        name="ou-drift-negated",
    )
    kw = dict(x=2.0, t=0.5, n_paths=4_000, policy=policy)
    res = fpk_residual(ou_model(), identity_field(), dt=2e-3, stream_id=50, **kw)
    half = fpk_residual(ou_model(), identity_field(), dt=1e-3, stream_id=51, **kw)
    # same noise stream as the positive run; only the operator changes
    bad = fpk_residual(ou_model(), identity_field(), dt=2e-3, stream_id=50,
                       l0_model=flipped, **kw)
    assert bad.residual > 10.0 * _fpk_budget(res, half)
