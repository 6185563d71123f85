"""Convex control semigroups: dynamic programming, oracles, viscosity tests.

The semigroup is P_t phi(x) = sup over controls of
E[phi(X_t) - int_0^t g(alpha_s) ds] for dX = b(X, alpha) ds + sigma dW,
realized by an explicit monotone scheme: one Gauss-Hermite 3-point
quadrature step per time slice, with the quadrature offsets aligned to
the spatial mesh.

Scheme notes, in decreasing order of importance:

* dt defaults to h^2 / (3 sigma^2).  Then sigma * sqrt(3 dt) == h, the
  outer quadrature nodes land exactly on neighboring mesh points, and
  the interpolation bias (h^2 / (6 dt) of spurious diffusion for a
  misaligned scheme) vanishes.  The CFL ratio sigma^2 dt / h^2 is then
  exactly 1/3; ratios above 1/2 are refused.
* the controlled displacement b dt is tiny relative to h, handled by
  two-point linear interpolation; values are combined in
  sum-of-differences form so constant fields are bitwise fixed points.
* the spatial boundary freezes the edge value (clamped stencil reads,
  Neumann-like).  Checks must keep their probes at distance >=
  4 sigma sqrt(t) from the boundary.

Monotonicity, constant preservation, and sup-norm contraction of the
one-step map are asserted on synthetic inputs at the start of every
dp_semigroup run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit
from numpy.polynomial.hermite_e import hermegauss

from .statespace import Grid, ScalarField, as_points

__all__ = [
    "ControlProblem",
    "quadratic_control_problem",
    "heat_problem",
    "ValueField",
    "dp_semigroup",
    "hjb_generator",
    "heat_oracle",
    "OracleValue",
    "hopf_cole_oracle",
    "ConvexityReport",
    "convexity_monotonicity_check",
    "dynamic_programming_check",
    "ViscosityCase",
    "ViscosityReport",
    "viscosity_test",
    "frozen_value_field",
]

_GH3_NODES = np.array([-math.sqrt(3.0), 0.0, math.sqrt(3.0)])
_GH3_WEIGHTS = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])


@dataclass(frozen=True)
class ControlProblem:
    """Finite-control convex problem: dX = b(X, a) dt + sigma dW, running cost g(a).

    ``controls`` must contain 0 with g(0) = 0 and g >= 0 on the whole
    set, so constants are exact fixed points of the value iteration.
    ``drift(xs, a)`` is vectorized over a batch of positions for one
    control value.
    """

    controls: tuple[float, ...]
    drift: Callable[[np.ndarray, float], np.ndarray]
    cost: Callable[[float], float]
    sigma: float
    name: str = "control"
    dim: int = 1

    def __post_init__(self) -> None:
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.dim != 1:
            raise ValueError("only 1-d control problems are supported")
        if len(self.controls) == 0:
            raise ValueError("control set is empty")
        if not any(a == 0.0 for a in self.controls):
            raise ValueError("control set must contain 0")
        for a in self.controls:
            if self.cost(a) < 0.0:
                raise ValueError(f"cost must be nonnegative, got g({a}) < 0")
        if self.cost(0.0) != 0.0:
            raise ValueError("cost must vanish at the zero control")

    def cost_vector(self) -> np.ndarray:
        return np.array([self.cost(a) for a in self.controls])

    def dual_bound(self, y: float) -> float:
        """Convex-dual value max_a (a y - g(a)); finite by enumeration."""
        return max(a * y - self.cost(a) for a in self.controls)


def quadratic_control_problem(
    sigma: float = 1.0,
    a_max: float = 4.0,
    n_controls: int = 41,
) -> ControlProblem:
    """b(x, a) = a with quadratic cost g(a) = a^2 / 2 on an equispaced control grid."""
    if n_controls < 3 or n_controls % 2 == 0:
        raise ValueError("need an odd number of controls >= 3 so that 0 is on the grid")
    controls = tuple(np.linspace(-a_max, a_max, n_controls))
    return ControlProblem(
        controls=controls,
        drift=lambda xs, a: np.full(len(xs), float(a)),
        cost=lambda a: 0.5 * a * a,
        sigma=sigma,
        name="quadratic-control",
    )


def heat_problem(sigma: float = 1.0) -> ControlProblem:
    """Degenerate control set {0}: the semigroup reduces to the heat flow."""
    return ControlProblem(
        controls=(0.0,),
        drift=lambda xs, a: np.zeros(len(xs)),
        cost=lambda a: 0.0,
        sigma=sigma,
        name="heat",
    )


# ---------------------------------------------------------------------------
# value iteration


@njit(cache=True)
def _dp_steps(u0, idx, frac, wz, gdt, n_steps, snap_every, snaps):
    n = u0.shape[0]
    m = gdt.shape[0]
    u = u0.copy()
    unew = np.empty_like(u)
    s = 1
    for k in range(n_steps):
        for i in range(n):
            ui = u[i]
            best = -1.0e300
            for j in range(m):
                acc = -gdt[j]
                for z in range(3):
                    i0 = idx[i, j, z]
                    f = frac[i, j, z]
                    acc += wz[z] * ((1.0 - f) * (u[i0] - ui) + f * (u[i0 + 1] - ui))
                if acc > best:
                    best = acc
            unew[i] = ui + best
        tmp = u
        u = unew
        unew = tmp
        if (k + 1) % snap_every == 0:
            for i in range(n):
                snaps[s, i] = u[i]
            s += 1
    return u


def _build_stencil(
    prob: ControlProblem, xs: np.ndarray, h: float, dt: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Clamped two-point interpolation stencils for every (node, control, quad node)."""
    n = len(xs)
    m = len(prob.controls)
    sd = prob.sigma * math.sqrt(dt)
    idx = np.empty((n, m, 3), dtype=np.int64)
    frac = np.empty((n, m, 3))
    base = np.arange(n, dtype=float)
    for j, a in enumerate(prob.controls):
        b = prob.drift(xs.reshape(-1, 1)[:, 0], a)
        for z in range(3):
            pos = base + (b * dt + sd * _GH3_NODES[z]) / h
            i0 = np.floor(pos).astype(np.int64)
            f = pos - i0
            low = i0 < 0
            high = i0 > n - 2
            i0[low] = 0
            f[low] = 0.0
            i0[high] = n - 2
            f[high] = 1.0
            idx[:, j, z] = i0
            frac[:, j, z] = f
    return idx, frac, np.array([prob.cost(a) * dt for a in prob.controls])


@dataclass(frozen=True)
class ValueField:
    """Value iteration output: snapshots of u on a fixed spatial grid.

    ``values[0]`` is the terminal payoff phi at the nodes, exactly;
    ``values[-1]`` is P_t phi.  ``times`` are the snapshot times
    (ascending from 0).  ``cfl_ratio`` records sigma^2 dt / h^2.
    """

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    dt: float
    cfl_ratio: float
    problem_name: str

    def field(self, index: int, name: str | None = None) -> ScalarField:
        return ScalarField.from_samples(
            self.grid, self.values[index].copy(), name=name or f"{self.problem_name}-u[{index}]"
        )

    @property
    def final_field(self) -> ScalarField:
        return self.field(len(self.times) - 1, name=f"{self.problem_name}-final")


def _one_step(u: np.ndarray, idx, frac, wz, gdt) -> np.ndarray:
    snaps = np.empty((2, len(u)))
    snaps[0] = u
    return _dp_steps(u, idx, frac, wz, gdt, 1, 1, snaps)


def _assert_step_invariants(idx, frac, wz, gdt, xs: np.ndarray) -> None:
    """Monotonicity, constant preservation, sup contraction of one DP step."""
    rng = np.random.default_rng(0)  # fixed probe noise; invariant check only
    v1 = np.sin(xs) + 0.2 * rng.standard_normal(len(xs))
    gap = 0.3 + 0.1 * rng.random(len(xs))
    v2 = v1 + gap
    s1 = _one_step(v1, idx, frac, wz, gdt)
    s2 = _one_step(v2, idx, frac, wz, gdt)
    if np.min(s2 - s1) < -1e-12:
        raise AssertionError("DP step is not monotone")
    if np.max(np.abs(s2 - s1)) > np.max(gap) + 1e-12:
        raise AssertionError("DP step is not a sup-norm contraction")
    c = np.full(len(xs), 0.6180339887498949)
    sc = _one_step(c, idx, frac, wz, gdt)
    if not np.array_equal(sc, c):
        raise AssertionError("DP step does not preserve constants exactly")


def dp_semigroup(
    prob: ControlProblem,
    phi: ScalarField,
    t: float,
    grid: Grid,
    dt: float | None = None,
    n_snapshots: int = 101,
) -> ValueField:
    """Run the value iteration for horizon t and return the snapshot stack.

    ``dt`` defaults to h^2 / (3 sigma^2), rounded so an integer number
    of steps covers t (never longer than the default, so the CFL ratio
    stays <= 1/3).  A caller-specified dt with sigma^2 dt / h^2 > 1/2
    is refused.
    """
    if grid.dim != 1 or phi.dim != 1:
        raise ValueError("dp_semigroup handles 1-d problems only")
    if t < 0.0:
        raise ValueError("horizon must be nonnegative")
    xs = grid.axis(0)
    h = float(grid.step[0])
    u0 = phi.eval_many(xs.reshape(-1, 1))

    if t == 0.0:
        return ValueField(
            grid=grid, times=np.zeros(1), values=u0.reshape(1, -1),
            dt=0.0, cfl_ratio=0.0, problem_name=prob.name,
        )

    dt_pref = h * h / (3.0 * prob.sigma**2) if dt is None else float(dt)
    cfl = prob.sigma**2 * dt_pref / (h * h)
    if cfl > 0.5 + 1e-12:
        raise ValueError(f"CFL ratio sigma^2 dt / h^2 = {cfl:.3f} exceeds 1/2; reduce dt")
    n_steps = max(1, int(math.ceil(t / dt_pref - 1e-12)))
    snap_every = max(1, int(math.ceil(n_steps / max(n_snapshots - 1, 1))))
    n_steps = snap_every * int(math.ceil(n_steps / snap_every))
    dt_eff = t / n_steps
    cfl_eff = prob.sigma**2 * dt_eff / (h * h)

    idx, frac, gdt = _build_stencil(prob, xs, h, dt_eff)
    _assert_step_invariants(idx, frac, _GH3_WEIGHTS, gdt, xs)

    n_snaps = n_steps // snap_every + 1
    snaps = np.empty((n_snaps, len(xs)))
    snaps[0] = u0
    _dp_steps(u0, idx, frac, _GH3_WEIGHTS, gdt, n_steps, snap_every, snaps)
    times = np.arange(n_snaps) * (snap_every * dt_eff)
    return ValueField(
        grid=grid, times=times, values=snaps,
        dt=dt_eff, cfl_ratio=cfl_eff, problem_name=prob.name,
    )


# ---------------------------------------------------------------------------
# generator and oracles


def _derivatives_1d(phi: ScalarField, x: float, fd_step: float = 1e-5) -> tuple[float, float]:
    if phi.grad is not None and phi.hess is not None:
        pt = as_points(x, 1)
        return float(phi.grad_many(pt)[0, 0]), float(phi.hess_many(pt)[0, 0, 0])
    f = lambda y: float(phi.eval_many(np.array([[y]]))[0])
    d1 = (f(x + fd_step) - f(x - fd_step)) / (2.0 * fd_step)
    d2 = (f(x + fd_step) - 2.0 * f(x) + f(x - fd_step)) / fd_step**2
    return d1, d2


def hjb_generator(prob: ControlProblem, phi: ScalarField, x: float, fd_step: float = 1e-5) -> float:
    """(1/2) sigma^2 phi'' + max_a (b(x, a) phi' - g(a)) at x."""
    d1, d2 = _derivatives_1d(phi, x, fd_step)
    best = -math.inf
    for a in prob.controls:
        b = float(prob.drift(np.array([x]), a)[0])
        best = max(best, b * d1 - prob.cost(a))
    return 0.5 * prob.sigma**2 * d2 + best


def heat_oracle(sigma: float, phi: ScalarField, t: float, x: float, order: int = 192) -> float:
    """E[phi(x + sigma sqrt(t) Z)] by Gauss-Hermite quadrature."""
    z, w = hermegauss(order)
    w = w / w.sum()
    pts = (x + sigma * math.sqrt(t) * z).reshape(-1, 1)
    return float(w @ phi.eval_many(pts))


@dataclass(frozen=True)
class OracleValue:
    value: float
    resolution_gap: float


def hopf_cole_oracle(
    sigma: float,
    phi: ScalarField,
    t: float,
    x: float,
    order: int = 96,
    agree_tol: float = 1e-8,
) -> OracleValue:
    """Closed-form value for b(x,a) = a, g(a) = a^2/2:

        u(t, x) = sigma^2 log E[exp(phi(x + sigma sqrt(t) Z) / sigma^2)].

    Self-validating: evaluated at two quadrature resolutions which must
    agree to ``agree_tol``; phi must declare a bounded tail envelope so
    the exponential integrand cannot hide mass at infinity.
    """
    if phi.tail is None or phi.tail.degree > 0:
        raise ValueError("hopf_cole_oracle needs a bounded test field (tail degree <= 0)")

    def _at(n: int) -> float:
        z, w = hermegauss(n)
        w = w / w.sum()
        pts = (x + sigma * math.sqrt(t) * z).reshape(-1, 1)
        vals = phi.eval_many(pts) / sigma**2
        peak = float(np.max(vals))
        return sigma**2 * (peak + math.log(float(w @ np.exp(vals - peak))))

    v1 = _at(order)
    v2 = _at(2 * order)
    if abs(v1 - v2) > agree_tol:
        raise ValueError(f"oracle resolutions disagree by {abs(v1 - v2):.2e} > {agree_tol:.0e}")
    return OracleValue(value=v2, resolution_gap=abs(v1 - v2))


# ---------------------------------------------------------------------------
# structural checks


@dataclass(frozen=True)
class ConvexityReport:
    """Margins from one convexity/monotonicity/constant run.

    convexity_margin = min over probes of lam P phi + (1-lam) P psi -
    P(lam phi + (1-lam) psi); nonnegative for a convex semigroup (up to
    roundoff).  monotone_margin = min(P psi - P phi) when phi <= psi
    held at the nodes.  constant_gap = max |P_t m - m| for a constant m
    (must be exactly 0).
    """

    convexity_margin: float
    monotone_applicable: bool
    monotone_margin: float
    constant_gap: float
    probes: tuple[float, ...]


def _final_at(vf: ValueField, probes: np.ndarray) -> np.ndarray:
    return vf.final_field.eval_many(probes.reshape(-1, 1))


def convexity_monotonicity_check(
    prob: ControlProblem,
    phi: ScalarField,
    psi: ScalarField,
    lam: float,
    t: float,
    grid: Grid,
    probes: Sequence[float],
    dt: float | None = None,
) -> ConvexityReport:
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must be in (0, 1)")
    pr = np.asarray(probes, dtype=float)
    xs = grid.axis(0).reshape(-1, 1)
    phi_n = phi.eval_many(xs)
    psi_n = psi.eval_many(xs)

    combo = ScalarField.from_function(
        lambda pts: lam * phi.eval_many(pts) + (1.0 - lam) * psi.eval_many(pts),
        name="combo",
    )
    p_phi = _final_at(dp_semigroup(prob, phi, t, grid, dt), pr)
    p_psi = _final_at(dp_semigroup(prob, psi, t, grid, dt), pr)
    p_combo = _final_at(dp_semigroup(prob, combo, t, grid, dt), pr)
    convexity_margin = float(np.min(lam * p_phi + (1.0 - lam) * p_psi - p_combo))

    applicable = bool(np.min(psi_n - phi_n) >= 0.0)
    monotone_margin = float(np.min(p_psi - p_phi)) if applicable else math.nan

    const = ScalarField.from_function(lambda pts: np.full(len(pts), 0.7368421052631579), name="m")
    vf_c = dp_semigroup(prob, const, t, grid, dt)
    constant_gap = float(np.max(np.abs(vf_c.values[-1] - 0.7368421052631579)))

    return ConvexityReport(
        convexity_margin=convexity_margin,
        monotone_applicable=applicable,
        monotone_margin=monotone_margin,
        constant_gap=constant_gap,
        probes=tuple(float(p) for p in pr),
    )


def dynamic_programming_check(
    prob: ControlProblem,
    phi: ScalarField,
    s: float,
    t: float,
    grid: Grid,
    probes: Sequence[float],
    dt: float | None = None,
) -> float:
    """max over probes of |P_{s+t} phi - P_s (P_t phi)|.

    The inner value is tabulated on the same grid and fed back as a
    sampled field, so the two routes share nothing but the grid.
    """
    pr = np.asarray(probes, dtype=float)
    direct = _final_at(dp_semigroup(prob, phi, s + t, grid, dt), pr)
    inner = dp_semigroup(prob, phi, t, grid, dt)
    if s == 0.0:
        two_stage = _final_at(inner, pr)
    else:
        two_stage = _final_at(dp_semigroup(prob, inner.final_field, s, grid, dt), pr)
    return float(np.max(np.abs(direct - two_stage)))


# ---------------------------------------------------------------------------
# viscosity harness


@dataclass(frozen=True)
class ViscosityCase:
    """One quadratic test: side 'sub' means the test function touches the
    value field from above (subsolution inequality psi_t <= L psi at the
    touch point); 'super' touches from below with the reversed
    inequality.  ``residual`` is signed so that residual > tol means the
    inequality failed by that margin."""

    side: str
    t_star: float
    x_star: float
    residual: float
    violated: bool
    skipped: bool
    reason: str


@dataclass(frozen=True)
class ViscosityReport:
    cases: tuple[ViscosityCase, ...]
    n_violations: int
    n_skipped: int
    tol: float

    @property
    def n_run(self) -> int:
        return len(self.cases) - self.n_skipped

    def max_violation(self) -> float:
        run = [c.residual for c in self.cases if not c.skipped]
        return max(run) if run else -math.inf


def _viscosity_single(
    vf: ValueField,
    prob: ControlProblem,
    side: str,
    it: int,
    ix: int,
    curvature: float,
    t_curvature: float,
    jitter_x: float,
    jitter_t: float,
    window_x: int,
    window_t: int,
    tol: float,
) -> ViscosityCase:
    u = vf.values
    xs = vf.grid.axis(0)
    h = float(vf.grid.step[0])
    dts = float(vf.times[1] - vf.times[0])
    n_t, n_x = u.shape
    if not (window_t <= it < n_t - window_t and window_x <= ix < n_x - window_x):
        return ViscosityCase(side, float(vf.times[it]), float(xs[ix]), math.nan,
                             False, True, "window leaves the snapshot stack")
    sgn = 1.0 if side == "sub" else -1.0

    # FD derivatives of u at the center; quadratic coefficients match them
    # to first order, with curvature margins forcing the touch inward.
    u_x = (u[it, ix + 1] - u[it, ix - 1]) / (2.0 * h)
    u_xx = (u[it, ix + 1] - 2.0 * u[it, ix] + u[it, ix - 1]) / h**2
    u_t = (u[it + 1, ix] - u[it - 1, ix]) / (2.0 * dts)
    u_tt = (u[it + 1, ix] - 2.0 * u[it, ix] + u[it - 1, ix]) / dts**2

    q = u_x + sgn * jitter_x
    p = u_t + sgn * jitter_t
    r = u_xx + sgn * curvature
    w = u_tt + sgn * t_curvature

    di = np.arange(-window_t, window_t + 1)
    dj = np.arange(-window_x, window_x + 1)
    ds = di[:, None] * dts
    dy = dj[None, :] * h
    psi = (
        u[it, ix]
        + p * ds + q * dy + 0.5 * r * dy**2 + 0.5 * w * ds**2
    )
    uw = u[it - window_t: it + window_t + 1, ix - window_x: ix + window_x + 1]
    gap = (psi - uw) * sgn  # >= 0 after the vertical shift, both sides
    k = int(np.argmin(gap))
    ki, kj = divmod(k, gap.shape[1])
    if ki in (0, gap.shape[0] - 1) or kj in (0, gap.shape[1] - 1):
        return ViscosityCase(side, float(vf.times[it]), float(xs[ix]), math.nan,
                             False, True, "touch point landed on the window boundary")
    # vertical shift: psi - sgn*min(gap) touches u at (ki, kj) exactly,
    # and stays on the correct side across the certified window.
    ds_star = float(di[ki]) * dts
    dy_star = float(dj[kj]) * h
    x_star = float(xs[ix + dj[kj]])
    t_star = float(vf.times[it + di[ki]])

    psi_t = p + w * ds_star
    psi_x = q + r * dy_star
    best = -math.inf
    for a in prob.controls:
        b = float(prob.drift(np.array([x_star]), a)[0])
        best = max(best, b * psi_x - prob.cost(a))
    l_psi = 0.5 * prob.sigma**2 * r + best

    residual = (psi_t - l_psi) if side == "sub" else (l_psi - psi_t)
    return ViscosityCase(side, t_star, x_star, float(residual),
                         bool(residual > tol), False, "")


def viscosity_test(
    vf: ValueField,
    prob: ControlProblem,
    n_tests: int = 50,
    rng: np.random.Generator | None = None,
    x_range: tuple[float, float] | None = None,
    t_range: tuple[float, float] | None = None,
    curvature_range: tuple[float, float] = (0.05, 0.5),
    window_x: int = 10,
    window_t: int = 2,
    tol: float = 5e-3,
    points: Sequence[tuple[str, float, float]] | None = None,
    curvature: float | None = None,
) -> ViscosityReport:
    """Random quadratic touching tests against a value-field snapshot stack.

    Each test builds a quadratic in (t, x) whose first derivatives match
    finite-difference estimates of u and whose curvatures are pushed by
    a margin toward the touching side, shifts it vertically to touch u
    on a discrete window, certifies the touch is interior (else the
    case is skipped with a reason), and evaluates the sub/supersolution
    inequality at the touch point.  ``points`` pins explicit
    (side, t, x) cases instead of random draws.
    """
    xs = vf.grid.axis(0)
    h = float(vf.grid.step[0])
    if len(vf.times) < 2 * window_t + 1:
        raise ValueError("value field carries too few snapshots for the time window")
    dts = float(vf.times[1] - vf.times[0])

    cases: list[ViscosityCase] = []
    if points is not None:
        specs = []
        for side, t_pt, x_pt in points:
            it = int(round(t_pt / dts))
            ix = int(round((x_pt - xs[0]) / h))
            specs.append((side, it, ix))
    else:
        if rng is None:
            raise ValueError("pass an rng for random tests or pin explicit points")
        lo_x, hi_x = x_range if x_range is not None else (xs[0] + 0.25 * (xs[-1] - xs[0]),
                                                         xs[0] + 0.75 * (xs[-1] - xs[0]))
        lo_t = t_range[0] if t_range is not None else float(vf.times[window_t])
        hi_t = t_range[1] if t_range is not None else float(vf.times[-1 - window_t])
        specs = []
        for k in range(n_tests):
            side = "sub" if k % 2 == 0 else "super"
            t_pt = lo_t + (hi_t - lo_t) * rng.random()
            x_pt = lo_x + (hi_x - lo_x) * rng.random()
            specs.append((side, int(round(t_pt / dts)), int(round((x_pt - xs[0]) / h))))

    for side, it, ix in specs:
        if curvature is not None:
            c = curvature
            jx = 0.0
            jt = 0.0
        else:
            c = curvature_range[0] + (curvature_range[1] - curvature_range[0]) * rng.random()
            # jitters small enough that the curvature margin keeps the
            # touch interior: |jitter * dx| <= c dx^2 / 2 at the window edge
            jx = 0.2 * c * window_x * h * (2.0 * rng.random() - 1.0)
            jt = 0.2 * c * window_t * dts * (2.0 * rng.random() - 1.0)
        t_curv = c * (window_x * h) ** 2 / max((window_t * dts) ** 2, 1e-300)
        cases.append(_viscosity_single(vf, prob, side, it, ix, c, t_curv, jx, jt,
                                       window_x, window_t, tol))

    n_skipped = sum(1 for cse in cases if cse.skipped)
    n_violations = sum(1 for cse in cases if cse.violated)
    return ViscosityReport(cases=tuple(cases), n_violations=n_violations,
                           n_skipped=n_skipped, tol=tol)


def frozen_value_field(phi: ScalarField, grid: Grid, t: float, n_snapshots: int = 9) -> ValueField:
    """A time-constant stack u(s, x) = phi(x): the classic non-solution.

    Feeding it to viscosity_test against a genuine diffusion flags the
    frozen field on the supersolution side with magnitude about
    (1/2) sigma^2 phi''(x) wherever phi'' > 0.
    """
    xs = grid.axis(0).reshape(-1, 1)
    row = phi.eval_many(xs)
    values = np.tile(row, (n_snapshots, 1))
    times = np.linspace(0.0, t, n_snapshots)
    return ValueField(grid=grid, times=times, values=values, dt=times[1] - times[0],
                      cfl_ratio=0.0, problem_name="frozen")
