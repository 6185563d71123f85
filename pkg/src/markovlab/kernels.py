"""Transition-kernel families and the computable kernel-representation checks.

A kernel family assigns to (t, x) a finite signed measure; integration of a
field against it realizes the semigroup action.  Families come in two forms:
a sampler producing empirical measures, or a Gaussian closed form integrated
by Gauss-Hermite quadrature.

check_kernel_conditions verifies the three quantitative conditions that make
a kernel family a semigroup representation on the weighted space:

  (3) uniform kappa-weighted mass bound over sampled (t, x);
  (4) tightness of the kappa-weighted kernels over each compact and [0, T],
      realized as a search for an enclosing radius;
  (5) continuity at t = 0: along configured approach paths (t_k, x_k) -> (0, x),
      integrals of test fields converge to the field value at x.

The default test set for (5) is LOCAL: the constant field (mass normalization)
plus bump fields anchored at the probe that vanish at the probe point and at
infinity.  Mass sitting at the wrong location is the business of the tightness
check (4); together the two checks are the computable surrogate for narrow
convergence (vague convergence plus tightness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .statespace import (
    CompactExhaustion,
    ScalarField,
    TailEnvelope,
    Weight,
    as_points,
)

__all__ = [
    "EmpiricalMeasure",
    "GaussianKernelSpec",
    "KernelFamily",
    "KernelValue",
    "apply_kernel",
    "tightness_radius",
    "check_kernel_conditions",
    "KernelReport",
    "local_test_fields",
    "gauss_hermite_nodes",
]


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Finite signed measure as weighted particles."""

    points: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)
    total_mass: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or len(pts) != len(w):
            raise ValueError("points must be (n, d) with matching weights")
        if abs(float(w.sum()) - self.total_mass) > 1e-12 * max(1.0, abs(self.total_mass)):
            raise ValueError("weights must sum to total_mass within 1e-12")

    @staticmethod
    def from_particles(points, weights=None) -> "EmpiricalMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(weights, dtype=float)
        return EmpiricalMeasure(pts, w, float(w.sum()))

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def gauss_hermite_nodes(order: int, dim: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite rule for E f(Z), Z standard normal in R^dim.

    Returns (nodes (q, dim), weights (q,)) with weights summing to 1.
    """
    z, w = np.polynomial.hermite.hermgauss(order)
    z = z * math.sqrt(2.0)
    w = w / math.sqrt(math.pi)
    if dim == 1:
        return z.reshape(-1, 1), w
    zs = np.meshgrid(*([z] * dim), indexing="ij")
    ws = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([a.ravel() for a in zs], axis=-1)
    weights = np.prod(np.stack([a.ravel() for a in ws], axis=-1), axis=1)
    return nodes, weights


@dataclass(frozen=True)
class GaussianKernelSpec:
    """Closed-form Gaussian kernel: mu_t(x, .) = N(mean_map(t, x), cov_map(t))."""

    mean_map: Callable[[float, np.ndarray], np.ndarray]
    cov_map: Callable[[float], np.ndarray]


@dataclass(frozen=True)
class KernelFamily:
    """Either a sampler (t, x, n, rng) -> EmpiricalMeasure or a Gaussian closed form.

    moment_degree declares the largest polynomial growth integrable uniformly
    on [0, horizon]; fields with larger declared envelopes are refused.
    """

    dim: int
    horizon: float
    sampler: Callable[[float, np.ndarray, int, np.random.Generator | None], EmpiricalMeasure] | None = None
    gaussian: GaussianKernelSpec | None = None
    moment_degree: float = math.inf
    quad_order: int = 64
    name: str = ""

    def __post_init__(self):
        if (self.sampler is None) == (self.gaussian is None):
            raise ValueError("exactly one of sampler / gaussian must be given")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    def measure(self, t: float, x, n: int = 10_000, rng=None) -> EmpiricalMeasure:
        xp = as_points(x, self.dim)[0]
        if not (0.0 <= t <= self.horizon + 1e-12):
            raise ValueError(f"t={t} outside [0, horizon={self.horizon}]")
        if self.sampler is not None:
            return self.sampler(t, xp, n, rng)
        mean = np.asarray(self.gaussian.mean_map(t, xp), dtype=float).reshape(self.dim)
        cov = np.atleast_2d(np.asarray(self.gaussian.cov_map(t), dtype=float))
        nodes, weights = gauss_hermite_nodes(self.quad_order if self.dim == 1 else 16, self.dim)
        sq = _psd_sqrt(cov)
        pts = mean[None, :] + nodes @ sq.T
        return EmpiricalMeasure(pts, weights, float(weights.sum()))


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    if np.any(vals < -1e-10 * max(1.0, float(np.max(np.abs(vals))))):
        raise ValueError("covariance must be positive semidefinite")
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


@dataclass(frozen=True)
class KernelValue:
    value: float
    stderr: float
    method: str

    def __float__(self) -> float:
        return self.value


def _check_envelope(family: KernelFamily, phi: ScalarField):
    if math.isinf(family.moment_degree):
        return
    if phi.tail is None:
        raise ValueError(
            f"field {phi.name!r} has no declared tail envelope; kernel "
            f"{family.name!r} only integrates growth up to degree {family.moment_degree}"
        )
    if phi.tail.degree > family.moment_degree:
        raise ValueError(
            f"field {phi.name!r} grows like degree {phi.tail.degree}, beyond the "
            f"kernel's declared moment envelope {family.moment_degree}"
        )


def apply_kernel(
    family: KernelFamily,
    t: float,
    phi: ScalarField,
    x,
    n: int = 10_000,
    rng: np.random.Generator | None = None,
) -> KernelValue:
    """Integrate phi against mu_t(x, .): Monte Carlo mean +/- stderr for
    samplers, Gauss-Hermite (stderr 0) for Gaussian closed forms."""
    _check_envelope(family, phi)
    mu = family.measure(t, x, n, rng)
    fv = phi.eval_many(mu.points)
    value = float(np.average(fv, weights=mu.weights))
    if family.gaussian is not None:
        return KernelValue(value, 0.0, "gauss-hermite")
    w = mu.weights
    wsum = float(w.sum())
    mean = value
    var = float(np.sum(w * (fv - mean) ** 2) / wsum) if wsum else 0.0
    n_eff = wsum**2 / float(np.sum(w**2)) if np.any(w) else 1.0
    return KernelValue(value, math.sqrt(max(var, 0.0) / max(n_eff, 1.0)), "monte-carlo")


def tightness_radius(measures: Sequence[EmpiricalMeasure], kappa: Weight, eps: float) -> float:
    """Smallest radius R such that every measure's kappa^{-1}-weighted mass
    outside the closed ball of radius R is < eps times its total."""
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must be in (0, 1]")
    worst = 0.0
    for mu in measures:
        r = np.linalg.norm(mu.points, axis=1)
        w = np.abs(mu.weights) / kappa(mu.points)
        total = float(w.sum())
        if total == 0.0:
            continue
        order = np.argsort(r)
        r_sorted = r[order]
        # suffix[i] = mass strictly beyond radius r_sorted[i]
        csum = np.cumsum(w[order])
        boundary = np.searchsorted(r_sorted, r_sorted, side="right") - 1
        suffix = total - csum[boundary]
        ok = suffix < eps * total
        if not np.any(ok):
            return math.inf
        worst = max(worst, float(r_sorted[int(np.argmax(ok))]))
    return worst


# ---------------------------------------------------------------------------
# condition checks


def local_test_fields(x0: np.ndarray) -> list[ScalarField]:
    """Continuity probes anchored at x0: constant mass probe plus bump fields
    vanishing at x0 and at infinity (radial profile u^j * exp(-u^2), u = |y - x0|)."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    d = len(x0)

    def make(j: int) -> ScalarField:
        def f(p):
            u = np.linalg.norm(p - x0[None, :], axis=1)
            return u**j * np.exp(-(u**2))

        return ScalarField.from_function(
            f, dim=d, tail=TailEnvelope(-4.0, 1.0, valid_from=float(np.linalg.norm(x0)) + 4.0),
            name=f"bump{j}@{np.round(x0, 3)}",
        )

    one = ScalarField.from_function(
        lambda p: np.ones(len(p)), dim=d, tail=TailEnvelope(0.0, 1.0), name="const(1)"
    )
    return [one, make(1), make(2)]


@dataclass(frozen=True)
class Condition3Report:
    value: float
    bound: float
    passed: bool
    n_times: int
    n_probes: int


@dataclass(frozen=True)
class Condition4Report:
    compact_radii: tuple[float, ...]
    found_radii: tuple[float, ...]  # inf when the search ladder is exhausted
    eps: float
    passed: bool


@dataclass(frozen=True)
class Condition5Entry:
    field_name: str
    probe: tuple[float, ...]
    direction: tuple[float, ...]
    deviations: tuple[float, ...]  # per rung k: |int phi d mu_{t_k}(x_k) - phi(x)|
    final_deviation: float


@dataclass(frozen=True)
class Condition5Report:
    entries: tuple[Condition5Entry, ...]
    tol: float
    max_final_deviation: float
    passed: bool


@dataclass(frozen=True)
class KernelReport:
    condition3: Condition3Report
    condition4: Condition4Report
    condition5: Condition5Report

    @property
    def passed(self) -> bool:
        return self.condition3.passed and self.condition4.passed and self.condition5.passed

    def flags(self) -> dict[str, bool]:
        return {
            "condition3": self.condition3.passed,
            "condition4": self.condition4.passed,
            "condition5": self.condition5.passed,
        }


def _kappa_weighted_abs_mass(mu: EmpiricalMeasure, kappa: Weight) -> float:
    return float(np.sum(np.abs(mu.weights) / kappa(mu.points)))


def check_kernel_conditions(
    family: KernelFamily,
    kappa: Weight,
    T: float,
    exhaustion: CompactExhaustion,
    *,
    eps: float = 0.05,
    tol: float = 1e-3,
    test_fns: Sequence[ScalarField] | None = None,
    probes: Sequence | None = None,
    cond3_bound: float = 10.0,
    n_times: int = 9,
    n_x_per_compact: int = 9,
    n_samples: int = 4096,
    search_doublings: int = 13,
    t0: float = 0.1,
    r0: float = 0.5,
    rungs: int = 14,
    rng: np.random.Generator | None = None,
) -> KernelReport:
    """Run the three kernel-representation checks on a family over [0, T].

    test_fns = None uses the local anchored set (see local_test_fields); an
    explicit list is evaluated as-is at every probe.
    """
    if T <= 0 or T > family.horizon + 1e-12:
        raise ValueError("need 0 < T <= family horizon")
    d = family.dim

    # t = 0 contract: the kernel must sit exactly at x
    x_check = np.zeros(d)
    mu0 = family.measure(0.0, x_check, 64, rng)
    if not np.all(mu0.points == x_check[None, :]):
        raise ValueError("kernel family violates the t=0 Dirac contract")

    times = [T * 2.0**-j for j in range(n_times)]

    # condition (3): uniform kappa-weighted mass over sampled (t, x)
    big_r = exhaustion.radii[-1]
    xs3 = np.zeros((n_x_per_compact * len(exhaustion), d))
    xs3[:, 0] = np.linspace(-big_r, big_r, len(xs3))
    c3 = 0.0
    for t in times:
        for xp in xs3:
            mu = family.measure(t, xp, n_samples, rng)
            c3 = max(c3, float(kappa(xp.reshape(1, -1))[0]) * _kappa_weighted_abs_mass(mu, kappa))
    cond3 = Condition3Report(c3, cond3_bound, bool(c3 <= cond3_bound), len(times), len(xs3))

    # condition (4): per-compact tightness search over the time grid
    found = []
    for compact in exhaustion.sets():
        if d == 1:
            xs = np.linspace(-compact.radius, compact.radius, n_x_per_compact).reshape(-1, 1)
        else:
            xs = np.zeros((n_x_per_compact, d))
            xs[:, 0] = np.linspace(-compact.radius, compact.radius, n_x_per_compact)
        measures = [family.measure(t, xp, n_samples, rng) for t in times for xp in xs]
        ladder = [compact.radius * 2.0**k for k in range(search_doublings + 1)]
        hit = math.inf
        for radius in ladder:
            ok = True
            for mu in measures:
                w = np.abs(mu.weights) / kappa(mu.points)
                total = float(w.sum())
                if total == 0.0:
                    continue
                outside = float(w[np.linalg.norm(mu.points, axis=1) > radius].sum())
                if outside >= eps * total:
                    ok = False
                    break
            if ok:
                hit = radius
                break
        found.append(hit)
    cond4 = Condition4Report(
        tuple(exhaustion.radii), tuple(found), eps, bool(all(math.isfinite(r) for r in found))
    )

    # condition (5): continuity along approach paths (t_k, x_k) -> (0, x)
    if probes is None:
        probes = [np.zeros(d)]
    directions = [np.eye(d)[0], -np.eye(d)[0]]
    entries = []
    worst = 0.0
    for probe in probes:
        xp = as_points(probe, d)[0]
        fns = list(test_fns) if test_fns is not None else local_test_fields(xp)
        for direction in directions:
            for fn in fns:
                base = fn(xp)
                devs = []
                for k in range(rungs):
                    tk = t0 * 2.0**-k
                    xk = xp + r0 * 2.0**-k * direction
                    val = apply_kernel(family, tk, fn, xk, n_samples, rng).value
                    devs.append(abs(val - base))
                final = max(devs[-2:])
                worst = max(worst, final)
                entries.append(
                    Condition5Entry(fn.name, tuple(xp), tuple(direction), tuple(devs), final)
                )
    cond5 = Condition5Report(tuple(entries), tol, worst, bool(worst <= tol))

    return KernelReport(cond3, cond4, cond5)
