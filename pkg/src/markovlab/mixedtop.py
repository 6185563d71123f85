"""Weighted norms, compact seminorms, mixed-topology seminorms, convergence classification.

The ambient norm is ||phi||_kappa = sup |kappa * phi|.  The mixed topology is
probed through two seminorm families: sup over a compact of |kappa * phi|,
and sup_n a_n * p_{kappa,C_n} for an exhaustion (C_n) with coefficients
a_n -> 0.  A sequence converges in the mixed topology iff it is kappa-norm
bounded AND converges uniformly on every compact of the exhaustion; the
classifier reports both flags separately.

Suprema are computed on finite probe sets (grids); a declared tail envelope
can certify that the truncated sup is the global one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statespace import (
    CompactExhaustion,
    CompactSet,
    Grid,
    ScalarField,
    Weight,
    as_points,
    ball_probe_points,
)

__all__ = [
    "WeightedNormResult",
    "CompactSeminormResult",
    "MixedSeminorm",
    "MixedSeminormResult",
    "ConvergenceVerdict",
    "weighted_norm",
    "compact_seminorm",
    "mixed_seminorm",
    "weightclass_seminorm",
    "classify_convergence",
]


@dataclass(frozen=True)
class WeightedNormResult:
    """Truncated sup of |kappa*phi| with tail certification.

    certified == True means the declared envelope bounds the tail beyond the
    truncation radius by tail_bound <= value, so value is the global sup up
    to probe resolution.
    """

    value: float
    tail_bound: float
    certified: bool

    def __float__(self) -> float:
        return self.value


def _probe_points(phi: ScalarField, radius: float, grid: Grid | np.ndarray | None, dim: int) -> np.ndarray:
    if grid is None:
        if phi.is_sampled:
            pts = phi.grid.node_points()
        else:
            pts = ball_probe_points(radius, dim)
    elif isinstance(grid, Grid):
        pts = grid.node_points()
    else:
        pts = as_points(grid, dim)
    r = np.linalg.norm(pts, axis=1)
    return pts[r <= radius + 1e-12]


def weighted_norm(
    phi: ScalarField,
    kappa: Weight,
    truncation_radius: float,
    *,
    grid: Grid | np.ndarray | None = None,
) -> WeightedNormResult:
    """sup of |kappa*phi| over probes in the ball of truncation_radius.

    Closed-form fields default to a fine symmetric probe lattice; sampled
    fields default to their own nodes.
    """
    if truncation_radius <= 0:
        raise ValueError("truncation_radius must be positive")
    pts = _probe_points(phi, truncation_radius, grid, phi.dim)
    if len(pts) == 0:
        raise ValueError("no probe points inside truncation radius")
    value = float(np.max(np.abs(kappa(pts) * phi.eval_many(pts))))
    if phi.tail is not None:
        tail = phi.tail.tail_sup(kappa, truncation_radius)
    else:
        tail = math.inf
    return WeightedNormResult(value=value, tail_bound=tail, certified=bool(tail <= value))


@dataclass(frozen=True)
class CompactSeminormResult:
    """Sup of |kappa*phi| over probes in a compact, with a local-variation
    interpolation error bound (half the largest jump between adjacent probes)."""

    value: float
    interp_error_bound: float

    def __float__(self) -> float:
        return self.value


def compact_seminorm(
    phi: ScalarField,
    kappa: Weight,
    compact: CompactSet,
    *,
    grid: Grid | np.ndarray | None = None,
    resolution: int = 2049,
) -> CompactSeminormResult:
    """p_{kappa,C}(phi) = sup over probe points in C of |kappa*phi|."""
    if grid is None:
        if phi.is_sampled:
            pts = phi.grid.node_points()
        else:
            pts = ball_probe_points(compact.radius, phi.dim, resolution if phi.dim == 1 else None)
    elif isinstance(grid, Grid):
        pts = grid.node_points()
    else:
        pts = as_points(grid, phi.dim)
    pts = pts[compact.contains(pts)]
    if len(pts) == 0:
        raise ValueError("compact contains no probe points")
    vals = np.abs(kappa(pts) * phi.eval_many(pts))
    if phi.dim == 1 and len(vals) > 1:
        order = np.argsort(pts[:, 0])
        bound = 0.5 * float(np.max(np.abs(np.diff(vals[order]))))
    else:
        bound = float("nan")
    return CompactSeminormResult(value=float(np.max(vals)), interp_error_bound=bound)


@dataclass(frozen=True)
class MixedSeminorm:
    """Finite prefix of (C_n, a_n) plus a declared bound on later coefficients.

    The sup over the unstored tail is certified by
    a_n * p_{kappa,C_n}(phi) <= tail_coefficient_bound * ||phi||_kappa.
    """

    exhaustion: CompactExhaustion
    coefficients: tuple[float, ...]
    tail_coefficient_bound: float | None = None

    def __post_init__(self):
        if len(self.coefficients) != len(self.exhaustion):
            raise ValueError("need one coefficient per compact")
        if any(a <= 0 for a in self.coefficients):
            raise ValueError("coefficients must be positive")

    @property
    def tail_coeff(self) -> float:
        if self.tail_coefficient_bound is not None:
            return self.tail_coefficient_bound
        return min(self.coefficients)


@dataclass(frozen=True)
class MixedSeminormResult:
    value: float
    argmax_index: int  # 1-based, matching the n in a_n * p_{kappa,C_n}
    tail_bound: float

    def __float__(self) -> float:
        return self.value


def mixed_seminorm(
    phi: ScalarField,
    kappa: Weight,
    seminorm: MixedSeminorm,
    *,
    grid: Grid | np.ndarray | None = None,
    norm_bound: float | None = None,
) -> MixedSeminormResult:
    """sup_n a_n * p_{kappa,C_n}(phi) over the stored prefix, reporting the
    achieving n and a bound on the unstored tail (when a norm bound is known)."""
    if grid is None and not phi.is_sampled:
        # shared probe lattice over the largest compact keeps p_{kappa,C_n} nested
        grid = ball_probe_points(seminorm.exhaustion.radii[-1], phi.dim)
    vals = []
    for i, compact in enumerate(seminorm.exhaustion.sets()):
        p = compact_seminorm(phi, kappa, compact, grid=grid).value
        vals.append(seminorm.coefficients[i] * p)
    best = int(np.argmax(vals))
    if norm_bound is None and phi.tail is not None:
        r = seminorm.exhaustion.radii[-1]
        wn = weighted_norm(phi, kappa, max(r, phi.tail.valid_from) * 4, grid=None)
        norm_bound = max(wn.value, wn.tail_bound) if wn.certified else None
    tail = seminorm.tail_coeff * norm_bound if norm_bound is not None else math.inf
    return MixedSeminormResult(value=float(vals[best]), argmax_index=best + 1, tail_bound=float(tail))


def weightclass_seminorm(
    phi: ScalarField,
    kappa: Weight,
    w: ScalarField,
    truncation_radius: float,
    *,
    grid: Grid | np.ndarray | None = None,
) -> WeightedNormResult:
    """p_{kappa,w}(phi) = sup |w * kappa * phi|, for weight-class members w.

    w must be bounded and nonnegative with kappa*w vanishing at infinity;
    boundedness and decay are certified through the declared tail envelopes
    (decay needs combined envelope degree below the kappa exponent).
    """
    if truncation_radius <= 0:
        raise ValueError("truncation_radius must be positive")
    pts = _probe_points(phi, truncation_radius, grid, phi.dim)
    wv = w.eval_many(pts)
    if np.any(wv < -1e-12):
        raise ValueError("weight-class member must be nonnegative")
    value = float(np.max(np.abs(wv * kappa(pts) * phi.eval_many(pts))))
    if phi.tail is not None and w.tail is not None:
        tail = (phi.tail * w.tail).tail_sup(kappa, truncation_radius)
    else:
        tail = math.inf
    return WeightedNormResult(value=value, tail_bound=tail, certified=bool(tail <= value))


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Two-flag verdict for mixed-topology convergence of a sequence prefix.

    norm_bounded: running sup of ||phi_n||_kappa stays within the declared bound.
    compact_uniform: on every compact of the exhaustion, the deviation from the
    limit falls below tol for the tail (second half) of the prefix.
    """

    norm_bounded: bool
    norm_witness: float
    norm_bound: float
    compact_uniform: bool
    compact_trace: tuple[tuple[float, ...], ...]  # per compact: deviation per n
    verdict: str  # 'converges' | 'diverges'
    failure_reason: str | None = None

    @property
    def converges(self) -> bool:
        return self.verdict == "converges"


def classify_convergence(
    sequence,
    limit: ScalarField,
    kappa: Weight,
    exhaustion: CompactExhaustion,
    tol: float,
    *,
    norm_bound: float | None = None,
    norm_radius: float | None = None,
) -> ConvergenceVerdict:
    """Classify a finite prefix (phi_n) against the two-part convergence criterion.

    The computable surrogate: norm boundedness is tested against a declared
    bound (default 10 * (1 + truncated limit norm)); uniform-on-compacts
    requires deviations <= tol for all n in the second half of the prefix.
    """
    seq = list(sequence)
    if len(seq) < 2:
        raise ValueError("need a sequence prefix of length >= 2")
    if tol <= 0:
        raise ValueError("tol must be positive")
    r_max = exhaustion.radii[-1]
    if norm_radius is None:
        norm_radius = 10.0 * r_max
    if norm_bound is None:
        norm_bound = 10.0 * (1.0 + weighted_norm(limit, kappa, norm_radius).value)

    norms = [weighted_norm(f, kappa, norm_radius).value for f in seq]
    norm_witness = float(np.max(norms))
    norm_ok = bool(norm_witness <= norm_bound)

    probes = ball_probe_points(r_max, limit.dim)
    lim_vals = limit.eval_many(probes)
    kap = kappa(probes)
    masks = [c.contains(probes) for c in exhaustion.sets()]
    weighted_devs = [np.abs(kap * (f.eval_many(probes) - lim_vals)) for f in seq]
    trace = []
    tail_start = len(seq) // 2
    compact_ok = True
    worst = ""
    for ci, mask in enumerate(masks):
        devs = [float(np.max(d[mask])) for d in weighted_devs]
        trace.append(tuple(devs))
        tail_max = max(devs[tail_start:])
        if tail_max > tol:
            compact_ok = False
            if not worst:
                worst = (
                    f"deviation {tail_max:.6g} > tol {tol:g} on compact "
                    f"radius {exhaustion.radii[ci]:g}"
                )

    if norm_ok and compact_ok:
        return ConvergenceVerdict(norm_ok, norm_witness, norm_bound, compact_ok, tuple(trace), "converges")
    if not norm_ok:
        reason = f"kappa-norm witness {norm_witness:.6g} exceeds declared bound {norm_bound:g}"
    else:
        reason = worst
    return ConvergenceVerdict(norm_ok, norm_witness, norm_bound, compact_ok, tuple(trace), "diverges", reason)
