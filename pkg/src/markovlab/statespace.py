"""State space primitives: grids, weights, scalar fields, compact exhaustions, RNG policy.

Everything downstream works over R^d (d = 1, 2, 3) discretized on rectangular
grids.  Scalar fields are either closed-form evaluators or samples on a grid
with multilinear interpolation; no extrapolation is ever performed.  Weights
are the unit weight or the inverse-polynomial family 1/(1 + |x|^m).

Randomness is governed by a single master seed; every consumer derives its
own substream through a stated counter-based hash (SplitMix64), so results
are reproducible regardless of execution order or chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

__all__ = [
    "TailEnvelope",
    "Grid",
    "CompactSet",
    "CompactExhaustion",
    "make_exhaustion",
    "Weight",
    "weight_eval",
    "ScalarField",
    "field_eval",
    "RngPolicy",
    "derive_seed",
    "as_points",
    "ball_probe_points",
    "sin_field",
    "cos_field",
    "identity_field",
    "monomial_field",
    "constant_field",
    "gaussian_field",
    "abs_field",
]


def as_points(x, dim: int) -> np.ndarray:
    """Coerce scalars / vectors / batches to canonical point layout (n, dim)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar point given for dim={dim}")
        return a.reshape(1, 1)
    if a.ndim == 1:
        if a.shape[0] == dim:
            return a.reshape(1, dim)
        if dim == 1:
            return a.reshape(-1, 1)
        raise ValueError(f"cannot interpret shape {a.shape} as points in R^{dim}")
    if a.ndim == 2 and a.shape[1] == dim:
        return a
    raise ValueError(f"cannot interpret shape {a.shape} as points in R^{dim}")


# ---------------------------------------------------------------------------
# tail envelopes


@dataclass(frozen=True)
class TailEnvelope:
    """Declared polynomial tail bound: |phi(x)| <= scale * |x|^degree for |x| >= valid_from.

    Negative degrees express decay; that is what lets weight-class members
    like exp(-x^2) certify that kappa*w vanishes at infinity.
    """

    degree: float
    scale: float = 1.0
    valid_from: float = 1.0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("envelope scale must be nonnegative")
        if self.valid_from <= 0:
            raise ValueError("envelope valid_from must be positive")

    def __mul__(self, other: "TailEnvelope") -> "TailEnvelope":
        return TailEnvelope(
            degree=self.degree + other.degree,
            scale=self.scale * other.scale,
            valid_from=max(self.valid_from, other.valid_from),
        )

    def bound(self, r: float) -> float:
        r = max(r, self.valid_from)
        return self.scale * r**self.degree

    def tail_sup(self, kappa: "Weight", radius: float) -> float:
        """Upper bound for sup_{|x| >= radius} kappa(x) |phi(x)|, +inf if uncertifiable.

        Uses kappa(x) <= min(1, |x|^-m) for the polynomial weight.
        """
        r = max(radius, self.valid_from)
        eff = self.degree - (kappa.m if kappa.kind == "polynomial" else 0.0)
        if eff > 0:
            return math.inf
        return self.scale * r**eff


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    """Rectangular lattice: per-axis closed bounds and step."""

    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    step: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        for name in ("lower", "upper", "step"):
            if len(getattr(self, name)) != self.dim:
                raise ValueError(f"{name} must have length dim={self.dim}")
        for lo, hi, h in zip(self.lower, self.upper, self.step):
            if h <= 0:
                raise ValueError("step must be positive")
            if hi <= lo:
                raise ValueError("upper must exceed lower")
            if round((hi - lo) / h) < 1:
                raise ValueError("each axis needs at least 2 nodes")

    @staticmethod
    def regular(lower, upper, step, dim: int | None = None) -> "Grid":
        if np.isscalar(lower):
            d = dim or 1
            return Grid(d, (float(lower),) * d, (float(upper),) * d, (float(step),) * d)
        lo = tuple(float(v) for v in lower)
        hi = tuple(float(v) for v in upper)
        h = tuple(float(v) for v in step) if not np.isscalar(step) else (float(step),) * len(lo)
        return Grid(len(lo), lo, hi, h)

    def axis(self, i: int) -> np.ndarray:
        n = round((self.upper[i] - self.lower[i]) / self.step[i]) + 1
        return self.lower[i] + self.step[i] * np.arange(n)

    @property
    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.dim)]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    def node_points(self) -> np.ndarray:
        """All lattice nodes as (n, dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.dim)
        ok = np.ones(len(pts), dtype=bool)
        for i in range(self.dim):
            ok &= (pts[:, i] >= self.lower[i] - 1e-12) & (pts[:, i] <= self.upper[i] + 1e-12)
        return ok


# ---------------------------------------------------------------------------
# compacts


@dataclass(frozen=True)
class CompactSet:
    """Centered ball or box of the given radius."""

    radius: float
    shape: str = "ball"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.shape not in ("ball", "box"):
            raise ValueError("shape must be 'ball' or 'box'")

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if self.shape == "ball":
            return np.linalg.norm(pts, axis=1) <= self.radius + 1e-12
        return np.max(np.abs(pts), axis=1) <= self.radius + 1e-12


@dataclass(frozen=True)
class CompactExhaustion:
    """Strictly increasing family of compacts exhausting R^d."""

    radii: tuple[float, ...]
    shape: str = "ball"

    def __post_init__(self):
        if len(self.radii) == 0:
            raise ValueError("exhaustion needs at least one compact")
        r = np.asarray(self.radii)
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")

    def __len__(self) -> int:
        return len(self.radii)

    def __getitem__(self, i: int) -> CompactSet:
        return CompactSet(self.radii[i], self.shape)

    def sets(self) -> list[CompactSet]:
        return [self[i] for i in range(len(self))]


def make_exhaustion(r0: float = 1.0, ratio: float = 2.0, count: int = 6, shape: str = "ball") -> CompactExhaustion:
    """Geometric ladder of compacts r0, r0*ratio, ...  (the default exhaustion)."""
    if r0 <= 0 or ratio <= 1 or count < 1:
        raise ValueError("need r0 > 0, ratio > 1, count >= 1")
    return CompactExhaustion(tuple(r0 * ratio**k for k in range(count)), shape)


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Weight:
    """Unit weight or kappa(x) = 1/(1 + |x|^m), m >= 0."""

    kind: str = "unit"
    m: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unit", "polynomial"):
            raise ValueError("kind must be 'unit' or 'polynomial'")
        if self.kind == "polynomial" and self.m < 0:
            raise ValueError("polynomial weight needs m >= 0")

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if self.kind == "unit":
            return np.ones(len(pts))
        return 1.0 / (1.0 + np.linalg.norm(pts, axis=1) ** self.m)

    @staticmethod
    def unit() -> "Weight":
        return Weight("unit", 0.0)

    @staticmethod
    def polynomial(m: float) -> "Weight":
        return Weight("polynomial", float(m))


def weight_eval(kappa: Weight, x) -> float:
    """kappa at a single point."""
    return float(kappa(np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1))[0])


# ---------------------------------------------------------------------------
# scalar fields


@dataclass(frozen=True)
class ScalarField:
    """A real field on R^d, closed-form or sampled on a grid.

    Sampled fields interpolate multilinearly and refuse points outside the
    grid hull.  Optional closures give exact gradient / Hessian for operator
    application; optional tail envelope certifies behavior at infinity.
    """

    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    grid: Grid | None = None
    values: np.ndarray | None = None
    tail: TailEnvelope | None = None
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    hess: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""
    spectrum: object | None = None  # set for trig polynomials built from spectral atoms
    _interp: object = field(default=None, repr=False, compare=False)

    @staticmethod
    def from_function(fn, dim: int = 1, *, tail=None, grad=None, hess=None, name="", spectrum=None) -> "ScalarField":
        return ScalarField(dim=dim, evaluator=fn, tail=tail, grad=grad, hess=hess, name=name, spectrum=spectrum)

    @staticmethod
    def from_samples(grid: Grid, values: np.ndarray, *, tail=None, name="") -> "ScalarField":
        vals = np.asarray(values, dtype=float)
        if vals.shape != grid.shape:
            if vals.size == int(np.prod(grid.shape)):
                vals = vals.reshape(grid.shape)
            else:
                raise ValueError(f"values shape {vals.shape} incompatible with grid shape {grid.shape}")
        interp = RegularGridInterpolator(grid.axes, vals, method="linear", bounds_error=True)
        return ScalarField(dim=grid.dim, grid=grid, values=vals, tail=tail, name=name, _interp=interp)

    @property
    def is_sampled(self) -> bool:
        return self.values is not None

    def eval_many(self, points) -> np.ndarray:
        pts = as_points(points, self.dim)
        if self.evaluator is not None:
            out = np.asarray(self.evaluator(pts), dtype=float)
            return out.reshape(len(pts))
        try:
            return np.asarray(self._interp(pts), dtype=float)
        except ValueError as e:
            raise ValueError(f"point outside grid hull, no extrapolation: {e}") from None

    def __call__(self, x) -> float:
        return float(self.eval_many(as_points(x, self.dim))[0])

    def grad_many(self, points) -> np.ndarray:
        if self.grad is None:
            raise ValueError(f"field {self.name!r} has no gradient closure")
        pts = as_points(points, self.dim)
        return np.asarray(self.grad(pts), dtype=float).reshape(len(pts), self.dim)

    def hess_many(self, points) -> np.ndarray:
        if self.hess is None:
            raise ValueError(f"field {self.name!r} has no hessian closure")
        pts = as_points(points, self.dim)
        return np.asarray(self.hess(pts), dtype=float).reshape(len(pts), self.dim, self.dim)


def field_eval(phi: ScalarField, x) -> float:
    return phi(x)


def ball_probe_points(radius: float, dim: int = 1, resolution: int | None = None) -> np.ndarray:
    """Deterministic probe lattice covering the closed ball of given radius.

    1-D probes include the endpoints and 0 exactly.
    """
    if resolution is None:
        resolution = {1: 4097, 2: 257, 3: 61}[dim]
    axes = [np.linspace(-radius, radius, resolution) for _ in range(dim)]
    if dim == 1:
        return axes[0].reshape(-1, 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return pts[np.linalg.norm(pts, axis=1) <= radius + 1e-12]


# ---------------------------------------------------------------------------
# standard fields (exact derivatives where cheap; used by tests and configs)


def sin_field() -> ScalarField:
    return ScalarField.from_function(
        lambda p: np.sin(p[:, 0]),
        tail=TailEnvelope(0.0, 1.0),
        grad=lambda p: np.cos(p[:, 0]).reshape(-1, 1),
        hess=lambda p: (-np.sin(p[:, 0])).reshape(-1, 1, 1),
        name="sin",
    )


def cos_field() -> ScalarField:
    return ScalarField.from_function(
        lambda p: np.cos(p[:, 0]),
        tail=TailEnvelope(0.0, 1.0),
        grad=lambda p: (-np.sin(p[:, 0])).reshape(-1, 1),
        hess=lambda p: (-np.cos(p[:, 0])).reshape(-1, 1, 1),
        name="cos",
    )


def identity_field() -> ScalarField:
    return ScalarField.from_function(
        lambda p: p[:, 0].copy(),
        tail=TailEnvelope(1.0, 1.0),
        grad=lambda p: np.ones((len(p), 1)),
        hess=lambda p: np.zeros((len(p), 1, 1)),
        name="x",
    )


def monomial_field(k: int) -> ScalarField:
    if k < 0:
        raise ValueError("monomial degree must be >= 0")
    return ScalarField.from_function(
        lambda p: p[:, 0] ** k,
        tail=TailEnvelope(float(k), 1.0),
        grad=lambda p: (k * p[:, 0] ** max(k - 1, 0)).reshape(-1, 1),
        hess=lambda p: (k * max(k - 1, 0) * p[:, 0] ** max(k - 2, 0)).reshape(-1, 1, 1),
        name=f"x^{k}",
    )


def constant_field(c: float, dim: int = 1) -> ScalarField:
    return ScalarField.from_function(
        lambda p: np.full(len(p), float(c)),
        dim=dim,
        tail=TailEnvelope(0.0, abs(c)),
        grad=lambda p: np.zeros((len(p), dim)),
        hess=lambda p: np.zeros((len(p), dim, dim)),
        name=f"const({c})",
    )


def gaussian_field(center: float = 0.0, width: float = 1.0) -> ScalarField:
    """exp(-((x-c)/w)^2), with decay envelope valid past |c| + 3w."""
    c, w = float(center), float(width)
    vf = max(abs(c) + 3.0 * w, 1.0)
    # crude but certified: exp(-((r-|c|)/w)^2) <= r^-4 for r >= vf when vf is large enough
    while math.exp(-(((vf - abs(c)) / w) ** 2)) > vf**-4.0:
        vf *= 1.5

    def f(p):
        return np.exp(-(((p[:, 0] - c) / w) ** 2))

    def g(p):
        return (f(p) * (-2.0 * (p[:, 0] - c) / w**2)).reshape(-1, 1)

    def h(p):
        u = (p[:, 0] - c) / w
        return (f(p) * (4.0 * u**2 - 2.0) / w**2).reshape(-1, 1, 1)

    return ScalarField.from_function(
        f, tail=TailEnvelope(-4.0, 1.0, valid_from=vf), grad=g, hess=h, name=f"gauss({c},{w})"
    )


def abs_field() -> ScalarField:
    return ScalarField.from_function(
        lambda p: np.abs(p[:, 0]), tail=TailEnvelope(1.0, 1.0), name="abs"
    )


# ---------------------------------------------------------------------------
# rng policy


_MASK = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # SplitMix64 finalizer; bijective on 64-bit words
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master_seed: int, stream_id: int, particle_id: int) -> int:
    """Counter-based substream seed.

    Composition of the SplitMix64 bijection with per-level constant offsets:
    injective in particle_id for fixed (master, stream), and collision-checked
    over used id ranges in the test suite.
    """
    h = _mix64(master_seed)
    h = _mix64(h ^ _mix64((stream_id + _GOLD) & _MASK))
    h = _mix64(h ^ _mix64((particle_id + 0xBF58476D1CE4E5B9) & _MASK))
    return h


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z.astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RngPolicy:
    """Master seed plus substream derivation for every stochastic consumer."""

    master_seed: int

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**63):
            raise ValueError("master_seed must be a nonnegative 63-bit integer")

    def seed(self, stream_id: int, particle_id: int = 0) -> int:
        return derive_seed(self.master_seed, stream_id, particle_id)

    def seeds(self, stream_id: int, particle_ids: np.ndarray) -> np.ndarray:
        """Vectorized derive_seed over particle ids (same hash, array path)."""
        with np.errstate(over="ignore"):
            h = _mix64_vec(np.asarray([self.master_seed], dtype=np.uint64))[0]
            h = _mix64_vec(np.asarray([h], dtype=np.uint64) ^ _mix64_vec(
                np.asarray([(stream_id + _GOLD) & _MASK], dtype=np.uint64)))[0]
            pid = np.asarray(particle_ids, dtype=np.uint64) + np.uint64(0xBF58476D1CE4E5B9)
            return _mix64_vec(np.uint64(h) ^ _mix64_vec(pid))

    def generator(self, stream_id: int, particle_id: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed(stream_id, particle_id)))
