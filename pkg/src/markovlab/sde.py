"""SDE models on R^d and Euler-Maruyama path machinery.

Models carry their declared structural constants alongside the coefficient
callables: the local monotonicity profile K(R), the growth constant C, the
coefficient-growth exponent m, and the largest moment degree integrable from
the declared growth bounds.  check_coefficients verifies the declarations on
Sobol-sampled points; nothing downstream trusts an unverified declaration.

Simulation is deterministic for a fixed policy: every particle derives its
own substream seed, so results are bit-identical regardless of chunking or
execution order.  Exploding paths are flagged and excluded; the aborted
fraction must stay below ABORT_TOLERANCE.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .statespace import RngPolicy, ScalarField, as_points

__all__ = [
    "ABORT_TOLERANCE",
    "SdeModel",
    "PathEnsemble",
    "McValue",
    "simulate_paths",
    "path_functionals",
    "mc_semigroup",
    "check_coefficients",
    "CoefficientReport",
    "moment_check",
    "MomentReport",
    "ou_model",
    "double_well_model",
    "named_model",
]

# paths are excluded (never silently clipped) when they leave this ball or go non-finite;
# a run is invalid if more than this fraction aborts
ABORT_TOLERANCE = 1e-4
_BLOWUP_RADIUS = 1e12

_MAGIC = b"MLPATHS1"


@dataclass(frozen=True)
class SdeModel:
    """dX = b(X) dt + sigma(X) dW with declared growth structure.

    drift: (n, d) -> (n, d); diffusion: (n, d) -> (n, d, noise_dim).
    local_K(R) bounds 2<x-y, b(x)-b(y)> + |sigma(x)-sigma(y)|_F^2 by K(R)|x-y|^2
    on the ball of radius R; growth_C bounds 2<x, b(x)> + |sigma(x)|_F^2 by
    C(1+|x|^2); growth_m is the exponent with (|b| + |sigma|)/(1+|x|^m) bounded
    (by ratio_bound when declared).
    """

    dim: int
    noise_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray], np.ndarray]
    local_K: Callable[[float], float]
    growth_C: float
    growth_m: float
    ratio_bound: float | None = None
    moment_degree: float = math.inf
    name: str = ""


def ou_model(a: float = 1.0, sigma: float = 1.0, dim: int = 1) -> SdeModel:
    """dX = -a X dt + sigma dW."""
    s = float(sigma)

    def drift(p):
        return -a * p

    def diffusion(p):
        out = np.zeros((len(p), dim, dim))
        idx = np.arange(dim)
        out[:, idx, idx] = s
        return out

    return SdeModel(
        dim=dim,
        noise_dim=dim,
        drift=drift,
        diffusion=diffusion,
        local_K=lambda R: -2.0 * a,
        growth_C=s**2 * dim + 1e-9,
        growth_m=1.0,
        ratio_bound=a + s * math.sqrt(dim) + 1e-9,
        name=f"ou(a={a},sigma={sigma})",
    )


def double_well_model(sigma: float = 1.0) -> SdeModel:
    """dX = (X - X^3) dt + sigma dW, the confining double well."""
    s = float(sigma)

    def drift(p):
        return p - p**3

    def diffusion(p):
        return np.full((len(p), 1, 1), s)

    return SdeModel(
        dim=1,
        noise_dim=1,
        drift=drift,
        diffusion=diffusion,
        local_K=lambda R: 2.0,
        growth_C=2.0 + s**2,
        growth_m=3.0,
        ratio_bound=2.0 + s,
        name=f"double_well(sigma={sigma})",
    )


def named_model(kind: str, params: dict) -> SdeModel:
    """Model lookup for configs: 'ou' or 'double_well'."""
    if kind == "ou":
        return ou_model(params.get("a", 1.0), params.get("sigma", 1.0), params.get("dim", 1))
    if kind == "double_well":
        return double_well_model(params.get("sigma", 1.0))
    raise ValueError(f"unknown sde model kind {kind!r}")


# ---------------------------------------------------------------------------
# simulation core


def _steps_for(T: float, dt: float) -> int:
    K = round(T / dt)
    if K < 1 or abs(K * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"dt={dt} must divide T={T}")
    return K


def _chunk_noise(policy: RngPolicy, stream_id: int, ids: np.ndarray, K: int, d1: int) -> np.ndarray:
    noise = np.empty((len(ids), K, d1))
    seeds = policy.seeds(stream_id, ids)
    for i in range(len(ids)):
        gen = np.random.Generator(np.random.Philox(key=int(seeds[i])))
        noise[i] = gen.standard_normal((K, d1))
    return noise


def _euler_chunk(model: SdeModel, x0: np.ndarray, K: int, dt: float, noise: np.ndarray):
    """Step one particle chunk; yield (k, states, alive) for k = 0..K.

    Dead particles freeze at their last finite state and stop updating.
    """
    M = noise.shape[0]
    X = np.tile(x0.reshape(1, -1), (M, 1))
    alive = np.ones(M, dtype=bool)
    yield 0, X, alive
    sq = math.sqrt(dt)
    for k in range(K):
        b = model.drift(X)
        s = model.diffusion(X)
        cand = X + b * dt + np.einsum("nij,nj->ni", s, noise[:, k, :]) * sq
        bad = ~np.all(np.isfinite(cand), axis=1)
        with np.errstate(invalid="ignore"):
            bad |= np.linalg.norm(np.nan_to_num(cand), axis=1) > _BLOWUP_RADIUS
        upd = alive & ~bad
        X[upd] = cand[upd]
        alive &= ~bad
        yield k + 1, X, alive


@dataclass
class PathEnsemble:
    """Fully stored Euler-Maruyama ensemble."""

    times: np.ndarray  # (K+1,)
    states: np.ndarray  # (N, K+1, d)
    aborted: np.ndarray  # (N,) bool
    x0: np.ndarray
    dt: float
    stream_id: int
    master_seed: int
    model_name: str = ""

    @property
    def aborted_fraction(self) -> float:
        return float(np.mean(self.aborted))

    def save_binary(self, path) -> None:
        """Little-endian layout: magic 'MLPATHS1'; int64 d, N, K+1; float64 dt;
        states as <f8 C-order (N, K+1, d); aborted flags as uint8 (N,)."""
        N, Kp1, d = self.states.shape
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<qqq", d, N, Kp1))
            f.write(struct.pack("<d", self.dt))
            f.write(np.ascontiguousarray(self.states, dtype="<f8").tobytes())
            f.write(self.aborted.astype(np.uint8).tobytes())

    @staticmethod
    def load_binary(path) -> "PathEnsemble":
        with open(path, "rb") as f:
            if f.read(8) != _MAGIC:
                raise ValueError("not a path-ensemble file")
            d, N, Kp1 = struct.unpack("<qqq", f.read(24))
            (dt,) = struct.unpack("<d", f.read(8))
            states = np.frombuffer(f.read(N * Kp1 * d * 8), dtype="<f8").reshape(N, Kp1, d).copy()
            aborted = np.frombuffer(f.read(N), dtype=np.uint8).astype(bool)
        times = dt * np.arange(Kp1)
        return PathEnsemble(times, states, aborted, states[0, 0].copy(), dt, 0, 0)

    def save_terminal_csv(self, path) -> None:
        from .tables import write_csv

        header = [f"x{i}" for i in range(self.states.shape[2])] + ["aborted"]
        rows = [
            list(self.states[i, -1, :]) + [int(self.aborted[i])]
            for i in range(self.states.shape[0])
        ]
        write_csv(path, header, rows)


def simulate_paths(
    model: SdeModel,
    x0,
    T: float,
    dt: float,
    N: int,
    policy: RngPolicy,
    stream_id: int = 0,
    *,
    chunk: int = 4096,
    max_elements: int = 50_000_000,
) -> PathEnsemble:
    """Simulate and store N full paths.  For large N*K use the streaming ops."""
    K = _steps_for(T, dt)
    x0v = as_points(x0, model.dim)[0]
    if N * (K + 1) * model.dim > max_elements:
        raise ValueError(
            f"ensemble of {N}x{K + 1}x{model.dim} exceeds the storage guard; "
            "use mc_semigroup / path_functionals instead"
        )
    states = np.empty((N, K + 1, model.dim))
    aborted = np.zeros(N, dtype=bool)
    for start in range(0, N, chunk):
        ids = np.arange(start, min(start + chunk, N))
        noise = _chunk_noise(policy, stream_id, ids, K, model.noise_dim)
        for k, X, alive in _euler_chunk(model, x0v, K, dt, noise):
            states[ids, k, :] = X
        aborted[ids] = ~alive
    ens = PathEnsemble(
        times=dt * np.arange(K + 1),
        states=states,
        aborted=aborted,
        x0=x0v,
        dt=dt,
        stream_id=stream_id,
        master_seed=policy.master_seed,
        model_name=model.name,
    )
    if ens.aborted_fraction >= ABORT_TOLERANCE:
        raise RuntimeError(
            f"aborted fraction {ens.aborted_fraction:.2e} >= {ABORT_TOLERANCE}; run invalid"
        )
    return ens


def path_functionals(
    model: SdeModel,
    x0,
    T: float,
    dt: float,
    N: int,
    policy: RngPolicy,
    stream_id: int = 0,
    *,
    terminal: Callable[[np.ndarray], np.ndarray] | None = None,
    integrand: Callable[[np.ndarray], np.ndarray] | None = None,
    chunk: int = 4096,
) -> dict:
    """Stream paths without storing them; return per-path functionals.

    terminal(points) is evaluated at X_T; integrand(points) is accumulated
    along each path with the trapezoid rule on the step grid.
    """
    K = _steps_for(T, dt)
    x0v = as_points(x0, model.dim)[0]
    term = np.zeros(N)
    integ = np.zeros(N)
    alive_all = np.ones(N, dtype=bool)
    for start in range(0, N, chunk):
        ids = np.arange(start, min(start + chunk, N))
        noise = _chunk_noise(policy, stream_id, ids, K, model.noise_dim)
        acc = np.zeros(len(ids))
        prev = None
        for k, X, alive in _euler_chunk(model, x0v, K, dt, noise):
            if integrand is not None:
                cur = integrand(X)
                if prev is not None:
                    acc += 0.5 * (prev + cur) * dt
                prev = cur
            if k == K:
                if terminal is not None:
                    term[ids] = terminal(X)
                integ[ids] = acc
                alive_all[ids] = alive
    return {"terminal": term, "integral": integ, "alive": alive_all}


@dataclass(frozen=True)
class McValue:
    value: float
    stderr: float
    n: int
    aborted_fraction: float

    def __float__(self) -> float:
        return self.value


def mc_semigroup(
    model: SdeModel,
    phi: ScalarField,
    t: float,
    x,
    N: int,
    dt: float,
    policy: RngPolicy,
    stream_id: int = 0,
    *,
    chunk: int = 4096,
) -> McValue:
    """Monte Carlo semigroup value E[phi(X(t, x))] with standard error."""
    if phi.tail is None:
        if math.isfinite(model.moment_degree):
            raise ValueError("field has no tail envelope; cannot certify integrability")
    elif phi.tail.degree > model.moment_degree:
        raise ValueError(
            f"field envelope degree {phi.tail.degree} exceeds the model's "
            f"moment degree {model.moment_degree}"
        )
    out = path_functionals(
        model, x, t, dt, N, policy, stream_id, terminal=phi.eval_many, chunk=chunk
    )
    alive = out["alive"]
    frac = 1.0 - float(np.mean(alive))
    if frac >= ABORT_TOLERANCE:
        raise RuntimeError(f"aborted fraction {frac:.2e} >= {ABORT_TOLERANCE}; run invalid")
    vals = out["terminal"][alive]
    return McValue(
        value=float(np.mean(vals)),
        stderr=float(np.std(vals, ddof=1) / math.sqrt(len(vals))),
        n=len(vals),
        aborted_fraction=frac,
    )


# ---------------------------------------------------------------------------
# declared-structure checks


@dataclass(frozen=True)
class CoefficientReport:
    """Worst margins for the declared coefficient conditions (negative = satisfied
    with room; the pass flags allow a tiny scaled roundoff slack)."""

    monotonicity_margin: float  # max of lhs - K(R)|x-y|^2 over sampled pairs
    monotonicity_passed: bool
    growth_margin: float  # max of 2<x,b> + |sigma|^2 - C(1+|x|^2)
    growth_passed: bool
    ratio_sup: float  # sup (|b|+|sigma|)/(1+|x|^m) over samples
    ratio_bound: float | None
    ratio_passed: bool
    radii: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.monotonicity_passed and self.growth_passed and self.ratio_passed


def check_coefficients(
    model: SdeModel,
    sample_pairs: np.ndarray | None = None,
    radii: Sequence[float] = (1.0, 2.0, 4.0),
    *,
    n_pairs: int = 10_000,
) -> CoefficientReport:
    """Verify the declared monotonicity/growth/ratio bounds on sampled points.

    Pairs default to a Sobol design in the cube of each radius, filtered to
    the ball (deterministic, unscrambled).
    """
    d = model.dim
    slack = 1e-9

    def frob2(s):
        return np.sum(s**2, axis=(1, 2))

    mono_margin = -math.inf
    growth_margin = -math.inf
    ratio_sup = 0.0
    for R in radii:
        if sample_pairs is None:
            sob = qmc.Sobol(d=2 * d, scramble=False)
            u = sob.random_base2(max(1, math.ceil(math.log2(n_pairs))))[:n_pairs]
            xy = (2.0 * u - 1.0) * R
            x, y = xy[:, :d], xy[:, d:]
            keep = (np.linalg.norm(x, axis=1) <= R) & (np.linalg.norm(y, axis=1) <= R)
            x, y = x[keep], y[keep]
        else:
            pairs = np.asarray(sample_pairs, dtype=float)
            x, y = pairs[:, :d], pairs[:, d:]
        bx, by = model.drift(x), model.drift(y)
        sx, sy = model.diffusion(x), model.diffusion(y)
        lhs = 2.0 * np.sum((x - y) * (bx - by), axis=1) + frob2(sx - sy)
        gap = lhs - model.local_K(R) * np.sum((x - y) ** 2, axis=1)
        mono_margin = max(mono_margin, float(np.max(gap)))

        g = 2.0 * np.sum(x * bx, axis=1) + frob2(sx) - model.growth_C * (
            1.0 + np.sum(x**2, axis=1)
        )
        growth_margin = max(growth_margin, float(np.max(g)))

        ratio = (np.linalg.norm(bx, axis=1) + np.sqrt(frob2(sx))) / (
            1.0 + np.linalg.norm(x, axis=1) ** model.growth_m
        )
        ratio_sup = max(ratio_sup, float(np.max(ratio)))

    ratio_ok = True if model.ratio_bound is None else bool(ratio_sup <= model.ratio_bound + slack)
    return CoefficientReport(
        monotonicity_margin=mono_margin,
        monotonicity_passed=bool(mono_margin <= slack * max(1.0, abs(mono_margin))),
        growth_margin=growth_margin,
        growth_passed=bool(growth_margin <= slack),
        ratio_sup=ratio_sup,
        ratio_bound=model.ratio_bound,
        ratio_passed=ratio_ok,
        radii=tuple(radii),
    )


@dataclass(frozen=True)
class MomentReport:
    p: float
    empirical: float  # mean of sup_t |X_t|^p
    stderr: float
    bound: float  # C_Tp * (1 + |x0|^p)
    passed: bool


def moment_check(ensemble: PathEnsemble, p: float, C_Tp: float) -> MomentReport:
    """Empirical E[sup_{t<=T} |X_t|^p] against the declared bound."""
    keep = ~ensemble.aborted
    sup_norm = np.max(np.linalg.norm(ensemble.states[keep], axis=2), axis=1)
    vals = sup_norm**p
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    bound = C_Tp * (1.0 + float(np.linalg.norm(ensemble.x0)) ** p)
    return MomentReport(p, mean, se, bound, bool(mean <= bound + 2.0 * se))
