"""Generalized Mehler semigroups through their Fourier representation.

A model is a diagonal linear flow T_t^* xi = (e^{t alpha_j} xi_j) together
with a Lévy triplet (a, R, M).  The exponent

    lambda(xi) = -i<xi, a> + (1/2)<xi, R xi>
                 - int (e^{i<xi, y>} - 1 - i<xi, y>/(1 + |y|^2)) M(dy)

determines the kernel characteristic functions

    mu_hat_t(xi) = exp(- int_0^t lambda(T_s^* xi) ds),

which obey the flow identity mu_hat_{t+s}(xi) = mu_hat_s(xi) mu_hat_t(T_s^* xi).
Semigroup values come from three interchangeable routes: exact spectral
evaluation for trigonometric fields, FFT inversion of mu_hat to a density,
and direct sampling for finite-activity jump parts.  The small-jump
truncation replaces M by its restriction to the annulus eps <= |y| <= 1/eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .statespace import Grid, ScalarField, TailEnvelope

__all__ = [
    "JumpAtoms",
    "AnnulusDensity",
    "LevyTriplet",
    "MehlerModel",
    "SpectralMeasure",
    "DensityResult",
    "MehlerValue",
    "levy_exponent",
    "truncated_exponent",
    "truncate_triplet",
    "mu_charfn",
    "mu_density_fft",
    "sample_mu",
    "mehler_eval",
    "lescot_generator",
    "truncation_convergence_study",
]


@dataclass(frozen=True)
class JumpAtoms:
    """Finite-activity jump part: M({x_k}) = rate_k."""

    points: np.ndarray  # (k, d)
    rates: np.ndarray  # (k,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        rates = np.asarray(self.rates, dtype=float)
        if pts.shape[0] != len(rates):
            raise ValueError("one rate per atom")
        if np.any(rates < 0):
            raise ValueError("atom rates must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "rates", rates)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())


@dataclass(frozen=True)
class AnnulusDensity:
    """1-D jump density on [lo, hi] with declared integrability.

    lo == 0 is allowed for densities with an integrable singularity against
    min(x^2, 1); quadrature then uses the substitution x = hi * u^2, which
    smooths profiles up to x^{-2+delta}.
    """

    density: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    order: int = 256

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ValueError("need 0 <= lo < hi")

    @cached_property
    def _rule(self) -> tuple[np.ndarray, np.ndarray]:
        u, w = np.polynomial.legendre.leggauss(self.order)
        if self.lo == 0.0:
            # map [-1,1] -> u in [0,1] -> x = hi * u^2
            uu = 0.5 * (u + 1.0)
            x = self.hi * uu**2
            jac = self.hi * uu  # d x / d uu * (1/2 from uu map) = hi * uu
            wts = w * jac
        else:
            x = 0.5 * (self.hi - self.lo) * u + 0.5 * (self.hi + self.lo)
            wts = w * 0.5 * (self.hi - self.lo)
        return x, wts * self.density(x)

    def integral(self, g: Callable[[np.ndarray], np.ndarray]) -> complex | np.ndarray:
        """int g(x) density(x) dx; g may return a batch (..., q)."""
        x, w = self._rule
        return g(x) @ w

    @cached_property
    def compensator_mass(self) -> float:
        """int x/(1+x^2) M(dx) over the stored support."""
        return float(np.real(self.integral(lambda x: x / (1.0 + x**2))))

    @cached_property
    def total_mass(self) -> float:
        x, w = self._rule
        return float(np.sum(w))

    @cached_property
    def square_cut_integral(self) -> float:
        """int min(x^2, 1) M(dx): must be finite for a Lévy measure."""
        return float(np.real(self.integral(lambda x: np.minimum(x**2, 1.0))))

    def quadrature_drift(self, g) -> float:
        """Relative change of int g dM when the rule order doubles (nonconvergence probe)."""
        finer = AnnulusDensity(self.density, self.lo, self.hi, order=2 * self.order)
        a = complex(np.asarray(self.integral(g)).ravel()[0])
        b = complex(np.asarray(finer.integral(g)).ravel()[0])
        return abs(a - b) / max(1.0, abs(b))


@dataclass(frozen=True)
class LevyTriplet:
    """(a, R, M): drift vector, PSD covariance, jump measure (atoms and/or 1-D density)."""

    a: np.ndarray  # (d,)
    R: np.ndarray  # (d, d)
    atoms: JumpAtoms | None = None
    density: AnnulusDensity | None = None

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape != (len(a), len(a)):
            raise ValueError("R must be (d, d)")
        if not np.allclose(R, R.T, atol=1e-12):
            raise ValueError("R must be symmetric")
        if np.any(np.linalg.eigvalsh(R) < -1e-10 * max(1.0, float(np.max(np.abs(R))))):
            raise ValueError("R must be positive semidefinite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "R", R)
        if self.atoms is not None and self.atoms.dim != len(a):
            raise ValueError("atom dimension mismatch")
        if self.density is not None:
            if len(a) != 1:
                raise ValueError("density jump parts are 1-D only")
            if not math.isfinite(self.density.square_cut_integral):
                raise ValueError("density fails the min(x^2,1) integrability check")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def finite_activity(self) -> bool:
        if self.density is None:
            return True
        return self.density.lo > 0.0 or math.isfinite(self.density.total_mass)


def _as_xi(xi, d: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 0:
        if d != 1:
            raise ValueError("scalar xi only valid in d=1")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] == d:
            return arr.reshape(1, d), True
        raise ValueError(f"cannot read shape {arr.shape} as frequencies in R^{d}")
    return arr, False


def levy_exponent(triplet: LevyTriplet, xi) -> complex | np.ndarray:
    """lambda(xi); lambda(0) = 0, Re lambda >= 0, lambda(-xi) = conj(lambda(xi))."""
    xs, scalar = _as_xi(xi, triplet.dim)
    out = -1j * (xs @ triplet.a) + 0.5 * np.einsum("ni,ij,nj->n", xs, triplet.R, xs)
    out = out.astype(complex)
    if triplet.atoms is not None:
        phase = xs @ triplet.atoms.points.T  # (n, k)
        comp = 1.0 + np.sum(triplet.atoms.points**2, axis=1)  # (k,)
        term = np.exp(1j * phase) - 1.0 - 1j * phase / comp[None, :]
        out -= term @ triplet.atoms.rates
    if triplet.density is not None:
        xi1 = xs[:, 0]

        def g(y):
            ph = np.outer(xi1, y)
            return np.exp(1j * ph) - 1.0 - 1j * ph / (1.0 + y**2)[None, :]

        out -= triplet.density.integral(g)
    re = np.real(out)
    if np.any(re < -1e-8 * np.maximum(1.0, np.abs(out))):
        raise ValueError("exponent has negative real part; not a valid Lévy exponent")
    return complex(out[0]) if scalar else out


def truncate_triplet(triplet: LevyTriplet, eps: float) -> LevyTriplet:
    """Restrict the jump measure to the annulus eps <= |y| <= 1/eps."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    atoms = None
    if triplet.atoms is not None:
        r = np.linalg.norm(triplet.atoms.points, axis=1)
        keep = (r >= eps) & (r <= 1.0 / eps)
        if np.any(keep):
            atoms = JumpAtoms(triplet.atoms.points[keep], triplet.atoms.rates[keep])
    density = None
    if triplet.density is not None:
        lo = max(triplet.density.lo, eps)
        hi = min(triplet.density.hi, 1.0 / eps)
        if hi > lo:
            density = AnnulusDensity(triplet.density.density, lo, hi, triplet.density.order)
    return LevyTriplet(triplet.a, triplet.R, atoms, density)


def truncated_exponent(triplet: LevyTriplet, eps: float, xi) -> complex | np.ndarray:
    return levy_exponent(truncate_triplet(triplet, eps), xi)


@dataclass(frozen=True)
class MehlerModel:
    """Diagonal drift spectrum alphas (T_t^* = diag(e^{t alpha_j})) plus a triplet."""

    alphas: np.ndarray
    triplet: LevyTriplet
    name: str = ""

    def __post_init__(self):
        al = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        if len(al) != self.triplet.dim:
            raise ValueError("alphas must match triplet dimension")
        object.__setattr__(self, "alphas", al)

    @property
    def dim(self) -> int:
        return self.triplet.dim

    def T_star(self, s: float, xs: np.ndarray) -> np.ndarray:
        return xs * np.exp(s * self.alphas)[None, :]

    def T_map(self, t: float, x: np.ndarray) -> np.ndarray:
        return x * np.exp(t * self.alphas)


def gaussian_ou_mehler(a: float = 1.0, sigma: float = 1.0) -> MehlerModel:
    """The 1-D Gaussian case: alphas = -a, R = sigma^2, no jumps."""
    return MehlerModel(
        alphas=np.array([-a]),
        triplet=LevyTriplet(a=np.zeros(1), R=np.array([[sigma**2]])),
        name=f"gaussian_ou(a={a},sigma={sigma})",
    )


def mu_charfn(model: MehlerModel, t: float, xi, *, time_order: int = 64) -> complex | np.ndarray:
    """mu_hat_t(xi) = exp(-int_0^t lambda(T_s^* xi) ds), Gauss-Legendre in s."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    xs, scalar = _as_xi(xi, model.dim)
    if t == 0.0:
        out = np.ones(len(xs), dtype=complex)
        return complex(out[0]) if scalar else out
    if np.all(model.alphas == 0.0):
        integ = t * np.asarray(levy_exponent(model.triplet, xs), dtype=complex)
    else:
        u, w = np.polynomial.legendre.leggauss(time_order)
        s_nodes = 0.5 * t * (u + 1.0)
        s_wts = 0.5 * t * w
        batch = np.concatenate([model.T_star(s, xs) for s in s_nodes], axis=0)
        lam = np.asarray(levy_exponent(model.triplet, batch), dtype=complex).reshape(
            time_order, len(xs)
        )
        integ = s_wts @ lam
    out = np.exp(-integ)
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class DensityResult:
    field: ScalarField
    imag_residue: float
    min_value: float
    mass: float
    edge_charfn: float


def mu_density_fft(model: MehlerModel, t: float, grid: Grid, *, time_order: int = 64) -> DensityResult:
    """Invert mu_hat_t to a density on a symmetric 1-D grid.

    Refuses when mu_hat has not decayed below 1e-8 at the edge of the dual
    grid (aliasing would corrupt the values); the fix is a finer grid step.
    Checks: imaginary residue <= 1e-10, undershoot >= -1e-8, unit mass
    within 1e-6.
    """
    if grid.dim != 1:
        raise ValueError("density inversion is 1-D")
    if abs(grid.lower[0] + grid.upper[0]) > 1e-9:
        raise ValueError("grid must be symmetric about 0")
    xs = grid.axis(0)
    n, h = len(xs), grid.step[0]
    xi = 2.0 * math.pi * np.fft.fftfreq(n, d=h)
    mh = np.asarray(mu_charfn(model, t, xi, time_order=time_order), dtype=complex)
    edge = float(np.max(np.abs(mh[np.abs(xi) >= 0.9 * np.max(np.abs(xi))])))
    if edge > 1e-8:
        raise ValueError(
            f"characteristic function still {edge:.2e} at the dual-grid edge; "
            f"refusing aliased inversion (reduce the grid step below {h:g})"
        )
    f = np.fft.fft(mh * np.exp(-1j * xi * xs[0])) / (n * h)
    imag_residue = float(np.max(np.abs(f.imag)))
    vals = f.real
    min_value = float(np.min(vals))
    mass = float(np.trapezoid(vals, dx=h))
    if imag_residue > 1e-10:
        raise ValueError(f"imaginary residue {imag_residue:.2e} exceeds 1e-10")
    if min_value < -1e-8:
        raise ValueError(f"density undershoot {min_value:.2e} below -1e-8")
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"density mass {mass!r} differs from 1 by more than 1e-6")
    field = ScalarField.from_samples(grid, vals, name=f"mu_density(t={t:g})")
    return DensityResult(field, imag_residue, min_value, mass, edge)


def _gaussian_cov(model: MehlerModel, t: float) -> np.ndarray:
    al = model.alphas
    pair = al[:, None] + al[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(pair == 0.0, t, (np.exp(pair * t) - 1.0) / np.where(pair == 0.0, 1.0, pair))
    return model.triplet.R * fac


def _flow_integral(model: MehlerModel, t: float) -> np.ndarray:
    """int_0^t e^{s alpha} ds, componentwise."""
    al = model.alphas
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(al == 0.0, t, (np.exp(al * t) - 1.0) / np.where(al == 0.0, 1.0, al))


def sample_mu(model: MehlerModel, t: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exact samples of mu_t for finite-activity jump parts.

    Decomposition: drift (compensator-corrected) + Gaussian with covariance
    int_0^t e^{s alpha} R e^{s alpha} ds + compound Poisson jumps scaled by
    the flow at their arrival times.
    """
    tr = model.triplet
    if tr.density is not None:
        raise ValueError("direct sampling supports atom jump parts only")
    d = model.dim
    I1 = _flow_integral(model, t)
    comp = np.zeros(d)
    if tr.atoms is not None:
        comp = (tr.atoms.points / (1.0 + np.sum(tr.atoms.points**2, axis=1))[:, None]).T @ tr.atoms.rates
    out = np.tile(((tr.a - comp) * I1)[None, :], (n, 1))
    cov = _gaussian_cov(model, t)
    vals, vecs = np.linalg.eigh(cov)
    L = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))
    out += rng.standard_normal((n, d)) @ L.T
    if tr.atoms is not None and tr.atoms.total_rate > 0:
        lam = tr.atoms.total_rate
        counts = rng.poisson(lam * t, size=n)
        total = int(counts.sum())
        if total > 0:
            owner = np.repeat(np.arange(n), counts)
            s = rng.uniform(0.0, t, size=total)
            idx = rng.choice(len(tr.atoms.rates), size=total, p=tr.atoms.rates / lam)
            contrib = np.exp(s[:, None] * model.alphas[None, :]) * tr.atoms.points[idx]
            np.add.at(out, owner, contrib)
    return out


@dataclass(frozen=True)
class MehlerValue:
    value: float
    stderr: float
    method: str

    def __float__(self) -> float:
        return self.value


def mehler_eval(
    model: MehlerModel,
    t: float,
    phi: ScalarField,
    x,
    *,
    method: str = "auto",
    grid: Grid | None = None,
    n: int = 100_000,
    rng: np.random.Generator | None = None,
    time_order: int = 64,
) -> MehlerValue:
    """P_t phi(x) = int phi(T_t x + y) mu_t(dy).

    Routes: 'spectral' (exact through mu_hat, for trig-polynomial fields),
    'density' (FFT inversion + trapezoid), 'mc' (direct sampling).  'auto'
    picks the first applicable in that order.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float)).reshape(model.dim)
    if t == 0.0:
        return MehlerValue(phi(xv), 0.0, "exact-t0")
    if method == "auto":
        if phi.spectrum is not None:
            method = "spectral"
        elif grid is not None:
            method = "density"
        elif rng is not None and model.triplet.finite_activity:
            method = "mc"
        else:
            raise ValueError("no applicable route: need a spectral field, a grid, or an rng")
    if method == "spectral":
        nu: SpectralMeasure = phi.spectrum
        if nu is None:
            raise ValueError("spectral route needs a field with attached spectrum")
        Tx = model.T_map(t, xv)
        mh = np.asarray(mu_charfn(model, t, nu.xis, time_order=time_order), dtype=complex)
        val = np.sum(nu.weights * np.exp(1j * (nu.xis @ Tx)) * mh)
        if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
            raise ValueError(f"spectral value has imaginary residue {val.imag:.2e}")
        return MehlerValue(float(val.real), 0.0, "spectral")
    if method == "density":
        if grid is None:
            raise ValueError("density route needs a grid")
        res = mu_density_fft(model, t, grid, time_order=time_order)
        ys = grid.axis(0)
        shifted = (model.T_map(t, xv)[0] + ys).reshape(-1, 1)
        val = float(np.trapezoid(phi.eval_many(shifted) * res.field.values, dx=grid.step[0]))
        return MehlerValue(val, 0.0, "density")
    if method == "mc":
        if rng is None:
            raise ValueError("mc route needs an rng")
        ys = sample_mu(model, t, n, rng)
        vals = phi.eval_many(model.T_map(t, xv)[None, :] + ys)
        return MehlerValue(
            float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n)), "mc"
        )
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# spectral measures and the Fourier-side generator


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic measure on frequency space with Hermitian symmetry,
    inducing the real field x -> Re sum_j w_j e^{i <xi_j, x>}."""

    xis: np.ndarray  # (k, d)
    weights: np.ndarray  # (k,) complex

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xis, dtype=float))
        if xs.ndim != 2:
            raise ValueError("frequencies must form a (k, d) array")
        if xs.shape[0] == 1 and xs.shape[1] > 1 and np.asarray(self.weights).size == xs.shape[1]:
            xs = xs.T
        w = np.asarray(self.weights, dtype=complex)
        if len(xs) != len(w):
            raise ValueError("one weight per frequency")
        object.__setattr__(self, "xis", xs)
        object.__setattr__(self, "weights", w)
        # Hermitian pairing must hold exactly: for each atom, -xi carries conj weight
        for j in range(len(xs)):
            match = np.where(np.all(xs == -xs[j], axis=1))[0]
            if len(match) == 0 or not np.any(np.abs(w[match] - np.conj(w[j])) <= 1e-15 * (1 + abs(w[j]))):
                raise ValueError("spectral measure is not Hermitian")

    @property
    def dim(self) -> int:
        return self.xis.shape[1]

    @staticmethod
    def cosine(xi0: float, amplitude: float = 1.0) -> "SpectralMeasure":
        x0 = float(np.asarray(xi0).reshape(()))
        return SpectralMeasure(
            np.array([[x0], [-x0]]), np.array([amplitude / 2.0, amplitude / 2.0], dtype=complex)
        )

    @staticmethod
    def sine(xi0: float, amplitude: float = 1.0) -> "SpectralMeasure":
        x0 = float(np.asarray(xi0).reshape(()))
        return SpectralMeasure(
            np.array([[x0], [-x0]]),
            np.array([-0.5j * amplitude, 0.5j * amplitude], dtype=complex),
        )

    @staticmethod
    def constant(c: float) -> "SpectralMeasure":
        return SpectralMeasure(np.zeros((1, 1)), np.array([complex(c)]))

    def __add__(self, other: "SpectralMeasure") -> "SpectralMeasure":
        return SpectralMeasure(
            np.vstack([self.xis, other.xis]), np.concatenate([self.weights, other.weights])
        )

    def induced_field(self, name: str = "") -> ScalarField:
        xis, w = self.xis, self.weights
        d = self.dim

        def f(p):
            return np.real(np.exp(1j * (p @ xis.T)) @ w)

        def grad(p):
            e = np.exp(1j * (p @ xis.T))  # (n, k)
            return np.real(e @ (w[:, None] * (1j * xis)))

        def hess(p):
            e = np.exp(1j * (p @ xis.T))
            quad = -np.einsum("ka,kb->kab", xis, xis)
            return np.real(np.einsum("nk,k,kab->nab", e, w, quad))

        return ScalarField.from_function(
            f,
            dim=d,
            tail=TailEnvelope(0.0, float(np.sum(np.abs(w)))),
            grad=grad,
            hess=hess,
            name=name or "trig-poly",
            spectrum=self,
        )


def lescot_generator(model: MehlerModel, nu: SpectralMeasure, x) -> float:
    """Fourier-side generator value at x for the field induced by nu:
    sum_j w_j (i<A* xi_j, x> - lambda(xi_j)) e^{i <xi_j, x>}."""
    xv = np.atleast_1d(np.asarray(x, dtype=float)).reshape(model.dim)
    lam = np.asarray(levy_exponent(model.triplet, nu.xis), dtype=complex)
    astar = nu.xis * model.alphas[None, :]
    val = np.sum(nu.weights * (1j * (astar @ xv) - lam) * np.exp(1j * (nu.xis @ xv)))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise ValueError(f"generator value has imaginary residue {val.imag:.2e}")
    return float(val.real)


def truncation_convergence_study(
    model: MehlerModel,
    t: float,
    phi: ScalarField,
    compact_radius: float,
    eps_list: Sequence[float],
    *,
    n_probes: int = 201,
    time_order: int = 64,
) -> list[tuple[float, float]]:
    """Rows (eps, sup over the compact of |P_t^{(eps)} phi - P_t phi|).

    Exact through the spectral route; phi must carry a spectrum.
    """
    if phi.spectrum is None:
        raise ValueError("study needs a trig-polynomial field (attached spectrum)")
    nu: SpectralMeasure = phi.spectrum
    xs = np.linspace(-compact_radius, compact_radius, n_probes).reshape(-1, 1)
    rows = []
    full = np.asarray(mu_charfn(model, t, nu.xis, time_order=time_order), dtype=complex)
    for eps in eps_list:
        m_eps = MehlerModel(model.alphas, truncate_triplet(model.triplet, eps))
        trunc = np.asarray(mu_charfn(m_eps, t, nu.xis, time_order=time_order), dtype=complex)
        Tx = xs * np.exp(t * model.alphas)[None, :]
        gap = np.real(np.exp(1j * (Tx @ nu.xis.T)) @ (nu.weights * (trunc - full)))
        rows.append((float(eps), float(np.max(np.abs(gap)))))
    return rows
