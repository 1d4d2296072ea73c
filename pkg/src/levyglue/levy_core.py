"""Levy triplets, characteristic exponents and symbols.

Jump measures form a closed set of tagged families so that the integrability
condition ``int (1 ^ y^2) nu(dy) < inf`` can be certified per family.  Every
family knows its characteristic exponent in closed form; the function
:func:`jump_exponent_quadrature` evaluates the same integral directly and is
kept as an independent cross-check.

Conventions: the exponent ``q`` satisfies ``E exp(i xi L_t) = exp(-t q(xi))``
and the small-jump compensator uses the indicator of ``[-1, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special, stats


class InvalidMeasureError(ValueError):
    """A jump measure is not a Levy measure or a cutoff makes it non-finite."""


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def stable_normalizer(alpha: float) -> float:
    """Return ``h`` with ``int (1 - cos y) h / |y|^(1+alpha) dy = 1``.

    Uses ``int (1 - cos y) |y|^(-1-alpha) dy = pi / (Gamma(1+alpha) sin(pi alpha / 2))``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    return special.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0) / math.pi


def _stable_kernel_constant(alpha: float) -> float:
    # int_R (1 - cos y) |y|^{-1-alpha} dy
    return 1.0 / stable_normalizer(alpha)


# ---------------------------------------------------------------------------
# jump-measure families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoJumps:
    kind = "none"
    symmetric = True
    finite = True

    def exponent(self, xi):
        return np.zeros_like(_as_float_array(xi), dtype=complex)

    def levy_integrability(self) -> float:
        return 0.0

    def mass_beyond(self, eps: float) -> float:
        return 0.0

    def truncated_moment(self, lo: float, hi: float) -> float:
        return 0.0

    def growth_constant(self) -> float:
        return 0.0

    def scaled(self, g: float) -> "NoJumps":
        return self

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class StableJumps:
    """Symmetric stable Levy measure ``scale / |y|^(1+alpha) dy``."""

    alpha: float
    scale: float = field(default=float("nan"))

    kind = "stable"
    symmetric = True
    finite = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidMeasureError(f"stable index must lie in (0, 2), got {self.alpha}")
        if math.isnan(self.scale):
            object.__setattr__(self, "scale", stable_normalizer(self.alpha))
        if not self.scale > 0.0:
            raise InvalidMeasureError(f"stable scale must be positive, got {self.scale}")

    @property
    def coefficient(self) -> float:
        """``c`` in ``q(xi) = c |xi|^alpha``."""
        return self.scale * _stable_kernel_constant(self.alpha)

    def exponent(self, xi):
        xi = _as_float_array(xi)
        return (self.coefficient * np.abs(xi) ** self.alpha).astype(complex)

    def density(self, y):
        y = np.abs(_as_float_array(y))
        with np.errstate(divide="ignore"):
            return self.scale * y ** (-1.0 - self.alpha)

    def near_zero_moments(self, y0: float) -> tuple[float, float]:
        """``int_0^y0 y^2 k(y) dy`` and ``int_0^y0 y^4 k(y) dy`` for one half-line."""
        a = self.alpha
        return (self.scale * y0 ** (2 - a) / (2 - a), self.scale * y0 ** (4 - a) / (4 - a))

    def levy_integrability(self) -> float:
        a = self.alpha
        return 2.0 * self.scale * (1.0 / (2.0 - a) + 1.0 / a)

    def mass_beyond(self, eps: float) -> float:
        if eps <= 0.0:
            return math.inf
        return 2.0 * self.scale * eps ** (-self.alpha) / self.alpha

    def truncated_moment(self, lo: float, hi: float) -> float:
        return 0.0

    def growth_constant(self) -> float:
        return self.coefficient

    def scaled(self, g: float) -> "StableJumps":
        return StableJumps(self.alpha, self.scale * g**self.alpha)

    def sample_beyond(self, eps: float, size: int, rng: np.random.Generator):
        u = rng.random(size)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * eps * (1.0 - u) ** (-1.0 / self.alpha)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": float(self.alpha), "scale": float(self.scale)}


@dataclass(frozen=True)
class TemperedStableJumps:
    """Symmetric tempered stable measure ``scale exp(-lam |y|) / |y|^(1+alpha) dy``."""

    alpha: float
    lam: float
    scale: float = 1.0

    kind = "tempered_stable"
    symmetric = True
    finite = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidMeasureError(f"tempered stable index must lie in (0, 2), got {self.alpha}")
        if not self.lam > 0.0 or not self.scale > 0.0:
            raise InvalidMeasureError("tempering rate and scale must be positive")

    def exponent(self, xi):
        xi = np.abs(_as_float_array(xi))
        a, lam, h = self.alpha, self.lam, self.scale
        if a == 1.0:
            val = 2.0 * h * (xi * np.arctan(xi / lam) - 0.5 * lam * np.log1p((xi / lam) ** 2))
        else:
            val = -2.0 * h * special.gamma(-a) * (
                (lam**2 + xi**2) ** (a / 2) * np.cos(a * np.arctan(xi / lam)) - lam**a
            )
        return val.astype(complex)

    def density(self, y):
        y = np.abs(_as_float_array(y))
        with np.errstate(divide="ignore"):
            return self.scale * np.exp(-self.lam * y) * y ** (-1.0 - self.alpha)

    def _lower_gamma(self, s: float, y0: float) -> float:
        return special.gamma(s) * special.gammainc(s, self.lam * y0) * self.lam ** (-s)

    def near_zero_moments(self, y0: float) -> tuple[float, float]:
        a = self.alpha
        return (self.scale * self._lower_gamma(2 - a, y0), self.scale * self._lower_gamma(4 - a, y0))

    def _tail(self, eps: float) -> float:
        # int_eps^inf exp(-lam y) y^(-1-alpha) dy
        val, _ = integrate.quad(
            lambda y: math.exp(-self.lam * y) * y ** (-1.0 - self.alpha), eps, np.inf, limit=200,
            epsabs=0.0, epsrel=1e-12,
        )
        return val

    def levy_integrability(self) -> float:
        return 2.0 * self.scale * (self._lower_gamma(2 - self.alpha, 1.0) + self._tail(1.0))

    def mass_beyond(self, eps: float) -> float:
        if eps <= 0.0:
            return math.inf
        return 2.0 * self.scale * self._tail(eps)

    def truncated_moment(self, lo: float, hi: float) -> float:
        return 0.0

    def growth_constant(self) -> float:
        # |q(xi)| <= (1 + xi^2) int min(2, y^2/2) nu(dy)
        m2 = self.near_zero_moments(2.0)[0]
        return m2 + 4.0 * self.scale * self._tail(2.0)

    def scaled(self, g: float) -> "TemperedStableJumps":
        return TemperedStableJumps(self.alpha, self.lam / g, self.scale * g**self.alpha)

    def sample_beyond(self, eps: float, size: int, rng: np.random.Generator):
        # Pareto proposal from eps, thinned by exp(-lam (|y| - eps))
        out = np.empty(size)
        filled = 0
        while filled < size:
            n = max(2 * (size - filled), 64)
            prop = eps * (1.0 - rng.random(n)) ** (-1.0 / self.alpha)
            keep = prop[rng.random(n) < np.exp(-self.lam * (prop - eps))]
            take = min(keep.size, size - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": float(self.alpha), "lam": float(self.lam), "scale": float(self.scale)}


@dataclass(frozen=True)
class CompoundPoissonJumps:
    """Finite measure ``rate * N(loc, sigma^2)``; ``sigma == 0`` means a point mass at ``loc``."""

    rate: float
    loc: float = 0.0
    sigma: float = 1.0

    kind = "compound_poisson"
    finite = True

    def __post_init__(self):
        if not self.rate >= 0.0 or not self.sigma >= 0.0:
            raise InvalidMeasureError("compound Poisson rate and sigma must be non-negative")
        if self.sigma == 0.0 and self.loc == 0.0 and self.rate > 0.0:
            raise InvalidMeasureError("a Levy measure carries no mass at 0")

    @property
    def symmetric(self) -> bool:
        return self.loc == 0.0

    def _prob_abs_between(self, lo: float, hi: float) -> float:
        if self.sigma == 0.0:
            return float(lo < abs(self.loc) <= hi)
        d = stats.norm(self.loc, self.sigma)
        return (d.cdf(hi) - d.cdf(lo)) + (d.cdf(-lo) - d.cdf(-hi))

    def _mean_between(self, a: float, b: float) -> float:
        # E[Y; a < Y <= b]
        if self.sigma == 0.0:
            return self.loc * float(a < self.loc <= b)
        za, zb = (a - self.loc) / self.sigma, (b - self.loc) / self.sigma
        return self.loc * (special.ndtr(zb) - special.ndtr(za)) + self.sigma * (
            stats.norm.pdf(za) - stats.norm.pdf(zb)
        )

    def exponent(self, xi):
        xi = _as_float_array(xi)
        cf = np.exp(1j * self.loc * xi - 0.5 * (self.sigma * xi) ** 2)
        return self.rate * (1.0 - cf) + 1j * xi * self.truncated_moment(0.0, 1.0)

    def density(self, y):
        if self.sigma == 0.0:
            raise InvalidMeasureError("point-mass compound Poisson has no density")
        return self.rate * stats.norm.pdf(_as_float_array(y), self.loc, self.sigma)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([self.loc]), np.array([self.rate])

    def levy_integrability(self) -> float:
        return self.rate

    def mass_beyond(self, eps: float) -> float:
        return self.rate * self._prob_abs_between(max(eps, 0.0), math.inf) if eps > 0 else self.rate

    def truncated_moment(self, lo: float, hi: float) -> float:
        """``int_{lo < |y| <= hi} y nu(dy)``."""
        if self.rate == 0.0:
            return 0.0
        if self.sigma == 0.0:
            return self.rate * self.loc * float(lo < abs(self.loc) <= hi)
        # continuous law: endpoints carry no mass
        return self.rate * (self._mean_between(lo, hi) + self._mean_between(-hi, -lo))

    def growth_constant(self) -> float:
        return 2.0 * self.rate + abs(self.truncated_moment(0.0, 1.0))

    def scaled(self, g: float) -> "CompoundPoissonJumps":
        return CompoundPoissonJumps(self.rate, self.loc * g, self.sigma * g)

    def sample_beyond(self, eps: float, size: int, rng: np.random.Generator):
        # finite measure: every jump is simulated, eps is ignored
        if self.sigma == 0.0:
            return np.full(size, self.loc)
        return rng.normal(self.loc, self.sigma, size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rate": float(self.rate), "loc": float(self.loc), "sigma": float(self.sigma)}


@dataclass(frozen=True)
class AtomicJumps:
    """Finite measure with atoms ``weights[i]`` at ``sizes[i]``; meant for tests."""

    sizes: tuple
    weights: tuple

    kind = "table"
    finite = True

    def __post_init__(self):
        sizes = tuple(float(s) for s in self.sizes)
        weights = tuple(float(w) for w in self.weights)
        if len(sizes) != len(weights):
            raise InvalidMeasureError("sizes and weights differ in length")
        if any(s == 0.0 for s in sizes):
            raise InvalidMeasureError("a Levy measure carries no mass at 0")
        if any(not w >= 0.0 for w in weights):
            raise InvalidMeasureError("atom weights must be non-negative")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "weights", weights)

    @property
    def symmetric(self) -> bool:
        pairs = sorted(zip(self.sizes, self.weights))
        mirrored = sorted((-s, w) for s, w in pairs)
        return np.allclose(np.array(pairs), np.array(mirrored), rtol=0, atol=0) if pairs else True

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.sizes), np.array(self.weights)

    def exponent(self, xi):
        xi = _as_float_array(xi)
        s, w = self.atoms()
        small = np.abs(s) <= 1.0
        ph = np.exp(1j * np.multiply.outer(xi, s))
        comp = 1j * np.multiply.outer(xi, s * small)
        return -((ph - 1.0 - comp) * w).sum(axis=-1)

    def levy_integrability(self) -> float:
        s, w = self.atoms()
        return float(np.sum(np.minimum(1.0, s**2) * w))

    def mass_beyond(self, eps: float) -> float:
        s, w = self.atoms()
        return float(np.sum(w[np.abs(s) > eps]))

    def truncated_moment(self, lo: float, hi: float) -> float:
        s, w = self.atoms()
        m = (np.abs(s) > lo) & (np.abs(s) <= hi)
        return float(np.sum(s[m] * w[m]))

    def growth_constant(self) -> float:
        return 2.0 * sum(self.weights) + abs(self.truncated_moment(0.0, 1.0))

    def scaled(self, g: float) -> "AtomicJumps":
        return AtomicJumps(tuple(g * s for s in self.sizes), self.weights)

    def sample_beyond(self, eps: float, size: int, rng: np.random.Generator):
        s, w = self.atoms()
        m = np.abs(s) > eps
        p = w[m] / w[m].sum()
        return rng.choice(s[m], size=size, p=p)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sizes": [float(v) for v in self.sizes], "weights": [float(v) for v in self.weights]}


JumpMeasure = NoJumps | StableJumps | TemperedStableJumps | CompoundPoissonJumps | AtomicJumps

_FAMILIES = {
    "none": NoJumps,
    "stable": StableJumps,
    "tempered_stable": TemperedStableJumps,
    "compound_poisson": CompoundPoissonJumps,
    "table": AtomicJumps,
}


def jump_measure_from_dict(d: dict) -> JumpMeasure:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _FAMILIES:
        raise InvalidMeasureError(f"unknown jump family {kind!r}; expected one of {sorted(_FAMILIES)}")
    cls = _FAMILIES[kind]
    if kind == "table":
        unknown = set(d) - {"sizes", "weights"}
        if unknown:
            raise InvalidMeasureError(f"unknown keys for table jumps: {sorted(unknown)}")
        return cls(tuple(d.get("sizes", ())), tuple(d.get("weights", ())))
    allowed = {f for f in cls.__dataclass_fields__}
    unknown = set(d) - allowed
    if unknown:
        raise InvalidMeasureError(f"unknown keys for {kind} jumps: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in d.items()})


# ---------------------------------------------------------------------------
# triplets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristics ``(b, a, nu)`` of a one-dimensional Levy process."""

    drift: float = 0.0
    diffusion: float = 0.0
    jumps: JumpMeasure = field(default_factory=NoJumps)

    def __post_init__(self):
        if not self.diffusion >= 0.0:
            raise InvalidMeasureError(f"diffusion must be non-negative, got {self.diffusion}")
        if not math.isfinite(self.drift):
            raise InvalidMeasureError("drift must be finite")
        if not math.isfinite(self.jumps.levy_integrability()):
            raise InvalidMeasureError("jump measure violates int (1 ^ y^2) nu(dy) < inf")

    @classmethod
    def stable(cls, alpha: float, coefficient: float = 1.0) -> "LevyTriplet":
        """Pure-jump symmetric stable triplet with exponent ``coefficient * |xi|^alpha``."""
        return cls(0.0, 0.0, StableJumps(alpha, coefficient * stable_normalizer(alpha)))

    @classmethod
    def brownian(cls, diffusion: float = 1.0, drift: float = 0.0) -> "LevyTriplet":
        return cls(drift, diffusion, NoJumps())

    @property
    def symmetric(self) -> bool:
        return self.drift == 0.0 and self.jumps.symmetric

    def scaled(self, g: float) -> "LevyTriplet":
        """Triplet of ``g * L`` for ``g >= 0``, keeping the ``[-1, 1]`` cutoff."""
        if g == 1.0:
            return self
        if g == 0.0:
            return LevyTriplet()
        if g < 0.0:
            raise ValueError("scaling factor must be non-negative")
        # b' = g b + int g y (1{|g y| <= 1} - 1{|y| <= 1}) nu(dy)
        j = self.jumps
        if g < 1.0:
            corr = g * j.truncated_moment(1.0, 1.0 / g)
        else:
            corr = -g * j.truncated_moment(1.0 / g, 1.0)
        return LevyTriplet(g * self.drift + corr, g * g * self.diffusion, j.scaled(g))

    def to_dict(self) -> dict:
        return {"drift": float(self.drift), "diffusion": float(self.diffusion), "jumps": self.jumps.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "LevyTriplet":
        unknown = set(d) - {"drift", "diffusion", "jumps"}
        if unknown:
            raise InvalidMeasureError(f"unknown triplet keys: {sorted(unknown)}")
        jumps = jump_measure_from_dict(d.get("jumps", {"kind": "none"}))
        return cls(float(d.get("drift", 0.0)), float(d.get("diffusion", 0.0)), jumps)


def eval_levy_khinchine(triplet: LevyTriplet, xi) -> np.ndarray:
    """Characteristic exponent ``q(xi)`` of ``triplet`` (killing rate zero)."""
    xi = _as_float_array(xi)
    return -1j * triplet.drift * xi + 0.5 * triplet.diffusion * xi**2 + triplet.jumps.exponent(xi)


# ---------------------------------------------------------------------------
# direct quadrature of the jump integral
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _composite_gl(a: float, b: float, width: float):
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _one_minus_cos(t):
    return 2.0 * np.sin(0.5 * t) ** 2


def _sin_minus_id(t):
    t = np.asarray(t, dtype=float)
    out = np.sin(t) - t
    small = np.abs(t) < 1e-3
    ts = t[small]
    out[small] = -(ts**3) / 6.0 + ts**5 / 120.0
    return out


def jump_exponent_quadrature(jumps: JumpMeasure, xi: float) -> complex:
    """Evaluate ``-int (e^{i xi y} - 1 - i xi y 1{|y|<=1}) nu(dy)`` by quadrature.

    Atoms are summed.  Densities are split at ``|y| = 1``: the inner part is
    integrated in ``log y`` with Gauss-Legendre panels after peeling off a
    Taylor-compensated piece below ``y_min``; the outer part uses QUADPACK's
    Fourier-weighted rules on ``(1, inf)``.
    """
    xi = float(xi)
    if isinstance(jumps, NoJumps) or xi == 0.0:
        return 0j
    if isinstance(jumps, AtomicJumps) or (isinstance(jumps, CompoundPoissonJumps) and jumps.sigma == 0.0):
        s, w = jumps.atoms()
        comp = np.where(np.abs(s) <= 1.0, s, 0.0)
        return complex(-np.sum((np.exp(1j * xi * s) - 1.0 - 1j * xi * comp) * w))

    def k_even(y):
        return jumps.density(y) + jumps.density(-y)

    def k_odd(y):
        return jumps.density(y) - jumps.density(-y)

    # inner part (0, 1]
    y_min = min(1.0, 1e-3 / (1.0 + abs(xi)))
    if hasattr(jumps, "near_zero_moments"):
        m2, m4 = jumps.near_zero_moments(y_min)
        # 1 - cos t = t^2/2 - t^4/24 + ..., both half-lines
        below = 2.0 * (0.5 * xi**2 * m2 - xi**4 * m4 / 24.0)
    else:
        below, _ = integrate.quad(lambda y: float(_one_minus_cos(xi * y) * k_even(y)), 0.0, y_min)
    u, wu = _composite_gl(math.log(y_min), 0.0, 0.05)
    y = np.exp(u)
    re_inner = np.sum(_one_minus_cos(xi * y) * k_even(y) * y * wu)
    im_inner = -np.sum(_sin_minus_id(xi * y) * k_odd(y) * y * wu) if not jumps.symmetric else 0.0
    if not jumps.symmetric:
        im_below, _ = integrate.quad(lambda t: float(_sin_minus_id(np.array([xi * t]))[0] * k_odd(t)), 0.0, y_min)
        im_inner -= im_below

    # outer part (1, inf)
    opts = dict(limlst=200, limit=200)
    plain, _ = integrate.quad(lambda t: float(k_even(t)), 1.0, np.inf, limit=200, epsabs=0.0, epsrel=1e-13)
    osc, _ = integrate.quad(lambda t: float(k_even(t)), 1.0, np.inf, weight="cos", wvar=abs(xi), **opts)
    re_outer = plain - osc
    im_outer = 0.0
    if not jumps.symmetric:
        s_int, _ = integrate.quad(lambda t: float(k_odd(t)), 1.0, np.inf, weight="sin", wvar=abs(xi), **opts)
        im_outer = -math.copysign(1.0, xi) * s_int
    return complex(below + re_inner + re_outer, im_inner + im_outer)


def levy_khinchine_quadrature(triplet: LevyTriplet, xi: float) -> complex:
    """Independent evaluation of :func:`eval_levy_khinchine` at a scalar ``xi``."""
    xi = float(xi)
    return complex(-1j * triplet.drift * xi + 0.5 * triplet.diffusion * xi**2) + jump_exponent_quadrature(
        triplet.jumps, xi
    )


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolFn:
    """Evaluator for ``q(x, xi)`` with the growth constant it claims.

    ``critical_points`` lists locations that any grid-based infimum or
    supremum over ``x`` must include.  ``re_lower_bound``, when given, maps
    ``xi`` to a certified lower bound of ``inf_x Re q(x, xi)``.
    """

    func: Callable
    growth_constant: float
    x_independent: bool = False
    real_valued: bool = False
    critical_points: tuple = ()
    re_lower_bound: Callable | None = None
    name: str = ""

    def __call__(self, x, xi) -> np.ndarray:
        x = _as_float_array(x)
        xi = _as_float_array(xi)
        out = np.asarray(self.func(x, xi), dtype=complex)
        return np.broadcast_to(out, np.broadcast_shapes(x.shape, xi.shape))


def levy_symbol(triplet: LevyTriplet, name: str = "") -> SymbolFn:
    c = abs(triplet.drift) / 2.0 + triplet.diffusion / 2.0 + triplet.jumps.growth_constant()
    return SymbolFn(
        func=lambda x, xi: eval_levy_khinchine(triplet, xi) + 0.0 * x,
        growth_constant=max(c, 1e-300),
        x_independent=True,
        real_valued=triplet.symmetric,
        name=name or "levy",
    )


class StabilityIndexFn:
    """Piecewise stability index ``alpha: R -> (0, 2)`` with finite jump set.

    ``branches[0]`` covers ``(-inf, d_1]``, ``branches[j]`` covers
    ``(d_j, d_{j+1}]`` and ``branches[-1]`` covers ``(d_k, inf)``.  Each branch
    is a constant or a vectorised continuous callable.
    """

    def __init__(self, breakpoints: Sequence[float], branches: Sequence, bounds: tuple | None = None):
        d = np.asarray(breakpoints, dtype=float).ravel()
        if d.size and np.any(np.diff(d) <= 0):
            raise ValueError("breakpoints must be strictly increasing (duplicates are not allowed)")
        if len(branches) != d.size + 1:
            raise ValueError(f"need {d.size + 1} branches for {d.size} breakpoints, got {len(branches)}")
        self.breakpoints = d
        self.branches = tuple(branches)
        if bounds is None:
            bounds = self._estimate_bounds()
        lo, hi = float(bounds[0]), float(bounds[1])
        if not (0.0 < lo <= hi < 2.0):
            raise ValueError(
                f"(S2) stability index must satisfy 0 < inf alpha <= sup alpha < 2, got inf={lo}, sup={hi}"
            )
        self.alpha_min, self.alpha_max = lo, hi

    @classmethod
    def constant(cls, value: float) -> "StabilityIndexFn":
        return cls([], [float(value)])

    @classmethod
    def piecewise_constant(cls, breakpoints: Sequence[float], values: Sequence[float]) -> "StabilityIndexFn":
        return cls(breakpoints, [float(v) for v in values])

    @property
    def is_piecewise_constant(self) -> bool:
        return all(not callable(b) for b in self.branches)

    def _estimate_bounds(self):
        vals = []
        for i, b in enumerate(self.branches):
            if not callable(b):
                vals.append(float(b))
                continue
            lo = self.breakpoints[i - 1] if i > 0 else (self.breakpoints[0] if self.breakpoints.size else 0.0) - 50
            hi = self.breakpoints[i] if i < self.breakpoints.size else lo + 100
            grid = np.linspace(lo, hi, 20001)
            vals.extend([float(np.min(b(grid))), float(np.max(b(grid)))])
        return min(vals), max(vals)

    def branch_index(self, x) -> np.ndarray:
        return np.searchsorted(self.breakpoints, _as_float_array(x), side="left")

    def __call__(self, x) -> np.ndarray:
        x = _as_float_array(x)
        idx = self.branch_index(x)
        out = np.empty(x.shape)
        for i, b in enumerate(self.branches):
            m = idx == i
            if np.any(m):
                out[m] = b(x[m]) if callable(b) else float(b)
        return out

    def to_dict(self) -> dict:
        if not self.is_piecewise_constant:
            raise TypeError("only piecewise-constant stability indices serialise")
        return {"breakpoints": self.breakpoints.tolist(), "values": [float(b) for b in self.branches]}

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityIndexFn":
        unknown = set(d) - {"breakpoints", "values"}
        if unknown:
            raise ValueError(f"unknown stability index keys: {sorted(unknown)}")
        return cls.piecewise_constant(d.get("breakpoints", []), d["values"])

    def __repr__(self):
        return f"StabilityIndexFn(breakpoints={self.breakpoints.tolist()}, branches={self.branches!r})"


def stable_like_symbol(alpha: StabilityIndexFn | Callable, name: str = "") -> SymbolFn:
    """Symbol ``|xi|^{alpha(x)}``; ``|xi|^a <= 1 + xi^2`` for ``a`` in ``(0, 2)``."""
    crit = tuple(getattr(alpha, "breakpoints", ()))
    lo = getattr(alpha, "alpha_min", None)
    hi = getattr(alpha, "alpha_max", None)

    def lower(xi):
        xi = np.abs(_as_float_array(xi))
        if lo is None:
            return None
        return np.minimum(xi**lo, xi**hi)

    return SymbolFn(
        func=lambda x, xi: np.abs(xi) ** alpha(x),
        growth_constant=1.0,
        x_independent=False,
        real_valued=True,
        critical_points=crit,
        re_lower_bound=lower if lo is not None else None,
        name=name or "stable_like",
    )


__all__ = [
    "AtomicJumps",
    "CompoundPoissonJumps",
    "InvalidMeasureError",
    "LevyTriplet",
    "NoJumps",
    "StabilityIndexFn",
    "StableJumps",
    "SymbolFn",
    "TemperedStableJumps",
    "eval_levy_khinchine",
    "jump_exponent_quadrature",
    "jump_measure_from_dict",
    "levy_khinchine_quadrature",
    "levy_symbol",
    "stable_like_symbol",
    "stable_normalizer",
]
