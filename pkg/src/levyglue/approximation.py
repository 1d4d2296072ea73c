"""Approximating sequences: glue weights, exceptional sets and mollified indices.

Two constructions live here.  For threshold-glued processes the weights
``g1, g2`` blend the two symbols over ``(0, 1/n)``.  For stable-like
processes the index ``alpha`` is extended continuously off a neighbourhood
of its jump set and then smoothed by convolution with a rescaled bump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .levy_core import LevyTriplet, StabilityIndexFn, SymbolFn, eval_levy_khinchine


class ScheduleError(RuntimeError):
    """The mollification order search hit its cap before meeting the target."""


# ---------------------------------------------------------------------------
# glue weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlueWeights:
    """``g1 = 1`` on ``(-inf, x0]``, ``1 - n (x - x0)`` on ``(x0, x0 + 1/n)``, ``0`` beyond."""

    n: int
    threshold: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    def g1(self, x) -> np.ndarray:
        s = np.asarray(x, dtype=float) - self.threshold
        return np.where(s <= 0.0, 1.0, np.where(s >= 1.0 / self.n, 0.0, 1.0 - self.n * s))

    def g2(self, x) -> np.ndarray:
        return 1.0 - self.g1(x)

    def __call__(self, x) -> tuple[np.ndarray, np.ndarray]:
        g1 = self.g1(x)
        return g1, 1.0 - g1


def glued_approx_symbol(left: LevyTriplet, right: LevyTriplet, n: int, threshold: float = 0.0) -> SymbolFn:
    """Symbol ``q1(g1(x) xi) + q2(g2(x) xi)`` of the smoothed glued operator."""
    w = GlueWeights(n, threshold)

    def q(x, xi):
        g1, g2 = w(x)
        return eval_levy_khinchine(left, g1 * xi) + eval_levy_khinchine(right, g2 * xi)

    c1 = abs(left.drift) / 2 + left.diffusion / 2 + left.jumps.growth_constant()
    c2 = abs(right.drift) / 2 + right.diffusion / 2 + right.jumps.growth_constant()

    def lower(xi):
        # every x has some weight in [1/2, 1]; Re q >= 0 for the other term
        xi = np.abs(np.asarray(xi, dtype=float))
        a = np.linspace(0.5, 1.0, 65)
        vals = [
            np.min(eval_levy_khinchine(t, np.multiply.outer(xi, a)).real, axis=-1) for t in (left, right)
        ]
        return np.minimum(*vals)

    return SymbolFn(
        func=q,
        growth_constant=c1 + c2,
        x_independent=False,
        real_valued=left.symmetric and right.symmetric,
        critical_points=(threshold, threshold + 1.0 / n),
        re_lower_bound=lower,
        name=f"glued_approx(n={n})",
    )


# ---------------------------------------------------------------------------
# exceptional sets
# ---------------------------------------------------------------------------


def derived_set(points: Sequence[float]) -> np.ndarray:
    """Cluster points of a finite set, which is always empty."""
    pts = np.unique(np.asarray(points, dtype=float))
    # a point of a finite set has a punctured neighbourhood free of the set
    return pts[np.zeros(pts.size, dtype=bool)]


def derived_levels(points: Sequence[float]) -> list[np.ndarray]:
    """Split a finite set into ``D^(i) \\ D^(i+1)`` layers of the derived-set hierarchy."""
    current = np.unique(np.asarray(points, dtype=float))
    levels = []
    while current.size:
        nxt = derived_set(current)
        levels.append(np.setdiff1d(current, nxt))
        current = nxt
    return levels


@dataclass(frozen=True)
class ExceptionalSets:
    """Open sets ``U_m``, each a union of intervals ``(d_j - r_j^m, d_j + r_j^m)``."""

    centers: np.ndarray
    radii: dict
    levels: tuple
    rule: str = "radius"

    @property
    def m_max(self) -> int:
        return max(self.radii) if self.radii else 0

    def intervals(self, m: int) -> list[tuple[float, float]]:
        r = self.radii[m]
        return [(float(c - ri), float(c + ri)) for c, ri in zip(self.centers, r)]

    def measure(self, m: int) -> float:
        return float(np.sum(2.0 * self.radii[m]))

    def contains(self, m: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals(m):
            out |= (x > a) & (x < b)
        return out

    def complement_intervals(self, m: int, lo: float, hi: float) -> list[tuple[float, float]]:
        """Closed intervals making up ``[lo, hi] \\ U_m``."""
        pieces = []
        start = lo
        for a, b in sorted(self.intervals(m)):
            if b <= start or a >= hi:
                continue
            if a > start:
                pieces.append((start, min(a, hi)))
            start = max(start, b)
        if start <= hi:
            pieces.append((start, hi))
        return [(a, b) for a, b in pieces if b >= a]

    def is_nested(self, m: int) -> bool:
        """``closure(U_{m+1}) subset U_m`` interval by interval."""
        outer, inner = self.intervals(m), self.intervals(m + 1)
        return all(any(a0 < a1 and b1 < b0 for a0, b0 in outer) for a1, b1 in inner)

    def to_rows(self) -> list[tuple]:
        rows = []
        for m in sorted(self.radii):
            for j, (c, r) in enumerate(zip(self.centers, self.radii[m]), start=1):
                rows.append((m, j, float(c), float(r), float(c - r), float(c + r)))
        return rows


def build_exceptional_sets(D: Sequence[float], m_max: int, rule: str = "radius") -> ExceptionalSets:
    """Neighbourhoods of a finite jump set with shrinking measure.

    ``rule="radius"`` uses ``r_j^m = (1 ^ dist(d_j, D \\ {d_j})) / (m 2^(j+2))``
    with ``j = 1, 2, ...`` counting left to right inside each derived level.
    ``rule="simple"`` uses ``r_j^m = (1 ^ gap_j / 2) / m``, which is
    ``(-1/m, 1/m)`` for a single jump at 0.
    """
    d = np.asarray(D, dtype=float).ravel()
    if d.size and np.unique(d).size != d.size:
        raise ValueError("duplicate breakpoints in D")
    if d.size and np.any(np.diff(d) <= 0):
        raise ValueError("breakpoints must be sorted strictly increasing")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    if rule not in ("radius", "simple"):
        raise ValueError(f"unknown rule {rule!r}")

    levels = derived_levels(d)
    centers = np.concatenate(levels) if levels else np.empty(0)
    base = np.empty(centers.size)
    pos = 0
    for lvl in levels:
        for j, c in enumerate(lvl, start=1):
            others = d[d != c]
            gap = float(np.min(np.abs(others - c))) if others.size else math.inf
            if rule == "radius":
                base[pos] = min(1.0, gap) / 2.0 ** (j + 2)
            else:
                base[pos] = min(1.0, gap / 2.0)
            pos += 1
    order = np.argsort(centers, kind="stable")
    centers, base = centers[order], base[order]
    radii = {m: base / m for m in range(1, m_max + 1)}
    return ExceptionalSets(centers, radii, tuple(levels), rule)


# ---------------------------------------------------------------------------
# mollifier
# ---------------------------------------------------------------------------


def _raw_bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def bump_mass() -> float:
    """``int exp(-1 / (1 - s^2)) ds`` over ``(-1, 1)``."""
    val, _ = integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class Mollifier:
    """``phi_k(x) = k phi(k x)`` with ``phi`` the normalised bump on ``(-1, 1)``."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")

    def __call__(self, x) -> np.ndarray:
        return self.k * _raw_bump(self.k * np.asarray(x, dtype=float)) / bump_mass()

    @property
    def support(self) -> tuple[float, float]:
        return (-1.0 / self.k, 1.0 / self.k)


# ---------------------------------------------------------------------------
# continuous extension and smoothing of the index
# ---------------------------------------------------------------------------


class ContinuousExtension:
    """Continuous ``alpha^(m)`` agreeing with ``alpha`` on ``[-m, m] \\ U_m``.

    Gaps between the kept closed intervals are bridged linearly and the
    function is held constant beyond the outermost kept points.
    """

    def __init__(self, alpha: StabilityIndexFn, sets: ExceptionalSets, m: int):
        self.alpha = alpha
        self.m = m
        self.pieces = sets.complement_intervals(m, -float(m), float(m))
        if not self.pieces:
            raise ValueError(f"[-{m}, {m}] is covered by U_{m}")
        lo = np.array([a for a, _ in self.pieces])
        hi = np.array([b for _, b in self.pieces])
        self._lo, self._hi = lo, hi
        self._vlo = alpha(lo)
        self._vhi = alpha(hi)
        # interpolation skeleton through every piece endpoint
        self.knots = np.ravel(np.column_stack([lo, hi]))
        self._kvals = np.ravel(np.column_stack([self._vlo, self._vhi]))
        self._smooth_branches = not alpha.is_piecewise_constant

    def kinks(self) -> np.ndarray:
        return np.unique(self.knots)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.knots, self._kvals)
        if self._smooth_branches:
            inside = np.zeros(x.shape, dtype=bool)
            for a, b in self.pieces:
                inside |= (x >= a) & (x <= b)
            if np.any(inside):
                out[inside] = self.alpha(x[inside])
        return out

    @property
    def bounds(self) -> tuple[float, float]:
        vals = self._kvals
        if self._smooth_branches:
            grid = np.concatenate([np.linspace(a, b, max(2, int((b - a) * 512) + 1)) for a, b in self.pieces])
            vals = np.concatenate([vals, self.alpha(grid)])
        return float(vals.min()), float(vals.max())


_GL16 = np.polynomial.legendre.leggauss(16)


class MollifiedAlpha:
    """``alpha^(m),k = alpha^(m) * phi_k`` evaluated by kink-aware quadrature.

    The kernel window ``[x - 1/k, x + 1/k]`` is cut at every kink of
    ``alpha^(m)`` inside it and each cell gets 16-point Gauss-Legendre.  The
    result is divided by the same quadrature of ``phi_k`` so that locally
    constant stretches are reproduced to rounding.
    """

    def __init__(self, extension: ContinuousExtension, k: int, panels: int = 4):
        self.extension = extension
        self.k = int(k)
        self.panels = panels
        self.alpha_min, self.alpha_max = extension.bounds
        self._kinks = extension.kinks()

    @property
    def m(self) -> int:
        return self.extension.m

    def __call__(self, x, chunk: int = 4096) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        for s in range(0, flat.size, chunk):
            out[s : s + chunk] = self._eval(flat[s : s + chunk])
        return out.reshape(x.shape)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        k = self.k
        # kernel variable s in [-1, 1]; z = x - s / k
        uni = np.linspace(-1.0, 1.0, self.panels + 1)
        kin = self._kinks
        lo_i = np.searchsorted(kin, x - 1.0 / k, side="right")
        hi_i = np.searchsorted(kin, x + 1.0 / k, side="left")
        width = int(np.max(hi_i - lo_i)) if x.size else 0
        if width > 0:
            idx = lo_i[:, None] + np.arange(width)[None, :]
            valid = idx < hi_i[:, None]
            kz = kin[np.minimum(idx, kin.size - 1)]
            ks = np.where(valid, k * (x[:, None] - kz), 1.0)
            edges = np.sort(np.concatenate([np.broadcast_to(uni, (x.size, uni.size)), ks], axis=1), axis=1)
        else:
            edges = np.broadcast_to(uni, (x.size, uni.size))
        a, b = edges[:, :-1], edges[:, 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes, w = _GL16
        s = mid[:, :, None] + half[:, :, None] * nodes
        ws = half[:, :, None] * w
        phi = _raw_bump(s) * ws
        vals = self.extension(x[:, None, None] - s / k)
        num = np.sum((phi * vals).reshape(x.size, -1), axis=1)
        den = np.sum(phi.reshape(x.size, -1), axis=1)
        return num / den


def mollify_alpha(alpha: StabilityIndexFn, m: int, k: int, sets: ExceptionalSets | None = None) -> MollifiedAlpha:
    """Smooth index ``alpha^(m),k`` built on the exceptional set ``U_m``."""
    if sets is None or m not in sets.radii:
        sets = build_exceptional_sets(alpha.breakpoints, m)
    return MollifiedAlpha(ContinuousExtension(alpha, sets, m), k)


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------


def _closed_grid(pieces, density: int) -> np.ndarray:
    parts = [np.linspace(a, b, max(2, int(math.ceil((b - a) * density)) + 1)) for a, b in pieces]
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass
class ApproximationSchedule:
    """Mollification orders ``k_n`` with the smoothed indices and their certificates."""

    alpha: StabilityIndexFn
    sets: ExceptionalSets
    ks: dict
    alphas: dict
    sup_errors: dict
    bounds: dict
    eps: float
    grid_density: int
    certificates: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return max(self.ks)

    def table(self, x) -> list[tuple[int, float, float]]:
        x = np.asarray(x, dtype=float)
        rows = []
        for n in sorted(self.alphas):
            vals = self.alphas[n](x)
            rows.extend((n, float(xi), float(v)) for xi, v in zip(x, vals))
        return rows


def sup_distance(alpha: StabilityIndexFn, alpha_n: Callable, sets: ExceptionalSets, n: int, density: int = 512):
    pieces = sets.complement_intervals(n, -float(n), float(n))
    grid = _closed_grid(pieces, density)
    if grid.size == 0:
        return 0.0
    return float(np.max(np.abs(alpha_n(grid) - alpha(grid))))


def select_schedule(
    alpha: StabilityIndexFn,
    eps: float,
    n_max: int,
    k_start: int = 1,
    k_cap: int = 2**22,
    grid_density: int = 512,
    rule: str = "radius",
) -> ApproximationSchedule:
    """Pick ``k_n`` for ``n = 1..n_max`` so the smoothed index is within ``1/n`` off ``U_n``.

    ``k`` starts at the previous order and doubles until the grid supremum
    over ``[-n, n] \\ U_n`` drops below ``1/n``.
    """
    if not 0.0 < eps < min(2.0 - alpha.alpha_max, alpha.alpha_min):
        raise ValueError(
            f"(S2) eps must satisfy 0 < eps < min(2 - sup alpha, inf alpha), got eps={eps}"
        )
    sets = build_exceptional_sets(alpha.breakpoints, n_max, rule=rule)
    ks, alphas, errs, bounds = {}, {}, {}, {}
    k = max(1, int(k_start))
    for n in range(1, n_max + 1):
        ext = ContinuousExtension(alpha, sets, n)
        while True:
            an = MollifiedAlpha(ext, k)
            err = sup_distance(alpha, an, sets, n, grid_density)
            if err < 1.0 / n:
                break
            if 2 * k > k_cap:
                raise ScheduleError(f"(S3) n={n}: k={k} reached the cap with sup distance {err:.3e} >= {1.0 / n:.3e}")
            k *= 2
        ks[n], alphas[n], errs[n] = k, an, err
        grid = np.linspace(-n - 2.0, n + 2.0, int((2 * n + 4) * grid_density) + 1)
        vals = an(grid)
        bounds[n] = (float(vals.min()), float(vals.max()))
    sched = ApproximationSchedule(alpha, sets, ks, alphas, errs, bounds, eps, grid_density)
    sched.certificates = certify_schedule(sched)
    return sched


def certify_schedule(s: ApproximationSchedule) -> dict:
    """Check (S1) nesting and measure decay, (S2) bounds and (S3) distances."""
    sets = s.sets
    ms = sorted(sets.radii)
    nested = all(sets.is_nested(m) for m in ms[:-1])
    lam1 = sets.measure(1) if ms else 0.0
    decay = all(sets.measure(m) * m <= lam1 * (1.0 + 1e-12) for m in ms)
    lo = min(b[0] for b in s.bounds.values())
    hi = max(b[1] for b in s.bounds.values())
    s2 = 0.0 < lo and hi < 2.0 and lo >= s.alpha.alpha_min - s.eps and hi <= s.alpha.alpha_max + s.eps
    s3 = all(s.sup_errors[n] < 1.0 / n for n in s.sup_errors)
    return {
        "S1": {"nested": nested, "measure_decay": decay, "pass": nested and decay},
        "S2": {"inf": lo, "sup": hi, "pass": s2},
        "S3": {"sup_errors": dict(s.sup_errors), "pass": s3},
    }


__all__ = [
    "ApproximationSchedule",
    "ContinuousExtension",
    "ExceptionalSets",
    "GlueWeights",
    "MollifiedAlpha",
    "Mollifier",
    "ScheduleError",
    "build_exceptional_sets",
    "bump_mass",
    "certify_schedule",
    "derived_levels",
    "derived_set",
    "glued_approx_symbol",
    "mollify_alpha",
    "select_schedule",
    "sup_distance",
]
