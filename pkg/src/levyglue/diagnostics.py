"""Grid-based checks of symbol conditions, bounds and the martingale property."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .approximation import ApproximationSchedule, ExceptionalSets
from .levy_core import StabilityIndexFn, SymbolFn
from .operators import (
    GeneratorSpec,
    GluedApproxSpec,
    GluedSpec,
    LevySpec,
    StableLikeSpec,
    TestFn,
    apply_generator,
    generator_difference_sup,
)
from .simulation import PathEnsemble

_GL = np.polynomial.legendre.leggauss(16)


class InterpolationBudgetError(RuntimeError):
    pass


class DivergentBoundWarning(RuntimeWarning):
    pass


@dataclass
class ConditionReport:
    condition: str
    value: float
    threshold: float
    verdict: str
    grid: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_record(self) -> dict:
        rec = asdict(self)
        return _jsonable(rec)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# symbol conditions
# ---------------------------------------------------------------------------


def _x_grid_for(symbols: Sequence[SymbolFn], x_grid) -> np.ndarray:
    pts = [np.asarray(x_grid, dtype=float).ravel()]
    for s in symbols:
        for c in s.critical_points:
            # both sides of a switching point
            pts.append(np.array([c, np.nextafter(c, math.inf), c + 1e-9]))
    return np.unique(np.concatenate(pts))


def _sym_values(s: SymbolFn, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    if s.x_independent:
        return np.broadcast_to(s(0.0, xi)[None, :], (x.size, xi.size))
    return s(x[:, None], xi[None, :])


def _shell_samples(lo: float, hi: float, k: int = 33) -> np.ndarray:
    pos = np.geomspace(lo, hi, k)
    return np.concatenate([-pos, pos])


def _min_over(symbols, x, xi, fn) -> float:
    return float(min(np.min(fn(_sym_values(s, x, xi), xi)) for s in symbols))


def _max_over(symbols, x, xi, fn) -> float:
    return float(max(np.max(fn(_sym_values(s, x, xi), xi)) for s in symbols))


def check_symbol_conditions(
    symbols: Sequence[SymbolFn],
    xi_grid=None,
    x_grid=None,
    a3_radii: Sequence[float] = tuple(10.0 ** -np.arange(0, 7)),
    a3_threshold: float = 1e-3,
    a4_shells: Sequence[float] = tuple(10.0 ** np.arange(1, 7)),
    a4_threshold: float = 10.0,
) -> list[ConditionReport]:
    """(A1)-(A4) over a finite prefix of a symbol sequence.

    (A3) and (A4) are trend verdicts: the supremum on ``|xi| <= rho`` must
    shrink monotonically as ``rho`` decreases and end below ``a3_threshold``;
    the minimum of ``Re q / log(1 + |xi|)`` on ``[rho_k, rho_{k+1}]`` must
    grow strictly and end above ``a4_threshold``.
    """
    if not symbols:
        raise ValueError("no symbols given")
    if xi_grid is None:
        pos = np.geomspace(1e-3, 1e3, 121)
        xi_grid = np.concatenate([-pos[::-1], [0.0], pos])
    if x_grid is None:
        x_grid = np.linspace(-5.0, 5.0, 201)
    xi = np.asarray(xi_grid, dtype=float).ravel()
    x = _x_grid_for(symbols, x_grid)
    if xi.size == 0 or x.size == 0:
        raise ValueError("empty grid")
    grid = {"x_min": x.min(), "x_max": x.max(), "n_x": x.size, "xi_min": xi.min(), "xi_max": xi.max(), "n_xi": xi.size}
    reports = []

    a1 = _max_over(symbols, x, np.array([0.0]), lambda q, _: np.abs(q))
    reports.append(ConditionReport("A1", a1, 0.0, "pass" if a1 == 0.0 else "fail", grid))

    a2 = _max_over(symbols, x, xi, lambda q, k: np.abs(q) / (1.0 + k**2))
    claimed = max(s.growth_constant for s in symbols)
    reports.append(
        ConditionReport("A2", a2, claimed, "pass" if a2 <= claimed * (1 + 1e-12) else "fail", grid, {"empirical_C": a2})
    )

    radii = sorted(a3_radii, reverse=True)
    a3 = [
        _max_over(symbols, x, np.concatenate([np.linspace(-r, r, 65), _shell_samples(r * 1e-3, r)]), lambda q, _: np.abs(q))
        for r in radii
    ]
    mono = all(b < a for a, b in zip(a3, a3[1:]))
    reports.append(
        ConditionReport(
            "A3", a3[-1], a3_threshold, "pass" if mono and a3[-1] < a3_threshold else "fail", grid,
            {"radii": radii, "sup_values": a3, "monotone": mono},
        )
    )

    shells = sorted(a4_shells)
    a4 = [
        _min_over(symbols, x, _shell_samples(lo, hi), lambda q, k: q.real / np.log1p(np.abs(k)))
        for lo, hi in zip(shells, shells[1:])
    ]
    grows = all(b > a for a, b in zip(a4, a4[1:]))
    reports.append(
        ConditionReport(
            "A4", a4[-1], a4_threshold, "pass" if grows and a4[-1] > a4_threshold else "fail", grid,
            {"shells": shells, "min_ratio": a4, "increasing": grows},
        )
    )
    return reports


def hartman_wintner(
    q: SymbolFn, xi_max: float = 1e8, shells: int = 24, threshold: float = 10.0, last: int = 5
) -> ConditionReport:
    """``Re q(xi) / log(1 + |xi|)`` on geometric shells up to ``xi_max``."""
    if not q.x_independent:
        raise ValueError("the Hartman-Wintner check needs an x-independent symbol")
    edges = np.geomspace(1.0, xi_max, shells + 1)
    ratios = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xi = _shell_samples(lo, hi, 17)
        ratios.append(float(np.min(q(0.0, xi).real / np.log1p(np.abs(xi)))))
    tail = ratios[-last:]
    inc = all(b > a for a, b in zip(tail, tail[1:]))
    verdict = "pass" if inc and ratios[-1] > threshold else "fail"
    return ConditionReport(
        "HW", ratios[-1], threshold, verdict, {"xi_max": xi_max, "shells": shells},
        {"shell_edges": edges, "ratios": ratios, "increasing_tail": inc, "symbol": q.name},
    )


# ---------------------------------------------------------------------------
# exit probability
# ---------------------------------------------------------------------------


def empirical_growth_constant(q: SymbolFn, x_grid=None, xi_grid=None) -> float:
    if xi_grid is None:
        pos = np.geomspace(1e-4, 1e4, 161)
        xi_grid = np.concatenate([-pos, pos])
    x = np.array([0.0]) if q.x_independent else _x_grid_for([q], np.linspace(-5, 5, 201) if x_grid is None else x_grid)
    return _max_over([q], x, np.asarray(xi_grid, dtype=float), lambda v, k: np.abs(v) / (1.0 + k**2))


def exit_probability_check(
    ensemble: PathEnsemble, q: SymbolFn, K: float, t: float, C: float | None = None, x_grid=None
) -> ConditionReport:
    """Compare ``P(sup_{s<=t} |X_s - x| >= K)`` with ``C t sup_{|xi|<=1/K} |q(., xi)|``.

    Pass when the frequency is at most the bound plus three binomial
    standard errors, warn when it is within twice the bound, fail otherwise.
    """
    x0 = ensemble.x0
    if not np.all(x0 == x0[0]):
        raise ValueError("exit check needs a point-started ensemble")
    k = ensemble.index_of(t)
    dev = np.max(np.abs(ensemble.paths[:, : k + 1] - x0[0]), axis=1)
    freq = float(np.mean(dev >= K))
    if C is None:
        C = empirical_growth_constant(q, x_grid)
    xi = np.linspace(-1.0 / K, 1.0 / K, 201)
    xs = np.array([0.0]) if q.x_independent else _x_grid_for([q], np.linspace(-5, 5, 201) if x_grid is None else x_grid)
    sup_q = _max_over([q], xs, xi, lambda v, _: np.abs(v))
    bound = C * t * sup_q
    n = ensemble.n_paths
    p = max(freq, min(bound, 1.0))
    se = math.sqrt(p * (1.0 - p) / n) if 0 < p < 1 else 0.0
    if freq <= bound + 3 * se:
        verdict = "pass"
    elif freq <= 2 * bound + 3 * se:
        verdict = "warn"
    else:
        verdict = "fail"
    lo, hi = _wilson(freq, n)
    return ConditionReport(
        "EXIT", freq, bound, verdict, {"t": t, "K": K, "n_paths": n},
        {"C": C, "sup_q": sup_q, "stderr": se, "ci95": (lo, hi), "margin": bound - freq},
    )


def _wilson(p: float, n: int, z: float = 1.96) -> tuple[float, float]:
    den = 1 + z * z / n
    c = (p + z * z / (2 * n)) / den
    h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, c - h), min(1.0, c + h)


# ---------------------------------------------------------------------------
# transition density bound
# ---------------------------------------------------------------------------


@dataclass
class DensityBound:
    value: float
    t: float
    xi_max: float
    tail: float
    envelope: tuple
    exact: float | None = None

    @property
    def holds(self) -> bool | None:
        return None if self.exact is None else self.exact <= self.value

    def to_record(self) -> dict:
        return _jsonable(asdict(self))


def _inf_re(symbols: Sequence[SymbolFn], xi: np.ndarray, x_grid) -> np.ndarray:
    out = np.full(xi.shape, np.inf)
    for s in symbols:
        if s.x_independent:
            vals = s(0.0, xi).real
        else:
            x = _x_grid_for([s], x_grid)
            vals = np.min(_sym_values(s, x, xi).real, axis=0)
            if s.re_lower_bound is not None:
                vals = np.minimum(vals, s.re_lower_bound(xi))
        out = np.minimum(out, vals)
    return out


def _half_line_nodes(xi_max: float, levels: int = 40):
    first = min(1.0, xi_max)
    geo = first * 2.0 ** -np.arange(levels, -1, -1, dtype=float)
    n_uni = int(math.ceil((xi_max - first) / 0.5))
    edges = np.concatenate([[0.0], geo, np.linspace(first, xi_max, n_uni + 1)[1:]]) if n_uni else np.concatenate([[0.0], geo])
    a, b = edges[:-1], edges[1:]
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    return (mid[:, None] + half[:, None] * _GL[0]).ravel(), (half[:, None] * _GL[1]).ravel()


def transition_density_bound(
    symbols: Sequence[SymbolFn], t: float, x_grid=None, exact: float | None = None, tol: float = 1e-14
) -> DensityBound:
    """``(4 pi)^-1 int exp(-(t/16) inf_{n,z} Re q^n(z, xi)) d xi``.

    The integral runs to ``Xi`` where the integrand drops below ``tol``; the
    remainder uses a power envelope ``c |xi|^gamma`` fitted on the last decade.
    """
    if x_grid is None:
        x_grid = np.linspace(-5.0, 5.0, 401)
    s = t / 16.0
    xi_max = 16.0
    while True:
        probe = np.array([xi_max, -xi_max])
        m = _inf_re(symbols, probe, x_grid)
        if np.all(np.exp(-s * m) * xi_max < tol) or xi_max > 1e7:
            break
        xi_max *= 2.0
    # envelope from the last decade on both half-lines
    fit_xi = np.geomspace(xi_max / 10.0, xi_max, 41)
    envs = []
    for sign in (1.0, -1.0):
        m = _inf_re(symbols, sign * fit_xi, x_grid)
        if np.any(m <= 0):
            envs.append((0.0, 0.0))
            continue
        gamma, logc = np.polyfit(np.log(fit_xi), np.log(m), 1)
        # shift the fitted line down so it stays below every fitted point
        logc = min(logc, float(np.min(np.log(m) - gamma * np.log(fit_xi))))
        envs.append((math.exp(logc), float(gamma)))
    tail = 0.0
    for c, gamma in envs:
        if gamma <= 0 or c <= 0:
            warnings.warn("no power-law lower bound for inf Re q; density bound diverges", DivergentBoundWarning)
            return DensityBound(math.inf, t, xi_max, math.inf, tuple(envs), exact)
        a = s * c
        tail += special.gammaincc(1.0 / gamma, a * xi_max**gamma) * special.gamma(1.0 / gamma) / (gamma * a ** (1.0 / gamma))
    nodes, weights = _half_line_nodes(xi_max)
    body = 0.0
    for sign in (1.0, -1.0):
        body += float(np.sum(np.exp(-s * _inf_re(symbols, sign * nodes, x_grid)) * weights))
    value = (body + tail) / (4.0 * math.pi)
    return DensityBound(value, t, xi_max, tail / (4.0 * math.pi), tuple(envs), exact)


# ---------------------------------------------------------------------------
# martingale test
# ---------------------------------------------------------------------------


def _pieces(spec: GeneratorSpec) -> tuple[np.ndarray, list]:
    """Breakpoints ``d_1 < ... < d_k`` and one spec per piece ``(d_i, d_{i+1}]``.

    Each piece spec agrees with ``spec`` on its piece and extends it
    continuously to the open end, so interpolation never straddles a jump.
    """
    if isinstance(spec, GluedSpec):
        return np.array([spec.threshold]), [LevySpec(spec.left), LevySpec(spec.right)]
    if isinstance(spec, StableLikeSpec):
        a = spec.alpha
        if a.breakpoints.size == 0:
            return np.empty(0), [spec]
        parts = []
        for b in a.branches:
            parts.append(StableLikeSpec(StabilityIndexFn([], [b], bounds=(a.alpha_min, a.alpha_max))))
        return a.breakpoints.copy(), parts
    if isinstance(spec, GluedApproxSpec):
        x0 = spec.threshold
        return np.array([x0, x0 + 1.0 / spec.n]), [spec, spec, spec]
    return np.empty(0), [spec]


def _piece_grid(a: float, b: float, core: tuple[float, float], density: int, ratio: float) -> np.ndarray:
    clo, chi = max(a, core[0]), min(b, core[1])
    pts = [np.array([a, b])]
    if chi > clo:
        pts.append(np.linspace(clo, chi, max(2, int(math.ceil((chi - clo) * density)) + 1)))
        inner_lo, inner_hi = clo, chi
    else:
        inner_lo = inner_hi = min(max(core[0], a), b)
    step = 1.0 / density
    # geometric spacing away from the core on each side
    for start, end, sgn in ((inner_hi, b, 1.0), (inner_lo, a, -1.0)):
        span = sgn * (end - start)
        if span <= 0:
            continue
        n = int(math.ceil(math.log1p(span * (ratio - 1) / step) / math.log(ratio))) + 1
        offs = step * (ratio ** np.arange(n) - 1) / (ratio - 1)
        offs = offs[offs < span]
        pts.append(start + sgn * offs)
    return np.unique(np.concatenate(pts))


class GeneratorCache:
    """Cubic-spline stand-in for ``x -> Af(x)`` on ``[lo, hi]``.

    The grid is uniform near the support of ``f`` and geometric further out;
    pieces are split at discontinuities of the generator.  Midpoint errors
    are checked against ``budget`` and the grid is refined until they pass.
    """

    def __init__(
        self, spec: GeneratorSpec, f: TestFn, lo: float, hi: float, budget: float = 1e-6,
        density: int = 128, ratio: float = 1.08, max_refine: int = 4, route: str = "integral",
    ):
        self.spec, self.f, self.budget = spec, f, budget
        self.breaks, self.piece_specs = _pieces(spec)
        margin = 2.0
        core = (f.support[0] - margin, f.support[1] + margin)
        lo = min(lo, core[0])
        hi = max(hi, core[1])
        edges = np.concatenate([[lo], self.breaks[(self.breaks > lo) & (self.breaks < hi)], [hi]])
        inner = self.breaks[(self.breaks > lo) & (self.breaks < hi)]
        self._inner = inner
        self.splines = []
        self.max_error = 0.0
        for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            piece = self.piece_specs[int(np.searchsorted(self.breaks, 0.5 * (a + b), side="left"))]
            dens, rat = density, ratio
            for attempt in range(max_refine + 1):
                grid = _piece_grid(a, b, core, dens, rat)
                vals = apply_generator(piece, f, grid, route=route)
                spl = CubicSpline(grid, vals)
                mids = 0.5 * (grid[1:] + grid[:-1])
                err = float(np.max(np.abs(spl(mids) - apply_generator(piece, f, mids, route=route)))) if mids.size else 0.0
                if err <= budget:
                    break
                dens, rat = 2 * dens, math.sqrt(rat)
            else:
                raise InterpolationBudgetError(
                    f"Af interpolation error {err:.2e} above budget {budget:.1e} on [{a:.4g}, {b:.4g}]"
                )
            self.max_error = max(self.max_error, err)
            self.splines.append(spl)
        self.lo, self.hi = lo, hi
        self.n_points = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size and (x.min() < self.lo or x.max() > self.hi):
            raise ValueError("state outside the cached range")
        idx = np.searchsorted(self._inner, x, side="left")
        out = np.empty(x.shape)
        for i, spl in enumerate(self.splines):
            m = idx == i
            if np.any(m):
                out[m] = spl(x[m])
        return out


@dataclass(frozen=True)
class WeightDesign:
    """Window ``[t_start, t_end]`` and weights ``h_k`` observed at ``t_k <= t_start``."""

    name: str
    t_start: float
    t_end: float
    weights: tuple = ()  # pairs (t_k, h_k)
    weight_names: tuple = ()


@dataclass
class MartingaleTestReport:
    f_id: str
    h_ids: tuple
    times: tuple
    defect: float
    stderr: float
    z: float
    n_paths: int
    z_max: float = 3.0
    design: str = ""
    interpolation_error: float = 0.0

    @property
    def passed(self) -> bool:
        return abs(self.defect) <= self.z_max * self.stderr

    def to_record(self) -> dict:
        rec = _jsonable(asdict(self))
        rec["verdict"] = "pass" if self.passed else "fail"
        return rec


def _summarise(y: np.ndarray) -> tuple[float, float, float]:
    mean = float(np.mean(y))
    se = float(np.std(y, ddof=1) / math.sqrt(y.size)) if y.size > 1 else math.inf
    if se == 0.0:
        z = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    else:
        z = mean / se
    return mean, se, z


def martingale_defects(
    ensemble: PathEnsemble,
    spec: GeneratorSpec,
    fs: Sequence[TestFn],
    designs: Sequence[WeightDesign],
    z_max: float = 3.0,
    budget: float = 1e-6,
    chunk: int = 4096,
    route: str = "integral",
) -> list[MartingaleTestReport]:
    """Monte-Carlo estimate of ``E[(f(X_t2) - f(X_t1) - int_t1^t2 Af(X_s) ds) prod h_k(X_tk)]``.

    The time integral is the trapezoid rule over every grid state in the window.
    """
    X = ensemble.paths
    dt = ensemble.dt
    lo, hi = float(X.min()), float(X.max())
    pad = 0.1 * max(hi - lo, 1.0)
    kk = [(ensemble.index_of(d.t_start), ensemble.index_of(d.t_end)) for d in designs]
    for d in designs:
        if any(tk > d.t_start + 1e-12 for tk, _ in d.weights):
            raise ValueError(f"weights in design {d.name} observed after the window start")
    reports = []
    for f in fs:
        cache = GeneratorCache(spec, f, lo - pad, hi + pad, budget=budget, route=route)
        ys = [np.empty(X.shape[0]) for _ in designs]
        for s in range(0, X.shape[0], chunk):
            xc = X[s : s + chunk]
            af = cache(xc)
            cum = np.concatenate(
                [np.zeros((xc.shape[0], 1)), np.cumsum(0.5 * dt * (af[:, 1:] + af[:, :-1]), axis=1)], axis=1
            )
            for d, (k1, k2), y in zip(designs, kk, ys):
                val = f(xc[:, k2]) - f(xc[:, k1]) - (cum[:, k2] - cum[:, k1])
                for tk, h in d.weights:
                    val = val * h(xc[:, ensemble.index_of(tk)])
                y[s : s + chunk] = val
        for d, y in zip(designs, ys):
            mean, se, z = _summarise(y)
            reports.append(
                MartingaleTestReport(
                    f.name, tuple(d.weight_names), (d.t_start, d.t_end), mean, se, z, y.size, z_max, d.name,
                    cache.max_error,
                )
            )
    return reports


def martingale_defect(
    ensemble: PathEnsemble, spec: GeneratorSpec, f: TestFn, h_list: Sequence[tuple[float, Callable]], times,
    z_max: float = 3.0, **kw,
) -> MartingaleTestReport:
    """Single ``(f, h, window)`` version of :func:`martingale_defects`."""
    t1, t2 = times
    design = WeightDesign("custom", t1, t2, tuple(h_list), tuple(getattr(h, "__name__", "h") for _, h in h_list))
    return martingale_defects(ensemble, spec, [f], [design], z_max=z_max, **kw)[0]


def default_designs(T: float) -> list[WeightDesign]:
    """Two weight families: no weight on ``[0, T]``, and ``1/(1+x^2)`` at ``T/2`` on ``[T/2, T]``."""

    def lorentz(x):
        return 1.0 / (1.0 + np.asarray(x) ** 2)

    return [
        WeightDesign("unit", 0.0, T, (), ()),
        WeightDesign("lorentz", 0.5 * T, T, ((0.5 * T, lorentz),), ("1/(1+x^2)",)),
    ]


# ---------------------------------------------------------------------------
# schedule and locality checks
# ---------------------------------------------------------------------------


def check_exceptional_sets(sets: ExceptionalSets) -> list[ConditionReport]:
    """(B1): nesting of closures and ``lambda(U_m) <= lambda(U_1) / m``, recomputed from the intervals."""
    ms = sorted(sets.radii)
    worst_gap = math.inf
    for m in ms[:-1]:
        outer, inner = sets.intervals(m), sets.intervals(m + 1)
        for a1, b1 in inner:
            gaps = [min(a1 - a0, b0 - b1) for a0, b0 in outer if a0 <= a1 and b1 <= b0]
            worst_gap = min(worst_gap, max(gaps) if gaps else -math.inf)
    lam = {m: sum(b - a for a, b in sets.intervals(m)) for m in ms}
    ratio = max((lam[m] * m / lam[1] if lam[1] > 0 else 0.0) for m in ms) if ms else 0.0
    nested = worst_gap > 0 or len(ms) < 2 or not len(sets.centers)
    measure_ok = ratio <= 1.0 + 1e-12
    return [
        ConditionReport("B1", float(worst_gap) if math.isfinite(worst_gap) else 0.0, 0.0,
                        "pass" if nested and measure_ok else "fail", {"m_max": max(ms) if ms else 0},
                        {"nested": nested, "max_measure_ratio": ratio, "measures": lam}),
    ]


def check_schedule(schedule: ApproximationSchedule) -> list[ConditionReport]:
    cert = schedule.certificates
    sets = schedule.sets
    s1 = check_exceptional_sets(sets)[0]
    out = [
        ConditionReport("S1", s1.value, 0.0, s1.verdict, s1.grid, s1.details),
        ConditionReport(
            "S2", cert["S2"]["inf"], schedule.eps, "pass" if cert["S2"]["pass"] else "fail",
            {"density": schedule.grid_density}, {"inf": cert["S2"]["inf"], "sup": cert["S2"]["sup"]},
        ),
    ]
    worst = max(schedule.sup_errors[n] * n for n in schedule.sup_errors)
    out.append(
        ConditionReport(
            "S3", worst, 1.0, "pass" if cert["S3"]["pass"] else "fail", {"density": schedule.grid_density},
            {"sup_errors": schedule.sup_errors, "k": schedule.ks},
        )
    )
    return out


def check_locality(spec_n: GluedApproxSpec, f: TestFn, ms: Sequence[int], tol: float = 1e-8) -> ConditionReport:
    """(B2) at finite ``n``: the smoothed and sharp glued generators agree off ``(-1/m, 1/m)``."""
    target = GluedSpec(spec_n.left, spec_n.right, spec_n.threshold)
    sups = {}
    for m in ms:
        region = [(spec_n.threshold - m, spec_n.threshold - 1.0 / m), (spec_n.threshold + 1.0 / m, spec_n.threshold + m)]
        sups[m] = generator_difference_sup(spec_n, target, f, region)
    worst = max(sups.values())
    return ConditionReport("B2", worst, tol, "pass" if worst <= tol else "fail", {"n": spec_n.n, "m": list(ms)}, {"sups": sups})


__all__ = [
    "ConditionReport",
    "DensityBound",
    "DivergentBoundWarning",
    "GeneratorCache",
    "InterpolationBudgetError",
    "MartingaleTestReport",
    "WeightDesign",
    "check_exceptional_sets",
    "check_locality",
    "check_schedule",
    "check_symbol_conditions",
    "default_designs",
    "empirical_growth_constant",
    "exit_probability_check",
    "hartman_wintner",
    "martingale_defect",
    "martingale_defects",
    "transition_density_bound",
]
