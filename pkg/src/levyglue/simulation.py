"""Path simulation: stable sampling, Levy-Ito increments and Euler schemes.

Randomness is organised in blocks of ``BLOCK`` paths.  Block ``b`` of driver
``d`` draws from ``Philox(SeedSequence([seed, d, b]))`` and every block is
simulated in full before truncation, so the first ``N`` paths do not depend
on how many paths were requested or on how blocks are spread over threads.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .levy_core import (
    AtomicJumps,
    InvalidMeasureError,
    LevyTriplet,
    NoJumps,
    StableJumps,
)

BLOCK = 1024

# drivers: separate substreams for the two Levy inputs and the initial law
DRIVER_LEFT = 0
DRIVER_RIGHT = 1
DRIVER_INIT = 2


class SimulationError(RuntimeError):
    pass


def block_rng(seed: int, driver: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(driver), int(block)])))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


# ---------------------------------------------------------------------------
# symmetric stable variates
# ---------------------------------------------------------------------------


def stable_from_uniforms(alpha, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Chambers-Mallows-Stuck map for ``V ~ U(-pi/2, pi/2)``, ``W ~ Exp(1)``.

    Returns a symmetric stable variable with characteristic function
    ``exp(-|xi|^alpha)``; ``alpha`` may be an array matching ``v``.
    """
    a = np.broadcast_to(np.asarray(alpha, dtype=float), np.shape(v))
    out = np.empty(np.shape(v))
    one = a == 1.0
    out[one] = np.tan(v[one])
    rest = ~one
    ar, vr, wr = a[rest], v[rest], w[rest]
    out[rest] = (
        np.sin(ar * vr) / np.cos(vr) ** (1.0 / ar) * (np.cos((1.0 - ar) * vr) / wr) ** ((1.0 - ar) / ar)
    )
    return out


def _draw_vw(rng: np.random.Generator, size):
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = rng.standard_exponential(size)
    return v, w


def sample_stable(alpha: float, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. symmetric stable draws with characteristic function ``exp(-|xi|^alpha)``."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    v, w = _draw_vw(_as_rng(seed), int(n))
    return stable_from_uniforms(alpha, v, w)


# ---------------------------------------------------------------------------
# Levy increments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyIncrementSampler:
    """Increments ``b dt + sqrt(a dt) Z + (jumps above eps) - dt int_{eps<|y|<=1} y nu(dy)``.

    Finite jump measures are simulated in full, so ``eps`` only matters for
    the stable and tempered families.  With ``exact_stable`` a stable jump
    part is drawn exactly as ``(c dt)^(1/alpha) S``.
    """

    triplet: LevyTriplet
    eps_jump: float = 1e-3
    exact_stable: bool = True

    def __post_init__(self):
        if not self.eps_jump > 0:
            raise InvalidMeasureError("small-jump cutoff must be positive")
        rate = self.jump_rate
        if not math.isfinite(rate):
            raise InvalidMeasureError(f"nu(|y| > {self.eps_jump}) is not finite")

    @property
    def _cut(self) -> float:
        return 0.0 if self.triplet.jumps.finite else self.eps_jump

    @property
    def exact(self) -> bool:
        return self.exact_stable and isinstance(self.triplet.jumps, StableJumps)

    @property
    def jump_rate(self) -> float:
        j = self.triplet.jumps
        if isinstance(j, NoJumps):
            return 0.0
        if j.finite:
            return j.mass_beyond(0.0) if not isinstance(j, AtomicJumps) else float(sum(j.weights))
        return j.mass_beyond(self.eps_jump)

    @property
    def compensator(self) -> float:
        """``int_{eps < |y| <= 1} y nu(dy)``."""
        j = self.triplet.jumps
        if isinstance(j, NoJumps) or self.exact:
            return 0.0
        return j.truncated_moment(self._cut, 1.0)

    def sample(self, rng: np.random.Generator, dt: float, size: int) -> np.ndarray:
        t = self.triplet
        out = np.full(size, t.drift * dt)
        if t.diffusion > 0:
            out += math.sqrt(t.diffusion * dt) * rng.standard_normal(size)
        j = t.jumps
        if isinstance(j, NoJumps):
            return out
        if self.exact:
            v, w = _draw_vw(rng, size)
            return out + (j.coefficient * dt) ** (1.0 / j.alpha) * stable_from_uniforms(j.alpha, v, w)
        counts = rng.poisson(self.jump_rate * dt, size)
        total = int(counts.sum())
        if total:
            sizes = j.sample_beyond(self._cut, total, rng)
            owner = np.repeat(np.arange(size), counts)
            out += np.bincount(owner, weights=sizes, minlength=size)
        return out - self.compensator * dt


def _run_blocks(fn: Callable[[int], np.ndarray], n_paths: int, threads: int) -> list:
    n_blocks = max(1, -(-n_paths // BLOCK))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(n_blocks)))
    return [fn(b) for b in range(n_blocks)]


def simulate_levy_increments(
    sampler: LevyIncrementSampler, dt: float, n_steps: int, n_paths: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Array of shape ``(n_paths, n_steps)`` of independent increments."""

    def block(b):
        rng = block_rng(seed, DRIVER_LEFT, b)
        inc = np.empty((BLOCK, n_steps))
        for k in range(n_steps):
            inc[:, k] = sampler.sample(rng, dt, BLOCK)
        return inc

    return np.concatenate(_run_blocks(block, n_paths, threads))[:n_paths]


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

MAGIC = b"LEVYPTH\x00"
VERSION = 1
_HEADER = struct.Struct("<8sIQQdQ")


@dataclass
class PathEnsemble:
    """``N`` paths on the uniform grid ``t_k = k dt``; row ``i`` holds path ``i``.

    Paths are read as right-continuous step functions between grid times.
    """

    times: np.ndarray
    paths: np.ndarray
    seed: int
    scheme: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def n_steps(self) -> int:
        return self.paths.shape[1] - 1

    @property
    def dt(self) -> float:
        return float(self.scheme.get("dt", self.times[1] - self.times[0] if self.times.size > 1 else 0.0))

    @property
    def x0(self) -> np.ndarray:
        return self.paths[:, 0]

    def index_of(self, t: float) -> int:
        k = int(round(t / self.dt))
        if k < 0 or k > self.n_steps or not math.isclose(k * self.dt, t, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"time {t} is not on the ensemble grid")
        return k

    def at(self, t: float) -> np.ndarray:
        return self.paths[:, self.index_of(t)]

    def write_binary(self, path) -> None:
        """Header ``<8sIQQdQ`` (magic, version, M, N, dt, seed) then the ``N x (M+1)`` states."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, self.n_steps, self.n_paths, self.dt, int(self.seed) & (2**64 - 1)))
            fh.write(np.ascontiguousarray(self.paths, dtype="<f8").tobytes())

    @classmethod
    def read_binary(cls, path) -> "PathEnsemble":
        with open(path, "rb") as fh:
            magic, version, m, n, dt, seed = _HEADER.unpack(fh.read(_HEADER.size))
            if magic != MAGIC or version != VERSION:
                raise ValueError(f"{path} is not a version-{VERSION} ensemble dump")
            data = np.frombuffer(fh.read(), dtype="<f8")
        if data.size != n * (m + 1):
            raise ValueError(f"{path}: expected {n * (m + 1)} states, found {data.size}")
        times = dt * np.arange(m + 1)
        return cls(times, data.reshape(n, m + 1).astype(float), seed, {"dt": dt})

    def write_csv(self, path, every: int = 1) -> None:
        """Long format ``path_id, t, x``; ``every`` thins the time grid."""
        idx = np.arange(0, self.n_steps + 1, every)
        ids = np.repeat(np.arange(self.n_paths), idx.size)
        t = np.tile(self.times[idx], self.n_paths)
        x = self.paths[:, idx].ravel()
        table = np.empty(ids.size, dtype=[("i", "i8"), ("t", "f8"), ("x", "f8")])
        table["i"], table["t"], table["x"] = ids, t, x
        np.savetxt(path, table, fmt=["%d", "%.17g", "%.17g"], delimiter=",", header="path_id,t,x", comments="")


def _time_grid(T: float, dt: float) -> tuple[np.ndarray, int]:
    m = int(round(T / dt))
    if m < 1 or not math.isclose(m * dt, T, rel_tol=1e-9):
        raise ValueError(f"T={T} is not a whole number of steps dt={dt}")
    return dt * np.arange(m + 1), m


def initial_values(x0, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` starting points: a number, an array, a callable ``(rng, n)`` or a law dict."""
    if callable(x0):
        return np.asarray(x0(rng, n), dtype=float)
    if isinstance(x0, dict):
        kind = x0.get("kind")
        if kind == "point":
            return np.full(n, float(x0["value"]))
        if kind == "uniform":
            return rng.uniform(float(x0["low"]), float(x0["high"]), n)
        if kind == "normal":
            return rng.normal(float(x0["mean"]), float(x0["std"]), n)
        raise ValueError(f"unknown initial law {kind!r}")
    arr = np.asarray(x0, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.size < n:
        raise ValueError("initial value array shorter than the number of paths")
    return arr[:n]


def _check_finite(x: np.ndarray, offset: int, k: int):
    bad = ~np.isfinite(x)
    if np.any(bad):
        raise SimulationError(f"non-finite state in path {offset + int(np.argmax(bad))} at step {k}")


def _driver_seeds(seed, n: int) -> tuple:
    if isinstance(seed, (tuple, list)):
        if len(seed) != n:
            raise ValueError(f"expected {n} driver seeds, got {len(seed)}")
        return tuple(int(s) for s in seed)
    return (int(seed),) * n


def simulate_levy_paths(
    triplet: LevyTriplet, x0, T: float, dt: float, n_paths: int, seed, eps_jump: float = 1e-3,
    exact_stable: bool = True, threads: int = 1,
) -> PathEnsemble:
    """Single Levy process; uses the same block substreams as the left driver of the glued scheme."""
    sampler = LevyIncrementSampler(triplet, eps_jump, exact_stable)
    times, m = _time_grid(T, dt)
    s_drv, s_init = _driver_seeds(seed, 2)

    def block(b):
        x = initial_values(x0, BLOCK, block_rng(s_init, DRIVER_INIT, b)) if not _is_fixed(x0) else _fixed(x0, b)
        rng = block_rng(s_drv, DRIVER_LEFT, b)
        out = np.empty((BLOCK, m + 1))
        out[:, 0] = x
        for k in range(m):
            x = x + sampler.sample(rng, dt, BLOCK)
            _check_finite(x, b * BLOCK, k + 1)
            out[:, k + 1] = x
        return out

    paths = np.concatenate(_run_blocks(block, n_paths, threads))[:n_paths]
    scheme = {"kind": "levy", "dt": dt, "eps_jump": eps_jump, "exact_stable": sampler.exact}
    return PathEnsemble(times, paths, _root_seed(seed), scheme)


def _is_fixed(x0) -> bool:
    return isinstance(x0, np.ndarray) and x0.ndim == 1


def _fixed(x0: np.ndarray, b: int) -> np.ndarray:
    part = np.asarray(x0[b * BLOCK : (b + 1) * BLOCK], dtype=float)
    return np.concatenate([part, np.zeros(BLOCK - part.size)]) if part.size < BLOCK else part


def _root_seed(seed) -> int:
    return int(seed[0]) if isinstance(seed, (tuple, list)) else int(seed)


def simulate_glued_sde(
    left: LevyTriplet,
    right: LevyTriplet,
    x0,
    T: float,
    dt: float,
    n_paths: int,
    seed,
    threshold: float = 0.0,
    eps_jump: float = 1e-3,
    exact_stable: bool = True,
    threads: int = 1,
) -> PathEnsemble:
    """Left-point Euler scheme ``X += 1{X <= x0} dL1 + 1{X > x0} dL2``.

    Both drivers are sampled at every step from their own substreams.
    ``seed`` may be an int or a tuple ``(left, right, init)`` of seeds.
    """
    s1 = LevyIncrementSampler(left, eps_jump, exact_stable)
    s2 = LevyIncrementSampler(right, eps_jump, exact_stable)
    times, m = _time_grid(T, dt)
    seeds = _driver_seeds(seed, 3)

    def block(b):
        x = initial_values(x0, BLOCK, block_rng(seeds[2], DRIVER_INIT, b)) if not _is_fixed(x0) else _fixed(x0, b)
        r1 = block_rng(seeds[0], DRIVER_LEFT, b)
        r2 = block_rng(seeds[1], DRIVER_RIGHT, b)
        out = np.empty((BLOCK, m + 1))
        out[:, 0] = x
        for k in range(m):
            d1 = s1.sample(r1, dt, BLOCK)
            d2 = s2.sample(r2, dt, BLOCK)
            x = x + np.where(x <= threshold, d1, d2)
            _check_finite(x, b * BLOCK, k + 1)
            out[:, k + 1] = x
        return out

    paths = np.concatenate(_run_blocks(block, n_paths, threads))[:n_paths]
    scheme = {
        "kind": "glued",
        "dt": dt,
        "eps_jump": eps_jump,
        "threshold": threshold,
        "exact_stable": s1.exact and s2.exact,
    }
    return PathEnsemble(times, paths, _root_seed(seed), scheme)


def simulate_stable_like(
    alpha,
    x0,
    T: float,
    dt: float,
    n_paths: int,
    seed,
    threads: int = 1,
) -> PathEnsemble:
    """Euler scheme with increments ``dt^(1/alpha(X_k)) S_{alpha(X_k)}``.

    ``alpha`` is a number in ``(0, 2]`` or a callable such as
    :class:`StabilityIndexFn` or a mollified index.
    """
    if callable(alpha):
        index = alpha
    else:
        a = float(alpha)
        if not 0.0 < a <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {a}")
        index = None
    times, m = _time_grid(T, dt)
    s_drv, s_init = _driver_seeds(seed, 2)

    def block(b):
        x = initial_values(x0, BLOCK, block_rng(s_init, DRIVER_INIT, b)) if not _is_fixed(x0) else _fixed(x0, b)
        rng = block_rng(s_drv, DRIVER_LEFT, b)
        out = np.empty((BLOCK, m + 1))
        out[:, 0] = x
        for k in range(m):
            v, w = _draw_vw(rng, BLOCK)
            ak = np.full(BLOCK, a) if index is None else np.asarray(index(x), dtype=float)
            x = x + dt ** (1.0 / ak) * stable_from_uniforms(ak, v, w)
            _check_finite(x, b * BLOCK, k + 1)
            out[:, k + 1] = x
        return out

    paths = np.concatenate(_run_blocks(block, n_paths, threads))[:n_paths]
    return PathEnsemble(times, paths, _root_seed(seed), {"kind": "stable_like", "dt": dt})


def empirical_cf(samples: np.ndarray, xi: Sequence[float]) -> np.ndarray:
    s = np.asarray(samples, dtype=float)
    return np.array([np.mean(np.exp(1j * x * s)) for x in np.atleast_1d(xi)])


__all__ = [
    "BLOCK",
    "LevyIncrementSampler",
    "PathEnsemble",
    "SimulationError",
    "block_rng",
    "empirical_cf",
    "initial_values",
    "sample_stable",
    "simulate_glued_sde",
    "simulate_levy_increments",
    "simulate_levy_paths",
    "simulate_stable_like",
    "stable_from_uniforms",
]
