"""Config-driven experiment runner.

Usage::

    levyglue run --config exp.yaml --out results/ [--seed N] [--threads N] [--check]
    levyglue plot-data results/

``run`` is the default subcommand, so ``levyglue --config exp.yaml --out results/``
also works.  The config is YAML (JSON is accepted too); see README.md for the
schema.  A written ``manifest.json`` is itself a valid ``--config``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import platform
import shutil
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy
import yaml

from .approximation import (
    ContinuousExtension,
    MollifiedAlpha,
    build_exceptional_sets,
    glued_approx_symbol,
    select_schedule,
)
from .diagnostics import (
    check_schedule,
    check_symbol_conditions,
    default_designs,
    exit_probability_check,
    hartman_wintner,
    martingale_defects,
    transition_density_bound,
)
from .levy_core import InvalidMeasureError, LevyTriplet, StabilityIndexFn, levy_symbol, stable_like_symbol
from .operators import GluedSpec, StableLikeSpec, canonical_bumps, generator_symbol
from .simulation import PathEnsemble, simulate_glued_sde, simulate_stable_like

SCENARIOS = ("GLUED", "STABLE_LIKE", "DIAGNOSTICS_ONLY")

DEFAULTS = {
    "simulation": {"T": 0.5, "dt": 1e-3, "n_paths": 10000, "x0": 0.0, "eps_jump": 1e-3, "exact_stable": True},
    "diagnostics": {
        "conditions": True,
        "n_symbols": [1, 2, 5, 10, 20],
        "hartman_wintner": True,
        "density_bound": {"t": 1.0},
        "martingale": True,
        "exit": None,
        "histogram": {"times": None, "bins": 50},
    },
    "output": {"csv_every": 10},
}
TOP_KEYS = {"scenario", "seed", "out", "simulation", "glued", "stable_like", "symbol", "diagnostics", "output"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def _merge(defaults: dict, given: dict | None, where: str) -> dict:
    given = {} if given is None else given
    if not isinstance(given, dict):
        raise ConfigError(f"(config) {where} must be a mapping")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"(config) unknown keys in {where}: {sorted(unknown)}")
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict) and v is not None:
            out[k] = _merge(defaults[k], v, f"{where}.{k}")
        else:
            out[k] = v
    return out


def _check_keys(d, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(d, dict):
        raise ConfigError(f"(config) {where} must be a mapping")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"(config) unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"(config) missing keys in {where}: {sorted(missing)}")


def load_config(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if isinstance(raw, dict) and "manifest_version" in raw:
        raw = raw["config"]
    return raw


def _triplet(d, where: str) -> LevyTriplet:
    try:
        return LevyTriplet.from_dict(d)
    except (InvalidMeasureError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _alpha(d, where: str) -> StabilityIndexFn:
    _check_keys(d, {"breakpoints", "values"}, where, {"values"})
    return StabilityIndexFn.from_dict(d)


def resolve_config(raw: dict, seed: int | None = None, out: str | None = None) -> dict:
    """Fill defaults, check every key and validate the referenced specs."""
    if not isinstance(raw, dict):
        raise ConfigError("(config) top level must be a mapping")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"(config) unknown top-level keys: {sorted(unknown)}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"(config) scenario must be one of {SCENARIOS}, got {scenario!r}")
    cfg = {"scenario": scenario}
    cfg["seed"] = int(seed if seed is not None else raw.get("seed", 0))
    if cfg["seed"] < 0:
        raise ConfigError("(config) seed must be non-negative")
    cfg["out"] = out if out is not None else raw.get("out")
    cfg["diagnostics"] = _merge(DEFAULTS["diagnostics"], raw.get("diagnostics"), "diagnostics")
    cfg["output"] = _merge(DEFAULTS["output"], raw.get("output"), "output")
    diag = cfg["diagnostics"]
    if diag["histogram"] is not None:
        _check_keys(diag["histogram"], {"times", "bins"}, "diagnostics.histogram")
    if diag["exit"] is not None:
        _check_keys(diag["exit"], {"K", "t"}, "diagnostics.exit", {"K", "t"})
    if diag["density_bound"] is not None:
        _check_keys(diag["density_bound"], {"t"}, "diagnostics.density_bound", {"t"})

    if scenario == "DIAGNOSTICS_ONLY" and "simulation" in raw:
        raise ConfigError("(config) section 'simulation' does not apply to scenario DIAGNOSTICS_ONLY")
    if scenario != "DIAGNOSTICS_ONLY":
        sim = _merge(DEFAULTS["simulation"], raw.get("simulation"), "simulation")
        if not (sim["T"] > 0 and 0 < sim["dt"] <= sim["T"]):
            raise ConfigError("(config) simulation needs T > 0 and 0 < dt <= T")
        if int(sim["n_paths"]) < 2:
            raise ConfigError("(config) simulation.n_paths must be at least 2")
        if not sim["eps_jump"] > 0:
            raise ConfigError("(config) simulation.eps_jump must be positive")
        sim["n_paths"] = int(sim["n_paths"])
        x0 = sim["x0"]
        if isinstance(x0, dict):
            laws = {"point": {"value"}, "uniform": {"low", "high"}, "normal": {"mean", "std"}}
            if x0.get("kind") not in laws:
                raise ConfigError(f"(config) simulation.x0.kind must be one of {sorted(laws)}")
            _check_keys(x0, laws[x0["kind"]] | {"kind"}, "simulation.x0", laws[x0["kind"]])
        elif not isinstance(x0, (int, float)):
            raise ConfigError("(config) simulation.x0 must be a number or a law mapping")
        cfg["simulation"] = sim
    for key in ("glued", "stable_like", "symbol"):
        if key in raw and not (
            (key == "glued" and scenario == "GLUED")
            or (key == "stable_like" and scenario == "STABLE_LIKE")
            or (key == "symbol" and scenario == "DIAGNOSTICS_ONLY")
        ):
            raise ConfigError(f"(config) section {key!r} does not apply to scenario {scenario}")

    if scenario == "GLUED":
        g = raw.get("glued")
        _check_keys(g, {"left", "right", "threshold"}, "glued", {"left", "right"})
        left, right = _triplet(g["left"], "glued.left"), _triplet(g["right"], "glued.right")
        cfg["glued"] = {"left": left.to_dict(), "right": right.to_dict(), "threshold": float(g.get("threshold", 0.0))}
    elif scenario == "STABLE_LIKE":
        s = raw.get("stable_like")
        _check_keys(s, {"alpha", "schedule"}, "stable_like", {"alpha"})
        alpha = _alpha(s["alpha"], "stable_like.alpha")
        cfg["stable_like"] = {"alpha": alpha.to_dict(), "schedule": None}
        if s.get("schedule") is not None:
            sch = s["schedule"]
            _check_keys(sch, {"eps", "n_max", "rule"}, "stable_like.schedule", {"eps", "n_max"})
            eps = float(sch["eps"])
            if not 0.0 < eps < min(2.0 - alpha.alpha_max, alpha.alpha_min):
                raise ConfigError(
                    f"(S2) eps must satisfy 0 < eps < min(2 - sup alpha, inf alpha), got eps={eps}"
                )
            cfg["stable_like"]["schedule"] = {"eps": eps, "n_max": int(sch["n_max"]), "rule": sch.get("rule", "radius")}
    else:
        s = raw.get("symbol")
        _check_keys(s, {"triplet", "alpha"}, "symbol")
        if len(s) != 1:
            raise ConfigError("(config) symbol needs exactly one of 'triplet' or 'alpha'")
        if "triplet" in s:
            cfg["symbol"] = {"triplet": _triplet(s["triplet"], "symbol.triplet").to_dict()}
        else:
            cfg["symbol"] = {"alpha": _alpha(s["alpha"], "symbol.alpha").to_dict()}
    return cfg


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"artifact": pkg, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _write_reports(stage: Path, stem: str, records: list[dict], columns: list[str]) -> None:
    with open(stage / f"{stem}.jsonl", "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    with open(stage / f"{stem}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in records:
            w.writerow([r.get(c, "") for c in columns])


def _condition_records(subject: str, reports) -> list[dict]:
    return [{"subject": subject, **r.to_record()} for r in reports]


def _symbols(cfg: dict, schedule=None):
    """(subject, symbols) for the condition checks, and x-independent symbols for HW."""
    scen = cfg["scenario"]
    ns = [int(n) for n in cfg["diagnostics"]["n_symbols"]]
    if scen == "GLUED":
        g = cfg["glued"]
        left, right = LevyTriplet.from_dict(g["left"]), LevyTriplet.from_dict(g["right"])
        seq = [glued_approx_symbol(left, right, n, g["threshold"]) for n in ns]
        return ("glued_approx", seq), [("left", levy_symbol(left)), ("right", levy_symbol(right))]
    if scen == "STABLE_LIKE":
        alpha = StabilityIndexFn.from_dict(cfg["stable_like"]["alpha"])
        seq = [stable_like_symbol(alpha)]
        if schedule is not None:
            seq += [stable_like_symbol(schedule.alphas[n]) for n in sorted(schedule.alphas)]
        hw = [(f"branch_{i}", levy_symbol(LevyTriplet.stable(float(a)))) for i, a in enumerate(alpha.branches)]
        return ("stable_like", seq), hw
    s = cfg["symbol"]
    if "triplet" in s:
        q = levy_symbol(LevyTriplet.from_dict(s["triplet"]))
        return ("symbol", [q]), [("symbol", q)]
    alpha = StabilityIndexFn.from_dict(s["alpha"])
    q = stable_like_symbol(alpha)
    hw = [(f"branch_{i}", levy_symbol(LevyTriplet.stable(float(a)))) for i, a in enumerate(alpha.branches)]
    return ("symbol", [q]), hw


def _simulate(cfg: dict, threads: int) -> tuple[PathEnsemble, object]:
    sim, seed = cfg["simulation"], cfg["seed"]
    common = dict(x0=sim["x0"], T=sim["T"], dt=sim["dt"], n_paths=sim["n_paths"], seed=seed, threads=threads)
    if cfg["scenario"] == "GLUED":
        g = cfg["glued"]
        left, right = LevyTriplet.from_dict(g["left"]), LevyTriplet.from_dict(g["right"])
        ens = simulate_glued_sde(
            left, right, threshold=g["threshold"], eps_jump=sim["eps_jump"], exact_stable=sim["exact_stable"], **common
        )
        return ens, GluedSpec(left, right, g["threshold"])
    alpha = StabilityIndexFn.from_dict(cfg["stable_like"]["alpha"])
    return simulate_stable_like(alpha, **common), StableLikeSpec(alpha)


def execute(cfg: dict, stage: Path, threads: int = 1) -> list[str]:
    """Run the resolved experiment, writing every artifact into ``stage``."""
    diag = cfg["diagnostics"]
    written = []
    schedule = None
    sched_cfg = cfg.get("stable_like", {}).get("schedule") if cfg["scenario"] == "STABLE_LIKE" else None
    cond_records = []
    if sched_cfg is not None:
        alpha = StabilityIndexFn.from_dict(cfg["stable_like"]["alpha"])
        schedule = select_schedule(alpha, sched_cfg["eps"], sched_cfg["n_max"], rule=sched_cfg["rule"])
        cond_records += _condition_records("schedule", check_schedule(schedule))
        with open(stage / "schedule.json", "w") as fh:
            json.dump({"k": {str(n): k for n, k in schedule.ks.items()},
                       "sup_errors": {str(n): e for n, e in schedule.sup_errors.items()}}, fh, sort_keys=True)
        written.append("schedule.json")
    (subject, seq), hw_syms = _symbols(cfg, schedule)
    if diag["conditions"]:
        cond_records += _condition_records(subject, check_symbol_conditions(seq))
    if diag["hartman_wintner"]:
        for name, q in hw_syms:
            cond_records += _condition_records(name, [hartman_wintner(q)])
    if diag["density_bound"] is not None:
        b = transition_density_bound(seq, float(diag["density_bound"]["t"]))
        ok = math.isfinite(b.value)
        cond_records.append({
            "subject": subject, "condition": "DENSITY", "value": b.value, "threshold": math.inf if not ok else b.value,
            "verdict": "pass" if ok else "fail", "grid": {"t": b.t, "xi_max": b.xi_max}, "details": b.to_record(),
        })

    if cfg["scenario"] != "DIAGNOSTICS_ONLY":
        ens, spec = _simulate(cfg, threads)
        ens.write_binary(stage / "ensemble.bin")
        ens.write_csv(stage / "ensemble.csv", every=int(cfg["output"]["csv_every"]))
        written += ["ensemble.bin", "ensemble.csv"]
        if diag["exit"] is not None:
            e = diag["exit"]
            rep = exit_probability_check(ens, generator_symbol(spec), float(e["K"]), float(e["t"]))
            cond_records += _condition_records(subject, [rep])
        if diag["martingale"]:
            reps = martingale_defects(ens, spec, canonical_bumps(), default_designs(cfg["simulation"]["T"]))
            recs = []
            for r in reps:
                d = r.to_record()
                d["t_start"], d["t_end"] = r.times
                d["h_ids"] = ";".join(r.h_ids)
                recs.append(d)
            _write_reports(stage, "martingale", recs,
                           ["f_id", "design", "h_ids", "t_start", "t_end", "defect", "stderr", "z", "n_paths", "verdict"])
            written += ["martingale.jsonl", "martingale.csv"]

    for r in cond_records:
        for k in ("value", "threshold"):
            if isinstance(r[k], float) and not math.isfinite(r[k]):
                r[k] = str(r[k])
    _write_reports(stage, "conditions", cond_records, ["subject", "condition", "value", "threshold", "verdict"])
    written += ["conditions.jsonl", "conditions.csv"]
    return written


def run_experiment(raw: dict, out: str | None = None, seed: int | None = None, threads: int = 1,
                   check: bool = False) -> int:
    cfg = resolve_config(raw, seed=seed, out=out)
    if check:
        print(f"config ok: scenario {cfg['scenario']}, seed {cfg['seed']}")
        return 0
    if not cfg["out"]:
        raise ConfigError("(config) no output directory: pass --out or set 'out'")
    out_dir = Path(cfg["out"])
    created = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = out_dir / ".partial"
    if stage.exists():
        shutil.rmtree(stage)
    stage.mkdir()
    try:
        files = execute(cfg, stage, threads)
        stored = {k: v for k, v in cfg.items() if k != "out"}
        manifest = {"manifest_version": 1, "config": stored, "seed": cfg["seed"], "versions": _versions(),
                    "artifacts": sorted(files)}
        with open(stage / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        for name in files + ["manifest.json"]:
            (stage / name).replace(out_dir / name)
        stage.rmdir()
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        if created:
            shutil.rmtree(out_dir, ignore_errors=True)
        raise
    print(f"wrote {len(files) + 1} artifacts to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def emit_plot_data(run_dir, out_dir=None) -> list[Path]:
    """Tidy CSVs for plotting, derived from a completed run directory."""
    run_dir = Path(run_dir)
    mpath = run_dir / "manifest.json"
    if not mpath.exists():
        raise FileNotFoundError(f"{run_dir} holds no manifest.json; is it a completed run?")
    with open(mpath) as fh:
        cfg = json.load(fh)["config"]
    dest = Path(out_dir) if out_dir is not None else run_dir / "plot_data"
    dest.mkdir(parents=True, exist_ok=True)
    made = []

    def table(name, header, rows):
        p = dest / name
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        made.append(p)

    if (run_dir / "ensemble.bin").exists():
        ens = PathEnsemble.read_binary(run_dir / "ensemble.bin")
        hist = cfg["diagnostics"]["histogram"] or {}
        T = ens.times[-1]
        times = hist.get("times") or [T / 4, T / 2, 3 * T / 4, T]
        bins = int(hist.get("bins") or 50)
        # nearest grid time for each requested slice
        idx = [int(np.clip(np.rint(t / ens.dt), 0, ens.n_steps)) for t in times]
        snaps = [ens.paths[:, k] for k in idx]
        lo, hi = np.quantile(np.concatenate(snaps), [0.01, 0.99])
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        rows = []
        for k, s in zip(idx, snaps):
            counts, _ = np.histogram(s, edges)
            rows += [(float(ens.times[k]), float(a), float(b), int(c))
                     for a, b, c in zip(edges[:-1], edges[1:], counts)]
        table("histogram.csv", ["t", "bin_left", "bin_right", "count"], rows)

    if (run_dir / "schedule.json").exists():
        with open(run_dir / "schedule.json") as fh:
            ks = {int(n): int(k) for n, k in json.load(fh)["k"].items()}
        sch = cfg["stable_like"]["schedule"]
        alpha = StabilityIndexFn.from_dict(cfg["stable_like"]["alpha"])
        sets = build_exceptional_sets(alpha.breakpoints, sch["n_max"], rule=sch["rule"])
        span = float(max(3.0, np.max(np.abs(alpha.breakpoints)) + 2.0)) if alpha.breakpoints.size else 3.0
        x = np.linspace(-span, span, 601)
        rows = [(0, float(xi), float(a)) for xi, a in zip(x, alpha(x))]
        for n in sorted(ks):
            an = MollifiedAlpha(ContinuousExtension(alpha, sets, n), ks[n])
            rows += [(n, float(xi), float(a)) for xi, a in zip(x, an(x))]
        table("alpha_n.csv", ["n", "x", "alpha_n"], rows)
        table("exceptional_sets.csv", ["m", "level", "center", "radius", "lo", "hi"], sets.to_rows())

    if (run_dir / "conditions.jsonl").exists():
        rows = []
        with open(run_dir / "conditions.jsonl") as fh:
            for line in fh:
                r = json.loads(line)
                det = r.get("details") or {}
                if r["condition"] == "A4":
                    sh = det["shells"]
                    rows += [(r["subject"], "A4", a, b, v) for a, b, v in zip(sh, sh[1:], det["min_ratio"])]
                elif r["condition"] == "HW":
                    sh = det["shell_edges"]
                    rows += [(r["subject"], "HW", a, b, v) for a, b, v in zip(sh, sh[1:], det["ratios"])]
        if rows:
            table("symbol_shells.csv", ["subject", "condition", "shell_lo", "shell_hi", "ratio"], rows)

    if (run_dir / "martingale.jsonl").exists():
        with open(run_dir / "martingale.jsonl") as fh:
            recs = [json.loads(line) for line in fh]
        table("martingale_z.csv", ["f_id", "design", "z", "verdict"],
              [(r["f_id"], r["design"], r["z"], r["verdict"]) for r in recs])

    if not made:
        raise FileNotFoundError(f"{run_dir} holds no artifacts to turn into plot data")
    return made


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levyglue", description="Simulate and check Levy-type processes.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from a config file")
    r.add_argument("--config", required=True, help="YAML or JSON config, or a manifest.json")
    r.add_argument("--out", help="output directory (overrides 'out' in the config)")
    r.add_argument("--seed", type=int, help="root seed (overrides the config)")
    r.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    r.add_argument("--check", action="store_true", help="validate the config and exit")
    d = sub.add_parser("plot-data", help="write tidy CSVs from a completed run")
    d.add_argument("run_dir")
    d.add_argument("--out", help="destination (default: RUN_DIR/plot_data)")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("run", "plot-data", "-h", "--help"):
        argv = ["run"] + argv
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot-data":
            made = emit_plot_data(args.run_dir, args.out)
            print(f"wrote {len(made)} CSV files")
            return 0
        if args.threads < 1:
            raise ConfigError("(config) --threads must be at least 1")
        raw = load_config(args.config)
        return run_experiment(raw, out=args.out, seed=args.seed, threads=args.threads, check=args.check)
    except (ConfigError, ValueError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and fail with a status
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
