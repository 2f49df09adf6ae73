"""Scenario-driven command line front end.

Commands:
    sparsedom run --config PATH [--seed N] [--threads N] [--out DIR]
                  [--override key=value ...]
    sparsedom list
    sparsedom describe KIND

A scenario is a TOML file with named sections validated against a strict
per-kind schema (unknown keys are rejected).  Each run writes one or more
CSV tables plus ``summary.csv`` with a pass/fail row per check and exits 0
when every check passes, 2 on a check failure, and 1 on configuration or
I/O errors.  Outputs are byte-identical across runs for a fixed config and
seed.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .covering import whitney_cover
from .functions import dual_exponent
from .improving import (check_improving_a, check_improving_b, continuity_fit,
                        converse_extract, converse_record, fourier_decay_fit)
from .operators import (CZKernel, circle_measure, cz_family,
                        geometric_smoothing_family, hilbert_kernel,
                        measure_family, point_mass_measure,
                        radon_curve_measure)
from .space import HomogeneousSpace, ball_r, build_grid_space
from .stopping import StoppingConfig, build_stopping_ladder, certify_sparse
from .verify import (SparseScenario, ratio_trend, sharpness_sweep,
                     sparse_batch, weight_constants, weighted_norm_sample)

MAX_SITES = 2 ** 22

KINDS = ("whitney", "ladder", "improving", "decay", "sparse-linear",
         "sparse-maximal", "sharpness", "weights")

# strict per-section schemas: section -> {key: type or tuple of types}
_SPACE_KEYS = {"exponents": list, "log2_step": int, "extent": (int, float)}
_OPERATOR_KEYS = {
    "kind": str, "kernel": str, "measure": str, "curve_dim": int,
    "omega": str, "one_sided": bool, "s_min": int, "s_max": int,
}
_FUNCTIONS_KEYS = {
    "generator": str, "log2_r0": int, "spike_height": (int, float),
    "n_spikes": int, "smooth_scale": int, "file": str,
}
_EXPONENTS_KEYS = {"p1": (int, float), "p2": (int, float), "p": (int, float)}
_TRUNCATION_KEYS = {"sigma": int, "tau": int, "windows": list}
_SCHEMAS: dict[str, dict[str, dict]] = {
    "whitney": {
        "scenario": None, "space": _SPACE_KEYS,
        "checks": {"n_sets": int, "eta": (int, float), "max_balls": int},
    },
    "ladder": {
        "scenario": None, "space": _SPACE_KEYS, "functions": _FUNCTIONS_KEYS,
        "exponents": _EXPONENTS_KEYS,
        "checks": {"zeta_min": (int, float), "c_o": (int, float)},
    },
    "improving": {
        "scenario": None, "space": _SPACE_KEYS, "operator": _OPERATOR_KEYS,
        "exponents": _EXPONENTS_KEYS,
        "checks": {
            "scale": int, "trials": int, "atom_log2_radii": list,
            "refine": bool, "drift_cap": (int, float),
            "converse": bool, "converse_band": (int, float),
            "continuity": bool, "slope_min": (int, float),
        },
    },
    "decay": {
        "scenario": None, "operator": _OPERATOR_KEYS,
        "checks": {
            "log2_xi_min": int, "log2_xi_max": int, "directions": int,
            "beta_min": (int, float), "beta_max": (int, float),
        },
    },
    "sparse-linear": {
        "scenario": None, "space": _SPACE_KEYS, "operator": _OPERATOR_KEYS,
        "functions": _FUNCTIONS_KEYS, "exponents": _EXPONENTS_KEYS,
        "truncation": _TRUNCATION_KEYS,
        "checks": {"ratio_cap": (int, float), "trend": bool},
    },
    "sparse-maximal": {
        "scenario": None, "space": _SPACE_KEYS, "operator": _OPERATOR_KEYS,
        "functions": _FUNCTIONS_KEYS, "exponents": _EXPONENTS_KEYS,
        "truncation": _TRUNCATION_KEYS,
        "checks": {"ratio_cap": (int, float), "trend": bool},
    },
    "sharpness": {
        "scenario": None, "space": _SPACE_KEYS,
        "checks": {
            "log2_deltas": list, "quantile": (int, float),
            "slope_tol": (int, float),
        },
    },
    "weights": {
        "scenario": None, "space": _SPACE_KEYS, "operator": _OPERATOR_KEYS,
        "exponents": _EXPONENTS_KEYS,
        "checks": {"powers": list, "q": (int, float)},
    },
}
_SCENARIO_KEYS = {"kind": str, "name": str, "seeds": (int, list)}


class ConfigError(Exception):
    pass


class CheckFailure(Exception):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    constant: float
    tolerance: float


@dataclass
class RunResult:
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _validate(cfg: dict) -> str:
    sc = cfg.get("scenario")
    if not isinstance(sc, dict):
        raise ConfigError("missing [scenario] section")
    for key, val in sc.items():
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"unknown key scenario.{key}")
        if not isinstance(val, _SCENARIO_KEYS[key]):
            raise ConfigError(f"scenario.{key} has the wrong type")
    kind = sc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; one of {KINDS}")
    schema = _SCHEMAS[kind]
    for section, content in cfg.items():
        if section not in schema:
            raise ConfigError(f"section [{section}] not allowed for kind {kind}")
        if section == "scenario":
            continue
        keys = schema[section]
        for key, val in content.items():
            if key not in keys:
                raise ConfigError(f"unknown key {section}.{key}")
            if not isinstance(val, keys[key]):
                raise ConfigError(f"{section}.{key} has the wrong type")
    for section in schema:
        if section not in cfg and section in ("space", "operator",
                                              "exponents", "truncation"):
            raise ConfigError(f"kind {kind} requires a [{section}] section")
    exps = cfg.get("exponents")
    if exps is not None:
        p1, p2 = float(exps["p1"]), float(exps["p2"])
        if p1 < 1 or p2 < 1:
            raise ConfigError("exponents must satisfy p1, p2 >= 1")
        if p1 > dual_exponent(p2):
            raise ConfigError(
                f"exponents p1 = {p1}, p2 = {p2} violate the admissibility "
                f"constraint 1 <= p1 <= p2' (p2' = {dual_exponent(p2)}): the "
                "sparse bound is only asserted on that range"
            )
    tr = cfg.get("truncation")
    if tr is not None and "sigma" in tr and "tau" in tr \
            and tr["sigma"] >= tr["tau"]:
        raise ConfigError("truncation requires sigma < tau")
    return kind


def _apply_overrides(cfg: dict, overrides: list[str]) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, raw = item.partition("=")
        parts = key.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {key!r} must be section.key")
        try:
            val = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse override value {raw!r}: {exc}")
        cfg.setdefault(parts[0], {})[parts[1]] = val


def _seed_list(cfg: dict, cli_seed: Optional[int]) -> list[int]:
    if cli_seed is not None:
        return [cli_seed]
    seeds = cfg["scenario"].get("seeds", 1)
    if isinstance(seeds, int):
        return list(range(seeds))
    return [int(s) for s in seeds]


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _build_space(cfg: dict) -> HomogeneousSpace:
    sp = cfg["space"]
    exponents = tuple(float(e) for e in sp["exponents"])
    step = 2.0 ** int(sp["log2_step"])
    extent = float(sp.get("extent", 1.0))
    est = 1
    for _ in exponents:
        est *= int(2 * extent / step) + 1
    if est > MAX_SITES:
        raise ConfigError(
            f"grid of ~{est} sites exceeds the budget of {MAX_SITES} "
            f"(~{est * 8 / 2**20:.0f} MiB per array); coarsen log2_step"
        )
    return build_grid_space(exponents, step=step, extent=extent)


def _build_family(cfg: dict, space: HomogeneousSpace):
    op = cfg["operator"]
    kind = op.get("kind")
    s_min, s_max = op.get("s_min"), op.get("s_max")
    if kind == "cz":
        name = op.get("kernel", "hilbert")
        if name == "hilbert":
            kern = hilbert_kernel()
        elif name == "flat":
            def flat(x, y):
                d = space.dilations.rho(np.asarray(x) - np.asarray(y))
                return 1.0 / np.maximum(d, 1e-300) ** \
                    space.dilations.homogeneous_dimension
            kern = CZKernel(profile=flat, translation_invariant=True,
                            name="flat")
        else:
            raise ConfigError(f"unknown kernel {name!r}")
        return cz_family(space, kern, s_min, s_max)
    if kind == "measure":
        name = op.get("measure", "circle")
        if name == "circle":
            meas = circle_measure()
        elif name == "point":
            meas = point_mass_measure(space.ndim,
                                      space.dilations.exponents)
        else:
            raise ConfigError(f"unknown measure {name!r}")
        return measure_family(space, meas, s_min, s_max)
    if kind == "curve":
        meas = radon_curve_measure(int(op.get("curve_dim", 2)),
                                   omega=op.get("omega", "sign"),
                                   one_sided=bool(op.get("one_sided", False)))
        return measure_family(space, meas, s_min, s_max)
    if kind == "smoothing":
        return geometric_smoothing_family(space, s_min, s_max)
    raise ConfigError(f"unknown operator kind {kind!r}")


def _build_measure(cfg: dict):
    op = cfg["operator"]
    kind = op.get("kind")
    if kind == "curve":
        return radon_curve_measure(int(op.get("curve_dim", 2)),
                                   omega=op.get("omega", "sign"),
                                   one_sided=bool(op.get("one_sided", False)))
    if kind == "measure":
        name = op.get("measure", "circle")
        if name == "circle":
            return circle_measure()
        if name == "point":
            return point_mass_measure(int(op.get("curve_dim", 1)))
        raise ConfigError(f"unknown measure {name!r}")
    raise ConfigError(f"operator kind {kind!r} carries no measure")


def _generate_pair(cfg: dict, space: HomogeneousSpace, c_o: float,
                   seed: int) -> tuple[np.ndarray, np.ndarray, Any]:
    fn = cfg.get("functions", {})
    gen = fn.get("generator", "random-smooth")
    r0 = 2.0 ** int(fn.get("log2_r0", -4))
    rng = np.random.default_rng(seed)
    lo = int(math.ceil(c_o * r0 / space.step))
    center = space.flat_index(tuple(
        int(rng.integers(lo + 1, n - lo - 1)) for n in space.shape))
    B0 = ball_r(space, center, r0)
    support = space.ball_members(center, c_o * r0)
    f1 = np.zeros(space.npts)
    f2 = np.zeros(space.npts)
    if gen == "indicator":
        f1[support] = 1.0
        f2[support] = 1.0
    elif gen == "spike":
        f1[support] = 1.0
        f2[support] = 1.0
        height = float(fn.get("spike_height", 100.0))
        for _ in range(int(fn.get("n_spikes", 3))):
            f1[int(rng.choice(support))] = height
    elif gen == "random-smooth":
        # Gaussian-filtered noise is genuinely smooth below the filter
        # width, so truncation scales finer than it contribute O(2^s)
        k = int(fn.get("smooth_scale", 8))
        from scipy.ndimage import gaussian_filter1d
        for f in (f1, f2):
            noise = rng.standard_normal(support.size)
            f[support] = gaussian_filter1d(noise, float(k)) * math.sqrt(k) + 0.5
    elif gen == "atom":
        from .improving import make_atom
        f1[:] = np.abs(make_atom(space, B0, 1.0, seed).values)
        f2[support] = 1.0
    elif gen == "file":
        vals = np.loadtxt(fn["file"], delimiter=",")
        if vals.shape != (space.npts,):
            raise ConfigError("functions.file length does not match the grid")
        f1[:] = np.abs(vals)
        f2[support] = 1.0
    else:
        raise ConfigError(f"unknown function generator {gen!r}")
    return f1, f2, B0


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _random_open_set(space: HomogeneousSpace, rng: np.random.Generator,
                     max_balls: int) -> np.ndarray:
    mask = np.zeros(space.npts, dtype=bool)
    n = int(rng.integers(1, max_balls + 1))
    s_hi = int(math.floor(math.log2(space.extent)))
    s_lo = int(math.floor(math.log2(space.step))) + 2
    for _ in range(n):
        c = int(rng.integers(0, space.npts))
        s = int(rng.integers(s_lo, max(s_lo + 1, s_hi)))
        mask[space.ball_members(c, 2.0 ** s)] = True
    # keep it a proper subset
    if mask.all():
        mask[0] = False
    if not mask.any():
        mask[space.npts // 2] = True
    return np.flatnonzero(mask)


def _run_whitney(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    space = _build_space(cfg)
    checks_cfg = cfg.get("checks", {})
    eta = float(checks_cfg.get("eta", 16.0))
    max_balls = int(checks_cfg.get("max_balls", 6))
    rows = []

    def one(seed: int):
        rng = np.random.default_rng(seed)
        omega = _random_open_set(space, rng, max_balls)
        cover = whitney_cover(space, omega, eta)
        rep = cover.report
        return [seed, omega.size, len(cover.balls), rep.overlap_M,
                _fmt(rep.lambda_touch), _fmt(rep.radius_ratio),
                int(rep.union_equals_omega), int(rep.eta_inside),
                int(rep.shrunk_disjoint), int(rep.dyadic),
                rep.neighbor_max, int(rep.ok)]

    rows = _parallel(one, seeds, threads)
    all_ok = all(r[-1] == 1 for r in rows)
    res = RunResult()
    res.tables["cover.csv"] = (
        ["seed", "omega_size", "n_balls", "overlap_M", "lambda",
         "radius_ratio", "union", "eta_inside", "shrunk_disjoint", "dyadic",
         "neighbor_max", "ok"], rows)
    res.checks.append(Check("whitney_properties", all_ok,
                            float(sum(r[-1] for r in rows)), float(len(rows))))
    return res


def _run_ladder(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    space = _build_space(cfg)
    exps = cfg["exponents"]
    checks_cfg = cfg.get("checks", {})
    c_o = float(checks_cfg.get("c_o", 4.0))
    zeta_min = float(checks_cfg.get("zeta_min", 0.01))
    config = StoppingConfig(p1=float(exps["p1"]), p2=float(exps["p2"]),
                            c_o=c_o, zeta_min=zeta_min)

    def one(seed: int):
        f1, f2, B0 = _generate_pair(cfg, space, c_o, seed)
        ladder = build_stopping_ladder(space, f1, f2, B0, config)
        col = certify_sparse(ladder)
        nested = all(np.isin(ladder.levels[k + 1],
                             ladder.levels[k]).all()
                     for k in range(len(ladder.levels) - 1))
        halved = all(ladder.levels[k + 1].size <= ladder.levels[k].size / 2.0
                     for k in range(len(ladder.levels) - 1))
        return [seed, ladder.depth, ladder.theta, _fmt(col.zeta),
                len(col), int(nested), int(halved),
                int(col.zeta >= zeta_min)]

    rows = _parallel(one, seeds, threads)
    res = RunResult()
    res.tables["ladder.csv"] = (
        ["seed", "depth", "theta", "zeta", "n_balls", "nested", "halved",
         "zeta_ok"], rows)
    res.checks.append(Check("ladder_nesting", all(r[5] for r in rows),
                            float(sum(r[5] for r in rows)), float(len(rows))))
    res.checks.append(Check("ladder_halving", all(r[6] for r in rows),
                            float(sum(r[6] for r in rows)), float(len(rows))))
    zmin = min(float(r[3]) for r in rows)
    res.checks.append(Check("ladder_zeta", all(r[7] for r in rows),
                            zmin, zeta_min))
    return res


def _run_sparse(cfg: dict, seeds: list[int], threads: int,
                use_max: bool) -> RunResult:
    space = _build_space(cfg)
    family = _build_family(cfg, space)
    exps = cfg["exponents"]
    p1, p2 = float(exps["p1"]), float(exps["p2"])
    tr = cfg["truncation"]
    checks_cfg = cfg.get("checks", {})
    ratio_cap = float(checks_cfg.get("ratio_cap", 20.0))
    c_o = max(family.c_o, 4.0)
    windows = [int(w) for w in tr.get("windows", [])]
    base_sigma = int(tr.get("sigma", family.s_min))
    base_tau = int(tr.get("tau", base_sigma + 4))

    def one(args):
        seed, sigma, tau = args
        f1, f2, B0 = _generate_pair(cfg, space, c_o, seed)
        sc = SparseScenario(cfg["scenario"].get("name", "sparse"), family,
                            f1, f2, B0, p1, p2, sigma, tau, seed=seed)
        return sparse_batch([sc], use_max=use_max).verdicts[0]

    jobs = [(seed, base_sigma, base_tau) for seed in seeds]
    if windows:
        # widen the truncation downward from a fixed top scale, so the
        # ratio is probed as new fine scales enter the operator
        top = int(tr.get("tau", base_sigma + max(windows)))
        jobs = [(seed, top - w, top) for w in windows for seed in seeds]
    verdicts = _parallel(one, jobs, threads)
    rows = [[v.scenario, v.seed, v.sigma, v.tau, _fmt(v.pairing),
             _fmt(v.sparse_form), _fmt(v.ratio), v.depth, _fmt(v.zeta),
             v.theta] for v in verdicts]
    res = RunResult()
    res.tables["verdicts.csv"] = (
        ["scenario", "seed", "sigma", "tau", "pairing", "sparse_form",
         "ratio", "depth", "zeta", "theta"], rows)
    ratios = [v.ratio for v in verdicts if v.ratio > 0]
    finite = all(math.isfinite(v.ratio) for v in verdicts)
    res.checks.append(Check("ratios_finite", finite, float(len(verdicts)),
                            float(len(verdicts))))
    if ratios:
        spread = max(ratios) / float(np.median(ratios))
        res.checks.append(Check("max_over_median", spread < ratio_cap,
                                spread, ratio_cap))
    if windows and checks_cfg.get("trend", False):
        xs = [v.tau - v.sigma for v in verdicts if v.ratio > 0]
        tr_res = ratio_trend(xs, ratios)
        res.checks.append(Check("no_growth_trend", tr_res.no_growth,
                                tr_res.slope, 0.05))
    return res


def _run_decay(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    checks_cfg = cfg.get("checks", {})
    lo = 2.0 ** int(checks_cfg.get("log2_xi_min", 3))
    hi = 2.0 ** int(checks_cfg.get("log2_xi_max", 10))
    meas = _build_measure(cfg)
    fit = fourier_decay_fit(meas, (lo, hi),
                            int(checks_cfg.get("directions", 16)))
    res = RunResult()
    res.tables["decay.csv"] = (
        ["shell", "sup_abs"],
        [[_fmt(s), _fmt(v)] for s, v in zip(fit.shells, fit.sup_values)])
    res.checks.append(Check("fit_conclusive", not fit.flagged,
                            fit.r_squared, 0.8))
    if "beta_min" in checks_cfg:
        res.checks.append(Check("beta_min", fit.beta >= float(
            checks_cfg["beta_min"]), fit.beta, float(checks_cfg["beta_min"])))
    if "beta_max" in checks_cfg:
        res.checks.append(Check("beta_max", fit.beta <= float(
            checks_cfg["beta_max"]), fit.beta, float(checks_cfg["beta_max"])))
    return res


def _run_improving(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    space = _build_space(cfg)
    family = _build_family(cfg, space)
    exps = cfg["exponents"]
    p1, p2 = float(exps["p1"]), float(exps["p2"])
    checks_cfg = cfg.get("checks", {})
    s = int(checks_cfg.get("scale", (family.s_min + family.s_max) // 2))
    trials = int(checks_cfg.get("trials", 16))
    res = RunResult()
    i_emp = check_improving_a(family, s, p1, p2, trials=trials,
                              seed=seeds[0])
    rows = [[s, _fmt(i_emp)]]
    res.checks.append(Check("i_emp_finite",
                            math.isfinite(i_emp) and i_emp > 0, i_emp,
                            float("inf")))
    if checks_cfg.get("refine", False):
        sp2 = cfg["space"].copy()
        sp2["log2_step"] = int(sp2["log2_step"]) - 1
        cfg2 = dict(cfg)
        cfg2["space"] = sp2
        space_f = _build_space(cfg2)
        family_f = _build_family(cfg, space_f)
        i_fine = check_improving_a(family_f, s, p1, p2, trials=trials,
                                   seed=seeds[0])
        drift = max(i_emp, i_fine) / max(min(i_emp, i_fine), 1e-300)
        cap = float(checks_cfg.get("drift_cap", 2.0))
        res.checks.append(Check("refinement_drift", drift < cap, drift, cap))
        rows.append([s, _fmt(i_fine)])
    res.tables["improving.csv"] = (["scale", "i_emp"], rows)
    radii = [2.0 ** int(k) for k in checks_cfg.get("atom_log2_radii", [])]
    if radii:
        table = check_improving_b(family, s, p1, p2, radii,
                                  trials=max(trials // 2, 4), seed=seeds[0])
        res.tables["omega_emp.csv"] = (
            ["r_over_scale", "omega_emp"],
            [[_fmt(x), _fmt(y)]
             for x, y in zip(table.ratios, table.omega_emp)])
        if "slope_min" in checks_cfg:
            target = float(checks_cfg["slope_min"])
            res.checks.append(Check("omega_slope", not table.flagged
                                    and table.epsilon_fit >= target,
                                    table.epsilon_fit, target))
    if checks_cfg.get("continuity", False):
        cont = continuity_fit(family, s, p1, p2, seed=seeds[0])
        res.tables["continuity.csv"] = (
            ["t", "envelope"],
            [[_fmt(x), _fmt(y)] for x, y in zip(cont.ts, cont.envelope)])
        res.checks.append(Check("continuity_eps_positive",
                                cont.epsilon_fit > 0, cont.epsilon_fit, 0.0))
    if checks_cfg.get("converse", False):
        c_o = max(family.c_o, 4.0)
        recs = []
        from .verify import verify_sparse_linear
        for seed in seeds[: max(4, min(len(seeds), 8))]:
            f1, f2, B0 = _generate_pair(cfg, space, c_o, seed)
            sc = SparseScenario("converse", family, f1, f2, B0, p1, p2,
                                s, s + 1, seed=seed)
            recs.append(converse_record(sc, verify_sparse_linear(sc)))
        rep = converse_extract(recs, family, s, p1, p2, i_emp=i_emp)
        band = float(checks_cfg.get("converse_band", 50.0))
        ok = (1.0 / band) <= rep.ratio <= band and rep.i_conv > 0
        res.checks.append(Check("converse_band", ok, rep.ratio, band))
        res.tables["converse.csv"] = (
            ["i_conv", "i_emp", "ratio"],
            [[_fmt(rep.i_conv), _fmt(rep.i_emp), _fmt(rep.ratio)]])
    return res


def _run_sharpness(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    sp = cfg["space"]
    checks_cfg = cfg.get("checks", {})
    deltas = [2.0 ** int(k) for k in
              checks_cfg.get("log2_deltas", [-3, -4, -5])]
    main, oracle = sharpness_sweep(
        deltas, step=2.0 ** int(sp["log2_step"]),
        extent=float(sp.get("extent", 1.0)),
        quantile=float(checks_cfg.get("quantile", 0.9)))
    rows = [[_fmt(d), _fmt(v), _fmt(m)] for d, v, m in
            zip(main.deltas, main.values, main.measures)]
    rows.append(["slopes", _fmt(main.value_slope), _fmt(main.measure_slope)])
    rows.append(["oracle_slopes", _fmt(oracle.value_slope),
                 _fmt(oracle.measure_slope)])
    res = RunResult()
    res.tables["sweep.csv"] = (["delta", "v", "m"], rows)
    tol = float(checks_cfg.get("slope_tol", 0.15))
    dv = abs(main.value_slope - oracle.value_slope)
    dm = abs(main.measure_slope - oracle.measure_slope)
    res.checks.append(Check("value_slope_vs_oracle", dv <= tol, dv, tol))
    res.checks.append(Check("measure_slope_vs_oracle", dm <= tol, dm, tol))
    mono = all(np.diff(main.values) >= 0) and all(np.diff(main.measures) >= 0)
    res.checks.append(Check("monotone_in_delta", bool(mono), float(mono), 1.0))
    return res


def _run_weights(cfg: dict, seeds: list[int], threads: int) -> RunResult:
    space = _build_space(cfg)
    family = _build_family(cfg, space)
    exps = cfg["exponents"]
    p = float(exps.get("p", 2.0))
    checks_cfg = cfg.get("checks", {})
    q = float(checks_cfg.get("q", 2.0))
    powers = [float(a) for a in checks_cfg.get("powers", [0.0, 0.25, 0.5])]
    rho = space.dilations.rho(space.coords)
    rows = []
    a_ps = []
    from .operators import truncate
    op = truncate(family, family.s_min, family.s_max + 1)
    for a in powers:
        w = (1.0 + rho) ** a
        rec = weight_constants(space, w, p, q)
        norm = weighted_norm_sample(op, w, p, trials=8, seed=seeds[0])
        rows.append([_fmt(a), _fmt(rec.a_p), _fmt(rec.rh_q), _fmt(norm)])
        a_ps.append(rec.a_p)
    res = RunResult()
    res.tables["weights.csv"] = (["power", "a_p", "rh_q", "norm_sample"],
                                 rows)
    res.checks.append(Check("a_p_at_least_1", all(x >= 1.0 for x in a_ps),
                            min(a_ps), 1.0))
    if len(a_ps) >= 2:
        res.checks.append(Check("a_p_increasing_in_power",
                                all(x <= y + 1e-12 for x, y in
                                    zip(a_ps, a_ps[1:])),
                                a_ps[-1], a_ps[0]))
    const_ok = abs(a_ps[0] - 1.0) < 1e-9 if powers and powers[0] == 0.0 \
        else True
    res.checks.append(Check("constant_weight_is_1", const_ok,
                            a_ps[0] if a_ps else 1.0, 1e-9))
    return res


_RUNNERS: dict[str, Callable] = {
    "whitney": _run_whitney,
    "ladder": _run_ladder,
    "improving": _run_improving,
    "decay": _run_decay,
    "sparse-linear": lambda c, s, t: _run_sparse(c, s, t, use_max=False),
    "sparse-maximal": lambda c, s, t: _run_sparse(c, s, t, use_max=True),
    "sharpness": _run_sharpness,
    "weights": _run_weights,
}


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _parallel(fn: Callable, jobs: list, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def _write_tables(result: RunResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in result.tables.items():
        with open(out_dir / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "status", "constant", "tolerance"])
        for c in result.checks:
            writer.writerow([c.name, "pass" if c.passed else "fail",
                             _fmt(c.constant), _fmt(c.tolerance)])


def _scenario_dir():
    return resources.files("sparsedom") / "scenarios"


def cmd_list() -> int:
    names = sorted(p.name for p in _scenario_dir().iterdir()
                   if p.name.endswith(".toml"))
    for n in names:
        print(n)
    return 0


def cmd_describe(kind: str) -> int:
    if kind not in _SCHEMAS:
        print(f"error: unknown kind {kind!r}; one of {', '.join(KINDS)}",
              file=sys.stderr)
        return 1
    print(f"[scenario]  kind = \"{kind}\", name, seeds (int or list)")
    for section, keys in _SCHEMAS[kind].items():
        if section == "scenario" or keys is None:
            continue
        names = ", ".join(keys)
        print(f"[{section}]  {names}")
    return 0


def cmd_run(args) -> int:
    path = Path(args.config)
    if not path.exists():
        candidate = _scenario_dir() / (path.name if path.suffix
                                       else path.name + ".toml")
        try:
            cfg = tomllib.loads(candidate.read_text())
        except (FileNotFoundError, OSError):
            print(f"error: config {args.config} not found", file=sys.stderr)
            return 1
        except tomllib.TOMLDecodeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        try:
            with open(path, "rb") as fh:
                cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    try:
        _apply_overrides(cfg, args.override or [])
        kind = _validate(cfg)
        seeds = _seed_list(cfg, args.seed)
        result = _RUNNERS[kind](cfg, seeds, max(1, args.threads))
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out) if args.out else Path.cwd() / "out"
    _write_tables(result, out_dir)
    failed = [c for c in result.checks if not c.passed]
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: constant={_fmt(c.constant)} "
              f"tolerance={_fmt(c.tolerance)}")
    print(f"wrote {len(result.tables) + 1} tables to {out_dir}")
    return 2 if failed else 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparsedom",
        description="Sparse-domination verification scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario config")
    run_p.add_argument("config", nargs="?", default=None,
                       help="path or bundled template name")
    run_p.add_argument("--config", dest="config_flag", default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--override", action="append", default=[])
    sub.add_parser("list", help="list bundled scenario templates")
    desc_p = sub.add_parser("describe", help="print the schema for a kind")
    desc_p.add_argument("kind")
    args = parser.parse_args(argv)
    if args.command == "list":
        return cmd_list()
    if args.command == "describe":
        return cmd_describe(args.kind)
    if args.config_flag:
        args.config = args.config_flag
    if not args.config:
        print("error: no config given", file=sys.stderr)
        return 1
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
