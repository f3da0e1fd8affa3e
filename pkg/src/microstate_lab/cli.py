"""Reproducible experiment driver.

Reads a flat TOML config (scalar keys, arrays for parameter grids), runs the
named experiment at every grid point, and emits JSON-lines or CSV records
with full provenance: every record carries the experiment name, the grid
point's parameters, the root seed, the derived stream id, the package
version, and the verbatim config.

Grid points are dispatched to a process pool; each grid point owns a stream
id derived from its index in the canonical grid order, so output is
byte-identical (after the built-in canonical ordering) for any worker count.

Exit codes: 0 success, 2 usage/config error, 3 feasibility failure with
partial results flushed.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .errors import FeasibilityError, InvalidInputError
from .estimators import (
    BaseTupleStrategy,
    _marginal_reports,
    best_base_search,
    diagonal_base,
    fubini_check,
    lebesgue_volume_estimate,
    resolve_base_candidates,
    truncation_check,
)
from .laws import (
    MAX_DEGREE,
    Letter,
    NCLaw,
    brownian_presence_law,
    free_product_law,
    law_from_spec,
    load_law,
    quantile_from_spec,
    scan_word_deviations,
)
from .linalg import HermitianMatrix, HermitianTuple, matrix_from_json
from .metric import packing_profile
from .microstates import MicrostateParams, freeness_report
from .randmat import RandomSeed, _brownian_unitary, _haar_unitary

EXPERIMENTS = (
    "freeness-scan",
    "orbital-volume",
    "chi-volume",
    "fubini-check",
    "brownian-moments",
    "packing-profile",
    "truncation-check",
    "brownian-dimension-proxy",
)

_USAGE_EXIT = 2
_FEASIBILITY_EXIT = 3


@dataclass
class ExperimentConfig:
    experiment: str
    marginals: list
    joint: str = "free"
    N: list = field(default_factory=lambda: [8])
    m: list = field(default_factory=lambda: [2])
    delta: list = field(default_factory=lambda: [0.2])
    R: list = field(default_factory=lambda: [math.inf])
    t: list = field(default_factory=lambda: [1.0])
    epsilon: list = field(default_factory=list)
    samples: int = 100
    inner_samples: int = 100
    steps: int = 100
    strategy: str = "diagonalized"
    strategy_count: int = 4
    strategy_files: list = field(default_factory=list)
    sampler: str = "haar"
    seed: int = 0
    workers: int = 1
    raw: dict = field(default_factory=dict)


def _as_list(v):
    return list(v) if isinstance(v, list) else [v]


def parse_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    known = {
        "experiment", "marginals", "joint", "N", "m", "delta", "R", "t",
        "epsilon", "samples", "inner_samples", "steps", "strategy",
        "strategy_count", "strategy_files", "sampler", "seed", "workers",
    }
    unknown = set(raw) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig(
        experiment=str(raw.get("experiment", "")),
        marginals=[str(s) for s in _as_list(raw.get("marginals", []))],
        joint=str(raw.get("joint", "free")),
        N=[int(x) for x in _as_list(raw.get("N", 8))],
        m=[int(x) for x in _as_list(raw.get("m", 2))],
        delta=[float(x) for x in _as_list(raw.get("delta", 0.2))],
        R=[float(x) for x in _as_list(raw.get("R", math.inf))],
        t=[float(x) for x in _as_list(raw.get("t", 1.0))],
        epsilon=[float(x) for x in _as_list(raw.get("epsilon", []))],
        samples=int(raw.get("samples", 100)),
        inner_samples=int(raw.get("inner_samples", 100)),
        steps=int(raw.get("steps", 100)),
        strategy=str(raw.get("strategy", "diagonalized")),
        strategy_count=int(raw.get("strategy_count", 4)),
        strategy_files=[str(s) for s in _as_list(raw.get("strategy_files", []))],
        sampler=str(raw.get("sampler", "haar")),
        seed=int(raw.get("seed", 0)),
        workers=int(raw.get("workers", 1)),
        raw=raw,
    )
    return cfg


def _is_file_spec(spec: str) -> bool:
    return spec.startswith("file:") or spec.endswith(".json")


def _marginal_law(spec: str, degree: int) -> NCLaw:
    if _is_file_spec(spec):
        law = load_law(spec.removeprefix("file:"))
        if law.max_degree < degree:
            raise InvalidInputError(f"law file {spec!r} covers degree {law.max_degree}, need {degree}")
        return law.restrict_degree(degree) if law.max_degree > degree else law
    return law_from_spec(spec, degree)


def _joint_law(cfg: ExperimentConfig, degree: int) -> NCLaw:
    if cfg.joint != "free":
        if not _is_file_spec(cfg.joint):
            raise InvalidInputError(f"joint must be 'free' or a law file, got {cfg.joint!r}")
        return _marginal_law(cfg.joint, degree)
    return free_product_law([_marginal_law(s, degree) for s in cfg.marginals], degree)


def _strategy(cfg: ExperimentConfig, N: int) -> BaseTupleStrategy:
    if cfg.strategy == "diagonalized":
        return BaseTupleStrategy.diagonalized([quantile_from_spec(s) for s in cfg.marginals])
    if cfg.strategy == "best_of_random":
        return BaseTupleStrategy.best_of_random(cfg.strategy_count)
    if cfg.strategy == "fixed":
        tuples = []
        for path in cfg.strategy_files:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            mats = [HermitianMatrix(matrix_from_json(m)) for m in obj["matrices"]]
            tuples.append(HermitianTuple(mats))
        if any(t.n != N for t in tuples):
            raise InvalidInputError(f"fixed base tuples do not have size N={N}")
        return BaseTupleStrategy.fixed(tuples)
    raise InvalidInputError(f"unknown strategy {cfg.strategy!r}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(cfg: ExperimentConfig) -> list:
    """Static checks without sampling; returns a list of problems."""
    problems = []
    if cfg.experiment not in EXPERIMENTS:
        problems.append(f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        return problems
    if cfg.samples < 1:
        problems.append(f"samples must be >= 1, got {cfg.samples}")
    if cfg.workers < 1:
        problems.append(f"workers must be >= 1, got {cfg.workers}")
    if not cfg.marginals:
        problems.append("no marginals declared")
    for axis, values in (("N", cfg.N), ("m", cfg.m), ("delta", cfg.delta), ("R", cfg.R)):
        if not values:
            problems.append(f"grid axis {axis} is empty")
    for n in cfg.N:
        if n < 1:
            problems.append(f"N must be >= 1, got {n}")
    for m in cfg.m:
        if m < 1 or m > MAX_DEGREE:
            problems.append(f"degree m={m} outside 1..{MAX_DEGREE}")
        if cfg.experiment == "brownian-dimension-proxy" and 3 * m > MAX_DEGREE:
            problems.append(
                f"brownian-dimension-proxy at m={m} needs underlying degree {3 * m} > cap {MAX_DEGREE}"
            )
    for d in cfg.delta:
        if not d > 0:
            problems.append(f"delta must be positive, got {d}")
    for r in cfg.R:
        if not r > 0:
            problems.append(f"R must be positive, got {r}")

    for spec in cfg.marginals:
        if _is_file_spec(spec):
            if not os.path.exists(spec.removeprefix("file:")):
                problems.append(f"marginal law file not found: {spec}")
        else:
            try:
                law_from_spec(spec, 1)
            except InvalidInputError as exc:
                problems.append(f"bad marginal spec {spec!r}: {exc}")

    needs_strategy = cfg.experiment in (
        "orbital-volume", "packing-profile", "brownian-dimension-proxy"
    )
    needs_quantiles = cfg.experiment in ("freeness-scan", "truncation-check")
    if needs_strategy or needs_quantiles:
        if cfg.strategy == "diagonalized" or needs_quantiles:
            for spec in cfg.marginals:
                if _is_file_spec(spec):
                    problems.append(
                        f"diagonalized bases need a named law constructor, got file {spec!r}"
                    )
                else:
                    try:
                        quantile_from_spec(spec)
                    except InvalidInputError as exc:
                        problems.append(str(exc))
        if cfg.strategy == "fixed" and len(cfg.strategy_files) != len(cfg.marginals):
            problems.append(
                f"fixed strategy needs one file per group "
                f"({len(cfg.marginals)} groups, {len(cfg.strategy_files)} files)"
            )
        if cfg.strategy == "best_of_random" and cfg.strategy_count < 1:
            problems.append(f"strategy_count must be >= 1, got {cfg.strategy_count}")
        if cfg.strategy not in ("diagonalized", "best_of_random", "fixed"):
            problems.append(f"unknown strategy {cfg.strategy!r}")
    # Multi-variable groups cannot use deterministic diagonal bases.
    if cfg.strategy == "diagonalized":
        for spec in cfg.marginals:
            if not _is_file_spec(spec):
                continue
            try:
                law = load_law(spec.removeprefix("file:"))
                if any(law.r(i + 1) != 1 for i in range(law.n_groups)):
                    problems.append(f"diagonalized strategy needs single-variable groups ({spec})")
            except Exception:
                pass

    if cfg.experiment in ("chi-volume", "fubini-check", "truncation-check"):
        for r in cfg.R:
            if math.isinf(r):
                problems.append(f"{cfg.experiment} needs a finite norm cut-off R")
    if cfg.experiment == "truncation-check":
        from .estimators import derive_truncation_parameters

        for spec in cfg.marginals:
            if _is_file_spec(spec):
                continue
            try:
                law = law_from_spec(spec, 1)
                rho = law.rho(Letter.x(1, 1))
            except InvalidInputError:
                continue
            for r in cfg.R:
                if math.isinf(r):
                    continue
                for m in cfg.m:
                    for d in cfg.delta:
                        try:
                            derive_truncation_parameters(
                                rho, MicrostateParams(max(cfg.N), m, d, r)
                            )
                        except (InvalidInputError, FeasibilityError) as exc:
                            problems.append(f"truncation relations infeasible: {exc}")
    if cfg.experiment == "fubini-check" and cfg.inner_samples < 1:
        problems.append(f"inner_samples must be >= 1, got {cfg.inner_samples}")
    if cfg.experiment in ("brownian-moments", "brownian-dimension-proxy") and cfg.steps < 1:
        problems.append(f"steps must be >= 1, got {cfg.steps}")
    if cfg.experiment in ("packing-profile", "brownian-dimension-proxy"):
        if not cfg.epsilon:
            problems.append(f"{cfg.experiment} needs a nonempty epsilon grid")
        if any(not e > 0 for e in cfg.epsilon):
            problems.append("epsilon values must be positive")
    if cfg.experiment == "brownian-moments":
        if any(t < 0 for t in cfg.t):
            problems.append("times must be nonnegative")
    if cfg.sampler not in ("haar", "su_scalar"):
        problems.append(f"unknown sampler {cfg.sampler!r}")
    return problems


# ---------------------------------------------------------------------------
# Grid execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    index: int
    N: int
    m: int | None
    delta: float | None
    R: float | None
    t: float | None


def _grid(cfg: ExperimentConfig) -> list:
    if cfg.experiment == "brownian-moments":
        axes = itertools.product(cfg.N, [None], [None], [None], cfg.t)
    elif cfg.experiment in ("freeness-scan", "brownian-dimension-proxy"):
        axes = itertools.product(cfg.N, cfg.m, cfg.delta, [None], [None])
    else:
        axes = itertools.product(cfg.N, cfg.m, cfg.delta, cfg.R, [None])
    return [GridPoint(i, n, m, d, r, t) for i, (n, m, d, r, t) in enumerate(axes)]


def _base_record(cfg: ExperimentConfig, gp: GridPoint, stream: int) -> dict:
    return {
        "experiment": cfg.experiment,
        "N": gp.N,
        "m": gp.m,
        "delta": gp.delta,
        "R": None if gp.R is None or math.isinf(gp.R) else gp.R,
        "t": gp.t,
        "strategy": cfg.strategy,
        "sampler": cfg.sampler,
        "seed": cfg.seed,
        "stream": stream,
        "version": __version__,
        "status": "ok",
        "config": cfg.raw,
    }


def _run_grid_point(cfg: ExperimentConfig, gp: GridPoint) -> list:
    seed = RandomSeed(cfg.seed).split(gp.index)
    base = _base_record(cfg, gp, seed.stream)
    handler = _HANDLERS[cfg.experiment]
    try:
        return handler(cfg, gp, seed, base)
    except FeasibilityError as exc:
        rec = dict(base)
        rec["status"] = "error"
        rec["error"] = str(exc)
        rec["error_stats"] = {k: v for k, v in exc.stats.items()}
        return [rec]


def _params(gp: GridPoint, R=None) -> MicrostateParams:
    return MicrostateParams(gp.N, gp.m, gp.delta, math.inf if R is None else R)


def _estimate_fields(est) -> dict:
    return est.to_json()


def _run_freeness_scan(cfg, gp, seed, base) -> list:
    quantiles = [quantile_from_spec(s) for s in cfg.marginals]
    rng = seed.generator()
    free_count = 0
    devs = []
    for _ in range(cfg.samples):
        groups = []
        for q in quantiles:
            d = diagonal_base(q, gp.N)
            u = _haar_unitary(gp.N, rng)
            groups.append(HermitianTuple([HermitianMatrix(u @ d.mat @ u.conj().T)]))
        rep = freeness_report(groups, gp.m, gp.delta)
        free_count += rep.free
        devs.append(rep.deviation)
    p = free_count / cfg.samples
    rec = dict(base)
    rec.update(
        hits=free_count,
        samples=cfg.samples,
        p_hat=p,
        stderr=math.sqrt(p * (1 - p) / cfg.samples),
        mean_deviation=float(np.mean(devs)),
        max_deviation=float(np.max(devs)),
    )
    return [rec]


def _run_orbital_volume(cfg, gp, seed, base) -> list:
    law = _joint_law(cfg, gp.m)
    strategy = _strategy(cfg, gp.N)
    result = best_base_search(
        strategy, law, _params(gp, gp.R), cfg.samples, seed, sampler=cfg.sampler
    )
    rec = dict(base)
    rec.update(_estimate_fields(result.estimate))
    rec["best_candidate"] = result.best_index
    rec["candidates"] = len(result.candidate_estimates)
    return [rec]


def _run_chi_volume(cfg, gp, seed, base) -> list:
    records = []
    joint = _joint_law(cfg, gp.m)
    est = lebesgue_volume_estimate(joint, _params(gp, gp.R), cfg.samples, seed.split(0))
    rec = dict(base)
    rec.update(_estimate_fields(est))
    rec["scope"] = "joint"
    records.append(rec)
    if joint.n_groups > 1:
        for i in range(joint.n_groups):
            marginal = joint.restrict_groups([i + 1])
            est_i = lebesgue_volume_estimate(
                marginal, _params(gp, gp.R), cfg.samples, seed.split(1 + i)
            )
            rec_i = dict(base)
            rec_i.update(_estimate_fields(est_i))
            rec_i["scope"] = f"group:{i + 1}"
            records.append(rec_i)
    return records


def _run_fubini_check(cfg, gp, seed, base) -> list:
    marginals = [_marginal_law(s, gp.m) for s in cfg.marginals]
    joint = _joint_law(cfg, gp.m)
    report = fubini_check(
        marginals, joint, _params(gp, gp.R), cfg.samples, cfg.inner_samples, seed
    )
    rec = dict(base)
    rec.update(
        lhs_p=report.lhs.p_hat,
        lhs_stderr=report.lhs.stderr,
        rhs=report.rhs,
        rhs_stderr=report.rhs_stderr,
        z=report.z if math.isfinite(report.z) else None,
        base_count=report.base_count,
        inner_samples=report.inner_samples,
        mean_inner=report.mean_inner,
        lambda_fractions=[e.p_hat for e in report.lambda_fractions],
        hits=report.lhs.hits,
        samples=report.lhs.samples,
        p_hat=report.lhs.p_hat,
        stderr=report.lhs.stderr,
        log_per_N2=None
        if not math.isfinite(report.lhs.log_measure_per_N2)
        else report.lhs.log_measure_per_N2,
    )
    return [rec]


def _run_brownian_moments(cfg, gp, seed, base) -> list:
    rng = seed.generator()
    traces = []
    ratios = []
    eye = np.eye(gp.N)
    for _ in range(cfg.samples):
        v = _brownian_unitary(gp.N, gp.t, cfg.steps, rng)
        traces.append(np.trace(v) / gp.N)
        if gp.t > 0:
            ratios.append(float(np.linalg.norm(v - eye, 2)) / math.sqrt(gp.t))
    mean_tr = complex(np.mean(traces))
    target = math.exp(-gp.t / 2.0)
    rec = dict(base)
    rec.update(
        samples=cfg.samples,
        steps=cfg.steps,
        mean_trace_re=mean_tr.real,
        mean_trace_im=mean_tr.imag,
        target=target,
        abs_error=abs(mean_tr.real - target),
        mean_opnorm_ratio=float(np.mean(ratios)) if ratios else None,
        max_opnorm_ratio=float(np.max(ratios)) if ratios else None,
    )
    return [rec]


def _run_packing_profile(cfg, gp, seed, base) -> list:
    law = _joint_law(cfg, gp.m)
    strategy = _strategy(cfg, gp.N)
    profile = packing_profile(
        law, _params(gp, gp.R), strategy, cfg.epsilon, cfg.samples, seed
    )
    records = []
    slopes = {eps: (sk, sp) for eps, sk, sp in profile.delta_slopes()}
    for row in profile.rows:
        rec = dict(base)
        sk, sp = slopes[row.epsilon]
        rec.update(
            epsilon=row.epsilon,
            K_upper=row.K_upper,
            P_lower=row.P_lower,
            K_exact=row.K_exact,
            P_exact=row.P_exact,
            log_K_per_N2=row.log_K_per_N2,
            log_P_per_N2=row.log_P_per_N2,
            delta_slope_K=None if not math.isfinite(sk) else sk,
            delta_slope_P=None if not math.isfinite(sp) else sp,
            cloud_size=profile.cloud_size,
            samples=profile.samples,
        )
        records.append(rec)
    return records


def _run_truncation_check(cfg, gp, seed, base) -> list:
    records = []
    for i, spec in enumerate(cfg.marginals):
        marginal = _marginal_law(spec, MAX_DEGREE)
        report = truncation_check(
            marginal,
            _params(gp, gp.R),
            cfg.samples,
            seed.split(i),
            quantile=quantile_from_spec(spec),
        )
        rec = dict(base)
        rec.update(report.to_json())
        rec["group"] = i + 1
        records.append(rec)
    return records


def _run_brownian_dimension_proxy(cfg, gp, seed, base) -> list:
    x_joint = _joint_law(cfg, gp.m)
    strategy = _strategy(cfg, gp.N)
    params = _params(gp)
    candidates = resolve_base_candidates(strategy, x_joint, params, seed.split(0))
    feasible = None
    for j, cand in enumerate(candidates):
        if all(r.member for r in _marginal_reports(cand, x_joint, params)):
            feasible = (j, cand)
            break
    if feasible is None:
        raise FeasibilityError(
            "no candidate base passes its marginal microstate test",
            stats={"candidates": len(candidates)},
        )
    j, bases = feasible
    base_arrays = [t.arrays() for t in bases]
    n = x_joint.n_groups
    records = []
    for e_idx, eps in enumerate(cfg.epsilon):
        target = brownian_presence_law(x_joint, eps, gp.m)
        rng = seed.split(1, e_idx).generator()
        hits = 0
        for _ in range(cfg.samples):
            mats = {}
            for i in range(n):
                u = _haar_unitary(gp.N, rng)
                v = _brownian_unitary(gp.N, eps, cfg.steps, rng)
                vh = v.conj().T
                for jj, a in enumerate(base_arrays[i]):
                    w = v @ (u @ a @ u.conj().T) @ vh
                    mats[Letter.x(i + 1, jj + 1)] = w
                mats[Letter.u(i + 1, 1)] = v
                mats[Letter.u(i + 1, -1)] = vh
            dev, _ = scan_word_deviations(mats, target, gp.m, stop_beyond=gp.delta)
            if dev < gp.delta:
                hits += 1
        p = hits / cfg.samples
        rec = dict(base)
        log_per_n2 = (math.log(p) / gp.N**2) if hits else None
        slope = None
        if hits and eps != 1.0:
            slope = log_per_n2 / abs(math.log(math.sqrt(eps)))
        rec.update(
            epsilon=eps,
            hits=hits,
            samples=cfg.samples,
            p_hat=p,
            stderr=math.sqrt(p * (1 - p) / cfg.samples),
            log_per_N2=log_per_n2,
            dimension_slope=slope,
            steps=cfg.steps,
            base_candidate=j,
        )
        records.append(rec)
    return records


_HANDLERS = {
    "freeness-scan": _run_freeness_scan,
    "orbital-volume": _run_orbital_volume,
    "chi-volume": _run_chi_volume,
    "fubini-check": _run_fubini_check,
    "brownian-moments": _run_brownian_moments,
    "packing-profile": _run_packing_profile,
    "truncation-check": _run_truncation_check,
    "brownian-dimension-proxy": _run_brownian_dimension_proxy,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

_CSV_PROFILE_COLUMNS = (
    "epsilon", "K_upper", "P_lower", "K_exact", "P_exact", "log_K_per_N2", "log_P_per_N2",
)


def _write_records(records: list, out, fmt: str, experiment: str):
    if fmt == "jsonl":
        for rec in records:
            out.write(json.dumps(rec, sort_keys=True, default=str) + "\n")
        return
    if experiment == "packing-profile":
        columns = _CSV_PROFILE_COLUMNS
    else:
        skip = {"config"}
        keys = set()
        for rec in records:
            keys.update(k for k, v in rec.items() if k not in skip and not isinstance(v, (dict, list)))
        columns = tuple(sorted(keys))
    out.write(",".join(columns) + "\n")
    for rec in records:
        cells = []
        for c in columns:
            v = rec.get(c)
            cells.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        out.write(",".join(cells) + "\n")


def run(cfg: ExperimentConfig, out=sys.stdout, fmt: str = "jsonl", workers: int | None = None) -> int:
    problems = validate(cfg)
    if problems:
        for p in problems:
            print(f"config problem: {p}", file=sys.stderr)
        return _USAGE_EXIT
    grid = _grid(cfg)
    n_workers = workers if workers is not None else cfg.workers
    if n_workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_grid_point, itertools.repeat(cfg), grid))
    else:
        results = [_run_grid_point(cfg, gp) for gp in grid]
    records = [rec for chunk in results for rec in chunk]
    _write_records(records, out, fmt, cfg.experiment)
    if any(rec.get("status") == "error" for rec in records):
        return _FEASIBILITY_EXIT
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="microstate-lab",
        description="Monte Carlo experiments on matricial and orbital microstate sets",
    )
    parser.add_argument("--config", required=True, help="TOML experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: config, then MICROSTATE_LAB_WORKERS, then 1)")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    parser.add_argument("--validate-only", action="store_true",
                        help="run static config checks and exit")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
    except (OSError, InvalidInputError, tomllib.TOMLDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    if args.seed is not None:
        cfg.seed = args.seed
    workers = args.workers
    if workers is None:
        env = os.environ.get("MICROSTATE_LAB_WORKERS")
        if env is not None:
            try:
                workers = int(env)
            except ValueError:
                print(f"bad MICROSTATE_LAB_WORKERS value {env!r}", file=sys.stderr)
                return _USAGE_EXIT

    if args.validate_only:
        problems = validate(cfg)
        print(json.dumps({"problems": problems}, sort_keys=True))
        return 0 if not problems else _USAGE_EXIT

    if args.out is None:
        return run(cfg, sys.stdout, args.format, workers)
    with open(args.out, "w", encoding="utf-8") as fh:
        return run(cfg, fh, args.format, workers)


if __name__ == "__main__":
    sys.exit(main())
