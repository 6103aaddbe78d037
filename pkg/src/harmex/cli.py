"""Command-line runner for checks, profiles, decompositions, and distance
experiments.

Runs are driven by a JSON config file with flag overrides; every output
embeds the library version and a hash of the resolved config, and rows are
written in config order regardless of worker scheduling, so identical
configs produce byte-identical files.  Exit codes: 0 success, 1 numeric
failure, 2 usage or validation error.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import click
import numpy as np

from . import __version__
from .extremal import (
    THEOREMS,
    default_corpus_member,
    distance_report,
    experiment_grid,
    level_set,
    split_multipliers,
    theorem_space,
    truncation_for_grid,
)
from .harmonic_model import TestFunctionSpec, evaluate_grid
from .norms import RadialProfile, SpaceParams, ball_average_profile, mean_profile
from .quadrature import radial_grid, sphere_rule
from .verify import run_default_checks

_FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    """Resolved configuration of one run."""

    corpus: list[TestFunctionSpec]
    theorems: list[str]
    p: float = 2.0
    alpha: float = 1.0
    beta: Optional[float] = None
    t: Optional[float] = None
    levels: int = 8
    points_per_annulus: int = 6
    tail_levels: int = 5
    sphere_oversample: int = 3
    epsilon_count: int = 8
    c_max: float = 50.0
    grid_tol: float = 0.05
    seed: int = 0
    output: str = "-"
    fmt: str = "csv"

    def validate(self):
        if not self.corpus:
            raise click.UsageError("corpus must not be empty")
        for thm in self.theorems:
            if thm not in THEOREMS:
                raise click.UsageError(f"unknown theorem {thm!r}; choose from {THEOREMS}")
            try:
                theorem_space(thm, self.p, self.alpha, self.beta, self.t)
            except ValueError as exc:
                raise click.UsageError(str(exc))
        if self.fmt not in _FORMATS:
            raise click.UsageError(f"format must be one of {_FORMATS}")
        if self.levels <= self.tail_levels:
            raise click.UsageError("grid levels must exceed the tail annulus count")

    def canonical(self) -> dict:
        return {
            "corpus": [json.loads(s.to_json()) for s in self.corpus],
            "theorems": self.theorems,
            "p": self.p,
            "alpha": self.alpha,
            "beta": self.beta,
            "t": self.t,
            "levels": self.levels,
            "points_per_annulus": self.points_per_annulus,
            "tail_levels": self.tail_levels,
            "sphere_oversample": self.sphere_oversample,
            "epsilon_count": self.epsilon_count,
            "c_max": self.c_max,
            "grid_tol": self.grid_tol,
            "seed": self.seed,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _load_config(path: Optional[str], **overrides) -> dict:
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    return data


def _resolve_corpus(data: dict, theorems: Sequence[str], levels: int,
                    alpha: float, beta: Optional[float]) -> list[TestFunctionSpec]:
    K_default = truncation_for_grid(levels)
    specs = []
    raw = data.get("corpus")
    if raw:
        for obj in raw:
            K = obj.get("K") or K_default
            if obj.get("kind") == "random" and "seed" not in obj.get("params", {}):
                raise click.UsageError("random corpus members require an explicit seed")
            specs.append(TestFunctionSpec(obj["kind"], int(obj["n"]), int(K), dict(obj.get("params", {}))))
    else:
        for thm in theorems:
            for n in data.get("dims", [2, 3]):
                try:
                    specs.append(default_corpus_member(thm, n, K_default, alpha, beta))
                except ValueError:
                    continue
    if not specs:
        raise click.UsageError("corpus resolution produced no members")
    # dedupe while preserving order
    seen = set()
    out = []
    for s in specs:
        key = s.to_json()
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _workers() -> int:
    env = os.environ.get("HARMEX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise click.UsageError("HARMEX_THREADS must be an integer")
    return min(4, os.cpu_count() or 1)


def _fmt_value(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _write_rows(out: str, fmt: str, header_meta: dict, fieldnames: list[str], rows: list[dict]):
    buf = io.StringIO()
    meta = " ".join(f"{k}={v}" for k, v in header_meta.items())
    if fmt == "csv":
        buf.write(f"# {meta}\n")
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_value(row.get(k, "")) for k in fieldnames})
    else:
        buf.write(json.dumps({"meta": header_meta}, sort_keys=True) + "\n")
        for row in rows:
            clean = {}
            for k in fieldnames:
                v = row.get(k)
                if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
                    v = _fmt_value(v)
                clean[k] = v
            buf.write(json.dumps(clean, sort_keys=True) + "\n")
    text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


@click.group()
@click.version_option(version=__version__, prog_name="harmex")
def main():
    """Harmonic Bergman space numerics: checks, profiles, distance brackets."""


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config file.")
@click.option("--fast/--full", default=True, show_default=True, help="Reduced or full check corpus.")
@click.option("--format", "fmt", type=click.Choice(_FORMATS), default="csv", show_default=True)
@click.option("--output", default="-", show_default=True, help="Output path, - for stdout.")
@click.option("--seed", type=int, default=2024, show_default=True)
def verify(config, fast, fmt, output, seed):
    """Run the verification battery; exit 0 iff every check passes."""
    data = _load_config(config)
    if "space" in data:
        try:
            SpaceParams(**data["space"])
        except ValueError as exc:
            raise click.UsageError(str(exc))
    reports = run_default_checks(fast=fast, seed=seed)
    rows = [r.to_record() for r in reports]
    for row in rows:
        row["params"] = json.dumps(row["params"], sort_keys=True)
    meta = {"harmex": __version__, "mode": "fast" if fast else "full", "seed": seed}
    _write_rows(output, fmt, meta, ["check", "params", "max_violation", "fitted_C", "pass"], rows)
    sys.exit(0 if all(r.passed for r in reports) else 1)


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config file.")
@click.option("--theorem", "theorems", multiple=True, help="Theorem tags (repeatable).")
@click.option("--p", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--t", type=float, default=None)
@click.option("--levels", type=int, default=None)
@click.option("--points-per-annulus", type=int, default=None)
@click.option("--epsilon-count", type=int, default=None)
@click.option("--c-max", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(_FORMATS), default=None)
@click.option("--output", default=None)
def distance(config, theorems, p, alpha, beta, t, levels, points_per_annulus,
             epsilon_count, c_max, fmt, output):
    """Distance brackets for every corpus member under every theorem.

    Exit 0 iff every non-rejected ratio lies in [1 - grid_tol, c_max].
    """
    data = _load_config(
        config,
        theorems=list(theorems) or None, p=p, alpha=alpha, beta=beta, t=t,
        levels=levels, points_per_annulus=points_per_annulus,
        epsilon_count=epsilon_count, c_max=c_max, fmt=fmt, output=output,
    )
    theorems = data.get("theorems") or ["T3"]
    levels = int(data.get("levels", 8))
    alpha = float(data.get("alpha", 1.0))
    beta = data.get("beta")
    beta = float(beta) if beta is not None else None
    t_par = data.get("t")
    t_par = float(t_par) if t_par is not None else None
    # validate the space selection before touching the corpus so range
    # violations are reported by name
    for thm in theorems:
        if thm not in THEOREMS:
            raise click.UsageError(f"unknown theorem {thm!r}; choose from {THEOREMS}")
        try:
            theorem_space(thm, float(data.get("p", 2.0)), alpha, beta, t_par)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    cfg = ExperimentConfig(
        corpus=_resolve_corpus(data, theorems, levels, alpha, beta),
        theorems=list(theorems),
        p=float(data.get("p", 2.0)),
        alpha=alpha,
        beta=beta,
        t=t_par,
        levels=levels,
        points_per_annulus=int(data.get("points_per_annulus", 6)),
        tail_levels=int(data.get("tail_levels", 5)),
        sphere_oversample=int(data.get("sphere_oversample", 3)),
        epsilon_count=int(data.get("epsilon_count", 8)),
        c_max=float(data.get("c_max", 50.0)),
        grid_tol=float(data.get("grid_tol", 0.05)),
        seed=int(data.get("seed", 0)),
        output=str(data.get("output", "-")),
        fmt=str(data.get("fmt", data.get("format", "csv"))),
    )
    cfg.validate()

    grid = radial_grid(cfg.levels, cfg.points_per_annulus)
    jobs = [(spec, thm) for spec in cfg.corpus for thm in cfg.theorems]

    def run_job(job):
        spec, thm = job
        params = theorem_space(thm, cfg.p, cfg.alpha, cfg.beta, cfg.t)
        rule = sphere_rule(spec.n, cfg.sphere_oversample * spec.K + 64)
        rep = distance_report(
            spec, thm, params, grid=grid, rule=rule,
            tail_levels=cfg.tail_levels, n_epsilon=cfg.epsilon_count,
        )
        rec = rep.to_record(spec.label())
        rec["level_set"] = json.dumps(rec["level_set"])
        return rec

    with concurrent.futures.ThreadPoolExecutor(max_workers=_workers()) as pool:
        rows = list(pool.map(run_job, jobs))

    meta = {"harmex": __version__, "config_sha256": cfg.digest()}
    fieldnames = ["function", "theorem", "epsilon_star", "s1_upper", "ratio",
                  "epsilon_used", "rejected", "f1_norm", "level_set"]
    _write_rows(cfg.output, cfg.fmt, meta, fieldnames, rows)

    ok = True
    for row in rows:
        if row["rejected"]:
            continue
        ratio = row["ratio"]
        if not (math.isfinite(ratio) and 1.0 - cfg.grid_tol <= ratio <= cfg.c_max):
            ok = False
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--function", "func_json", required=True, help="Test function spec as JSON.")
@click.option("--functional", type=click.Choice(["M1", "M2", "Minf", "Aalpha"]), default="M1", show_default=True)
@click.option("--alpha", type=float, default=0.0, show_default=True, help="Weight for Aalpha.")
@click.option("--levels", type=int, default=8, show_default=True)
@click.option("--points-per-annulus", type=int, default=6, show_default=True)
@click.option("--format", "fmt", type=click.Choice(_FORMATS), default="csv", show_default=True)
@click.option("--output", default="-", show_default=True)
def profile(func_json, functional, alpha, levels, points_per_annulus, fmt, output):
    """Emit r vs functional-value tables for one test function."""
    try:
        spec = TestFunctionSpec.from_json(func_json)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad function spec: {exc}")
    f = spec.to_expansion()
    grid = radial_grid(levels, points_per_annulus)
    rule = sphere_rule(f.n, 3 * f.K + 64)
    if functional == "Aalpha":
        prof = ball_average_profile(f, alpha, grid, rule)
    else:
        p = {"M1": 1.0, "M2": 2.0, "Minf": math.inf}[functional]
        prof = mean_profile(f, p, grid, rule)
    meta = {"harmex": __version__, "function": spec.label(), "functional": functional}
    rows = [{"r": float(r), "value": float(v)} for r, v in zip(prof.radii, prof.values)]
    _write_rows(output, fmt, meta, ["r", "value"], rows)
    sys.exit(0)


@main.command()
@click.option("--function", "func_json", required=True, help="Test function spec as JSON.")
@click.option("--order", type=float, required=True, help="Kernel order of the splitting.")
@click.option("--interval", "intervals", multiple=True, help="Radius interval a:b (repeatable).")
@click.option("--format", "fmt", type=click.Choice(_FORMATS), default="csv", show_default=True)
@click.option("--output", default="-", show_default=True)
def decompose(func_json, order, intervals, fmt, output):
    """Dump the degree multipliers w_k of the kernel splitting over a set."""
    try:
        spec = TestFunctionSpec.from_json(func_json)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad function spec: {exc}")
    if not intervals:
        raise click.UsageError("at least one --interval a:b is required")
    try:
        pairs = []
        for item in intervals:
            a, b = item.split(":")
            pairs.append((float(a), float(b)))
        from .intervals import IntervalSet

        level = IntervalSet.from_pairs(pairs)
    except ValueError as exc:
        raise click.UsageError(f"bad interval: {exc}")
    if order <= -1.0:
        raise click.UsageError("kernel order must satisfy order > -1")
    f = spec.to_expansion()
    w = split_multipliers(f.K, order, f.n, level)
    meta = {"harmex": __version__, "function": spec.label(), "order": order}
    rows = [{"k": int(k), "w": float(wk)} for k, wk in enumerate(w)]
    _write_rows(output, fmt, meta, ["k", "w"], rows)
    sys.exit(0)


if __name__ == "__main__":
    main()
