"""Command-line interface.

Subcommands
-----------
exact      closed-form expected divergence of a model under a Dirichlet prior
pointwise  divergence D(p||model) and the projection for an explicit p
mc         Monte Carlo estimate of the expected divergence
sweep      union-of-bipartitions experiment grid over N and a
field      divergence field on the barycentric grid of a three-state space
selftest   run the acceptance checks and report PASS/FAIL per criterion

All commands emit one long-form table (CSV by default, JSON with
--format json) with a fixed column order:

    command, quantity, model_kind, N, factors, a_or_alpha, k, n_samples,
    seed, value, std_error, error_order, wall_time_ms, x1, x2, x3, weight

The trailing x1..weight columns only carry data for `field` rows
(barycentric coordinates and quadrature weight).  With
--no-header-timestamp the generated-at comment line is omitted and
wall_time_ms is left blank, making output byte-identical for identical
jobs and seeds.

The default seed is 123456789; pass --seed to change it.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import selftest
from .core import DirichletPrior, Pmf, StateSpace, kl_divergence
from .errors import NumericDomainError, SchemaError, ValidationError
from .expectations import (
    expected_div_decomposable,
    expected_div_disjoint_mixture,
    expected_div_partition,
    expected_div_to_point,
    expected_div_uniform,
    expected_multi_information,
)
from .mc import estimate_expected_divergence, experiment_union_partitions, simplex_field
from .models import (
    Decomposable,
    DisjointMixture,
    FixedPoint,
    Independence,
    PartitionModel,
    Uniform,
    UnionOfPartitions,
    model_from_json,
    multi_information,
    divergence_from_decomposable,
    divergence_from_disjoint_mixture,
    divergence_from_partition_model,
    divergence_from_union,
)
from .special import EULER_GAMMA, harmonic_real

DEFAULT_SEED = 123456789

COLUMNS = [
    "command", "quantity", "model_kind", "N", "factors", "a_or_alpha", "k",
    "n_samples", "seed", "value", "std_error", "error_order", "wall_time_ms",
    "x1", "x2", "x3", "weight",
]


@dataclass
class JobSpec:
    """A fully parsed command invocation."""

    command: str
    model_json: dict | None
    factors: tuple[int, ...] | None
    sym_prior: tuple[float, int | None] | None   # (a, N or None)
    prior_alpha: list[float] | None
    prior_factors: tuple[int, ...] | None
    p_weights: list[float] | None
    family: str | None
    n_grid: list[int]
    a_grid: list[float]
    resolution: int | None
    n_samples: int | None
    seed: int
    workers: int | None
    minimizer: str
    out: str | None
    fmt: str
    timestamp: bool
    only_check: str | None = None
    extra: dict = field(default_factory=dict)


def _parse_int_grid(text: str) -> list[int]:
    """Accept '4:2:40' (start:step:stop inclusive) or '4,6,8'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must be start:step:stop or a comma list")
        start, step, stop = (int(x) for x in parts)
        if step <= 0:
            raise ValidationError("grid step must be positive")
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_sym_prior(text: str) -> tuple[float, int | None]:
    """Parse 'a=<x>[,N=<n>]'."""
    a_val: float | None = None
    n_val: int | None = None
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise ValidationError(f"bad --sym-prior fragment {piece!r} (use a=<x>,N=<n>)")
        key, val = piece.split("=", 1)
        key = key.strip().lower()
        if key == "a":
            a_val = float(val)
        elif key == "n":
            n_val = int(val)
        else:
            raise ValidationError(f"unknown --sym-prior key {key!r}")
    if a_val is None:
        raise ValidationError("--sym-prior needs a=<x>")
    return a_val, n_val


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None


def _parse_inline_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}"
        ) from None


_MODEL_SHORTHANDS = {"uniform": {"kind": "uniform"}, "independence": {"kind": "independence"}}


def build_jobspec(args: argparse.Namespace) -> JobSpec:
    model_json = None
    if getattr(args, "model", None):
        txt = args.model.strip()
        model_json = _MODEL_SHORTHANDS.get(txt) or _parse_inline_json(txt, "--model")
    elif getattr(args, "model_file", None):
        model_json = _load_json(args.model_file)
    prior_alpha = prior_factors = None
    if getattr(args, "prior_file", None):
        raw = _load_json(args.prior_file)
        if isinstance(raw, list):
            prior_alpha = [float(x) for x in raw]
        elif isinstance(raw, dict) and "alpha" in raw:
            prior_alpha = [float(x) for x in raw["alpha"]]
            if "factors" in raw:
                prior_factors = tuple(int(x) for x in raw["factors"])
        else:
            raise ValidationError(f"{args.prior_file}: expected an alpha array or an object with 'alpha'")
    p_weights = None
    if getattr(args, "p", None):
        p_weights = [float(x) for x in _parse_inline_json(args.p, "--p")]
    elif getattr(args, "p_file", None):
        raw = _load_json(args.p_file)
        if isinstance(raw, dict):
            raw = raw.get("p")
        if not isinstance(raw, list):
            raise ValidationError("--p-file must hold an array (or an object with 'p')")
        p_weights = [float(x) for x in raw]
    return JobSpec(
        command=args.cmd,
        model_json=model_json,
        factors=tuple(int(x) for x in args.factors.split(",")) if getattr(args, "factors", None) else None,
        sym_prior=_parse_sym_prior(args.sym_prior) if getattr(args, "sym_prior", None) else None,
        prior_alpha=prior_alpha,
        prior_factors=prior_factors,
        p_weights=p_weights,
        family=getattr(args, "family", None),
        n_grid=_parse_int_grid(args.N) if getattr(args, "N", None) else [],
        a_grid=_parse_float_list(args.a) if getattr(args, "a", None) else [],
        resolution=getattr(args, "resolution", None),
        n_samples=getattr(args, "n", None),
        seed=args.seed,
        workers=getattr(args, "workers", None),
        minimizer=getattr(args, "minimizer", "auto"),
        out=getattr(args, "out", None),
        fmt=args.format,
        timestamp=not args.no_header_timestamp,
        only_check=getattr(args, "only", None),
    )


def _resolve_space(job: JobSpec) -> StateSpace:
    if job.factors:
        return StateSpace(job.factors)
    if job.prior_factors:
        return StateSpace(job.prior_factors)
    if job.prior_alpha is not None:
        return StateSpace.plain(len(job.prior_alpha))
    if job.sym_prior and job.sym_prior[1] is not None:
        return StateSpace.plain(job.sym_prior[1])
    raise ValidationError("cannot determine the state space: pass --factors, --sym-prior a=..,N=.., or --prior-file")


def _resolve_prior(job: JobSpec, space: StateSpace) -> DirichletPrior:
    if job.prior_alpha is not None:
        return DirichletPrior(space, np.asarray(job.prior_alpha))
    if job.sym_prior:
        return DirichletPrior.symmetric(space, job.sym_prior[0])
    raise ValidationError("a prior is required: pass --sym-prior or --prior-file")


def _prior_digest(job: JobSpec, prior: DirichletPrior | None) -> str:
    if prior is None:
        return ""
    if prior.is_symmetric:
        return f"a={prior.alpha[0]:g}"
    h = hashlib.sha1(prior.alpha.tobytes()).hexdigest()[:12]
    return f"sha1:{h}"


def _model_kind(model) -> str:
    return {
        Uniform: "uniform", FixedPoint: "fixed_point", PartitionModel: "partition",
        Independence: "independence", Decomposable: "decomposable",
        DisjointMixture: "disjoint_mixture", UnionOfPartitions: "union_of_partitions",
    }[type(model)]


def _base_row(command: str) -> dict:
    return {c: "" for c in COLUMNS} | {"command": command}


# ---------------------------------------------------------------------------
# Command implementations (each returns a list of row dicts)
# ---------------------------------------------------------------------------


def _require_model(job: JobSpec, space: StateSpace):
    if job.model_json is None:
        raise ValidationError("this command needs --model or --model-file")
    return model_from_json(job.model_json, space)


def _cmd_exact(job: JobSpec) -> list[dict]:
    space = _resolve_space(job)
    prior = _resolve_prior(job, space)
    model = _require_model(job, space)
    t0 = time.perf_counter()
    if isinstance(model, Uniform):
        res = expected_div_uniform(prior)
    elif isinstance(model, FixedPoint):
        res = expected_div_to_point(prior, model.q)
    elif isinstance(model, Independence):
        res = expected_multi_information(prior)
    elif isinstance(model, PartitionModel):
        res = expected_div_partition(prior, model.part, model.nu)
    elif isinstance(model, Decomposable):
        res = expected_div_decomposable(prior, model.jt)
    elif isinstance(model, DisjointMixture):
        res = expected_div_disjoint_mixture(prior, model.blocks)
    else:
        raise ValidationError(f"no closed-form expectation for model kind {_model_kind(model)!r}")
    dt_ms = (time.perf_counter() - t0) * 1e3
    row = _base_row("exact") | {
        "quantity": res.formula_id,
        "model_kind": _model_kind(model),
        "N": space.size,
        "factors": "x".join(map(str, space.factors)),
        "a_or_alpha": _prior_digest(job, prior),
        "value": res.value,
        "error_order": res.asymptotic_error_order or "",
        "wall_time_ms": dt_ms,
    }
    return [row]


def _cmd_pointwise(job: JobSpec) -> list[dict]:
    space = _resolve_space(job) if (job.factors or job.prior_alpha or job.sym_prior) else None
    if space is None:
        if job.p_weights is None:
            raise ValidationError("pointwise needs --p or --p-file")
        space = StateSpace.plain(len(job.p_weights))
    if job.p_weights is None:
        raise ValidationError("pointwise needs --p or --p-file")
    p = Pmf(space, np.asarray(job.p_weights))
    model = _require_model(job, space)
    t0 = time.perf_counter()
    if isinstance(model, Uniform):
        div = kl_divergence(p, Pmf.uniform(space)).require_finite()
        res = None
    elif isinstance(model, FixedPoint):
        div = kl_divergence(p, model.q).require_finite()
        res = None
    elif isinstance(model, PartitionModel):
        res = divergence_from_partition_model(p, model.part, model.nu)
    elif isinstance(model, Independence):
        res = multi_information(p)
    elif isinstance(model, Decomposable):
        res = divergence_from_decomposable(p, model.jt)
    elif isinstance(model, DisjointMixture):
        res = divergence_from_disjoint_mixture(p, model.blocks)
    elif isinstance(model, UnionOfPartitions):
        res = divergence_from_union(p, model.parts, model.nu)
    else:
        raise ValidationError(f"unsupported model kind {_model_kind(model)!r}")
    if res is not None:
        div = res.divergence
    dt_ms = (time.perf_counter() - t0) * 1e3
    row = _base_row("pointwise") | {
        "quantity": "divergence",
        "model_kind": _model_kind(model),
        "N": space.size,
        "factors": "x".join(map(str, space.factors)),
        "value": div,
        "wall_time_ms": dt_ms,
    }
    if res is not None and res.argmin_member is not None:
        row["k"] = res.argmin_member
    if job.fmt == "json" and res is not None:
        row["q_star"] = res.q_star.weights.tolist()
    return [row]


def _cmd_mc(job: JobSpec) -> list[dict]:
    space = _resolve_space(job)
    prior = _resolve_prior(job, space)
    model = _require_model(job, space)
    n = job.n_samples or 10_000
    t0 = time.perf_counter()
    est = estimate_expected_divergence(prior, model, n, job.seed, job.workers)
    dt_ms = (time.perf_counter() - t0) * 1e3
    row = _base_row("mc") | {
        "quantity": "mc_divergence",
        "model_kind": _model_kind(model),
        "N": space.size,
        "factors": "x".join(map(str, space.factors)),
        "a_or_alpha": _prior_digest(job, prior),
        "n_samples": est.n_samples,
        "seed": est.seed,
        "value": est.mean,
        "std_error": est.std_error,
        "wall_time_ms": dt_ms,
    }
    return [row]


def _cmd_sweep(job: JobSpec) -> list[dict]:
    if not job.family:
        raise ValidationError("sweep needs --family {upsilon1|upsilon2|upsilon_half}")
    if not job.n_grid or not job.a_grid:
        raise ValidationError("sweep needs --N and --a grids")
    rows = []
    results = experiment_union_partitions(
        job.family, job.n_grid, job.a_grid, job.n_samples, job.seed,
        job.minimizer, job.workers,
    )
    for r in results:
        rows.append(
            _base_row("sweep") | {
                "quantity": "mc_union_divergence",
                "model_kind": r.family,
                "N": r.N,
                "factors": str(r.N),
                "a_or_alpha": f"a={r.a:g}",
                "k": r.k,
                "n_samples": r.n_samples,
                "seed": r.seed,
                "value": r.estimate,
                "std_error": r.std_error,
                "error_order": f"family_size={r.family_size}",
                "wall_time_ms": r.wall_time_ms,
            }
        )
    # One asymptote row per concentration value: the large-N limit of the
    # expected divergence from a single bipartition model, h(a) - log a - gamma.
    for a in job.a_grid:
        asym = float(harmonic_real(float(a))) - math.log(a) - EULER_GAMMA
        rows.append(
            _base_row("sweep") | {
                "quantity": "asymptote",
                "model_kind": job.family,
                "a_or_alpha": f"a={a:g}",
                "value": asym,
            }
        )
    return rows


def _cmd_field(job: JobSpec) -> list[dict]:
    if job.resolution is None:
        raise ValidationError("field needs --resolution")
    space = StateSpace.plain(3)
    model = _require_model(job, space)
    weight = None
    if job.sym_prior or job.prior_alpha is not None:
        weight = _resolve_prior(job, space)
    t0 = time.perf_counter()
    grid = simplex_field(model, job.resolution, weight)
    dt_ms = (time.perf_counter() - t0) * 1e3
    rows = []
    for pt, val, w in zip(grid.points, grid.values, grid.weights):
        rows.append(
            _base_row("field") | {
                "quantity": "field_value",
                "model_kind": _model_kind(model),
                "N": 3,
                "factors": "3",
                "a_or_alpha": _prior_digest(job, weight),
                "k": grid.resolution,
                "value": float(val),
                "wall_time_ms": dt_ms,
                "x1": float(pt[0]),
                "x2": float(pt[1]),
                "x3": float(pt[2]),
                "weight": float(w),
            }
        )
    return rows


def _cmd_selftest(job: JobSpec) -> list[dict]:
    results = selftest.run_all(job.only_check, job.workers, printer=lambda s: print(s, flush=True))
    rows = []
    for r in results:
        rows.append(
            _base_row("selftest") | {
                "quantity": r.name,
                "value": 1 if r.passed else 0,
                "error_order": "pass" if r.passed else "fail",
                "wall_time_ms": r.runtime_s * 1e3,
            }
        )
    if not all(r.passed for r in results):
        raise _SelftestFailure(rows)
    return rows


class _SelftestFailure(Exception):
    def __init__(self, rows):
        self.rows = rows
        super().__init__("selftest reported failures")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows: list[dict], job: JobSpec) -> None:
    if not job.timestamp:
        for r in rows:
            r["wall_time_ms"] = ""
    if job.fmt == "json":
        payload = json.dumps(rows, indent=2, sort_keys=True)
        if job.out:
            with open(job.out, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
        else:
            print(payload)
        return
    buf = io.StringIO()
    if job.timestamp:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        buf.write(f"# generated {stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_format_cell(r.get(c, "")) for c in COLUMNS])
    text = buf.getvalue()
    if job.out:
        with open(job.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser, *, model=False, prior=False, sampling=False):
    if model:
        sp.add_argument("--model", help="inline model JSON, or a shorthand (uniform, independence)")
        sp.add_argument("--model-file", help="path to a model JSON file")
    sp.add_argument("--factors", help="comma-separated factor sizes, e.g. 2,2,3")
    if prior:
        sp.add_argument("--sym-prior", help="symmetric prior, e.g. a=1,N=16 (N optional with --factors)")
        sp.add_argument("--prior-file", help="JSON file with an alpha array (optionally {'alpha':.., 'factors':..})")
    if sampling:
        sp.add_argument("--n", type=int, help="sample count")
        sp.add_argument("--workers", type=int, help="worker threads (default: available parallelism)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--no-header-timestamp", action="store_true",
                    help="omit the timestamp comment and wall-time column for byte-identical output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="divexp",
        description="Exact and Monte Carlo expected Kullback-Leibler divergences under Dirichlet priors.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("exact", help="closed-form expected divergence")
    _add_common(sp, model=True, prior=True)

    sp = sub.add_parser("pointwise", help="divergence and projection for an explicit p")
    _add_common(sp, model=True, prior=True)
    sp.add_argument("--p", help="inline JSON array of probabilities")
    sp.add_argument("--p-file", help="JSON file with the probability vector")

    sp = sub.add_parser("mc", help="Monte Carlo expected divergence")
    _add_common(sp, model=True, prior=True, sampling=True)

    sp = sub.add_parser("sweep", help="union-of-bipartitions experiment grid")
    _add_common(sp, prior=False, sampling=True)
    sp.add_argument("--family", choices=("upsilon1", "upsilon2", "upsilon_half"),
                    help="bipartition family: block size 1, 2, or N/2")
    sp.add_argument("--N", help="system-size grid: start:step:stop or comma list")
    sp.add_argument("--a", help="comma list of symmetric concentration values")
    sp.add_argument("--minimizer", choices=("auto", "brute", "fast"), default="auto")

    sp = sub.add_parser("field", help="divergence field on the 2-simplex grid")
    _add_common(sp, model=True, prior=True)
    sp.add_argument("--resolution", type=int, help="barycentric grid resolution")

    sp = sub.add_parser("selftest", help="run the acceptance checks")
    _add_common(sp, sampling=True)
    sp.add_argument("--only", help="run a single named check")
    return ap


_COMMANDS = {
    "exact": _cmd_exact,
    "pointwise": _cmd_pointwise,
    "mc": _cmd_mc,
    "sweep": _cmd_sweep,
    "field": _cmd_field,
    "selftest": _cmd_selftest,
}


def run(job: JobSpec) -> int:
    """Execute a parsed job; returns the process exit code."""
    try:
        rows = _COMMANDS[job.command](job)
    except _SelftestFailure as exc:
        write_rows(exc.rows, job)
        return 1
    except (SchemaError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericDomainError as exc:
        print(f"numeric domain error: {exc}", file=sys.stderr)
        return 2
    write_rows(rows, job)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = build_jobspec(args)
    except (SchemaError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(job)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
