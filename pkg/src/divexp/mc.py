"""Deterministic Monte Carlo estimation of expected divergences.

Reproducibility contract
------------------------
Every sample is a pure function of (seed, sample index): each index owns an
independent generator state derived by 64-bit mixing of the seed and the
index, so estimates are bit-identical for a fixed (seed, n) regardless of
worker count or evaluation order.  Chunks of a fixed size are evaluated
independently (possibly by a thread pool) and their partial sums are
combined by pairwise summation in index order.

Sampling
--------
Dirichlet draws are built from independent standard gamma variates
normalized to sum one.  Gamma generation uses the squeeze-accept method
(d = a - 1/3, c = 1/sqrt(9d), accept d*(1+c*x)^3 against a squeeze and a
log test) for shape >= 1, with the usual boost g_a = g_{a+1} * U^(1/a) for
shape < 1.  Normal variates come from the polar rejection method; all
uniform variates are counter-indexed splitmix64 outputs, so rejection
loops stay per-element pure functions of (seed, index, coordinate, round).

This module also hosts the union-of-bipartition-models experiments: exact
enumeration of two-block partitions, a sort-based fast minimizer over a
bipartition family, the expected-divergence sweep driver, and the
barycentric field evaluator used for triangle heat maps.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator

import numpy as np

from .core import DirichletPrior, Partition, Pmf, StateSpace
from .errors import EstimationError, ValidationError
from .models import (
    ModelSpec,
    PartitionModel,
    ProjectionResult,
    UnionOfPartitions,
    batch_divergence,
    divergence_from_partition_model,
)
from .special import log_gamma

# Fixed evaluation chunk size; part of the determinism contract (results
# depend on it, so it is a constant, never derived from worker count).
CHUNK_SIZE = 4096

_MASK = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
# Reserved counter offset for the shape<1 boost uniform, far above any
# rejection-round counter.
_BOOST_OFFSET = ((1 << 40) * _GOLD) & _MASK

_EXP_ONE = np.uint64(0x3FF0000000000000)
_U12 = np.uint64(12)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)


def _mix64_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _fold_int(*words: int) -> int:
    """Fold integers into one well-mixed 64-bit key."""
    k = _mix64_int(_GOLD)
    for w in words:
        k = _mix64_int((k ^ (int(w) & _MASK)) + _GOLD)
    return k


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * np.uint64(_MIX1)
    z = (z ^ (z >> _U27)) * np.uint64(_MIX2)
    return z ^ (z >> _U31)


def _unit_open(h: np.ndarray) -> np.ndarray:
    """Map 64-bit hashes to uniforms in (0, 1] on a 2^-52 grid."""
    return 2.0 - ((h >> _U12) | _EXP_ONE).view(np.float64)


def _unit_half_open(h: np.ndarray) -> np.ndarray:
    """Map 64-bit hashes to uniforms in [0, 1) on a 2^-52 grid."""
    return ((h >> _U12) | _EXP_ONE).view(np.float64) - 1.0


def _counter_hash(base: np.ndarray, t: int) -> np.ndarray:
    off = np.uint64((t * _GOLD) & _MASK)
    return _mix64(base + off)


def _std_gamma(base: np.ndarray, shape: np.ndarray) -> np.ndarray:
    """Standard gamma variate per element, each a pure function of its base
    key and shape.  Flat float64 arrays in, flat float64 out."""
    small = shape < 1.0
    eff = np.where(small, shape + 1.0, shape)
    d = eff - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(d)
    idx = None  # None means "all elements", else flat positions still pending
    r = 0
    while True:
        b = base if idx is None else base[idx]
        dd = d if idx is None else d[idx]
        cc = c if idx is None else c[idx]
        u = 2.0 * _unit_half_open(_counter_hash(b, 3 * r)) - 1.0
        v = 2.0 * _unit_half_open(_counter_hash(b, 3 * r + 1)) - 1.0
        s = u * u + v * v
        ok_s = (s > 0.0) & (s < 1.0)
        s_safe = np.where(ok_s, s, 0.5)
        x = u * np.sqrt(-2.0 * np.log(s_safe) / s_safe)
        t1 = 1.0 + cc * x
        ok_t = t1 > 0.0
        vol = t1 * t1 * t1
        u3 = _unit_open(_counter_hash(b, 3 * r + 2))
        x2 = x * x
        squeeze = u3 < 1.0 - 0.0331 * x2 * x2
        vol_safe = np.where(ok_t, vol, 1.0)
        full = np.log(u3) < 0.5 * x2 + dd * (1.0 - vol_safe + np.log(vol_safe))
        acc = ok_s & ok_t & (squeeze | full)
        val = dd * vol
        if idx is None:
            out[acc] = val[acc]
            idx = np.nonzero(~acc)[0]
        else:
            out[idx[acc]] = val[acc]
            idx = idx[~acc]
        if idx.size == 0:
            break
        r += 1
        if r > 1000:  # unreachable: acceptance per round is ~3/4
            raise EstimationError("gamma sampler failed to accept after 1000 rounds")
    if small.any():
        ub = _unit_open(_mix64(base[small] + np.uint64(_BOOST_OFFSET)))
        out[small] *= ub ** (1.0 / shape[small])
    return out


@dataclass(frozen=True)
class SampleStream:
    """A deterministic stream of Dirichlet draws: sample i is a pure
    function of (seed, i), independent of how samples are batched."""

    seed: int

    def _base_keys(self, n_coords: int, start: int, count: int) -> np.ndarray:
        key0 = np.uint64(_mix64_int((self.seed + _GOLD) & _MASK))
        i = (np.arange(start, start + count, dtype=np.uint64))[:, None]
        j = (np.arange(n_coords, dtype=np.uint64))[None, :]
        return _mix64(_mix64(key0 ^ i) ^ j)

    def dirichlet_block(self, prior: DirichletPrior, start: int, count: int) -> np.ndarray:
        """Rows start..start+count-1 of the Dirichlet sample sequence,
        as a (count, N) matrix."""
        n = prior.space.size
        base = self._base_keys(n, start, count).ravel()
        shape = np.broadcast_to(prior.alpha, (count, n)).ravel().copy()
        g = _std_gamma(base, shape).reshape(count, n)
        return g / g.sum(axis=1, keepdims=True)


def sample_dirichlet(prior: DirichletPrior, stream: SampleStream, index: int) -> Pmf:
    """The index-th Dirichlet draw of the stream (gamma variates normalized
    to sum one)."""
    row = stream.dirichlet_block(prior, int(index), 1)[0]
    return Pmf(prior.space, row)


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    std_error: float
    n_samples: int
    seed: int


def _pairwise_total(parts: list[float]) -> float:
    """Sum a list in a fixed pairwise tree order (bit-stable reduction)."""
    vals = [float(v) for v in parts]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [
            vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
            for i in range(0, len(vals), 2)
        ]
        vals = nxt
    return vals[0]


def _default_workers(workers: int | None) -> int:
    if workers is None:
        return os.cpu_count() or 1
    if workers < 1:
        raise ValidationError("worker count must be >= 1")
    return int(workers)


def estimate_batch_mean(
    batch_fn: Callable[..., np.ndarray],
    priors: list[DirichletPrior],
    n: int,
    seed: int,
    workers: int | None = None,
) -> McEstimate:
    """Mean and standard error of batch_fn(P_1, ..., P_m) over n independent
    joint draws, each P_j sampled from its own derived stream.

    The result is bit-identical for fixed (seed, n) whatever the worker
    count: chunk boundaries are fixed, each chunk is a pure function of the
    seed, and partial sums are combined pairwise in chunk order.
    """
    if n < 2:
        raise ValidationError("need at least 2 samples for a standard error")
    streams = [SampleStream(_fold_int(seed, 101 + t)) for t in range(len(priors))]
    n_chunks = (n + CHUNK_SIZE - 1) // CHUNK_SIZE

    def do_chunk(ci: int) -> tuple[float, float, bool]:
        start = ci * CHUNK_SIZE
        count = min(CHUNK_SIZE, n - start)
        mats = [st.dirichlet_block(pr, start, count) for st, pr in zip(streams, priors)]
        v = np.asarray(batch_fn(*mats), dtype=np.float64)
        finite = bool(np.isfinite(v).all())
        if not finite:
            return 0.0, 0.0, False
        return float(v.sum()), float((v * v).sum()), True

    w = _default_workers(workers)
    if w == 1:
        results = [do_chunk(ci) for ci in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            results = list(pool.map(do_chunk, range(n_chunks)))
    if not all(ok for _s, _s2, ok in results):
        raise EstimationError("sampled values contain non-finite entries")
    total = _pairwise_total([s for s, _s2, _ok in results])
    total_sq = _pairwise_total([s2 for _s, s2, _ok in results])
    mean = total / n
    var = max(total_sq - total * total / n, 0.0) / (n - 1)
    return McEstimate(mean=mean, std_error=math.sqrt(var / n), n_samples=n, seed=seed)


def estimate_expected_divergence(
    prior: DirichletPrior,
    model: ModelSpec,
    n: int,
    seed: int,
    workers: int | None = None,
) -> McEstimate:
    """Monte Carlo estimate of the expected divergence from a model under a
    Dirichlet prior (mean of D(p||model) over n deterministic draws)."""
    if model.space != prior.space:
        raise ValidationError("model and prior must share a space")
    return estimate_batch_mean(
        lambda P: batch_divergence(model, P), [prior], n, seed, workers
    )


# ---------------------------------------------------------------------------
# Bipartition families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartitionFamily:
    """All partitions of {0..N-1} into two blocks of sizes k and N-k."""

    N: int
    k: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValidationError("N must be an integer >= 2")
        if int(self.k) != self.k or not 1 <= self.k <= self.N // 2:
            raise ValidationError(f"block size k must satisfy 1 <= k <= N/2, got {self.k}")

    @property
    def count(self) -> int:
        """C(N, k), halved when k = N/2 (complementary pairs coincide)."""
        c = math.comb(self.N, self.k)
        return c // 2 if 2 * self.k == self.N else c


def enumerate_bipartitions(N: int, k: int) -> Iterator[Partition]:
    """Yield every two-block partition with block sizes (k, N-k) exactly
    once; for k = N/2 only the representative whose first block contains
    state 0 is emitted."""
    BipartitionFamily(N, k)  # validate the (N, k) range
    space = StateSpace.plain(N)
    full = set(range(N))
    if 2 * k < N:
        first_blocks = combinations(range(N), k)
    else:
        first_blocks = ((0,) + rest for rest in combinations(range(1, N), k - 1))
    for blk in first_blocks:
        rest = tuple(sorted(full.difference(blk)))
        yield Partition._trusted(space, (tuple(blk), rest))


def _bipartition_indicators(N: int, k: int) -> np.ndarray:
    """(N, count) 0/1 matrix of first blocks of the (N, k) family."""
    fam = BipartitionFamily(N, k)
    m = np.zeros((N, fam.count))
    if 2 * k < N:
        cols = combinations(range(N), k)
    else:
        cols = ((0,) + rest for rest in combinations(range(1, N), k - 1))
    for j, blk in enumerate(cols):
        m[list(blk), j] = 1.0
    return m


def _bipartition_value(hp: np.ndarray, s: np.ndarray, comp: np.ndarray, k: int, N: int):
    """D(p||M) for a bipartition with first-block mass s and sizes (k, N-k)."""
    t1 = np.where(s > 0, s * (np.log(np.where(s > 0, s, 1.0)) - math.log(k)), 0.0)
    t2 = np.where(
        comp > 0, comp * (np.log(np.where(comp > 0, comp, 1.0)) - math.log(N - k)), 0.0
    )
    return np.maximum(-hp - t1 - t2, 0.0)


def _batch_min_bipartition(
    P: np.ndarray, k: int, minimizer: str, indicators: np.ndarray | None = None
) -> np.ndarray:
    """Per-row minimum of D(p||M) over the (N, k) bipartition family.

    'brute' evaluates every member through its first-block mass; 'fast'
    evaluates only the two extreme candidate blocks (the k smallest and the
    k largest probabilities).  With a uniform reference measure the
    divergence is -H(p) - sum_blocks s*(log s - log size), a concave
    function of the first-block mass s, so its minimum over the achievable
    set of block masses is attained at an extreme achievable mass; both
    extremes are achievable, hence the two candidates suffice.  The
    equivalence is validated exhaustively against brute force in the tests.
    """
    N = P.shape[1]
    t = P * np.log(np.where(P > 0, P, 1.0))
    hp = -t.sum(axis=1)
    rs = P.sum(axis=1)
    if minimizer == "fast":
        srt = np.sort(P, axis=1)
        lo = srt[:, :k].sum(axis=1)
        hi = srt[:, N - k:].sum(axis=1)
        d_lo = _bipartition_value(hp, lo, rs - lo, k, N)
        d_hi = _bipartition_value(hp, hi, rs - hi, k, N)
        return np.minimum(d_lo, d_hi)
    if minimizer == "brute":
        m = _bipartition_indicators(N, k) if indicators is None else indicators
        # Cap the matmul workspace at ~2^24 doubles per slice.
        max_rows = max(1, (1 << 24) // m.shape[1])
        out = np.empty(P.shape[0])
        for lo_r in range(0, P.shape[0], max_rows):
            rows = slice(lo_r, min(P.shape[0], lo_r + max_rows))
            S = P[rows] @ m
            D = _bipartition_value(hp[rows, None], S, rs[rows, None] - S, k, N)
            out[rows] = D.min(axis=1)
        return out
    raise ValidationError(f"unknown minimizer {minimizer!r} (use 'brute' or 'fast')")


def fast_min_bipartition(p: Pmf, k: int) -> ProjectionResult:
    """Minimum divergence over all bipartition models with block sizes
    (k, N-k) and uniform reference measure, via the two extreme candidate
    blocks (see _batch_min_bipartition for the argument)."""
    N = p.space.size
    BipartitionFamily(N, k)
    order = np.argsort(p.weights, kind="stable")
    space = p.space
    full = set(range(N))
    results = []
    for blk in (order[:k], order[N - k:]):
        first = tuple(sorted(int(i) for i in blk))
        rest = tuple(sorted(full.difference(first)))
        part = Partition._trusted(space, (first, rest))
        results.append(divergence_from_partition_model(p, part))
    return min(results, key=lambda r: r.divergence)


# ---------------------------------------------------------------------------
# Union-of-bipartitions experiments
# ---------------------------------------------------------------------------

_FAMILIES = ("upsilon1", "upsilon2", "upsilon_half")

# Default sample counts per family; the N = 22 half-split runs use 500
# samples (the family then has 352716 members).
_FAMILY_DEFAULT_SAMPLES = {"upsilon1": 10_000, "upsilon2": 20_000, "upsilon_half": 10_000}
_UPSILON_HALF_BIG_N = 22
_UPSILON_HALF_BIG_N_SAMPLES = 500
# Brute force over the half-split family stops being worthwhile here.
_FAST_MINIMIZER_CUTOVER = 14


@dataclass(frozen=True)
class ExperimentRow:
    family: str
    N: int
    k: int
    a: float
    n_samples: int
    seed: int
    minimizer: str
    estimate: float
    std_error: float
    family_size: int
    wall_time_ms: float


EXPERIMENT_CSV_COLUMNS = (
    "family", "N", "k", "a", "n_samples", "seed", "minimizer",
    "estimate", "std_error", "family_size", "wall_time_ms",
)


def experiment_rows_to_csv(rows) -> str:
    """Serialize experiment rows to their CSV form (one header line plus
    one line per row, columns as in EXPERIMENT_CSV_COLUMNS)."""
    out = [",".join(EXPERIMENT_CSV_COLUMNS)]
    for r in rows:
        out.append(
            ",".join(
                repr(v) if isinstance(v, float) else str(v)
                for v in (getattr(r, c) for c in EXPERIMENT_CSV_COLUMNS)
            )
        )
    return "\n".join(out) + "\n"


def _family_block_size(family: str, N: int) -> int:
    if family == "upsilon1":
        return 1
    if family == "upsilon2":
        if N < 4:
            raise ValidationError("the two-block-of-2 family needs N >= 4")
        return 2
    if family == "upsilon_half":
        if N % 2:
            raise ValidationError("the half-split family needs even N")
        return N // 2
    raise ValidationError(f"unknown family {family!r}; expected one of {_FAMILIES}")


def estimate_union_divergence(
    N: int,
    k: int,
    a: float,
    n: int,
    seed: int,
    minimizer: str = "auto",
    workers: int | None = None,
) -> tuple[McEstimate, int, str]:
    """Expected divergence from the union of all (k, N-k) bipartition
    models under the symmetric Dirichlet prior with parameter a.

    Returns (estimate, family size, minimizer actually used)."""
    fam = BipartitionFamily(N, k)
    if minimizer == "auto":
        minimizer = "fast" if (2 * k == N and N > _FAST_MINIMIZER_CUTOVER) else "brute"
    prior = DirichletPrior.symmetric(StateSpace.plain(N), a)
    indicators = _bipartition_indicators(N, k) if minimizer == "brute" else None
    est = estimate_batch_mean(
        lambda P: _batch_min_bipartition(P, k, minimizer, indicators),
        [prior],
        n,
        seed,
        workers,
    )
    return est, fam.count, minimizer


def experiment_union_partitions(
    family: str,
    N_list,
    a_list,
    n_samples: int | None = None,
    seed: int = 0,
    minimizer: str = "auto",
    workers: int | None = None,
) -> list[ExperimentRow]:
    """Sweep the expected divergence from a union-of-bipartitions family
    over grids of system size N and symmetric concentration a.

    Cell seeds are derived from (seed, family, N, a), so a cell's estimate
    does not depend on the rest of the grid.
    """
    if family not in _FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {_FAMILIES}")
    rows = []
    for N in N_list:
        k = _family_block_size(family, int(N))
        for a in a_list:
            n = n_samples
            if n is None:
                n = _FAMILY_DEFAULT_SAMPLES[family]
                if family == "upsilon_half" and N == _UPSILON_HALF_BIG_N:
                    n = _UPSILON_HALF_BIG_N_SAMPLES
            cell_seed = _fold_int(seed, _FAMILIES.index(family), int(N),
                                  np.float64(a).view(np.uint64).item())
            t0 = time.perf_counter()
            est, fam_size, used = estimate_union_divergence(
                int(N), k, float(a), int(n), cell_seed, minimizer, workers
            )
            dt_ms = (time.perf_counter() - t0) * 1e3
            rows.append(
                ExperimentRow(
                    family=family, N=int(N), k=k, a=float(a), n_samples=int(n),
                    seed=cell_seed, minimizer=used, estimate=est.mean,
                    std_error=est.std_error, family_size=fam_size, wall_time_ms=dt_ms,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Barycentric field evaluation (triangle heat maps)
# ---------------------------------------------------------------------------


def dirichlet_density(prior: DirichletPrior, P: np.ndarray) -> np.ndarray:
    """Dirichlet density (including the 1/sqrt(N) embedding factor) at the
    rows of P."""
    a = prior.alpha
    log_norm = log_gamma(prior.alpha_total) - math.fsum(log_gamma(ai) for ai in a)
    dens = np.prod(np.power(P, a - 1.0), axis=1)
    return dens * math.exp(log_norm) / math.sqrt(prior.space.size)


@dataclass(frozen=True)
class FieldGrid:
    """A scalar field sampled on the uniform barycentric grid of the
    two-dimensional simplex, with piecewise-linear quadrature weights."""

    points: np.ndarray      # (M, 3) barycentric coordinates
    values: np.ndarray      # (M,) field values
    weights: np.ndarray     # (M,) quadrature weights (sum = area of the triangle)
    resolution: int


def simplex_field(
    model: ModelSpec, grid_resolution: int, weight: DirichletPrior | None = None
) -> FieldGrid:
    """Evaluate D(p||model) (optionally multiplied by a Dirichlet density)
    on the uniform barycentric grid of resolution R over the 2-simplex.

    Supported models are partition families and unions of them on a
    three-state space.  When the weighting density is singular at the
    boundary (some concentration parameter < 1) the boundary grid points
    are dropped.
    """
    if not isinstance(model, (PartitionModel, UnionOfPartitions)):
        raise ValidationError("simplex fields support partition models and unions of them")
    if model.space.size != 3:
        raise ValidationError("triangle rendering needs a three-state space")
    if grid_resolution < 2:
        raise ValidationError("grid resolution must be at least 2")
    if weight is not None and weight.space != model.space:
        raise ValidationError("weight prior and model must share a space")
    r = int(grid_resolution)
    ii, jj = np.meshgrid(np.arange(r + 1), np.arange(r + 1), indexing="ij")
    keep = ii + jj <= r
    i = ii[keep]
    j = jj[keep]
    l = r - i - j
    pts = np.stack([i, j, l], axis=1).astype(np.float64) / r

    # Piecewise-linear quadrature: each of the r^2 sub-triangles spreads a
    # third of its area onto its three corners.
    node_id = -np.ones((r + 1, r + 1), dtype=np.intp)
    node_id[i, j] = np.arange(i.size)
    units = np.zeros(i.size)
    iu, ju = np.meshgrid(np.arange(r), np.arange(r), indexing="ij")
    up = (iu + ju <= r - 1)
    for di, dj in ((0, 0), (1, 0), (0, 1)):
        np.add.at(units, node_id[iu[up] + di, ju[up] + dj], 1.0)
    down = (iu + ju <= r - 2)
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        np.add.at(units, node_id[iu[down] + di, ju[down] + dj], 1.0)
    area = math.sqrt(3.0) / 2.0
    weights = units * (area / 3.0) / (r * r)

    mask = np.ones(pts.shape[0], dtype=bool)
    if weight is not None and float(weight.alpha.min()) < 1.0:
        mask = (pts > 0).all(axis=1)
    pts, weights = pts[mask], weights[mask]
    vals = batch_divergence(model, pts)
    if weight is not None:
        vals = vals * dirichlet_density(weight, pts)
    return FieldGrid(points=pts, values=vals, weights=weights, resolution=r)
