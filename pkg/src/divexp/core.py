"""Probability distributions on finite product spaces and Dirichlet bookkeeping.

Conventions used throughout the package:

* A state space is a product of n finite factors of sizes (N_1, ..., N_n);
  a plain space is the single-factor case.  Factors are numbered 1..n.
* Composite states are indexed row-major with factor 1 slowest, i.e. the
  flat weight vector of a Pmf reshapes to shape (N_1, ..., N_n) in C order.
  States themselves are numbered 0..N-1.
* Entropies and divergences are in nats (natural logarithm), and
  0 * log 0 = 0; a term p_i * log(p_i / q_i) is 0 whenever p_i = 0.

Divergences that can be infinite (p puts mass where q does not) are
reported as an explicit tagged result, never as a bare floating-point
infinity, so callers must branch deliberately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericDomainError, ValidationError

# Pmf weights may miss an exact unit sum by this much before construction
# fails; anything closer is silently renormalized (sampled vectors carry
# rounding error).
PMF_SUM_TOL = 1e-10


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateSpace:
    """A finite product state space with factor sizes (N_1, ..., N_n)."""

    factors: tuple[int, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("a state space needs at least one factor")
        if any(int(f) != f or f < 1 for f in self.factors):
            raise ValidationError(f"factor sizes must be positive integers: {self.factors}")
        object.__setattr__(self, "factors", tuple(int(f) for f in self.factors))

    @classmethod
    def plain(cls, n_states: int) -> "StateSpace":
        return cls((n_states,))

    @property
    def n(self) -> int:
        """Number of factors."""
        return len(self.factors)

    @property
    def size(self) -> int:
        """Total number of states N = prod N_k."""
        return math.prod(self.factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.factors

    @property
    def is_composite(self) -> bool:
        return self.n > 1

    def check_factor_index(self, k: int) -> int:
        if int(k) != k or not 1 <= k <= self.n:
            raise ValidationError(f"factor index {k} out of range 1..{self.n}")
        return int(k)


@dataclass(frozen=True)
class Pmf:
    """A probability mass function on a StateSpace (a point of the simplex).

    Weights are validated to be nonnegative and to sum to 1 within
    PMF_SUM_TOL, then renormalized exactly (divided by their sum).
    """

    space: StateSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.space.size,):
            raise ValidationError(
                f"weight vector has length {w.shape}, expected ({self.space.size},)"
            )
        if (w < 0).any():
            raise ValidationError("pmf weights must be nonnegative")
        total = float(w.sum())
        if not math.isfinite(total) or abs(total - 1.0) > PMF_SUM_TOL:
            raise ValidationError(f"pmf weights sum to {total!r}, expected 1 within {PMF_SUM_TOL}")
        object.__setattr__(self, "weights", _as_readonly(w / total))

    @classmethod
    def uniform(cls, space: StateSpace) -> "Pmf":
        n = space.size
        return cls(space, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, space: StateSpace, state: int) -> "Pmf":
        w = np.zeros(space.size)
        w[state] = 1.0
        return cls(space, w)

    @property
    def tensor(self) -> np.ndarray:
        """The weights reshaped to the factor shape (read-only view)."""
        return self.weights.reshape(self.space.shape)


@dataclass(frozen=True)
class DirichletPrior:
    """A Dirichlet distribution on the simplex, given by its concentration
    parameter alpha (one positive entry per state).

    alpha_total caches the parameter sum; aggregation and marginalization
    carry it over unchanged so that block sums stay exactly consistent.
    """

    space: StateSpace
    alpha: np.ndarray
    alpha_total: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        if a.shape != (self.space.size,):
            raise ValidationError(
                f"alpha has shape {a.shape}, expected ({self.space.size},)"
            )
        if not (a > 0).all():
            raise ValidationError("all concentration parameters must be > 0")
        object.__setattr__(self, "alpha", _as_readonly(a))
        if self.alpha_total is None:
            object.__setattr__(self, "alpha_total", math.fsum(a.tolist()))

    @classmethod
    def symmetric(cls, space: StateSpace, a: float) -> "DirichletPrior":
        if a <= 0:
            raise ValidationError("symmetric concentration a must be > 0")
        n = space.size
        return cls(space, np.full(n, float(a)), alpha_total=a * n)

    @property
    def is_symmetric(self) -> bool:
        return bool((self.alpha == self.alpha[0]).all())

    @property
    def mean(self) -> Pmf:
        return Pmf(self.space, self.alpha / self.alpha_total)


@dataclass(frozen=True)
class Partition:
    """A partition of the state set {0, ..., N-1} into disjoint blocks."""

    space: StateSpace
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        n = self.space.size
        seen = np.zeros(n, dtype=bool)
        for b in blocks:
            if not b:
                raise ValidationError("partition blocks must be nonempty")
            idx = np.asarray(b, dtype=np.intp)
            if idx.min() < 0 or idx.max() >= n:
                raise ValidationError(f"block state out of range in {b}")
            if seen[idx].any():
                raise ValidationError("partition blocks must be disjoint")
            seen[idx] = True
        if not seen.all():
            raise ValidationError("partition blocks must cover all states")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def _trusted(cls, space: StateSpace, blocks: tuple[tuple[int, ...], ...]) -> "Partition":
        """Skip validation for blocks that are correct by construction."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def labels(self) -> np.ndarray:
        """Block index of each state, as an int array of length N."""
        lab = np.empty(self.space.size, dtype=np.intp)
        for k, b in enumerate(self.blocks):
            lab[list(b)] = k
        return lab

    def indicator(self) -> np.ndarray:
        """Dense (N, K) 0/1 matrix whose k-th column marks block k."""
        m = np.zeros((self.space.size, self.n_blocks))
        for k, b in enumerate(self.blocks):
            m[list(b), k] = 1.0
        return m

    @classmethod
    def by_factor(cls, space: StateSpace, k: int) -> "Partition":
        """The partition of a composite space by the value of factor k."""
        k = space.check_factor_index(k)
        idx = np.arange(space.size).reshape(space.shape)
        moved = np.moveaxis(idx, k - 1, 0).reshape(space.factors[k - 1], -1)
        return cls(space, tuple(tuple(row.tolist()) for row in moved))


@dataclass(frozen=True)
class ReferenceMeasure:
    """A strictly positive weight function on the state set."""

    space: StateSpace
    nu: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.nu, dtype=np.float64)
        if v.shape != (self.space.size,):
            raise ValidationError(f"nu has shape {v.shape}, expected ({self.space.size},)")
        if not (v > 0).all():
            raise ValidationError("a reference measure must be strictly positive")
        object.__setattr__(self, "nu", _as_readonly(v))

    @classmethod
    def uniform(cls, space: StateSpace) -> "ReferenceMeasure":
        return cls(space, np.ones(space.size))


@dataclass(frozen=True)
class KlResult:
    """Tagged value of a Kullback-Leibler divergence: finite, or +infinity
    with the first offending state (p_i > 0 while q_i = 0)."""

    value: float
    finite: bool
    offending_state: int | None = None

    @classmethod
    def of(cls, value: float) -> "KlResult":
        return cls(value=value, finite=True)

    @classmethod
    def infinite(cls, state: int) -> "KlResult":
        return cls(value=math.inf, finite=False, offending_state=state)

    def require_finite(self) -> float:
        if not self.finite:
            raise NumericDomainError(
                f"divergence is infinite: support violation at state {self.offending_state}"
            )
        return self.value

    def __float__(self) -> float:
        return self.value


def entropy(p: Pmf) -> float:
    """Shannon entropy H(p) = -sum p_i log p_i in nats (0 log 0 = 0)."""
    w = p.weights
    pos = w > 0
    terms = -(w[pos] * np.log(w[pos]))
    return math.fsum(terms.tolist())


def kl_divergence(p: Pmf, q: Pmf) -> KlResult:
    """KL divergence D(p||q) = sum p_i log(p_i / q_i) in nats.

    Returns a tagged result: finite value, or positive infinity when p puts
    mass on a state where q has none.  Tiny negative rounding residue is
    clamped to zero (the divergence is nonnegative by Gibbs' inequality).
    """
    if p.space != q.space:
        raise ValidationError("kl_divergence requires distributions on one space")
    pw, qw = p.weights, q.weights
    pos = pw > 0
    bad = pos & (qw == 0)
    if bad.any():
        return KlResult.infinite(int(np.nonzero(bad)[0][0]))
    terms = pw[pos] * (np.log(pw[pos]) - np.log(qw[pos]))
    return KlResult.of(max(math.fsum(terms.tolist()), 0.0))


def aggregate_prior(prior: DirichletPrior, part: Partition) -> DirichletPrior:
    """Block-sum a Dirichlet parameter: if p ~ Dir(alpha) then the vector of
    block masses (p(A_1), ..., p(A_K)) ~ Dir(alpha^part) with
    alpha^part_k = sum_{i in A_k} alpha_i."""
    if part.space != prior.space:
        raise ValidationError("partition and prior must share a space")
    agg = np.array([math.fsum(prior.alpha[list(b)].tolist()) for b in part.blocks])
    return DirichletPrior(StateSpace.plain(part.n_blocks), agg, alpha_total=prior.alpha_total)


def marginal_concentration(prior: DirichletPrior, factor_index: int) -> DirichletPrior:
    """Concentration parameter of the Dirichlet induced on the marginal of
    factor k: alpha^k_j = sum over states with k-th coordinate j."""
    k = prior.space.check_factor_index(factor_index)
    t = prior.alpha.reshape(prior.space.shape)
    axes = tuple(ax for ax in range(prior.space.n) if ax != k - 1)
    marg = t.sum(axis=axes) if axes else t.copy()
    return DirichletPrior(
        StateSpace.plain(prior.space.factors[k - 1]), marg, alpha_total=prior.alpha_total
    )


def marginal_pmf(p: Pmf, subset) -> Pmf:
    """Marginal distribution of the factors in `subset` (1-based indices).

    The result lives on the product of the selected factors in ascending
    index order; the empty subset gives the trivial one-point distribution.
    """
    ks = sorted({p.space.check_factor_index(k) for k in subset})
    if not ks:
        return Pmf(StateSpace.plain(1), np.ones(1))
    keep = [k - 1 for k in ks]
    axes = tuple(ax for ax in range(p.space.n) if ax not in keep)
    t = p.tensor.sum(axis=axes) if axes else p.tensor
    sub = StateSpace(tuple(p.space.factors[ax] for ax in keep))
    return Pmf(sub, t.reshape(-1))
