"""Statistical model families with exact information projections.

Each family is a subset of the probability simplex for which the minimizer
q* of D(p||q) over the model has a closed form:

* partition-type convex families: block mixtures of a positive reference
  measure's conditionals; the projection keeps p's block masses and the
  reference conditionals within blocks;
* the independence model on a product space: the projection is the product
  of p's single-factor marginals, and the divergence is the
  multi-information;
* decomposable models given by a junction tree: the divergence is an
  inclusion-exclusion of marginal entropies over facet and separator sets,
  and the projection is the junction-tree factorization of p's marginals;
* mixtures of product distributions supported on disjoint cylinder blocks:
  the projection keeps block masses and projects each conditional onto the
  independence model of the block;
* finite unions of partition models: the divergence is the minimum over
  the members (lowest index wins ties).

Functions come in a pointwise flavor (ProjectionResult with the explicit
projection q*) and a batch flavor operating on a (B, N) matrix of sample
rows, used by the Monte Carlo engine and the simplex-field evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .core import (
    Partition,
    Pmf,
    ReferenceMeasure,
    StateSpace,
    entropy,
    marginal_pmf,
)
from .errors import SchemaError, ValidationError

# ---------------------------------------------------------------------------
# Junction trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JunctionTree:
    """A tree over facet variable-sets with separator-labelled edges.

    `vertices` are sets of factor indices (1-based); `edges` are triples
    (u, v, separator) referring to vertex positions.  Structural soundness
    (tree-ness, separators, running intersection) is checked by
    validate_junction_tree, not by the constructor.
    """

    space: StateSpace
    vertices: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int, frozenset[int]], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(frozenset(v) for v in self.vertices))
        object.__setattr__(
            self, "edges", tuple((int(u), int(v), frozenset(s)) for u, v, s in self.edges)
        )

    def set_size(self, s: frozenset[int]) -> int:
        """Number of joint states of the variables in s (1 for the empty set)."""
        return math.prod(self.space.factors[k - 1] for k in s) if s else 1


class ValidationIssue(NamedTuple):
    check: str
    message: str


def validate_junction_tree(jt: JunctionTree) -> ValidationIssue | None:
    """Return None if the tree is structurally sound, else the first violation.

    Checks, in order: vertex/edge well-formedness, tree-ness (connected and
    acyclic), separator = intersection of the endpoint facets, and the
    running intersection property (the vertices containing any given
    variable form a connected subtree).
    """
    n = jt.space.n
    if not jt.vertices:
        return ValidationIssue("vertices", "junction tree needs at least one vertex")
    for i, v in enumerate(jt.vertices):
        if not v:
            return ValidationIssue("vertices", f"vertex {i} is empty")
        if any(k < 1 or k > n for k in v):
            return ValidationIssue("vertices", f"vertex {i} mentions a factor outside 1..{n}")
    nv = len(jt.vertices)
    for u, v, _s in jt.edges:
        if not (0 <= u < nv and 0 <= v < nv):
            return ValidationIssue("edges", f"edge ({u}, {v}) references a missing vertex")
        if u == v:
            return ValidationIssue("edges", f"edge ({u}, {v}) is a self-loop")
    if len(jt.edges) != nv - 1:
        return ValidationIssue(
            "tree", f"{nv} vertices need {nv - 1} edges, got {len(jt.edges)}"
        )
    parent = list(range(nv))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _s in jt.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return ValidationIssue("tree", f"edge ({u}, {v}) closes a cycle")
        parent[ru] = rv
    for u, v, s in jt.edges:
        expect = jt.vertices[u] & jt.vertices[v]
        if s != expect:
            return ValidationIssue(
                "separators",
                f"edge ({u}, {v}) labelled {sorted(s)}, endpoint intersection is {sorted(expect)}",
            )
    for k in range(1, n + 1):
        holders = [i for i, v in enumerate(jt.vertices) if k in v]
        if len(holders) <= 1:
            continue
        pos = {i: j for j, i in enumerate(holders)}
        par = list(range(len(holders)))

        def hfind(x: int) -> int:
            while par[x] != x:
                par[x] = par[par[x]]
                x = par[x]
            return x

        for u, v, _s in jt.edges:
            if u in pos and v in pos:
                ru, rv = hfind(pos[u]), hfind(pos[v])
                if ru != rv:
                    par[ru] = rv
        roots = {hfind(j) for j in range(len(holders))}
        if len(roots) > 1:
            return ValidationIssue(
                "running-intersection",
                f"vertices containing factor {k} do not form a connected subtree",
            )
    return None


def junction_tree_from_facets(space: StateSpace, facets) -> JunctionTree:
    """Best-effort junction tree: maximum-weight spanning tree on pairwise
    facet intersections.

    For a decomposable facet complex this yields a valid junction tree; for
    anything else the result fails validate_junction_tree.  Ties are broken
    by vertex index order, so the construction is deterministic.
    """
    verts = tuple(frozenset(int(k) for k in f) for f in facets)
    nv = len(verts)
    if nv == 0:
        raise ValidationError("need at least one facet")
    cand = sorted(
        ((i, j) for i in range(nv) for j in range(i + 1, nv)),
        key=lambda ij: (-len(verts[ij[0]] & verts[ij[1]]), ij),
    )
    parent = list(range(nv))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for i, j in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j, verts[i] & verts[j]))
        if len(edges) == nv - 1:
            break
    return JunctionTree(space, verts, tuple(edges))


def independence_junction_tree(space: StateSpace) -> JunctionTree:
    """The junction tree of the independence model: one singleton facet per
    factor, chained by empty separators."""
    verts = tuple(frozenset({k}) for k in range(1, space.n + 1))
    edges = tuple((i, i + 1, frozenset()) for i in range(space.n - 1))
    return JunctionTree(space, verts, edges)


# ---------------------------------------------------------------------------
# Cylinder blocks for disjoint-support mixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderBlock:
    """A product block: per factor j a nonempty set of allowed values
    (0-based), the block being the product of those sets."""

    space: StateSpace
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.values) != self.space.n:
            raise ValidationError(
                f"cylinder block needs one value set per factor ({self.space.n})"
            )
        vals = []
        for j, ys in enumerate(self.values):
            ys = tuple(sorted(int(y) for y in ys))
            if not ys:
                raise ValidationError(f"factor {j + 1} has an empty value set")
            if ys[0] < 0 or ys[-1] >= self.space.factors[j]:
                raise ValidationError(f"factor {j + 1} value out of range in {ys}")
            if len(set(ys)) != len(ys):
                raise ValidationError(f"factor {j + 1} has repeated values in {ys}")
            vals.append(ys)
        object.__setattr__(self, "values", tuple(vals))

    @property
    def free_factors(self) -> tuple[int, ...]:
        """1-based indices of factors taking more than one value here."""
        return tuple(j + 1 for j, ys in enumerate(self.values) if len(ys) > 1)

    @property
    def size(self) -> int:
        return math.prod(len(ys) for ys in self.values)

    def ix(self) -> tuple[np.ndarray, ...]:
        """Index expression selecting this block from a factor-shaped tensor."""
        return np.ix_(*[np.asarray(ys, dtype=np.intp) for ys in self.values])

    def state_indices(self) -> np.ndarray:
        """Flat (row-major) state indices of the block."""
        idx = np.arange(self.space.size).reshape(self.space.shape)
        return idx[self.ix()].reshape(-1)


def _check_cylinder_partition(space: StateSpace, blocks) -> tuple[CylinderBlock, ...]:
    blocks = tuple(
        b if isinstance(b, CylinderBlock) else CylinderBlock(space, b) for b in blocks
    )
    if not blocks:
        raise ValidationError("need at least one cylinder block")
    seen = np.zeros(space.size, dtype=bool)
    for b in blocks:
        if b.space != space:
            raise ValidationError("all cylinder blocks must share one space")
        idx = b.state_indices()
        if seen[idx].any():
            raise ValidationError("cylinder blocks overlap")
        seen[idx] = True
    if not seen.all():
        raise ValidationError("cylinder blocks do not cover the state space")
    return blocks


# ---------------------------------------------------------------------------
# Model specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """The single-point model {u}."""

    space: StateSpace


@dataclass(frozen=True)
class FixedPoint:
    """The single-point model {q} for an arbitrary fixed q."""

    q: Pmf

    @property
    def space(self) -> StateSpace:
        return self.q.space


@dataclass(frozen=True)
class PartitionModel:
    """Block mixtures of a reference measure's conditionals; nu = None means
    the uniform reference measure (the partition model proper)."""

    part: Partition
    nu: ReferenceMeasure | None = None

    def __post_init__(self):
        if self.nu is not None and self.nu.space != self.part.space:
            raise ValidationError("partition and reference measure spaces differ")

    @property
    def space(self) -> StateSpace:
        return self.part.space


@dataclass(frozen=True)
class Independence:
    """Product distributions on a composite space."""

    space: StateSpace

    def __post_init__(self):
        if not self.space.is_composite:
            raise ValidationError("the independence model needs n >= 2 factors")


@dataclass(frozen=True)
class Decomposable:
    jt: JunctionTree

    def __post_init__(self):
        issue = validate_junction_tree(self.jt)
        if issue is not None:
            raise ValidationError(f"invalid junction tree [{issue.check}]: {issue.message}")

    @property
    def space(self) -> StateSpace:
        return self.jt.space


@dataclass(frozen=True)
class DisjointMixture:
    """Mixtures of product distributions supported on disjoint cylinder blocks."""

    space: StateSpace
    blocks: tuple[CylinderBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", _check_cylinder_partition(self.space, self.blocks))


@dataclass(frozen=True)
class UnionOfPartitions:
    parts: tuple[Partition, ...]
    nu: ReferenceMeasure | None = None

    def __post_init__(self):
        if not self.parts:
            raise ValidationError("a union needs at least one partition")
        sp = self.parts[0].space
        if any(p.space != sp for p in self.parts):
            raise ValidationError("all partitions must share one space")
        if self.nu is not None and self.nu.space != sp:
            raise ValidationError("reference measure space differs from partitions")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def space(self) -> StateSpace:
        return self.parts[0].space


ModelSpec = Union[
    Uniform, FixedPoint, PartitionModel, Independence, Decomposable, DisjointMixture,
    UnionOfPartitions,
]


@dataclass(frozen=True)
class ProjectionResult:
    """The information projection q* of p onto a model, the divergence
    D(p||model) = D(p||q*), and (for unions) the index of the argmin member."""

    q_star: Pmf
    divergence: float
    argmin_member: int | None = None


# ---------------------------------------------------------------------------
# Pointwise projections
# ---------------------------------------------------------------------------


def _partition_projection_weights(
    p: np.ndarray, part: Partition, nu: np.ndarray | None
) -> tuple[np.ndarray, float]:
    """q* weights and the closed-form divergence for a block-mixture family."""
    terms = []
    q = np.zeros_like(p)
    for b in part.blocks:
        idx = np.asarray(b, dtype=np.intp)
        s = float(p[idx].sum())
        if nu is None:
            cond = np.full(idx.size, 1.0 / idx.size)
            log_cond = -math.log(idx.size)
            q[idx] = s * cond
            if s > 0:
                pb = p[idx]
                pos = pb > 0
                terms.extend((pb[pos] * (np.log(pb[pos]) - math.log(s) - log_cond)).tolist())
        else:
            nb = nu[idx]
            nb_total = float(nb.sum())
            q[idx] = s * nb / nb_total
            if s > 0:
                pb = p[idx]
                pos = pb > 0
                terms.extend(
                    (
                        pb[pos]
                        * (np.log(pb[pos]) - math.log(s) - np.log(nb[pos]) + math.log(nb_total))
                    ).tolist()
                )
    return q, max(math.fsum(terms), 0.0)


def divergence_from_partition_model(
    p: Pmf, part: Partition, nu: ReferenceMeasure | None = None
) -> ProjectionResult:
    """Project p onto the block-mixture family of a partition.

    The projection keeps p's block masses and replaces each conditional by
    the reference measure's conditional on the block (uniform when nu is
    omitted): q*_i = p(A_k) * nu_i / nu(A_k) for i in A_k.
    """
    if part.space != p.space:
        raise ValidationError("partition and pmf must share a space")
    nu_arr = None
    if nu is not None:
        if nu.space != p.space:
            raise ValidationError("reference measure and pmf must share a space")
        nu_arr = nu.nu
    q, div = _partition_projection_weights(p.weights, part, nu_arr)
    return ProjectionResult(Pmf(p.space, q), div)


def multi_information(p: Pmf) -> ProjectionResult:
    """Divergence from the independence model.

    Equals sum_k H(X_k) - H(X_1..X_n); the projection is the product of the
    single-factor marginals of p.
    """
    if not p.space.is_composite:
        raise ValidationError("multi_information needs a composite space (n >= 2)")
    margs = [marginal_pmf(p, {k}) for k in range(1, p.space.n + 1)]
    div = math.fsum([entropy(m) for m in margs]) - entropy(p)
    q = np.ones(p.space.shape)
    for ax, m in enumerate(margs):
        shape = [1] * p.space.n
        shape[ax] = p.space.factors[ax]
        q = q * m.weights.reshape(shape)
    return ProjectionResult(Pmf(p.space, q.reshape(-1)), max(div, 0.0))


def divergence_from_decomposable(p: Pmf, jt: JunctionTree) -> ProjectionResult:
    """Divergence from a decomposable model.

    Inclusion-exclusion of marginal entropies over the junction tree:
    sum over facets of H(X_S) minus sum over separators minus H(p).  The
    projection multiplies facet marginals and divides separator marginals;
    cells with a zero facet marginal get q* = 0 (the formula above is
    boundary-continuous, the explicit q* is a witness).
    """
    if jt.space != p.space:
        raise ValidationError("junction tree and pmf must share a space")
    issue = validate_junction_tree(jt)
    if issue is not None:
        raise ValidationError(f"invalid junction tree [{issue.check}]: {issue.message}")
    t = p.tensor

    def marg(s: frozenset[int]) -> np.ndarray:
        axes = tuple(ax for ax in range(p.space.n) if (ax + 1) not in s)
        return t.sum(axis=axes, keepdims=True) if axes else t

    def set_entropy(s: frozenset[int]) -> float:
        m = marg(s).reshape(-1)
        pos = m > 0
        return math.fsum((-(m[pos] * np.log(m[pos]))).tolist())

    div = (
        math.fsum([set_entropy(v) for v in jt.vertices])
        - math.fsum([set_entropy(s) for _u, _v, s in jt.edges])
        - entropy(p)
    )
    q = np.ones_like(t)
    for v in jt.vertices:
        q = q * marg(v)
    for _u, _v, s in jt.edges:
        d = np.broadcast_to(marg(s), q.shape)
        q = np.divide(q, d, out=np.zeros_like(q), where=d > 0)
    return ProjectionResult(Pmf(p.space, q.reshape(-1)), max(div, 0.0))


def divergence_from_disjoint_mixture(p: Pmf, blocks) -> ProjectionResult:
    """Divergence from the mixture of product distributions with disjoint
    cylinder supports.

    The projection keeps each block mass p(A_k) and replaces the
    conditional on A_k by the product of its single-factor conditionals;
    blocks with p(A_k) = 0 contribute nothing.
    """
    model = DisjointMixture(p.space, tuple(blocks))
    n = p.space.n
    t = p.tensor
    q = np.zeros_like(t)
    terms: list[float] = []
    for blk in model.blocks:
        sub = t[blk.ix()]
        mass = float(sub.sum())
        if mass <= 0:
            continue
        margs = []
        for ax in range(n):
            axes = tuple(a for a in range(n) if a != ax)
            margs.append(sub.sum(axis=axes) if axes else sub)
        prod = np.ones_like(sub)
        for ax, m in enumerate(margs):
            shape = [1] * n
            shape[ax] = sub.shape[ax]
            prod = prod * m.reshape(shape)
        q[blk.ix()] = prod / mass ** (n - 1)
        pos = sub > 0
        terms.extend((sub[pos] * np.log(sub[pos])).tolist())
        terms.append((n - 1) * mass * math.log(mass))
        for m in margs:
            mp = m[m > 0]
            terms.extend((-(mp * np.log(mp))).tolist())
    return ProjectionResult(Pmf(p.space, q.reshape(-1)), max(math.fsum(terms), 0.0))


def divergence_from_union(
    p: Pmf, parts, nu: ReferenceMeasure | None = None
) -> ProjectionResult:
    """Divergence from a union of block-mixture families: the minimum over
    the members, ties broken by the lowest member index."""
    parts = tuple(parts)
    if not parts:
        raise ValidationError("divergence_from_union needs at least one partition")
    best: ProjectionResult | None = None
    best_idx = -1
    for i, part in enumerate(parts):
        r = divergence_from_partition_model(p, part, nu)
        if best is None or r.divergence < best.divergence:
            best, best_idx = r, i
    assert best is not None
    return ProjectionResult(best.q_star, best.divergence, argmin_member=best_idx)


def max_divergence_partition_model(part: Partition) -> float:
    """Worst-case divergence from the partition model (uniform reference
    measure): max over blocks of log block size, attained at a point mass
    inside a largest block."""
    return math.log(max(part.block_sizes))


# ---------------------------------------------------------------------------
# Batch evaluation on sample matrices
# ---------------------------------------------------------------------------


def _batch_entropy(P: np.ndarray) -> np.ndarray:
    t = P * np.log(np.where(P > 0, P, 1.0))
    return -t.sum(axis=1)


def _xlogx(S: np.ndarray) -> np.ndarray:
    return S * np.log(np.where(S > 0, S, 1.0))


def _batch_partition(P: np.ndarray, part: Partition, nu: np.ndarray | None) -> np.ndarray:
    ind = part.indicator()
    S = P @ ind
    out = _xlogx(P).sum(axis=1) - _xlogx(S).sum(axis=1)
    if nu is None:
        sizes = np.asarray(part.block_sizes, dtype=np.float64)
        out += S @ np.log(sizes)
    else:
        nu_blocks = nu @ ind
        out += S @ np.log(nu_blocks) - P @ np.log(nu)
    return np.maximum(out, 0.0)


def _batch_set_entropy(T: np.ndarray, space: StateSpace, s: frozenset[int]) -> np.ndarray:
    axes = tuple(ax + 1 for ax in range(space.n) if (ax + 1) not in s)
    m = T.sum(axis=axes) if axes else T
    m = m.reshape(T.shape[0], -1)
    return -(_xlogx(m)).sum(axis=1)


def batch_divergence(model: ModelSpec, P: np.ndarray) -> np.ndarray:
    """D(p||model) for every row of a (B, N) matrix of simplex points.

    Matches the pointwise operations row for row; rows are evaluated
    independently so the result is safe to compute in data-parallel chunks.
    """
    P = np.asarray(P, dtype=np.float64)
    space = model.space
    if P.ndim != 2 or P.shape[1] != space.size:
        raise ValidationError(f"expected a (B, {space.size}) sample matrix, got {P.shape}")
    if isinstance(model, Uniform):
        return math.log(space.size) - _batch_entropy(P)
    if isinstance(model, FixedPoint):
        q = model.q.weights
        out = _xlogx(P).sum(axis=1) - P @ np.log(np.where(q > 0, q, 1.0))
        zero = q == 0
        if zero.any():
            out[(P[:, zero] > 0).any(axis=1)] = np.inf
        return np.maximum(out, 0.0)
    if isinstance(model, PartitionModel):
        return _batch_partition(P, model.part, None if model.nu is None else model.nu.nu)
    if isinstance(model, Independence):
        T = P.reshape(P.shape[0], *space.shape)
        h = -_batch_set_entropy(T, space, frozenset(range(1, space.n + 1)))
        tot = np.zeros(P.shape[0])
        for k in range(1, space.n + 1):
            tot += _batch_set_entropy(T, space, frozenset({k}))
        return np.maximum(tot + h, 0.0)
    if isinstance(model, Decomposable):
        T = P.reshape(P.shape[0], *space.shape)
        out = -_batch_set_entropy(T, space, frozenset(range(1, space.n + 1)))
        for v in model.jt.vertices:
            out += _batch_set_entropy(T, space, v)
        for _u, _v, s in model.jt.edges:
            out -= _batch_set_entropy(T, space, s)
        return np.maximum(out, 0.0)
    if isinstance(model, DisjointMixture):
        T = P.reshape(P.shape[0], *space.shape)
        n = space.n
        out = np.zeros(P.shape[0])
        for blk in model.blocks:
            sub = T[(slice(None),) + blk.ix()]
            mass = sub.reshape(P.shape[0], -1).sum(axis=1)
            out += _xlogx(sub.reshape(P.shape[0], -1)).sum(axis=1)
            out += (n - 1) * _xlogx(mass)
            for ax in range(n):
                axes = tuple(a + 1 for a in range(n) if a != ax)
                m = (sub.sum(axis=axes) if axes else sub).reshape(P.shape[0], -1)
                out -= _xlogx(m).sum(axis=1)
        return np.maximum(out, 0.0)
    if isinstance(model, UnionOfPartitions):
        nu = None if model.nu is None else model.nu.nu
        cols = [_batch_partition(P, part, nu) for part in model.parts]
        return np.min(np.stack(cols, axis=1), axis=1)
    raise ValidationError(f"unknown model kind: {type(model).__name__}")


# ---------------------------------------------------------------------------
# Random in-model members (used by optimality checks)
# ---------------------------------------------------------------------------


def random_member(model: ModelSpec, rng: np.random.Generator) -> Pmf:
    """Draw a strictly positive member of the model (uniform-ish weights)."""
    space = model.space
    if isinstance(model, Uniform):
        return Pmf.uniform(space)
    if isinstance(model, FixedPoint):
        return model.q
    if isinstance(model, PartitionModel):
        lam = rng.dirichlet(np.ones(model.part.n_blocks))
        nu = np.ones(space.size) if model.nu is None else model.nu.nu
        w = np.zeros(space.size)
        for k, b in enumerate(model.part.blocks):
            idx = np.asarray(b, dtype=np.intp)
            w[idx] = lam[k] * nu[idx] / nu[idx].sum()
        return Pmf(space, w)
    if isinstance(model, Independence):
        w = np.ones(space.shape)
        for ax, nk in enumerate(space.factors):
            shape = [1] * space.n
            shape[ax] = nk
            w = w * rng.dirichlet(np.ones(nk)).reshape(shape)
        return Pmf(space, w.reshape(-1))
    if isinstance(model, Decomposable):
        r = Pmf(space, rng.dirichlet(np.ones(space.size)))
        return divergence_from_decomposable(r, model.jt).q_star
    if isinstance(model, DisjointMixture):
        lam = rng.dirichlet(np.ones(len(model.blocks)))
        w = np.zeros(space.shape)
        for k, blk in enumerate(model.blocks):
            prod = np.ones([len(ys) for ys in blk.values])
            for ax, ys in enumerate(blk.values):
                shape = [1] * space.n
                shape[ax] = len(ys)
                prod = prod * rng.dirichlet(np.ones(len(ys))).reshape(shape)
            w[blk.ix()] = lam[k] * prod
        return Pmf(space, w.reshape(-1))
    if isinstance(model, UnionOfPartitions):
        i = int(rng.integers(len(model.parts)))
        return random_member(PartitionModel(model.parts[i], model.nu), rng)
    raise ValidationError(f"unknown model kind: {type(model).__name__}")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def model_to_json(model: ModelSpec) -> dict:
    """Serialize a model to its JSON-schema dict (see model_from_json)."""
    if isinstance(model, Uniform):
        return {"kind": "uniform"}
    if isinstance(model, FixedPoint):
        return {"kind": "fixed_point", "q": model.q.weights.tolist()}
    if isinstance(model, PartitionModel):
        out = {"kind": "partition", "blocks": [list(b) for b in model.part.blocks]}
        if model.nu is not None:
            out["nu"] = model.nu.nu.tolist()
        return out
    if isinstance(model, Independence):
        return {"kind": "independence"}
    if isinstance(model, Decomposable):
        return {
            "kind": "decomposable",
            "facets": [sorted(v) for v in model.jt.vertices],
            "edges": [[u, v, sorted(s)] for u, v, s in model.jt.edges],
        }
    if isinstance(model, DisjointMixture):
        return {
            "kind": "disjoint_mixture",
            "blocks": [[list(ys) for ys in blk.values] for blk in model.blocks],
        }
    if isinstance(model, UnionOfPartitions):
        out = {
            "kind": "union_of_partitions",
            "partitions": [[list(b) for b in part.blocks] for part in model.parts],
        }
        if model.nu is not None:
            out["nu"] = model.nu.nu.tolist()
        return out
    raise ValidationError(f"unknown model kind: {type(model).__name__}")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return obj[key]


def _as_number_list(val, path: str) -> list[float]:
    if not isinstance(val, list) or not all(isinstance(x, (int, float)) for x in val):
        raise SchemaError(path, "expected an array of numbers")
    return [float(x) for x in val]


def _as_index_lists(val, path: str) -> list[list[int]]:
    if not isinstance(val, list):
        raise SchemaError(path, "expected an array of index arrays")
    out = []
    for i, b in enumerate(val):
        if not isinstance(b, list) or not all(isinstance(x, int) for x in b):
            raise SchemaError(f"{path}[{i}]", "expected an array of integers")
        out.append([int(x) for x in b])
    return out


def model_from_json(obj: dict, space: StateSpace) -> ModelSpec:
    """Parse a model from its JSON dict against a given state space.

    Schema by kind tag:
      {"kind": "uniform"}
      {"kind": "fixed_point", "q": [..N numbers..]}
      {"kind": "partition", "blocks": [[state..]..], "nu": [..]?}
      {"kind": "independence"}
      {"kind": "decomposable", "facets": [[factor..]..],
       "edges": [[u, v, [factor..]]..]?}          (edges default: best-effort tree)
      {"kind": "disjoint_mixture", "blocks": [[[value..] per factor]..]}
      {"kind": "union_of_partitions", "partitions": [[[state..]..]..], "nu": [..]?}
    """
    if not isinstance(obj, dict):
        raise SchemaError("$", "model spec must be a JSON object")
    kind = _require(obj, "kind", "$")
    try:
        if kind == "uniform":
            return Uniform(space)
        if kind == "fixed_point":
            q = _as_number_list(_require(obj, "q", "$"), "$.q")
            return FixedPoint(Pmf(space, np.asarray(q)))
        if kind == "partition":
            blocks = _as_index_lists(_require(obj, "blocks", "$"), "$.blocks")
            nu = None
            if "nu" in obj:
                nu = ReferenceMeasure(space, np.asarray(_as_number_list(obj["nu"], "$.nu")))
            return PartitionModel(Partition(space, tuple(tuple(b) for b in blocks)), nu)
        if kind == "independence":
            return Independence(space)
        if kind == "decomposable":
            facets = _as_index_lists(_require(obj, "facets", "$"), "$.facets")
            if "edges" in obj:
                edges = []
                for i, e in enumerate(obj["edges"]):
                    if not (isinstance(e, list) and len(e) == 3):
                        raise SchemaError(f"$.edges[{i}]", "expected [u, v, [separator..]]")
                    u, v, s = e
                    if not (isinstance(u, int) and isinstance(v, int) and isinstance(s, list)):
                        raise SchemaError(f"$.edges[{i}]", "expected [u, v, [separator..]]")
                    edges.append((u, v, frozenset(int(x) for x in s)))
                jt = JunctionTree(space, tuple(frozenset(f) for f in facets), tuple(edges))
            else:
                jt = junction_tree_from_facets(space, facets)
            return Decomposable(jt)
        if kind == "disjoint_mixture":
            raw = _require(obj, "blocks", "$")
            if not isinstance(raw, list):
                raise SchemaError("$.blocks", "expected an array of cylinder blocks")
            blocks = []
            for i, blk in enumerate(raw):
                vals = _as_index_lists(blk, f"$.blocks[{i}]")
                blocks.append(CylinderBlock(space, tuple(tuple(v) for v in vals)))
            return DisjointMixture(space, tuple(blocks))
        if kind == "union_of_partitions":
            raw = _require(obj, "partitions", "$")
            if not isinstance(raw, list):
                raise SchemaError("$.partitions", "expected an array of partitions")
            parts = []
            for i, pr in enumerate(raw):
                blocks = _as_index_lists(pr, f"$.partitions[{i}]")
                parts.append(Partition(space, tuple(tuple(b) for b in blocks)))
            nu = None
            if "nu" in obj:
                nu = ReferenceMeasure(space, np.asarray(_as_number_list(obj["nu"], "$.nu")))
            return UnionOfPartitions(tuple(parts), nu)
    except ValidationError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("$", str(exc)) from exc
    raise SchemaError("$.kind", f"unknown model kind {kind!r}")
