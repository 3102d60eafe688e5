"""Closed-form expectation formulas: worked values, identities, asymptotics."""

import math

import numpy as np
import pytest

from divexp import (
    CylinderBlock,
    DirichletPrior,
    EULER_GAMMA,
    NumericDomainError,
    Partition,
    Pmf,
    ReferenceMeasure,
    StateSpace,
    ValidationError,
    asymptotic_eval,
    expected_div_decomposable,
    expected_div_disjoint_mixture,
    expected_div_from_prior,
    expected_div_pair,
    expected_div_partition,
    expected_div_to_point,
    expected_div_uniform,
    expected_entropy,
    expected_marginal_entropy,
    expected_multi_information,
    harmonic_int,
    harmonic_real,
    independence_junction_tree,
    junction_tree_from_facets,
    kl_divergence,
    subsimplex_volume_bound,
)
from oracles import beta_xlogx_expectation, mc_entropy_mean


def _sym(n: int, a: float) -> DirichletPrior:
    return DirichletPrior.symmetric(StateSpace.plain(n), a)


def _h(z: float) -> float:
    return float(harmonic_real(z))


# ---------------------------------------------------------------------------
# Building-block identity (the one scalar every formula reduces to)
# ---------------------------------------------------------------------------


def test_block_mass_xlogx_identity_against_quadrature():
    # <p(A) log p(A)> = (alpha_A/alpha)(h(alpha_A) - h(alpha)), with the
    # left side integrated numerically over the Beta marginal.
    for a_block, a_total in [(1.5, 4.0), (0.7, 2.3), (2.0, 2.5), (3.0, 10.0)]:
        closed = (a_block / a_total) * (_h(a_block) - _h(a_total))
        quad = beta_xlogx_expectation(a_block, a_total)
        assert closed == pytest.approx(quad, abs=1e-12)


# ---------------------------------------------------------------------------
# Expected entropy and divergence from uniform
# ---------------------------------------------------------------------------


def test_expected_entropy_examples():
    assert expected_entropy(DirichletPrior(StateSpace.plain(1), np.array([2.7]))).value == 0.0
    assert expected_entropy(_sym(2, 1.0)).value == pytest.approx(0.5, abs=1e-14)
    pr = DirichletPrior(StateSpace.plain(3), np.array([1.0, 2.0, 3.0]))
    assert expected_entropy(pr).value == pytest.approx(2.45 - 9.5 / 6, rel=1e-13)


def test_expected_entropy_against_independent_sampler():
    rng = np.random.default_rng(21)
    alpha = np.array([1.0, 2.0, 3.0])
    mean, se = mc_entropy_mean(rng, alpha, 200_000)
    val = expected_entropy(DirichletPrior(StateSpace.plain(3), alpha)).value
    assert abs(val - mean) <= 3 * se


def test_expected_div_uniform_examples():
    assert expected_div_uniform(DirichletPrior(StateSpace.plain(1), np.array([1.0]))).value == pytest.approx(0.0, abs=1e-15)
    assert expected_div_uniform(_sym(2, 1.0)).value == pytest.approx(
        math.log(2) - 0.5, rel=1e-13
    )


def test_expected_div_uniform_limit():
    vals = [expected_div_uniform(_sym(2 ** e, 1.0)).value for e in range(1, 21)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    limit = 1 - EULER_GAMMA
    assert all(v < limit for v in vals)
    for e, v in zip(range(1, 21), vals):
        assert abs(v - limit) <= 1.0 / 2 ** e


def test_entropy_divergence_identity_chain():
    rng = np.random.default_rng(22)
    for _ in range(100):
        n = int(rng.integers(2, 50))
        pr = DirichletPrior(StateSpace.plain(n), rng.uniform(0.2, 5.0, n))
        s = expected_entropy(pr).value + expected_div_uniform(pr).value
        assert abs(s - math.log(n)) <= 1e-14
    # holds at scale too (the two formulas share their summation terms)
    big = DirichletPrior.symmetric(StateSpace.plain(2 ** 20), 1.0)
    s = expected_entropy(big).value + expected_div_uniform(big).value
    assert abs(s - math.log(2 ** 20)) <= 1e-14


# ---------------------------------------------------------------------------
# Divergence to a fixed point / from a sampled argument
# ---------------------------------------------------------------------------


def test_expected_div_to_point_reduces_to_uniform():
    pr = DirichletPrior(StateSpace.plain(4), np.array([0.5, 1.5, 2.0, 1.0]))
    u = Pmf.uniform(pr.space)
    assert expected_div_to_point(pr, u).value == pytest.approx(
        expected_div_uniform(pr).value, abs=1e-13
    )


def test_expected_div_to_point_worked_example():
    pr = _sym(2, 1.0)
    q = Pmf(pr.space, np.array([0.75, 0.25]))
    expected = (
        kl_divergence(Pmf.uniform(pr.space), q).require_finite()
        + 1.0 + math.log(2) - 1.5
    )
    got = expected_div_to_point(pr, q).value
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(0.3369882, abs=1e-7)


def test_expected_div_to_point_symmetric_identity():
    # symmetric case: D(u||q) + h(a) + log N - h(N a)
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(2, 30))
        a = float(rng.uniform(0.2, 5.0))
        pr = _sym(n, a)
        q = Pmf(pr.space, rng.dirichlet(np.full(n, 2.0)))
        lhs = expected_div_to_point(pr, q).value
        rhs = (
            kl_divergence(Pmf.uniform(pr.space), q).require_finite()
            + _h(a) + math.log(n) - _h(n * a)
        )
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_expected_div_to_point_concentration_asymptotics():
    # alpha = kappa * q: the expectation tends to 0 at rate O(N/kappa)
    rng = np.random.default_rng(24)
    n = 8
    q = Pmf(StateSpace.plain(n), rng.dirichlet(np.full(n, 3.0)))
    prev = None
    for kappa in (1e2, 1e3, 1e4, 1e5):
        pr = DirichletPrior(q.space, kappa * q.weights)
        val = expected_div_to_point(pr, q).value
        assert 0 <= val <= 2 * n / kappa
        if prev is not None:
            assert val < prev
        prev = val


def test_expected_div_to_point_rejects_zero_target():
    pr = _sym(2, 1.0)
    with pytest.raises(NumericDomainError):
        expected_div_to_point(pr, Pmf(pr.space, np.array([1.0, 0.0])))


def test_expected_div_from_prior_examples():
    one = DirichletPrior(StateSpace.plain(1), np.array([3.0]))
    assert expected_div_from_prior(Pmf.uniform(one.space), one).value == pytest.approx(0.0, abs=1e-14)
    pr = DirichletPrior(StateSpace.plain(2), np.array([2.0, 2.0]))
    u = Pmf.uniform(pr.space)
    assert expected_div_from_prior(u, pr).value == pytest.approx(
        -math.log(2) - 1 + 11 / 6, rel=1e-12
    )
    point = Pmf(pr.space, np.array([1.0, 0.0]))
    assert expected_div_from_prior(point, pr).value == pytest.approx(5 / 6, rel=1e-13)


def test_expected_div_from_prior_concentration_remainder():
    # For alpha_i > 1: value - D(p||mean) stays within a bounded multiple of
    # sum_i 1/(alpha_i - 1) as the prior concentrates.
    rng = np.random.default_rng(25)
    n = 6
    p = Pmf(StateSpace.plain(n), rng.dirichlet(np.ones(n)))
    ratios = []
    for scale in (10.0, 40.0, 160.0, 640.0):
        alpha = rng.uniform(1.5, 3.0, n) * scale
        pr = DirichletPrior(p.space, alpha)
        val = expected_div_from_prior(p, pr).value
        ref = kl_divergence(p, pr.mean).require_finite()
        rem = sum(1.0 / (a - 1) for a in alpha)
        ratios.append(abs(val - ref) / rem)
    assert max(ratios) <= 1.0  # bounded, no blow-up along the sweep


# ---------------------------------------------------------------------------
# Pair expectation
# ---------------------------------------------------------------------------


def test_expected_div_pair_equal_priors():
    pr = _sym(4, 1.0)
    res = expected_div_pair(pr, pr)
    assert res.divergence.value == pytest.approx(0.75, abs=1e-13)
    pr2 = _sym(2, 1.0)
    assert expected_div_pair(pr2, pr2).divergence.value == pytest.approx(0.5, abs=1e-13)
    one = DirichletPrior(StateSpace.plain(1), np.array([1.5]))
    assert expected_div_pair(one, one).divergence.value == pytest.approx(0.0, abs=1e-15)


def test_expected_div_pair_formula_consistency():
    # divergence = -<H(p)> - cross term, term by term
    rng = np.random.default_rng(26)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        a1 = rng.uniform(0.2, 5.0, n)
        a2 = rng.uniform(0.2, 5.0, n)
        pr1 = DirichletPrior(StateSpace.plain(n), a1)
        pr2 = DirichletPrior(StateSpace.plain(n), a2)
        res = expected_div_pair(pr1, pr2)
        lhs = res.divergence.value
        rhs = -expected_entropy(pr1).value - res.cross_term.value
        assert lhs == pytest.approx(rhs, abs=1e-11)


def test_expected_div_pair_requires_same_space():
    with pytest.raises(ValidationError):
        expected_div_pair(_sym(2, 1.0), _sym(3, 1.0))


# ---------------------------------------------------------------------------
# Marginal entropy and multi-information
# ---------------------------------------------------------------------------


def test_expected_marginal_entropy_examples():
    pr = DirichletPrior.symmetric(StateSpace((2, 2)), 1.0)
    assert expected_marginal_entropy(pr, 1).value == pytest.approx(25 / 12 - 1.5, rel=1e-13)
    pr_deg = DirichletPrior.symmetric(StateSpace((3, 1)), 1.0)
    assert expected_marginal_entropy(pr_deg, 2).value == pytest.approx(0.0, abs=1e-14)


def test_expected_marginal_entropy_symmetric_identity():
    # h(N a) - h((N/N_k) a)
    pr = DirichletPrior.symmetric(StateSpace((3, 4)), 0.7)
    got = expected_marginal_entropy(pr, 1).value
    assert got == pytest.approx(_h(12 * 0.7) - _h(4 * 0.7), rel=1e-12)


def test_expected_marginal_entropy_asymptotic_bound():
    # large N a / N_k: <H(X_k)> = log N_k + O(N_k/(N a))
    for n_vars in (6, 8, 10):
        sp = StateSpace((2,) * n_vars)
        pr = DirichletPrior.symmetric(sp, 1.0)
        val = expected_marginal_entropy(pr, 1).value
        n = sp.size
        assert abs(val - math.log(2)) <= 2 * 2.0 / n


def test_expected_multi_information_examples():
    pr = DirichletPrior.symmetric(StateSpace((2, 2)), 1.0)
    assert expected_multi_information(pr).value == pytest.approx(1 / 12, abs=1e-13)
    pr_deg = DirichletPrior.symmetric(StateSpace((5, 1)), 2.0)
    assert expected_multi_information(pr_deg).value == pytest.approx(0.0, abs=1e-13)
    with pytest.raises(ValidationError):
        expected_multi_information(DirichletPrior.symmetric(StateSpace.plain(4), 1.0))


def test_expected_multi_information_symmetric_identity():
    sp = StateSpace((2, 3, 2))
    a = 0.9
    pr = DirichletPrior.symmetric(sp, a)
    n_states = sp.size
    expected = (
        (sp.n - 1) * _h(n_states * a)
        + _h(a)
        - sum(_h(n_states / nk * a) for nk in sp.factors)
    )
    assert expected_multi_information(pr).value == pytest.approx(expected, rel=1e-12)


def test_expected_multi_information_asymptotic():
    # many binary factors: tends to h(a) - log a - gamma
    a = 1.0
    limit = _h(a) - math.log(a) - EULER_GAMMA
    gaps = []
    for n_vars in (6, 8, 10):
        pr = DirichletPrior.symmetric(StateSpace((2,) * n_vars), a)
        val = expected_multi_information(pr).value
        n = 2 ** n_vars
        gaps.append(abs(val - limit))
        assert abs(val - limit) <= 2 * n_vars * 2.0 / n
    assert gaps[0] > gaps[1] > gaps[2]


# ---------------------------------------------------------------------------
# Partition families
# ---------------------------------------------------------------------------


def test_expected_div_partition_examples():
    sp = StateSpace.plain(4)
    singletons = Partition(sp, ((0,), (1,), (2,), (3,)))
    pr = DirichletPrior.symmetric(sp, 1.0)
    assert expected_div_partition(pr, singletons).value == pytest.approx(0.0, abs=1e-14)
    halves = Partition(sp, ((0, 1), (2, 3)))
    assert expected_div_partition(pr, halves).value == pytest.approx(
        math.log(2) - 0.5, rel=1e-13
    )
    # aggregation consistency: equals the two-state uniform-divergence value
    two = DirichletPrior.symmetric(StateSpace.plain(2), 1.0)
    assert expected_div_partition(pr, halves).value == pytest.approx(
        expected_div_uniform(two).value, abs=1e-12
    )


def test_expected_div_partition_symmetric_vs_general():
    # the symmetric branch and the general formula agree on symmetric input
    from divexp.expectations import _expected_div_partition_general
    rng = np.random.default_rng(27)
    for _ in range(30):
        n = int(rng.integers(3, 20))
        sp = StateSpace.plain(n)
        a = float(rng.uniform(0.2, 5.0))
        pr = DirichletPrior.symmetric(sp, a)
        k = int(rng.integers(2, min(5, n) + 1))
        labels = rng.integers(0, k, n)
        labels[:k] = np.arange(k)
        part = Partition(sp, tuple(tuple(np.nonzero(labels == b)[0].tolist()) for b in range(k)))
        nu = ReferenceMeasure(sp, rng.uniform(0.5, 2.0, n))
        sym = expected_div_partition(pr, part, nu)
        gen = _expected_div_partition_general(pr, part, nu)
        assert sym.formula_id == "expected_div_partition_sym"
        assert sym.value == pytest.approx(gen.value, abs=1e-12)


def test_expected_div_partition_invariant_to_block_rescaling():
    rng = np.random.default_rng(28)
    sp = StateSpace.plain(6)
    part = Partition(sp, ((0, 1, 2), (3, 4), (5,)))
    pr = DirichletPrior(sp, rng.uniform(0.2, 5.0, 6))
    nu1 = rng.uniform(0.5, 2.0, 6)
    nu2 = nu1.copy()
    for b, c in zip(part.blocks, (2.0, 0.3, 5.0)):   # rescale per block
        nu2[list(b)] *= c
    v1 = expected_div_partition(pr, part, ReferenceMeasure(sp, nu1)).value
    v2 = expected_div_partition(pr, part, ReferenceMeasure(sp, nu2)).value
    assert v1 == pytest.approx(v2, abs=1e-12)


def test_expected_div_partition_large_n_limit():
    # N >> K at a = 1: approaches 1 - gamma + D(u||nu); with nu uniform the
    # correction is O(1/N)
    limit = 1 - EULER_GAMMA
    for n in (64, 256, 1024):
        sp = StateSpace.plain(n)
        pr = DirichletPrior.symmetric(sp, 1.0)
        part = Partition(sp, (tuple(range(n // 2)), tuple(range(n // 2, n))))
        val = expected_div_partition(pr, part).value
        assert abs(val - limit) <= 4.0 / n


# ---------------------------------------------------------------------------
# Disjoint mixtures
# ---------------------------------------------------------------------------


def test_expected_div_mixture_examples():
    sp = StateSpace((2, 2))
    pr = DirichletPrior.symmetric(sp, 1.0)
    blocks = (CylinderBlock(sp, ((0,), (0, 1))), CylinderBlock(sp, ((1,), (0, 1))))
    assert expected_div_disjoint_mixture(pr, blocks).value == pytest.approx(0.0, abs=1e-13)
    sp3 = StateSpace((2, 2, 2))
    pr3 = DirichletPrior.symmetric(sp3, 1.0)
    blocks3 = (
        CylinderBlock(sp3, ((0,), (0, 1), (0, 1))),
        CylinderBlock(sp3, ((1,), (0, 1), (0, 1))),
    )
    assert expected_div_disjoint_mixture(pr3, blocks3).value == pytest.approx(
        1 / 12, abs=1e-13
    )


def test_expected_div_mixture_symmetric_closed_form():
    # homogeneous case: h(a) + sum_k N1^(m_k-n) ((m_k-1)h(N1^m_k a) - m_k h(N1^(m_k-1) a))
    sp = StateSpace((2, 2, 2))
    a = 0.8
    pr = DirichletPrior.symmetric(sp, a)
    blocks = (
        CylinderBlock(sp, ((0,), (0, 1), (0, 1))),
        CylinderBlock(sp, ((1,), (0, 1), (0, 1))),
    )
    res = expected_div_disjoint_mixture(pr, blocks)
    manual = _h(a) + 2 * (2 ** (2 - 3)) * (1 * _h(4 * a) - 2 * _h(2 * a))
    assert res.value == pytest.approx(manual, rel=1e-12)
    assert res.formula_id == "expected_div_disjoint_mixture_sym"


def test_expected_div_mixture_asymptotic():
    a = 1.0
    limit = _h(a) - math.log(a) - EULER_GAMMA
    gaps = []
    for n_vars in (6, 8, 10):
        sp = StateSpace((2,) * n_vars)
        pr = DirichletPrior.symmetric(sp, a)
        blocks = (
            CylinderBlock(sp, ((0,),) + ((0, 1),) * (n_vars - 1)),
            CylinderBlock(sp, ((1,),) + ((0, 1),) * (n_vars - 1)),
        )
        val = expected_div_disjoint_mixture(pr, blocks).value
        m = n_vars - 1
        gaps.append(abs(val - limit))
        assert abs(val - limit) <= 2 * m / (2 ** (m - 1) * a)
    assert gaps[0] > gaps[1] > gaps[2]


# ---------------------------------------------------------------------------
# Decomposable models
# ---------------------------------------------------------------------------


def test_expected_div_decomposable_examples():
    sp = StateSpace((2, 2))
    pr = DirichletPrior.symmetric(sp, 1.0)
    jt = independence_junction_tree(sp)
    assert expected_div_decomposable(pr, jt).value == pytest.approx(1 / 12, abs=1e-13)
    from divexp import JunctionTree
    single = JunctionTree(sp, (frozenset({1, 2}),), ())
    assert expected_div_decomposable(pr, single).value == pytest.approx(0.0, abs=1e-14)


def test_expected_div_decomposable_reduction_to_multi_information():
    rng = np.random.default_rng(29)
    for _ in range(100):
        sp = StateSpace((2, 3, 2))
        pr = DirichletPrior(sp, rng.uniform(0.2, 5.0, 12))
        a = expected_div_decomposable(pr, independence_junction_tree(sp)).value
        b = expected_multi_information(pr).value
        assert abs(a - b) <= 1e-12


def test_expected_div_decomposable_uniform_prior_closed_form():
    # at a = 1: sum_V (h(N)-h(N/N_S)) - sum_E (h(N)-h(N/N_S)) - h(N) + 1
    sp = StateSpace((2, 2, 2, 2))
    jt = junction_tree_from_facets(sp, [(1, 2), (2, 3), (3, 4)])
    pr = DirichletPrior.symmetric(sp, 1.0)
    n = sp.size
    h_n = harmonic_int(n)
    manual = 0.0
    for v in jt.vertices:
        manual += h_n - harmonic_int(n // jt.set_size(v))
    for _u, _v, s in jt.edges:
        manual -= h_n - harmonic_int(n // jt.set_size(s))
    manual += -h_n + 1
    assert expected_div_decomposable(pr, jt).value == pytest.approx(manual, rel=1e-12)


def test_expected_div_decomposable_gap_shrinks():
    # chains of binary variables: gap to 1 - gamma shrinks as N/N_S grows
    limit = 1 - EULER_GAMMA
    gaps = []
    for n_vars in (4, 6, 8, 10):
        sp = StateSpace((2,) * n_vars)
        jt = junction_tree_from_facets(sp, [(k, k + 1) for k in range(1, n_vars)])
        pr = DirichletPrior.symmetric(sp, 1.0)
        gaps.append(abs(expected_div_decomposable(pr, jt).value - limit))
    assert gaps[0] > gaps[1] > gaps[2] > gaps[3]
    assert gaps[-1] < 0.05


def test_expected_div_decomposable_rejects_bad_tree():
    from divexp import JunctionTree
    sp = StateSpace((2, 2, 2))
    bad = JunctionTree(
        sp, (frozenset({1}), frozenset({2})), ((0, 1, frozenset({2})),)
    )
    pr = DirichletPrior.symmetric(sp, 1.0)
    with pytest.raises(ValidationError):
        expected_div_decomposable(pr, bad)


# ---------------------------------------------------------------------------
# Nonnegativity across families
# ---------------------------------------------------------------------------


def test_divergence_expectations_nonnegative():
    rng = np.random.default_rng(30)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        pr = DirichletPrior(StateSpace.plain(n), rng.uniform(0.2, 5.0, n))
        assert expected_div_uniform(pr).value >= -1e-12
        assert expected_div_pair(pr, pr).divergence.value >= -1e-12
    for _ in range(20):
        sp = StateSpace((2, 3))
        pr = DirichletPrior(sp, rng.uniform(0.2, 5.0, 6))
        assert expected_multi_information(pr).value >= -1e-12
        assert expected_div_decomposable(pr, independence_junction_tree(sp)).value >= -1e-12


# ---------------------------------------------------------------------------
# Asymptotic branches and volume bound
# ---------------------------------------------------------------------------


def test_asymptotic_eval_examples():
    res = asymptotic_eval("div_uniform", "large_N_const_a", N=10 ** 9, a=1.0)
    assert res.value == pytest.approx(1 - EULER_GAMMA, rel=1e-12)
    assert res.asymptotic_error_order == "O(1/(N*a))"
    assert asymptotic_eval("div_uniform", "large_a", a=100.0).value == 0.0
    res2 = asymptotic_eval("div_uniform", "a_to_0_fixed_Na", c=2.0, N=100)
    assert res2.value == pytest.approx(math.log(100) - 1.5, rel=1e-12)


def test_asymptotic_eval_matches_exact_at_stated_order():
    # exact symmetric formulas vs leading terms, |gap| <= 2 * order
    for n in (100, 1000, 10_000):
        for a in (0.5, 1.0, 2.0):
            exact = expected_div_uniform(_sym(n, a)).value
            lead = asymptotic_eval("div_uniform", "large_N_const_a", N=n, a=a).value
            assert abs(exact - lead) <= 2.0 / (n * a)
            exact_h = expected_entropy(_sym(n, a)).value
            lead_h = asymptotic_eval("entropy", "large_N_const_a", N=n, a=a).value
            assert abs(exact_h - lead_h) <= 2.0 / (n * a)
    for a in (50.0, 200.0, 1000.0):
        n = 7
        assert abs(expected_div_uniform(_sym(n, a)).value) <= 2.0 / a
        gap = expected_entropy(_sym(n, a)).value - math.log(n)
        assert abs(gap) <= 2.0 / a
    for a in (1e-3, 1e-4, 1e-5):
        n = 12
        assert abs(expected_entropy(_sym(n, a)).value) <= 2 * n * a
        assert abs(expected_div_uniform(_sym(n, a)).value - math.log(n)) <= 2 * n * a
    for c in (0.5, 2.0, 8.0):
        n = 4000
        a = c / n
        exact = expected_div_uniform(_sym(n, a)).value
        lead = asymptotic_eval("div_uniform", "a_to_0_fixed_Na", c=c, N=n).value
        assert abs(exact - lead) <= 2 * a
        exact_h = expected_entropy(_sym(n, a)).value
        lead_h = asymptotic_eval("entropy", "a_to_0_fixed_Na", c=c).value
        assert abs(exact_h - lead_h) <= 2 * a


def test_asymptotic_eval_validation():
    with pytest.raises(ValidationError):
        asymptotic_eval("entropy", "no_such_regime", N=2, a=1.0)
    with pytest.raises(ValidationError):
        asymptotic_eval("nope", "large_a", a=1.0)
    with pytest.raises(ValidationError):
        asymptotic_eval("div_uniform", "large_N_const_a", N=10)  # missing a


def test_subsimplex_volume_bound():
    assert subsimplex_volume_bound(0.0, 5) == 0.0
    assert subsimplex_volume_bound(3.0, 1) == 1.0
    assert subsimplex_volume_bound(math.log(2), 3) == pytest.approx(0.25, rel=1e-14)
    with pytest.raises(ValidationError):
        subsimplex_volume_bound(-1.0, 3)
