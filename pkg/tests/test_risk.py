import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from ehplan.milp import LinExpr, MilpBuilder
from ehplan.risk import (
    LossDistribution,
    RiskConfig,
    RiskDomainError,
    cvar,
    cvar_objective,
    emit_risk_terms,
    empirical_var,
    risk_objective,
)

FOUR = LossDistribution.uniform([10.0, 20.0, 30.0, 40.0])


def brute_cvar(losses, probs, alpha):
    # the minimum over zeta is attained at one of the atoms
    return min(z + (probs @ np.maximum(losses - z, 0.0)) / (1 - alpha) for z in losses)


def test_four_atom_examples():
    assert empirical_var(FOUR, 0.75) == 30.0
    assert empirical_var(FOUR, 0.9) == 40.0
    assert cvar(FOUR, 0.75) == 40.0
    assert cvar(FOUR, 0.5) == 35.0
    assert cvar(FOUR, 0.0) == 25.0


def test_single_atom():
    d = LossDistribution([7.5], [1.0])
    for a in (0.0, 0.3, 0.99):
        assert empirical_var(d, a) == 7.5
        assert cvar(d, a) == 7.5


def test_domain_errors():
    with pytest.raises(RiskDomainError):
        cvar(FOUR, 1.0)
    with pytest.raises(RiskDomainError):
        LossDistribution([], [])
    with pytest.raises(RiskDomainError):
        LossDistribution([1.0, 2.0], [0.7, 0.7])
    with pytest.raises(RiskDomainError):
        LossDistribution([1.0, 2.0], [1.2, -0.2])
    with pytest.raises(RiskDomainError):
        RiskConfig(alpha=1.0)
    with pytest.raises(RiskDomainError):
        RiskConfig(beta=1.5)


def test_cvar_objective_minimum_at_var():
    z = empirical_var(FOUR, 0.75)
    assert cvar_objective(FOUR, 0.75, z) == pytest.approx(cvar(FOUR, 0.75))
    assert cvar_objective(FOUR, 0.75, 0.0) >= cvar(FOUR, 0.75)


def test_risk_objective_blend():
    r = risk_objective(FOUR.losses, FOUR.probs, RiskConfig(0.75, 0.5))
    assert r == pytest.approx(0.5 * 25 + 0.5 * 40)


dists = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=n, max_size=n),
        st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n),
    )
)


def _dist(pair):
    losses, w = pair
    w = np.array(w)
    return LossDistribution(np.array(losses), w / w.sum())


@settings(max_examples=200, deadline=None)
@given(dists, st.floats(0.0, 0.99))
def test_cvar_matches_minimization(pair, alpha):
    d = _dist(pair)
    scale = max(1.0, np.abs(d.losses).max())
    assert cvar(d, alpha) == pytest.approx(brute_cvar(d.losses, d.probs, alpha), abs=1e-9 * scale)
    assert cvar(d, alpha) >= empirical_var(d, alpha) - 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(dists, st.floats(0.0, 0.98), st.floats(0.0, 0.98))
def test_cvar_monotone_in_alpha(pair, a1, a2):
    d = _dist(pair)
    lo, hi = sorted((a1, a2))
    scale = max(1.0, np.abs(d.losses).max())
    assert cvar(d, lo) <= cvar(d, hi) + 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(dists, st.floats(0.0, 0.99), st.floats(-1e3, 1e3), st.floats(0.0, 50.0))
def test_translation_and_homogeneity(pair, alpha, shift, k):
    d = _dist(pair)
    base = cvar(d, alpha)
    scale = max(1.0, np.abs(d.losses).max(), abs(shift))
    moved = LossDistribution(d.losses + shift, d.probs)
    assert cvar(moved, alpha) == pytest.approx(base + shift, abs=1e-9 * scale)
    scaled = LossDistribution(d.losses * k, d.probs)
    assert cvar(scaled, alpha) == pytest.approx(k * base, abs=1e-9 * scale * max(k, 1.0))
    assert cvar(d, 0.0) == pytest.approx(d.probs @ d.losses, abs=1e-9 * scale)


def test_subadditivity_paired_samples():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        p = rng.random(n) + 0.01
        p /= p.sum()
        l1, l2 = rng.normal(0, 100, n), rng.normal(50, 300, n)
        alpha = float(rng.uniform(0, 0.99))
        scale = max(1.0, np.abs(l1).max() + np.abs(l2).max())
        lhs = cvar(LossDistribution(l1 + l2, p), alpha)
        rhs = cvar(LossDistribution(l1, p), alpha) + cvar(LossDistribution(l2, p), alpha)
        assert lhs <= rhs + 1e-9 * scale


def _solve_embedding(losses, probs, risk, weight=1.0):
    b = MilpBuilder()
    dummy = b.add_vars("x", (1,), 0, 0)
    exprs = [LinExpr(np.array([dummy[0]]), np.array([0.0]), const=float(v)) for v in losses]
    terms = emit_risk_terms(b, exprs, probs, risk, weight=weight)
    p = b.build()
    lo, hi = p.row_bounds()
    res = linprog(p.c, A_ub=-p.A.toarray(), b_ub=-lo, bounds=np.column_stack([p.lb, p.ub]), method="highs")
    assert res.status == 0
    return res.fun + p.c0, terms, p


def test_embedding_reproduces_cvar():
    val, terms, p = _solve_embedding(FOUR.losses, FOUR.probs, RiskConfig(0.75, 1.0))
    assert val == pytest.approx(40.0, rel=1e-8)
    assert len(terms.excess) == 4 and len(terms.rows) == 4
    assert p.row_census()["cvar_excess"] == 4
    assert np.all(p.lb[terms.excess] == 0)


def test_embedding_beta_zero_is_mean():
    val, terms, p = _solve_embedding(FOUR.losses, FOUR.probs, RiskConfig(0.9, 0.0))
    assert terms.zeta_coef == 0 and np.all(terms.excess_coef == 0)
    assert val == pytest.approx(25.0)


def test_embedding_random_against_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(1, 15))
        p = rng.random(n) + 0.05
        p /= p.sum()
        losses = rng.uniform(0, 1e5, n)
        risk = RiskConfig(float(rng.uniform(0, 0.99)), float(rng.uniform(0, 1)))
        val, _, _ = _solve_embedding(losses, p, risk, weight=365.0)
        assert val == pytest.approx(365.0 * risk_objective(losses, p, risk), rel=1e-8)


def test_length_mismatch():
    b = MilpBuilder()
    with pytest.raises(RiskDomainError):
        emit_risk_terms(b, [LinExpr(np.array([], dtype=int), np.array([]), 1.0)], [0.5, 0.5], RiskConfig())
