import itertools

import numpy as np
import pytest

from ehplan.model import Scenario
from ehplan.model.types import CostBreakdown
from ehplan.scenarios import (
    ReductionError,
    ScenarioSet,
    YearSeries,
    backward_reduce,
    deviation_report,
    feature_matrix,
    kantorovich_matrix,
    kmeans_labels,
    kmeans_reduce,
    reduce_distances,
    slice_days,
)
from ehplan.scenarios import _kernels_py

from conftest import toy_set


def year(hours, seed=0):
    rng = np.random.default_rng(seed)
    a = lambda: rng.uniform(0, 10, hours)
    return YearSeries(a(), a(), a(), a(), a() * 100, np.full(hours, 500.0))


def test_slice_days():
    s = slice_days(year(8760))
    assert len(s) == 365
    assert np.allclose(s.probs, 1 / 365)
    assert s.steps == 24
    toy = slice_days(year(48))
    assert len(toy) == 2 and np.allclose(toy.probs, 0.5)
    assert toy.origins == (0, 1)


def test_year_validation():
    with pytest.raises(ReductionError):
        year(8761)
    with pytest.raises(ReductionError):
        YearSeries(*[np.zeros(0)] * 6)
    bad = [np.ones(24)] * 6
    bad[0] = -bad[0]
    with pytest.raises(ReductionError):
        YearSeries(*bad)


def test_toy_distances():
    D = kantorovich_matrix(toy_set([0.0, 1.0, 10.0]), normalize=False)
    assert D[0, 1] == 1.0 and D[0, 2] == 10.0 and D[1, 2] == 9.0
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
    same = kantorovich_matrix(toy_set([3.0, 3.0]), normalize=False)
    assert same[0, 1] == 0.0


def test_distance_mismatched_steps():
    z1, z2 = [0.0], [0.0, 0.0]
    sc = lambda z: Scenario(prob=0.5, load_e=z, load_h=z, load_c=z, wind_speed=z, irradiance=z, price_e=z)
    with pytest.raises(ReductionError):
        ScenarioSet((sc(z1), sc(z2)), (0, 1))


def test_normalization_and_price_channel():
    s = slice_days(year(24 * 5))
    X = feature_matrix(s)
    assert X.min() >= 0 and X.max() <= 1
    assert X.shape == (5, 5 * 24)  # flat tariff is left out
    assert feature_matrix(s, include_price=True).shape == (5, 6 * 24)


def test_hand_traced_reduction():
    s = toy_set([0.0, 1.0, 10.0], [0.5, 0.3, 0.2])
    red, trace = backward_reduce(s, 2, normalize=False)
    assert red.origins == (0, 2)
    assert red.probs.tolist() == [0.8, 0.2]
    assert trace.removed == [1] and trace.absorbed_by == [0]
    assert trace.pd_value == [pytest.approx(0.3)]
    assert np.array_equal(red.scenarios[1].load_e, s.scenarios[2].load_e)


def test_reduction_edge_targets():
    s = toy_set([0.0, 1.0, 10.0], [0.5, 0.3, 0.2])
    same, trace = backward_reduce(s, 3)
    assert same is s and len(trace) == 0
    one, trace = backward_reduce(s, 1, normalize=False)
    assert len(one) == 1 and one.probs[0] == pytest.approx(1.0)
    assert len(trace) == 2
    for bad in (0, 4):
        with pytest.raises(ReductionError):
            backward_reduce(s, bad)


def _first_removal(D, p):
    n = len(p)
    best = None
    for i in range(n):
        nn = min((j for j in range(n) if j != i), key=lambda j: (D[i, j], j))
        score = p[i] * D[i, nn]
        if best is None or score < best[0]:
            best = (score, i, nn)
    return best


def test_greedy_step_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        X = rng.random((n, 4))
        p = rng.random(n) + 0.01
        p /= p.sum()
        D = _kernels_py.pairwise_distances(X)
        keep, q, removed, absorbed, pd, mass = reduce_distances(D, p, int(rng.integers(1, n)))
        score, i, j = _first_removal(D, p)
        assert (removed[0], absorbed[0]) == (i, j)
        assert pd[0] == pytest.approx(score, rel=1e-12)
        assert np.all(np.abs(mass - 1.0) <= 1e-12)
        assert abs(q.sum() - 1.0) <= 1e-12


def test_every_step_matches_recomputation():
    # replay: after each removal the next one is the argmin over survivors
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(3, 13))
        X = rng.random((n, 3))
        p = rng.dirichlet(np.ones(n))
        D = _kernels_py.pairwise_distances(X)
        _, _, removed, absorbed, _, _ = reduce_distances(D, p, 1)
        alive, q = list(range(n)), p.copy()
        for r, a in zip(removed, absorbed):
            sub = D[np.ix_(alive, alive)]
            _, i, j = _first_removal(sub, q[alive])
            assert (alive[i], alive[j]) == (r, a)
            q[a] += q[r]
            alive.remove(r)


def test_ties_break_to_lowest_index():
    s = toy_set([0.0, 1.0, 2.0, 3.0])
    _, trace = backward_reduce(s, 3, normalize=False)
    assert trace.removed == [0] and trace.absorbed_by == [1]


def test_idempotent_and_subset():
    s = slice_days(year(24 * 20, seed=3))
    r1, _ = backward_reduce(s, 7)
    r2, t2 = backward_reduce(r1, 7)
    assert r2 is r1 and len(t2) == 0
    for sc, o in zip(r1.scenarios, r1.origins):
        assert np.array_equal(sc.load_e, s.scenarios[o].load_e)
        assert np.array_equal(sc.irradiance, s.scenarios[o].irradiance)


def test_trace_csv(tmp_path):
    _, trace = backward_reduce(toy_set([0.0, 1.0, 10.0], [0.5, 0.3, 0.2]), 1, normalize=False)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,removed_id,absorbed_by,pd_value"
    assert len(lines) == 3 and lines[1].startswith("1,1,0,")


def test_kmeans_examples():
    one = kmeans_reduce(toy_set([0.0, 1.0, 10.0]), 1, normalize=False)
    assert one.scenarios[0].load_e[0] == pytest.approx(11 / 3)
    assert one.probs.tolist() == [1.0]
    assert one.origins == (None,)
    each = kmeans_reduce(toy_set([0.0, 1.0, 10.0]), 3, normalize=False)
    assert sorted(sc.load_e[0] for sc in each.scenarios) == [0.0, 1.0, 10.0]
    assert np.allclose(each.probs, 1 / 3)
    dup = kmeans_reduce(toy_set([2.0, 2.0, 5.0, 5.0, 9.0]), 3, normalize=False)
    assert sorted(sc.load_e[0] for sc in dup.scenarios) == [2.0, 5.0, 9.0]
    with pytest.raises(ReductionError):
        kmeans_reduce(toy_set([0.0, 1.0]), 3)


def test_kmeans_deterministic():
    s = slice_days(year(24 * 30, seed=9))
    a, b = kmeans_reduce(s, 5, seed=4), kmeans_reduce(s, 5, seed=4)
    assert np.array_equal(a.probs, b.probs)
    assert all(np.array_equal(x.load_e, y.load_e) for x, y in zip(a.scenarios, b.scenarios))


def test_kmeans_not_worse_than_seeding():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(c, 0.1, (20, 2)) for c in (0.0, 3.0, 6.0)])
    labels, wcss = kmeans_labels(X, 3, seed=0)
    assert len(set(labels.tolist())) == 3
    assert wcss < 20 * 3 * 2 * 0.1**2 * 2


def _costs(ic, lc=1.0, total=None):
    one = np.array([1.0])
    return CostBreakdown(ic=ic, tc=one, mc=one, lc=np.array([lc]), probs=one, days_per_year=1.0,
                         oc_expected=2 + lc, var_alpha=2 + lc, cvar_alpha=2 + lc,
                         objective=total if total is not None else ic + 2 + lc, alpha=0.95, beta=0.5)


def test_deviation_report():
    full = _costs(10.0)
    assert all(v == 0 for v in deviation_report(full, _costs(10.0)).values())
    d = deviation_report(_costs(10.0, total=100.0), _costs(10.0, total=99.97))
    assert d["Total"] == pytest.approx(-0.03)
    nolc = deviation_report(_costs(10.0, lc=0.0), _costs(10.0, lc=1.0))
    assert nolc["LC"] == "n/a"
