"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured figure and
the pinned tolerance, then asserts.  Run alone with::

    pytest tests/test_acceptance.py -v -s
"""
import time

import numpy as np
import pytest

from convfactor import (
    Factor,
    FactorGraph,
    Method,
    Query,
    Variable,
    check_marginal_independence,
    convolve,
    dft,
    dualize,
    joint,
    marginalize,
    multiply,
    normalize,
    random_factor_graph,
    rel_linf,
    separates,
)
from convfactor.bench import run_bench
from convfactor.errors import HeuristicFailure
from convfactor.inference import answer
from convfactor.models import (
    CovarianceModel,
    LatentSumSpec,
    build_if_model,
    build_latent_sum,
    covariance_graph,
    gaussian_compose,
    gaussian_decompose,
    gaussian_sample_check,
    maximal_cliques,
    simulate_latent_sum,
)

from conftest import random_factor
from test_models import SIX_VAR_PATTERN, PATH_C, brute_cliques, brute_if, random_if, random_sparse_psd

# Pinned tolerances.
TOL_METHODS = 1e-9
TOL_CONV_THM = 1e-10
TOL_CONV_THM_GRAPH = 1e-9
TOL_LAWS = 1e-12
TOL_SHARED_SUM = 1e-9
TOL_TV = 0.02
TOL_INDEP = 1e-9
MIN_DEPENDENCE = 1e-3
TOL_COMPOSE = 1e-12
TOL_SAMPLER = 0.02
TOL_IF = 1e-12
TOL_BENCH_AGREE = 1e-6
BENCH_GAIN = 4.0

POOL = [Variable(i, f"v{i}", n) for i, n in enumerate((2, 3, 4, 5, 3))]


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def scope_of(rng, k_max=3):
    k = int(rng.integers(0, k_max + 1))
    return [POOL[i] for i in rng.choice(len(POOL), size=k, replace=False)]


def query_for(rng, g):
    ids = list(g.ids)
    rng.shuffle(ids)
    k1 = int(rng.integers(0, len(ids) + 1))
    k2 = int(rng.integers(k1, len(ids) + 1))
    return Query(frozenset(ids[:k1]), {i: int(rng.integers(g.var(i).size)) for i in ids[k1:k2]})


def test_criterion_1_method_equivalence(capsys):
    rng = np.random.default_rng(101)
    start, worst = time.perf_counter(), 0.0
    for _ in range(200):
        g = random_factor_graph(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)), max_size=5)
        q = query_for(rng, g)
        ref = answer(g, q, Method.ORACLE)
        for m in (Method.ELIMINATION, Method.FFT):
            worst = max(worst, rel_linf(answer(g, q, m), ref))
    elapsed = time.perf_counter() - start
    ok = worst <= TOL_METHODS and elapsed < 60
    report(capsys, 1, ok, f"200 graphs, max rel dev {worst:.2e} <= {TOL_METHODS:g}, {elapsed:.1f}s < 60s")


def test_criterion_2_convolution_theorem(capsys):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        f = random_factor(rng, scope_of(rng), complex_values=True)
        g = random_factor(rng, scope_of(rng), complex_values=True)
        worst = max(worst, rel_linf(dft(convolve(f, g)), multiply(dft(f), dft(g))))
    worst_graph = 0.0
    for _ in range(50):
        g = random_factor_graph(rng, int(rng.integers(1, 6)), int(rng.integers(1, 5)))
        worst_graph = max(worst_graph, rel_linf(joint(dualize(g)), dft(joint(g))))
    ok = worst <= TOL_CONV_THM and worst_graph <= TOL_CONV_THM_GRAPH
    report(capsys, 2, ok, f"pairs {worst:.2e} <= {TOL_CONV_THM:g}; graphs {worst_graph:.2e} <= {TOL_CONV_THM_GRAPH:g}")


def test_criterion_3_algebra_laws(capsys):
    rng = np.random.default_rng(103)
    worst, exact = 0.0, True
    for _ in range(100):
        f, g, h = (random_factor(rng, scope_of(rng), complex_values=True) for _ in range(3))
        for op in (convolve, multiply):
            ab = op(f, g)
            worst = max(worst, np.max(np.abs(op(g, f).reorder(ab.ids).values - ab.values), initial=0))
            left = op(ab, h)
            right = op(f, op(g, h)).reorder(left.ids)
            worst = max(worst, np.max(np.abs(right.values - left.values), initial=0))
        d1 = random_factor(rng, POOL[:2], complex_values=True)
        d2 = random_factor(rng, POOL[2:4], complex_values=True)
        exact &= bool(np.array_equal(convolve(d1, d2).values, multiply(d1, d2).values))
    ok = worst <= TOL_LAWS and exact
    report(capsys, 3, ok, f"100 triples, max abs dev {worst:.2e} <= {TOL_LAWS:g}; disjoint convolve == multiply: {exact}")


def test_criterion_4_shared_variable_sum(capsys):
    rng = np.random.default_rng(104)
    worst1 = worst2 = 0.0
    for _ in range(50):
        x, y, z = (Variable(i, n, int(rng.integers(2, 6))) for i, n in enumerate("xyz"))
        f = random_factor(rng, [x, y], 0.05, 1.0)
        g = random_factor(rng, [y, z], 0.05, 1.0)
        p = normalize(convolve(f, g))
        claim1 = normalize(marginalize(f, {y.id}))
        worst1 = max(worst1, np.max(np.abs(marginalize(p, {y.id, z.id}).values - claim1.values)))
        p_xz = marginalize(p, {y.id})
        outer = multiply(marginalize(p_xz, {z.id}), marginalize(p_xz, {x.id})).reorder(p_xz.ids)
        worst2 = max(worst2, np.max(np.abs(outer.values - p_xz.values)))
    ok = max(worst1, worst2) <= TOL_SHARED_SUM
    report(capsys, 4, ok, f"50 pairs, marginal {worst1:.2e}, independence {worst2:.2e} <= {TOL_SHARED_SUM:g}")


def test_criterion_5_latent_sum(capsys):
    rng = np.random.default_rng(105)

    def block(ids):
        scope = [Variable(i, f"x{i}", 2) for i in ids]
        return Factor(scope, rng.dirichlet(np.ones(2 ** len(ids))).reshape((2,) * len(ids)))

    spec = LatentSumSpec([block([1, 2]), block([3, 4, 5, 6]), block([7, 8, 9])], [[2, 4, 8], [6, 9]])
    g = build_latent_sum(spec)
    scopes = [set(f.names) for f in g.factors.values()]
    scopes_ok = scopes == [{"x1", "x10"}, {"x3", "x10", "x5", "x11"}, {"x7", "x10", "x11"}]
    exact = joint(g)
    empirical = simulate_latent_sum(spec, 10**6, seed=5).reorder(exact.ids)
    tv = 0.5 * float(np.abs(empirical.values - exact.values).sum())
    ok = scopes_ok and tv <= TOL_TV
    report(capsys, 5, ok, f"scopes match: {scopes_ok}; TV at 1e6 samples {tv:.4f} <= {TOL_TV}")


def test_criterion_6_separation(capsys):
    rng = np.random.default_rng(106)
    separated, worst = 0, 0.0
    while separated < 100:
        g = random_factor_graph(rng, int(rng.integers(3, 7)), int(rng.integers(1, 6)), max_size=4)
        ids = list(g.ids)
        rng.shuffle(ids)
        na = int(rng.integers(1, len(ids) - 1))
        nb = int(rng.integers(1, len(ids) - na + 1))
        a, b = set(ids[:na]), set(ids[na:na + nb])
        s = set(ids[na + nb:na + nb + int(rng.integers(0, len(ids) - na - nb + 1))])
        if separates(g, a, b, s):
            separated += 1
            worst = max(worst, check_marginal_independence(g, a, b).max_deviation)

    dependent = 0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        va, vb, vc = (Variable(i, f"x{i}", n) for i in range(3))
        # a and b share a skewed factor, so no separator exists.
        f = Factor([va, vb], rng.uniform(0, 1, (n, n)) ** 4 + 1e-3)
        h = Factor([vb, vc], rng.uniform(0.1, 1, (n, n)))
        g = FactorGraph([va, vb, vc], {"f": f, "h": h})
        assert not separates(g, {0}, {1})
        if check_marginal_independence(g, {0}, {1}).max_deviation > MIN_DEPENDENCE:
            dependent += 1
    ok = worst <= TOL_INDEP and dependent >= 10
    report(capsys, 6, ok, f"100 separated, max dev {worst:.2e} <= {TOL_INDEP:g}; {dependent}/20 counterexamples > {MIN_DEPENDENCE:g} (need 10)")


def test_criterion_7_gaussian(capsys):
    rng = np.random.default_rng(107)
    mask = np.array(SIX_VAR_PATTERN, dtype=bool)
    c = np.where(mask, 0.2, 0.0)
    c[np.diag_indices(6)] = 5.0
    adj = covariance_graph(CovarianceModel(None, c))
    cliques = sorted(sorted(i + 1 for i in q) for q in maximal_cliques(adj))
    cliques_ok = cliques == [[1, 5], [2, 3, 5, 6], [4, 5, 6]] and maximal_cliques(adj) == brute_cliques(adj)

    done, worst = 0, 0.0
    while done < 50:
        n = int(rng.integers(2, 8))
        model = CovarianceModel(rng.normal(size=n), random_sparse_psd(rng, n))
        try:
            factors = gaussian_decompose(model)
        except HeuristicFailure:
            continue
        done += 1
        worst = max(worst, float(np.max(np.abs(gaussian_compose(factors, n).covariance - model.covariance))))

    path = CovarianceModel([1.0, 2.0, 3.0], PATH_C)
    sampled = gaussian_sample_check(path, gaussian_decompose(path), 10**6, seed=7)
    ok = cliques_ok and worst <= TOL_COMPOSE and sampled < TOL_SAMPLER
    report(capsys, 7, ok, f"cliques match: {cliques_ok}; compose {worst:.2e} <= {TOL_COMPOSE:g} on 50; sampler {sampled:.4f} < {TOL_SAMPLER}")


def test_criterion_8_if_model(capsys):
    rng = np.random.default_rng(108)
    spec = random_if(rng, 3, 2, 2)
    g = build_if_model(spec)
    dev = float(np.max(np.abs(joint(g).values - brute_if(spec))))
    topology = len(g.factors) == 3 and all(f.ids == (0, 1) for f in g.factors.values())
    ok = dev <= TOL_IF and topology
    report(capsys, 8, ok, f"joint vs enumeration {dev:.2e} <= {TOL_IF:g}; 3 factors over both sensors: {topology}")


@pytest.mark.slow
def test_criterion_9_speedup_trend(capsys):
    start = time.perf_counter()
    rep = run_bench("chain", 4, [16, 64, 256, 1024], reps=5, seed=0, tol=TOL_BENCH_AGREE)
    elapsed = time.perf_counter() - start
    ratios = {r.A: r.ratio for r in rep.rows}
    gain = ratios[1024] / ratios[16]
    agree = max(r.deviation for r in rep.rows)
    ok = gain >= BENCH_GAIN and agree <= TOL_BENCH_AGREE and elapsed < 300
    with capsys.disabled():
        print("\n" + rep.table())
    report(capsys, 9, ok, f"ratio(1024)/ratio(16) = {gain:.2f} >= {BENCH_GAIN}; agreement {agree:.1e} <= {TOL_BENCH_AGREE:g}; {elapsed:.0f}s < 300s")
