"""Shared fixtures and brute-force oracles.

The oracles here evaluate definitions entry by entry with plain Python loops
so that they share no code path with the vectorised implementation.
"""
import cmath
import itertools

import numpy as np
import pytest

from convfactor import Factor, FactorGraph, Semantics, Variable


def entries(f):
    """Dict from assignment tuples (in scope order) to values."""
    return {idx: complex(f.values[idx]) for idx in itertools.product(*(range(v.size) for v in f.scope))}


def brute_product(f, g, convolutional):
    """Direct evaluation of the product/convolution definition."""
    f_ids = [v.id for v in f.scope]
    g_ids = [v.id for v in g.scope]
    union = list(f.scope) + [v for v in g.scope if v.id not in f_ids]
    shared = [v for v in f.scope if v.id in g_ids]
    fe, ge = entries(f), entries(g)
    out = np.zeros(tuple(v.size for v in union), dtype=complex)
    for x in itertools.product(*(range(v.size) for v in union)):
        point = {v.id: x[k] for k, v in enumerate(union)}
        if not convolutional or not shared:
            out[x] = fe[tuple(point[i] for i in f_ids)] * ge[tuple(point[i] for i in g_ids)]
            continue
        total = 0
        for y in itertools.product(*(range(v.size) for v in shared)):
            yp = {v.id: y[k] for k, v in enumerate(shared)}
            f_arg = tuple((point[i] - yp[i]) % f.scope[a].size if i in yp else point[i] for a, i in enumerate(f_ids))
            g_arg = tuple(yp[i] if i in yp else point[i] for i in g_ids)
            total += fe[f_arg] * ge[g_arg]
        out[x] = total
    return Factor(union, out)


def brute_dft(f, inverse=False):
    sign = 1 if inverse else -1
    sizes = [v.size for v in f.scope]
    fe = entries(f)
    out = np.zeros(tuple(sizes), dtype=complex)
    scale = 1.0 / np.prod(sizes) if inverse else 1.0
    for k in itertools.product(*(range(n) for n in sizes)):
        total = 0
        for x, val in fe.items():
            phase = sum(ki * xi / n for ki, xi, n in zip(k, x, sizes))
            total += val * cmath.exp(sign * 2j * cmath.pi * phase)
        out[k] = total * scale
    return Factor(f.scope, out)


def brute_joint(g):
    """Joint table by folding brute_product over all factors."""
    conv = g.semantics is Semantics.CONVOLUTIONAL
    result = None
    for f in g.factors.values():
        result = f if result is None else brute_product(result, f, conv)
    return result.reorder([v.id for v in g.variables])


def random_factor(rng, scope, low=0.0, high=1.0, complex_values=False):
    shape = tuple(v.size for v in scope)
    values = rng.uniform(low, high, size=shape)
    if complex_values:
        values = values + 1j * rng.uniform(low, high, size=shape)
    return Factor(scope, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def five_var():
    """Variables x1..x5; f1(x1,x2), f2(x2,x3), f3(x2,x4,x5); random positive factors."""
    r = np.random.default_rng(1)
    xs = [Variable(i, f"x{i}", n) for i, n in zip(range(1, 6), (2, 3, 2, 2, 3))]
    x1, x2, x3, x4, x5 = xs
    factors = {
        "f1": random_factor(r, [x1, x2], 0.1, 1.0),
        "f2": random_factor(r, [x2, x3], 0.1, 1.0),
        "f3": random_factor(r, [x2, x4, x5], 0.1, 1.0),
    }
    return FactorGraph(xs, factors, Semantics.CONVOLUTIONAL)


@pytest.fixture
def chain3():
    """f1(x1,x2), f2(x2,x3) over Z_3."""
    r = np.random.default_rng(2)
    xs = [Variable(i, f"x{i}", 3) for i in (1, 2, 3)]
    factors = {"f1": random_factor(r, xs[:2], 0.1, 1.0), "f2": random_factor(r, xs[1:], 0.1, 1.0)}
    return FactorGraph(xs, factors, Semantics.CONVOLUTIONAL)
