"""Querying a small convolutional graph three ways."""
import numpy as np

from convfactor import Factor, FactorGraph, Query, Variable, answer, default_order, to_dot

rng = np.random.default_rng(1)
x1, x2, x3, x4, x5 = (Variable(i, f"x{i}", n) for i, n in zip(range(1, 6), (2, 3, 2, 2, 3)))
g = FactorGraph(
    [x1, x2, x3, x4, x5],
    {
        "f1": Factor([x1, x2], rng.uniform(0.1, 1, (2, 3))),
        "f2": Factor([x2, x3], rng.uniform(0.1, 1, (3, 2))),
        "f3": Factor([x2, x4, x5], rng.uniform(0.1, 1, (3, 2, 3))),
    },
)
print(to_dot(g))

# sum out x5, observe x1 and x2
q = Query(marginalize=frozenset({5}), evidence={1: 0, 2: 1})
print("elimination order", default_order(g, set(q.evidence)))

trace = []
direct = answer(g, q, "elimination", trace=trace)
for step in trace:
    print(f"  eliminate {step['variable']}: {step['absorbed']} -> {step['new_factor']}{step['scope']}")

dual = answer(g, q, "fft")
brute = answer(g, q, "oracle")
print("retained", direct.names)
print(np.round(direct.values.real, 6))
print("fft vs oracle       ", np.max(np.abs(dual.values - brute.values)))
print("elimination vs oracle", np.max(np.abs(direct.values - brute.values)))
