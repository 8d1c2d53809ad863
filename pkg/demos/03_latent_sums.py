"""Sums of independent latent blocks become a convolutional graph."""
import numpy as np

from convfactor import Factor, Variable, joint
from convfactor.models import LatentSumSpec, build_latent_sum, export_chain_graph, simulate_latent_sum

rng = np.random.default_rng(2)


def block(ids):
    scope = [Variable(i, f"x{i}", 2) for i in ids]
    return Factor(scope, rng.dirichlet(np.ones(2 ** len(ids))).reshape((2,) * len(ids)))


# x10 = x2 + x4 + x8 and x11 = x6 + x9 (mod 2)
spec = LatentSumSpec([block([1, 2]), block([3, 4, 5, 6]), block([7, 8, 9])], [[2, 4, 8], [6, 9]])
g = build_latent_sum(spec)
for name, f in g.factors.items():
    print(name, f.names)

print(export_chain_graph(spec))

exact = joint(g)
est = simulate_latent_sum(spec, 200_000, seed=0).reorder(exact.ids)
print("total variation", 0.5 * np.abs(exact.values - est.values).sum())
