"""A discrete linear mixing model y = Hx + u over Z_N."""
import numpy as np

from convfactor import joint, to_dot
from convfactor.models import IFSpec, build_if_model

rng = np.random.default_rng(3)
n = 3
h = np.array([[1, 2], [2, 1]])
sources = [rng.dirichlet(np.ones(n)) for _ in range(2)]
noise = rng.dirichlet(np.ones(n * n)).reshape(n, n)

g = build_if_model(IFSpec(h, sources, noise, n))
print(to_dot(g))

# each source factor lives on the line {H[:, i] * x}
print(np.round(g.factors["p_z1"].values.real, 3))
p = joint(g).values.real
print("p(y1, y2)")
print(np.round(p, 4), p.sum())
