"""Splitting a sparse covariance into clique factors."""
import numpy as np

from convfactor.models import (
    CovarianceModel,
    covariance_graph,
    covariance_graph_dot,
    gaussian_compose,
    gaussian_decompose,
    gaussian_sample_check,
    maximal_cliques,
)

pattern = np.array([
    [1, 0, 0, 0, 1, 0],
    [0, 1, 1, 0, 1, 1],
    [0, 1, 1, 0, 1, 1],
    [0, 0, 0, 1, 1, 1],
    [1, 1, 1, 1, 1, 1],
    [0, 1, 1, 1, 1, 1],
])
c = np.where(pattern == 1, 0.2, 0.0)
np.fill_diagonal(c, 3.0)
model = CovarianceModel(None, c)

print(covariance_graph_dot(model))
print("cliques", [sorted(i + 1 for i in q) for q in maximal_cliques(covariance_graph(model))])

factors = gaussian_decompose(model)
for f in factors:
    print([model.names[i] for i in f.scope], "min eig", round(f.min_eigenvalue(), 4))

back = gaussian_compose(factors, model.dim)
print("compose error", np.max(np.abs(back.covariance - model.covariance)))
print("sampled cov error", gaussian_sample_check(model, factors, 200_000, seed=0))
