"""Model builders whose observed distributions factor convolutionally.

* Latent-sum models: independent blocks of latent variables, some of which
  are summed (mod N) into new observed variables.
* Gaussian models in moment form: one Gaussian piece per maximal clique of
  the covariance graph, composed by adding padded moments.
* Independent-factor models discretized over Z_N: ``y = H x + u``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Factor, Semantics, Variable
from .errors import HeuristicFailure, SpecError
from .graph import FactorGraph

__all__ = [
    "LatentSumSpec",
    "build_latent_sum",
    "simulate_latent_sum",
    "export_chain_graph",
    "CovarianceModel",
    "GaussianFactor",
    "covariance_graph",
    "graph_separates",
    "maximal_cliques",
    "gaussian_decompose",
    "gaussian_compose",
    "gaussian_sample_check",
    "covariance_graph_dot",
    "gaussian_cfg_dot",
    "IFSpec",
    "build_if_model",
]

PROB_TOL = 1e-9


def _check_distribution(values, what: str) -> None:
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        if np.max(np.abs(arr.imag), initial=0.0) > PROB_TOL:
            raise SpecError(f"{what} is not real")
        arr = arr.real
    if np.any(arr < -PROB_TOL):
        raise SpecError(f"{what} has negative entries")
    if abs(arr.sum() - 1.0) > PROB_TOL:
        raise SpecError(f"{what} sums to {arr.sum()}, not 1")


# --------------------------------------------------------------------------
# latent sums


@dataclass(frozen=True)
class LatentSumSpec:
    """Independent latent blocks plus the sums that form observed variables.

    ``blocks[i]`` is the joint distribution of block ``i``; its scope names the
    latent variables, whose ids must together be ``1..|U|``.  ``sums[l]`` lists
    the ids added into the new variable with id ``|U| + l + 1``.  Ids not in
    any sum are observed directly.
    """

    blocks: tuple[Factor, ...]
    sums: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "sums", tuple(tuple(int(i) for i in s) for s in self.sums))

    @property
    def latent_variables(self) -> dict[int, Variable]:
        return {v.id: v for b in self.blocks for v in b.scope}

    def validate(self) -> None:
        owner = {}
        for k, block in enumerate(self.blocks):
            for v in block.scope:
                if v.id in owner:
                    raise SpecError(f"latent id {v.id} appears in blocks {owner[v.id]} and {k}")
                owner[v.id] = k
        n = len(owner)
        if set(owner) != set(range(1, n + 1)):
            raise SpecError(f"latent ids must be exactly 1..{n}, got {sorted(owner)}")
        seen = set()
        for l, members in enumerate(self.sums, 1):
            if not members:
                raise SpecError(f"sum set {l} is empty")
            for i in members:
                if i not in owner:
                    raise SpecError(f"sum set {l} references unknown id {i}")
                if i in seen:
                    raise SpecError(f"id {i} appears in more than one sum set")
                seen.add(i)
            blocks_hit = [owner[i] for i in members]
            if len(set(blocks_hit)) != len(blocks_hit):
                raise SpecError(f"sum set {l} holds two variables of the same independent block")
            sizes = {self.latent_variables[i].size for i in members}
            if len(sizes) != 1:
                raise SpecError(f"sum set {l} mixes domain sizes {sorted(sizes)}")

    def mapping(self) -> dict[int, int]:
        """Latent id -> observed id (itself, or the id of the sum it feeds)."""
        n = len(self.latent_variables)
        t = {i: i for i in self.latent_variables}
        for l, members in enumerate(self.sums, 1):
            for i in members:
                t[i] = n + l
        return t

    def observed_variables(self) -> list[Variable]:
        """Observed variables sorted by id."""
        latent = self.latent_variables
        n = len(latent)
        summed = {i for s in self.sums for i in s}
        out = [v for i, v in sorted(latent.items()) if i not in summed]
        for l, members in enumerate(self.sums, 1):
            out.append(Variable(n + l, f"x{n + l}", latent[members[0]].size))
        return out


def build_latent_sum(spec: LatentSumSpec) -> FactorGraph:
    """Convolutional graph of the observed variables of a latent-sum model.

    Each block distribution becomes one factor whose scope has every latent
    variable replaced by the observed variable it feeds.
    """
    spec.validate()
    observed = {v.id: v for v in spec.observed_variables()}
    t = spec.mapping()
    factors = {}
    for k, block in enumerate(spec.blocks, 1):
        scope = [observed[t[v.id]] for v in block.scope]
        factors[f"p{k}"] = Factor(scope, block.values)
    return FactorGraph(list(observed.values()), factors, Semantics.CONVOLUTIONAL)


def simulate_latent_sum(spec: LatentSumSpec, samples: int, seed: int | None = None) -> Factor:
    """Empirical distribution of the observed variables from ancestral sampling."""
    spec.validate()
    for k, block in enumerate(spec.blocks, 1):
        _check_distribution(block.values, f"block {k}")
    rng = np.random.default_rng(seed)
    draws = {}
    for block in spec.blocks:
        p = block.values.real.ravel()
        flat = rng.choice(p.size, size=samples, p=p / p.sum())
        for v, col in zip(block.scope, np.unravel_index(flat, block.shape)):
            draws[v.id] = col
    t = spec.mapping()
    observed = spec.observed_variables()
    columns = []
    for v in observed:
        members = [i for i in draws if t[i] == v.id]
        columns.append(sum(draws[i] for i in members) % v.size)
    shape = tuple(v.size for v in observed)
    counts = np.bincount(np.ravel_multi_index(columns, shape), minlength=math.prod(shape))
    return Factor(observed, counts.reshape(shape) / samples)


def export_chain_graph(spec: LatentSumSpec, name: str = "chain") -> str:
    """Graphviz text of the chain graph over latent and observed variables.

    Blocks are complete undirected components; each summed variable has an
    arrow into its sum vertex.  Latent vertices are drawn hollow, observed
    ones filled.
    """
    spec.validate()
    t = spec.mapping()
    summed = {i for s in spec.sums for i in s}
    lines = [f"digraph {name} {{"]
    for i, v in sorted(spec.latent_variables.items()):
        style = 'style=solid' if i in summed else 'style=filled, fillcolor=gray'
        lines.append(f'  "x{i}" [label="{v.name}", shape=circle, {style}];')
    n = len(spec.latent_variables)
    for l in range(1, len(spec.sums) + 1):
        lines.append(f'  "x{n + l}" [label="x{n + l}", shape=circle, style=filled, fillcolor=gray];')
    for block in spec.blocks:
        for u, w in itertools.combinations(block.ids, 2):
            lines.append(f'  "x{u}" -> "x{w}" [dir=none];')
    for members in spec.sums:
        for i in members:
            lines.append(f'  "x{i}" -> "x{t[i]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Gaussian models in moment form


@dataclass(frozen=True)
class CovarianceModel:
    mean: np.ndarray | None
    covariance: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        n = cov.shape[0]
        mean = np.zeros(n) if self.mean is None else np.array(self.mean, dtype=float)
        if cov.shape != (n, n) or mean.shape != (n,):
            raise SpecError(f"mean {mean.shape} and covariance {cov.shape} do not match")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
            raise SpecError("covariance must be symmetric")
        cov = (cov + cov.T) / 2
        if np.any(np.diag(cov) < 0):
            raise SpecError("covariance diagonal must be non-negative")
        names = tuple(self.names) or tuple(f"Y{i + 1}" for i in range(n))
        if len(names) != n:
            raise SpecError(f"{len(names)} names for {n} variables")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]


@dataclass(frozen=True)
class GaussianFactor:
    """Gaussian piece on a subset of coordinates (0-based indices)."""

    scope: tuple[int, ...]
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        k = len(self.scope)
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.shape != (k,) or cov.shape != (k, k):
            raise SpecError(f"factor on {self.scope} has mean {mean.shape}, covariance {cov.shape}")
        object.__setattr__(self, "scope", tuple(int(i) for i in self.scope))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.covariance).min()) if self.scope else 0.0


def covariance_graph(model: CovarianceModel, tol: float = 1e-12) -> dict[int, set[int]]:
    """Adjacency sets: ``i`` and ``j`` adjacent iff ``|C_ij| > tol``."""
    c = model.covariance
    return {i: {j for j in range(model.dim) if j != i and abs(c[i, j]) > tol} for i in range(model.dim)}


def graph_separates(adj: dict[int, set[int]], a, b, s=()) -> bool:
    """Undirected separation: no path from ``a`` to ``b`` avoiding ``s``."""
    a, b, s = set(a), set(b), set(s)
    seen, stack = set(a), list(a)
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w in b:
                return False
            if w not in s and w not in seen:
                seen.add(w)
                stack.append(w)
    return True


def maximal_cliques(adj: dict[int, set[int]], cap: int = 24) -> list[frozenset[int]]:
    """All maximal cliques (Bron-Kerbosch with pivoting), sorted."""
    if len(adj) > cap:
        raise ValueError(f"graph has {len(adj)} vertices, clique enumeration cap is {cap}")
    cliques = []

    def expand(r: set, p: set, x: set):
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    expand(set(), set(adj), set())
    return sorted(cliques, key=lambda c: sorted(c))


def gaussian_decompose(model: CovarianceModel, tol: float = 1e-10) -> list[GaussianFactor]:
    """Split the moments across the maximal cliques of the covariance graph.

    Each off-diagonal entry is shared equally among the cliques containing
    both coordinates; each variance and mean component equally among the
    cliques containing that coordinate.  Raises :class:`HeuristicFailure`
    if some clique covariance comes out indefinite.
    """
    cliques = [sorted(c) for c in maximal_cliques(covariance_graph(model))]
    c, mu = model.covariance, model.mean
    n = model.dim
    share = np.zeros((n, n))
    for q in cliques:
        share[np.ix_(q, q)] += 1
    factors = []
    for q in cliques:
        idx = np.ix_(q, q)
        cov = c[idx] / share[idx]
        gf = GaussianFactor(tuple(q), mu[q] / np.diag(share)[q], cov)
        if gf.min_eigenvalue() < -tol:
            raise HeuristicFailure(
                f"clique {q} covariance has eigenvalue {gf.min_eigenvalue():.3g} under the equal split"
            )
        factors.append(gf)
    return factors


def gaussian_compose(factors: Sequence[GaussianFactor], n: int, names: Sequence[str] = ()) -> CovarianceModel:
    """Moments of the coordinatewise sum of independent clique Gaussians."""
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for f in factors:
        q = list(f.scope)
        mean[q] += f.mean
        cov[np.ix_(q, q)] += f.covariance
    return CovarianceModel(mean, cov, tuple(names))


def gaussian_sample_check(
    model: CovarianceModel,
    factors: Sequence[GaussianFactor],
    samples: int = 10**6,
    seed: int | None = None,
) -> float:
    """L-inf gap between ``C`` and the empirical covariance of sampled clique sums."""
    rng = np.random.default_rng(seed)
    y = np.zeros((samples, model.dim))
    for f in factors:
        if not f.scope:
            continue
        w, v = np.linalg.eigh(f.covariance)
        root = v * np.sqrt(np.clip(w, 0.0, None))
        z = rng.standard_normal((samples, len(f.scope))) @ root.T + f.mean
        y[:, list(f.scope)] += z
    emp = np.cov(y, rowvar=False).reshape(model.dim, model.dim)
    return float(np.max(np.abs(emp - model.covariance)))


def covariance_graph_dot(model: CovarianceModel, name: str = "covariance") -> str:
    adj = covariance_graph(model)
    lines = [f"graph {name} {{"]
    for i in range(model.dim):
        lines.append(f'  "{model.names[i]}" [shape=circle];')
    for i in range(model.dim):
        for j in sorted(adj[i]):
            if i < j:
                lines.append(f'  "{model.names[i]}" -- "{model.names[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def gaussian_cfg_dot(model: CovarianceModel, name: str = "gaussian_cfg") -> str:
    """Factor graph with one box per maximal clique."""
    lines = [f"graph {name} {{"]
    for i in range(model.dim):
        lines.append(f'  "{model.names[i]}" [shape=circle];')
    for k, q in enumerate(maximal_cliques(covariance_graph(model)), 1):
        lines.append(f'  "f{k}" [shape=box];')
        for i in sorted(q):
            lines.append(f'  "{model.names[i]}" -- "f{k}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# independent-factor models over Z_N


@dataclass(frozen=True)
class IFSpec:
    """``y = H x + u`` over Z_N with independent sources ``x`` and noise ``u``.

    ``mixing`` is L x m (entries taken mod N), ``sources`` holds m length-N
    distributions and ``noise`` is a joint table of shape ``(N,) * L``.
    """

    mixing: np.ndarray
    sources: tuple[np.ndarray, ...]
    noise: np.ndarray
    n: int
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        h = np.array(self.mixing, dtype=int)
        if h.ndim == 1 and h.size == 0:
            h = h.reshape(0, 0)
        if h.ndim != 2:
            raise SpecError("mixing matrix must be 2-dimensional")
        object.__setattr__(self, "mixing", h)
        object.__setattr__(self, "sources", tuple(np.asarray(p, dtype=float) for p in self.sources))
        object.__setattr__(self, "noise", np.asarray(self.noise, dtype=float))

    @property
    def sensors(self) -> int:
        return self.noise.ndim

    def validate(self) -> None:
        n, L = self.n, self.sensors
        if n < 1:
            raise SpecError("domain size must be >= 1")
        if self.noise.shape != (n,) * L:
            raise SpecError(f"noise table shape {self.noise.shape} is not {(n,) * L}")
        m = len(self.sources)
        if m and self.mixing.shape != (L, m):
            raise SpecError(f"mixing matrix shape {self.mixing.shape} is not {(L, m)}")
        if self.names and len(self.names) != L:
            raise SpecError(f"{len(self.names)} sensor names for {L} sensors")
        for i, p in enumerate(self.sources, 1):
            if p.shape != (n,):
                raise SpecError(f"source {i} has shape {p.shape}, expected ({n},)")
            _check_distribution(p, f"source {i}")
        _check_distribution(self.noise, "noise")


def build_if_model(spec: IFSpec) -> FactorGraph:
    """Convolutional graph of the sensor distribution.

    Source ``i`` becomes a factor over all sensors that puts ``p_i(x)`` at
    ``H[:, i] * x mod N``; the noise table is the last factor.
    """
    spec.validate()
    n, L = spec.n, spec.sensors
    names = spec.names or tuple(f"y{j + 1}" for j in range(L))
    sensors = [Variable(j, names[j], n) for j in range(L)]
    factors = {}
    for i, p in enumerate(spec.sources):
        table = np.zeros((n,) * L)
        column = spec.mixing[:, i] % n
        for x in range(n):
            table[tuple((column * x) % n)] += p[x]
        factors[f"p_z{i + 1}"] = Factor(sensors, table)
    factors["p_u"] = Factor(sensors, spec.noise)
    return FactorGraph(sensors, factors, Semantics.CONVOLUTIONAL)
