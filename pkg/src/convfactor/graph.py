"""Bipartite factor graphs under convolutional or multiplicative semantics."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .algebra import Factor, Semantics, Variable, dft, marginalize, multiply, normalize, product_all
from .errors import CapExceeded, GraphError

__all__ = [
    "Semantics",
    "FactorGraph",
    "validate",
    "check",
    "dualize",
    "separates",
    "joint",
    "IndependenceResult",
    "check_marginal_independence",
    "to_dot",
    "random_factor_graph",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class FactorGraph:
    """Variables, named factors and the product operation joining them.

    Construction does not validate; call :func:`validate` for a violation
    list or :func:`check` to raise.
    """

    variables: tuple[Variable, ...]
    factors: Mapping[str, Factor]
    semantics: Semantics = Semantics.CONVOLUTIONAL
    _by_id: Mapping[int, Variable] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "factors", MappingProxyType(dict(self.factors)))
        object.__setattr__(self, "_by_id", MappingProxyType({v.id: v for v in self.variables}))

    def var(self, key: int | str) -> Variable:
        """Look up a variable by id or by name."""
        if isinstance(key, str):
            for v in self.variables:
                if v.name == key:
                    return v
            raise KeyError(f"no variable named {key!r}")
        return self._by_id[key]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.variables)

    def neighbors(self, var_id: int) -> list[str]:
        """Names of the factors adjacent to a variable vertex."""
        return [name for name, f in self.factors.items() if var_id in f.ids]

    def edges(self) -> list[tuple[int, str]]:
        return [(i, name) for name, f in self.factors.items() for i in f.ids]

    def table_size(self) -> int:
        return math.prod(v.size for v in self.variables)

    def replace(self, variables=None, factors=None, semantics=None) -> "FactorGraph":
        return FactorGraph(
            self.variables if variables is None else variables,
            self.factors if factors is None else factors,
            self.semantics if semantics is None else semantics,
        )


def validate(g: FactorGraph) -> list[str]:
    """Return every structural violation of ``g`` (empty when valid)."""
    problems = []
    seen_ids, seen_names = set(), set()
    for v in g.variables:
        if v.id in seen_ids:
            problems.append(f"duplicate variable id {v.id}")
        if v.name in seen_names:
            problems.append(f"duplicate variable name {v.name!r}")
        seen_ids.add(v.id)
        seen_names.add(v.name)
    declared = {v.id: v for v in g.variables}
    covered = set()
    for name, f in g.factors.items():
        for v in f.scope:
            covered.add(v.id)
            d = declared.get(v.id)
            if d is None:
                problems.append(f"factor {name!r} references undeclared variable {v.name!r} (id {v.id})")
            elif d.size != v.size:
                problems.append(f"factor {name!r} uses {v.name!r} with size {v.size}, declared {d.size}")
    for v in g.variables:
        if v.id not in covered:
            problems.append(f"variable {v.name!r} appears in no factor scope")
    return problems


def check(g: FactorGraph) -> FactorGraph:
    problems = validate(g)
    if problems:
        raise GraphError(problems)
    return g


def dualize(g: FactorGraph) -> FactorGraph:
    """The structurally identical graph of opposite semantics.

    Convolutional factors get the forward transform and multiplicative ones
    the inverse, so dualizing twice returns the original factors.
    """
    check(g)
    direction = "forward" if g.semantics is Semantics.CONVOLUTIONAL else "inverse"
    factors = {name: dft(f, direction) for name, f in g.factors.items()}
    return g.replace(factors=factors, semantics=g.semantics.dual())


def _as_ids(g: FactorGraph, items: Iterable) -> set[int]:
    return {g.var(x).id if isinstance(x, str) else int(x) for x in items}


def separates(g: FactorGraph, a: Iterable, b: Iterable, s: Iterable = ()) -> bool:
    """True iff every path from ``a`` to ``b`` passes through a variable in ``s``.

    Paths alternate variable and factor vertices; factor vertices are never
    part of the cut.  Sets may hold variable ids or names.
    """
    a, b, s = _as_ids(g, a), _as_ids(g, b), _as_ids(g, s)
    if a & b or a & s or b & s:
        raise ValueError("A, B and S must be pairwise disjoint")
    if not a or not b:
        return True
    seen_vars = set(a)
    seen_factors = set()
    queue = deque(a)
    while queue:
        u = queue.popleft()
        for name in g.neighbors(u):
            if name in seen_factors:
                continue
            seen_factors.add(name)
            for w in g.factors[name].ids:
                if w in b:
                    return False
                if w in s or w in seen_vars:
                    continue
                seen_vars.add(w)
                queue.append(w)
    return True


def joint(g: FactorGraph, cap: int = DEFAULT_CAP) -> Factor:
    """Brute-force product of all factors, scoped in declaration order."""
    check(g)
    if g.table_size() > cap:
        raise CapExceeded(f"joint table has {g.table_size()} entries, cap is {cap}")
    return product_all(g.factors.values(), g.semantics).reorder(g.ids)


class IndependenceResult(NamedTuple):
    independent: bool
    max_deviation: float


def check_marginal_independence(
    g: FactorGraph, a: Iterable, b: Iterable, tol: float = 1e-9, cap: int = DEFAULT_CAP
) -> IndependenceResult:
    """Compare p(A, B) with p(A) p(B) from the normalized joint."""
    a, b = _as_ids(g, a), _as_ids(g, b)
    if a & b:
        raise ValueError("A and B must be disjoint")
    if not a or not b:
        return IndependenceResult(True, 0.0)
    p = normalize(joint(g, cap))
    p_ab = marginalize(p, set(g.ids) - a - b)
    p_a = marginalize(p_ab, b)
    p_b = marginalize(p_ab, a)
    dev = float(np.max(np.abs(multiply(p_a, p_b).reorder(p_ab.ids).values - p_ab.values)))
    return IndependenceResult(dev <= tol, dev)


def to_dot(g: FactorGraph, name: str = "G") -> str:
    """Graphviz text: variables as circles, factors as boxes."""
    lines = [f"graph {name} {{"]
    for v in g.variables:
        lines.append(f'  "v{v.id}" [label="{v.name}", shape=circle];')
    for fname in g.factors:
        lines.append(f'  "f:{fname}" [label="{fname}", shape=box];')
    for i, fname in g.edges():
        lines.append(f'  "v{i}" -- "f:{fname}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def random_factor_graph(
    rng: np.random.Generator,
    n_vars: int,
    n_factors: int,
    max_size: int = 5,
    max_scope: int = 3,
    semantics: Semantics = Semantics.CONVOLUTIONAL,
    low: float = 0.1,
    high: float = 1.0,
) -> FactorGraph:
    """A random valid graph with positive uniform factor entries.

    Domain sizes are drawn from ``2..max_size``.  Every variable is placed in
    at least one factor scope.
    """
    variables = [Variable(i, f"x{i + 1}", int(rng.integers(2, max_size + 1))) for i in range(n_vars)]
    scopes = []
    for _ in range(n_factors):
        k = int(rng.integers(1, min(max_scope, n_vars) + 1))
        scopes.append(set(rng.choice(n_vars, size=k, replace=False).tolist()))
    for i in range(n_vars):
        if not any(i in s for s in scopes):
            scopes[int(rng.integers(n_factors))].add(i)
    factors = {}
    for j, s in enumerate(scopes, 1):
        scope = [variables[i] for i in sorted(s)]
        shape = tuple(v.size for v in scope)
        factors[f"f{j}"] = Factor(scope, rng.uniform(low, high, size=shape))
    return FactorGraph(variables, factors, semantics)
