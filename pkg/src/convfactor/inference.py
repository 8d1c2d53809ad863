"""Exact inference: marginalize over M and evaluate at evidence on E.

Multiplicative graphs absorb evidence by slicing factors and then eliminate
M by sum-product (:func:`mfg_eliminate`).  Convolutional graphs are dual:
marginalization pushes straight into the factors and evidence is eliminated
by convolve-then-slice (:func:`cfg_eliminate`), or via the Fourier dual
multiplicative graph (:func:`fft_query`).
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .algebra import (
    Factor,
    Semantics,
    character,
    dft,
    evaluate,
    marginalize,
    multiply,
    product_all,
    sum_product,
)
from .errors import MethodError, QueryError
from .graph import DEFAULT_CAP, FactorGraph, check, joint

__all__ = [
    "Query",
    "Method",
    "default_order",
    "mfg_eliminate",
    "mfg_push_evidence",
    "cfg_push_marginalization",
    "cfg_eliminate",
    "fft_query",
    "oracle",
    "answer",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Query:
    """Sum over ``marginalize`` and fix ``evidence``; the rest is retained."""

    marginalize: frozenset[int] = frozenset()
    evidence: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "marginalize", frozenset(self.marginalize))
        object.__setattr__(self, "evidence", {int(k): int(v) for k, v in dict(self.evidence).items()})
        if self.marginalize & set(self.evidence):
            raise QueryError("marginalize and evidence sets overlap")

    def retained(self, g: FactorGraph) -> list[int]:
        return [i for i in g.ids if i not in self.marginalize and i not in self.evidence]

    def validate(self, g: FactorGraph) -> None:
        ids = set(g.ids)
        unknown = (self.marginalize | set(self.evidence)) - ids
        if unknown:
            raise QueryError(f"query references unknown variable ids {sorted(unknown)}")
        for i, value in self.evidence.items():
            size = g.var(i).size
            if not 0 <= value < size:
                raise QueryError(f"evidence {g.var(i).name}={value} outside Z_{size}")


class Method(enum.Enum):
    AUTO = "auto"
    ELIMINATION = "elimination"
    FFT = "fft"
    ORACLE = "oracle"


def _simulate(scopes: list[set[int]], target: int) -> list[set[int]]:
    """Scopes after merging every scope that contains ``target`` and dropping it."""
    hit = [s for s in scopes if target in s]
    rest = [s for s in scopes if target not in s]
    merged = set().union(*hit) - {target} if hit else set()
    return rest + [merged]


def default_order(g: FactorGraph, targets: Iterable[int]) -> list[int]:
    """Leaf-first greedy order: fewest adjacent factors, ties by id.

    Degrees are recomputed after each simulated elimination step.
    """
    remaining = set(targets)
    unknown = remaining - set(g.ids)
    if unknown:
        raise QueryError(f"unknown target ids {sorted(unknown)}")
    scopes = [set(f.ids) for f in g.factors.values()]
    order = []
    while remaining:
        pick = min(remaining, key=lambda i: (sum(i in s for s in scopes), i))
        order.append(pick)
        remaining.discard(pick)
        scopes = _simulate(scopes, pick)
    return order


def _check_order(order: Sequence[int], targets: set[int]) -> list[int]:
    order = [int(i) for i in order]
    if len(set(order)) != len(order):
        raise QueryError(f"elimination order has duplicates: {order}")
    if set(order) != targets:
        raise QueryError(f"elimination order {order} does not cover exactly {sorted(targets)}")
    return order


def _require(g: FactorGraph, semantics: Semantics, what: str) -> None:
    if g.semantics is not semantics:
        raise MethodError(f"{what} needs a {semantics.value} graph, got {g.semantics.value}")


def _eliminate(
    g: FactorGraph,
    order: list[int],
    reduce,
    trace: list | None,
) -> Factor:
    factors = dict(g.factors)
    m = len(factors)
    for step, x in enumerate(order, 1):
        absorbed = [name for name, f in factors.items() if x in f.ids]
        if not absorbed:
            raise QueryError(f"variable {g.var(x).name} has no adjacent factor")
        new = reduce([factors.pop(name) for name in absorbed], x)
        name = f"f{m + step}"
        factors[name] = new
        record = {
            "step": step,
            "variable": g.var(x).name,
            "absorbed": absorbed,
            "new_factor": name,
            "scope": new.names,
        }
        log.debug("eliminate %s", record)
        if trace is not None:
            trace.append(record)
    result = product_all(factors.values(), g.semantics)
    eliminated = set(order)
    return result.reorder([i for i in g.ids if i not in eliminated])


def mfg_eliminate(
    g: FactorGraph,
    targets: Iterable[int],
    order: Sequence[int] | None = None,
    trace: list | None = None,
) -> Factor:
    """Sum a multiplicative graph over ``targets`` by variable elimination.

    Each step multiplies the factors adjacent to the next variable, sums that
    variable out and installs the result as ``f{m+i}``.
    """
    _require(g, Semantics.MULTIPLICATIVE, "MFG elimination")
    check(g)
    targets = set(targets)
    order = _check_order(default_order(g, targets) if order is None else order, targets)
    return _eliminate(g, order, lambda fs, x: sum_product(fs, {x}), trace)


def mfg_push_evidence(g: FactorGraph, evidence: Mapping[int, int]) -> FactorGraph:
    """Slice every factor at the evidence and drop the evidenced variables."""
    _require(g, Semantics.MULTIPLICATIVE, "evidence push-down")
    check(g)
    Query(evidence=evidence).validate(g)
    factors = {
        name: evaluate(f, {i: v for i, v in evidence.items() if i in f.ids})
        for name, f in g.factors.items()
    }
    return g.replace(variables=[v for v in g.variables if v.id not in evidence], factors=factors)


def cfg_push_marginalization(g: FactorGraph, targets: Iterable[int]) -> FactorGraph:
    """Sum every factor over its share of ``targets`` and drop those variables."""
    _require(g, Semantics.CONVOLUTIONAL, "marginalization push-down")
    check(g)
    targets = set(targets)
    Query(marginalize=targets).validate(g)
    factors = {name: marginalize(f, targets & set(f.ids)) for name, f in g.factors.items()}
    return g.replace(variables=[v for v in g.variables if v.id not in targets], factors=factors)


def cfg_eliminate(
    g: FactorGraph,
    evidence: Mapping[int, int],
    order: Sequence[int] | None = None,
    trace: list | None = None,
) -> Factor:
    """Evaluate a convolutional graph at ``evidence`` by elimination.

    Each step convolves the factors adjacent to the next evidenced variable
    and slices the result at its observed value.
    """
    _require(g, Semantics.CONVOLUTIONAL, "CFG elimination")
    check(g)
    evidence = dict(evidence)
    Query(evidence=evidence).validate(g)
    targets = set(evidence)
    order = _check_order(default_order(g, targets) if order is None else order, targets)

    def reduce(cluster, x):
        return evaluate(product_all(cluster, Semantics.CONVOLUTIONAL), {x: evidence[x]})

    return _eliminate(g, order, reduce, trace)


def fft_query(
    g: FactorGraph,
    query: Query,
    order: Sequence[int] | None = None,
    trace: list | None = None,
) -> Factor:
    """Answer a query on a convolutional graph through its Fourier dual.

    Marginalization is pushed into the factors, every factor is transformed,
    each evidenced dual variable picks up the slice kernel once, the dual
    multiplicative graph is summed over the evidenced variables and the
    result is inverse-transformed over the retained ones.
    """
    _require(g, Semantics.CONVOLUTIONAL, "FFT query")
    query.validate(g)
    reduced = cfg_push_marginalization(g, query.marginalize)
    dual = {name: dft(f, "forward") for name, f in reduced.factors.items()}
    # The kernel must enter the product once per variable, not once per
    # adjacent factor, so it rides on the smallest factor holding it.
    for i, value in query.evidence.items():
        name = min(reduced.neighbors(i), key=lambda n: dual[n].values.size)
        dual[name] = multiply(dual[name], character(reduced.var(i), value))
    dual_graph = reduced.replace(factors=dual, semantics=Semantics.MULTIPLICATIVE)
    summed = mfg_eliminate(dual_graph, query.evidence.keys(), order, trace)
    return dft(summed, "inverse")


def oracle(g: FactorGraph, query: Query, cap: int = DEFAULT_CAP) -> Factor:
    """Brute force: evaluate the full joint at the evidence, then marginalize."""
    query.validate(g)
    return marginalize(evaluate(joint(g, cap), query.evidence), query.marginalize)


def answer(
    g: FactorGraph,
    query: Query,
    method: Method | str = Method.AUTO,
    cap: int = DEFAULT_CAP,
    trace: list | None = None,
) -> Factor:
    """Sum over M of the joint evaluated at the evidence, scoped in declaration order.

    ``auto`` picks the FFT route for convolutional graphs with evidence and
    elimination otherwise.
    """
    method = Method(method)
    check(g)
    query.validate(g)
    convolutional = g.semantics is Semantics.CONVOLUTIONAL
    if method is Method.AUTO:
        method = Method.FFT if convolutional and query.evidence else Method.ELIMINATION
    if method is Method.ORACLE:
        result = oracle(g, query, cap)
    elif method is Method.FFT:
        if not convolutional:
            raise MethodError("the FFT method applies only to convolutional graphs")
        result = fft_query(g, query, trace=trace)
    elif convolutional:
        reduced = cfg_push_marginalization(g, query.marginalize)
        result = cfg_eliminate(reduced, query.evidence, trace=trace)
    else:
        reduced = mfg_push_evidence(g, query.evidence)
        result = mfg_eliminate(reduced, query.marginalize, trace=trace)
    return result.reorder(query.retained(g))
