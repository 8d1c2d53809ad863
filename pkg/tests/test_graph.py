import numpy as np
import pytest

from convfactor import (
    Factor,
    FactorGraph,
    Semantics,
    Variable,
    check_marginal_independence,
    dft,
    dualize,
    joint,
    random_factor_graph,
    rel_linf,
    separates,
    to_dot,
    validate,
)
from convfactor.errors import CapExceeded, GraphError
from convfactor.graph import check

from conftest import brute_joint


def path_exists(g, a, b, s):
    """Independent separation oracle: enumerate simple paths in the bipartite graph."""
    adj = {("v", v.id): set() for v in g.variables}
    for name, f in g.factors.items():
        adj[("f", name)] = {("v", i) for i in f.ids}
        for i in f.ids:
            adj[("v", i)].add(("f", name))

    def walk(node, seen):
        if node[0] == "v" and node[1] in b:
            return True
        for nxt in adj[node]:
            if nxt in seen or (nxt[0] == "v" and nxt[1] in s):
                continue
            if walk(nxt, seen | {nxt}):
                return True
        return False

    return any(walk(("v", i), {("v", i)}) for i in a)


def test_validate_five_var(five_var):
    assert validate(five_var) == []


def test_validate_reports_every_violation():
    x, y, z = (Variable(i, f"x{i}", 2) for i in range(3))
    g = FactorGraph([x, y], {"f": Factor.ones([x, z])})
    problems = validate(g)
    assert any("undeclared" in p for p in problems)
    assert any("no factor" in p for p in problems)
    with pytest.raises(GraphError) as err:
        check(g)
    assert len(err.value.violations) == 2


def test_validate_size_mismatch_and_duplicates():
    x = Variable(0, "x", 2)
    g = FactorGraph([x, Variable(0, "x", 2)], {"f": Factor.ones([Variable(0, "x", 3)])})
    problems = validate(g)
    assert any("duplicate variable id" in p for p in problems)
    assert any("size 3" in p for p in problems)


def test_dualize_five_var(five_var):
    dual = dualize(five_var)
    assert dual.semantics is Semantics.MULTIPLICATIVE
    assert dual.edges() == five_var.edges()
    assert [v.id for v in dual.variables] == [v.id for v in five_var.variables]
    for name, f in five_var.factors.items():
        assert np.allclose(dual.factors[name].values, dft(f).values)


def test_dualize_delta_gives_ones():
    v = Variable(0, "x", 5)
    g = FactorGraph([v], {"f": Factor.delta([v])})
    assert np.allclose(dualize(g).factors["f"].values, np.ones(5))


def test_double_dualization_round_trip(rng):
    for _ in range(10):
        g = random_factor_graph(rng, 4, 3)
        back = dualize(dualize(g))
        assert back.semantics is g.semantics
        for name, f in g.factors.items():
            assert np.max(np.abs(back.factors[name].values - f.values)) <= 1e-10


def test_graph_level_convolution_theorem(rng):
    for _ in range(20):
        g = random_factor_graph(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        assert rel_linf(joint(dualize(g)), dft(joint(g))) <= 1e-9


def test_separates_five_var(five_var):
    assert separates(five_var, {1}, {3}, {2})
    assert not separates(five_var, {1}, {3}, set())
    assert separates(five_var, ["x1"], ["x4", "x5"], ["x2"])


def test_separates_components_and_errors():
    x, y = Variable(0, "x", 2), Variable(1, "y", 2)
    g = FactorGraph([x, y], {"f": Factor.ones([x]), "g": Factor.ones([y])})
    assert separates(g, {0}, {1})
    assert separates(g, set(), {1})
    with pytest.raises(ValueError):
        separates(g, {0}, {0})


def test_separates_matches_path_enumeration(rng):
    for _ in range(150):
        g = random_factor_graph(rng, 6, int(rng.integers(1, 6)), max_size=2)
        ids = list(g.ids)
        labels = rng.integers(0, 4, size=len(ids))  # 0 -> A, 1 -> B, 2 -> S, 3 -> rest
        a = {i for i, l in zip(ids, labels) if l == 0}
        b = {i for i, l in zip(ids, labels) if l == 1}
        s = {i for i, l in zip(ids, labels) if l == 2}
        got = separates(g, a, b, s)
        assert got == (not path_exists(g, a, b, s))
        assert got == separates(g, b, a, s)
        if got:
            for extra in set(ids) - a - b - s:
                assert separates(g, a, b, s | {extra})


def test_joint_examples():
    x = Variable(0, "x", 2)
    factors = {"f": Factor([x], [1, 2]), "g": Factor([x], [3, 4])}
    assert np.allclose(joint(FactorGraph([x], factors, Semantics.CONVOLUTIONAL)).values, [11, 10])
    assert np.allclose(joint(FactorGraph([x], factors, Semantics.MULTIPLICATIVE)).values, [3, 8])
    single = FactorGraph([x], {"f": factors["f"]})
    assert np.array_equal(joint(single).values, factors["f"].values)


def test_joint_matches_brute_force(rng):
    for semantics in Semantics:
        for _ in range(10):
            g = random_factor_graph(rng, 4, 3, max_size=3, semantics=semantics)
            assert rel_linf(joint(g), brute_joint(g)) <= 1e-12


def test_joint_declaration_order(five_var):
    assert joint(five_var).ids == (1, 2, 3, 4, 5)


def test_joint_cap(five_var):
    with pytest.raises(CapExceeded):
        joint(five_var, cap=10)


def test_marginal_independence_chain(chain3):
    verdict = check_marginal_independence(chain3, {1}, {3})
    assert verdict.independent and verdict.max_deviation <= 1e-9


def test_multiplicative_chain_is_not_marginally_independent():
    x1, x2, x3 = (Variable(i, f"x{i}", 2) for i in (1, 2, 3))
    # x1 and x3 each copy x2, so they are equal: dependent, yet independent given x2.
    copy = np.array([[1.0, 0.0], [0.0, 1.0]])
    g = FactorGraph([x1, x2, x3], {"f": Factor([x1, x2], copy), "g": Factor([x2, x3], copy)}, Semantics.MULTIPLICATIVE)
    verdict = check_marginal_independence(g, {1}, {3})
    assert not verdict.independent
    assert verdict.max_deviation == pytest.approx(0.25)


def test_marginal_independence_empty_sets(chain3):
    assert check_marginal_independence(chain3, set(), {3}) == (True, 0.0)


def test_separation_implies_independence_on_cfgs(rng):
    hits = 0
    while hits < 40:
        g = random_factor_graph(rng, 5, int(rng.integers(2, 5)), max_size=3)
        ids = list(g.ids)
        rng.shuffle(ids)
        a, b, s = {ids[0]}, {ids[1]}, set(ids[2:2 + int(rng.integers(0, 3))])
        if separates(g, a, b, s):
            hits += 1
            assert check_marginal_independence(g, a, b).independent


def test_to_dot(five_var):
    text = to_dot(five_var)
    assert text.startswith("graph G {")
    assert text.count("shape=circle") == 5 and text.count("shape=box") == 3
    assert text.count(" -- ") == 7


def test_random_factor_graph_is_valid(rng):
    for _ in range(50):
        g = random_factor_graph(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)))
        assert validate(g) == []
        assert all(2 <= v.size <= 5 for v in g.variables)
        assert all(np.all(f.values.real > 0) for f in g.factors.values())
