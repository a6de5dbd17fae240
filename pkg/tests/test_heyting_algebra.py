from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_builders import (brute_force_homs, cycle, edge, nodes_only, path, self_loop, small_graphs, sym_edge,
                            triangle)
from models.errors import ExponentTooLargeError
from models.homomorphism import count_homomorphisms, is_isomorphic
from models.hypergraph import Hypergraph
from models.heyting_algebra import (bottom, closed_subobjects, cost_leq, double_negation_witness, exponent,
                                    implication, join, join_with_maps, meet, meet_with_pairs,
                                    pseudo_complement, product_type, sub_implies, sub_join, sub_meet,
                                    subobject, top)


def test_join_counts_add():
    g = join(triangle(), edge())
    assert (g.num_nodes, g.num_links) == (5, 4)


def test_join_with_empty_is_unit():
    assert is_isomorphic(join(triangle(), Hypergraph()), triangle())[0]


def test_join_maps_track_origin():
    g, map_a, map_b = join_with_maps(edge(), self_loop())
    assert set(map_a.values()).isdisjoint(map_b.values())
    loop = g.atom(map_b[1])
    assert loop.targets == (map_b[0], map_b[0])


def test_meet_of_directed_edges():
    g = meet(edge(), edge())
    assert (g.num_nodes, g.num_links) == (4, 1)


def test_meet_of_undirected_k2():
    # 对称 K2 是两条反向链接；积有 4 个节点、4 条有向链接，即两条无向边
    g = meet(sym_edge(), sym_edge())
    assert (g.num_nodes, g.num_links) == (4, 4)
    assert is_isomorphic(g, join(sym_edge(), sym_edge()))[0]


def test_meet_with_reflexive_point_is_unit():
    assert is_isomorphic(meet(triangle(), self_loop()), triangle())[0]


def test_meet_pairs_transition_states():
    a = Hypergraph()
    p445, p33 = a.add_node('P445'), a.add_node('P33')
    a.add_link('transition', (p445, p33))
    b = Hypergraph()
    p7555, p1234 = b.add_node('P7555'), b.add_node('P1234')
    b.add_link('transition', (p7555, p1234))

    g, pairs = meet_with_pairs(a, b)
    by_type = {n.type_name: n.id for n in g.nodes()}
    assert g.has_link('transition', (by_type['P445&P7555'], by_type['P1234&P33']))
    (link,) = g.links()
    assert pairs[link.id] == (2, 2)


def test_product_type_collapses_equal_parts():
    assert product_type('v', 'v') == 'v'
    assert product_type('v', None) == 'v'
    assert product_type('b', 'a') == 'a&b'
    assert product_type('a&b', 'b&c') == 'a&b&c'
    assert product_type(None, None) is None


def test_product_link_weights_multiply():
    a_link = Hypergraph.from_text("0 NODE v\n1 NODE v\n2 LINK edge (0,1) [1/2]\n")
    b_link = Hypergraph.from_text("0 NODE v\n1 NODE v\n2 LINK edge (0,1) [2/3]\n")
    (link,) = meet(a_link, b_link).links()
    assert link.weights == (Fraction(1, 3),)
    (bare,) = meet(edge(), edge()).links()
    assert bare.weights == ()


@given(small_graphs(max_nodes=3, max_links=4), small_graphs(max_nodes=3, max_links=4))
@settings(max_examples=40, deadline=None)
def test_join_and_meet_commute(a, b):
    assert is_isomorphic(join(a, b), join(b, a))[0]
    assert is_isomorphic(meet(a, b), meet(b, a))[0]


@given(small_graphs(max_nodes=2, max_links=3), small_graphs(max_nodes=2, max_links=3),
       small_graphs(max_nodes=2, max_links=3))
@settings(max_examples=30, deadline=None)
def test_join_and_meet_associate(a, b, c):
    assert is_isomorphic(join(join(a, b), c), join(a, join(b, c)))[0]
    assert is_isomorphic(meet(meet(a, b), c), meet(a, meet(b, c)))[0]


def test_exponent_of_loop_by_edge():
    ex = exponent(self_loop(), edge())
    assert ex.graph.num_nodes == 1
    (loop,) = ex.graph.links()
    node = ex.graph.node_ids()[0]
    assert loop.targets == (node, node)


def test_exponent_by_terminal_point_is_identity():
    assert is_isomorphic(exponent(triangle(), self_loop()).graph, triangle())[0]


def test_exponent_by_bare_point_is_complete():
    ex = exponent(edge(), nodes_only(1))
    assert ex.graph.num_nodes == 2
    assert ex.graph.num_links == 4


def test_perception_to_action_functions():
    perception = Hypergraph()
    hear, look = perception.add_node('percept'), perception.add_node('percept')
    perception.add_link('adjacent', (hear, look))
    action = Hypergraph()
    cock_ear, startle = action.add_node('act'), action.add_node('act')
    action.add_link('adjacent', (cock_ear, startle))

    ex = implication(perception, action)
    f = ex.node_for({hear: cock_ear, look: startle})
    g = ex.node_for({hear: startle, look: startle})
    assert ex.graph.has_link('adjacent', (f, g))
    # 把“听见”映到“受惊”的函数没有任何邻接的后继
    assert not any(link.targets[0] == g for link in ex.graph.links())
    assert ex.graph.num_nodes == 4


def test_exponent_size_cap():
    with pytest.raises(ExponentTooLargeError):
        exponent(nodes_only(5), nodes_only(3), params={'exponent_max_nodes': 100})


def test_exponent_ignores_hyperlinks(caplog):
    b = nodes_only(3)
    b.add_link('rel', (0, 1, 2))
    ex = exponent(self_loop(), b)
    assert ex.graph.num_nodes == 1
    assert "非二元" in caplog.text


@given(small_graphs(max_nodes=3, max_links=3), small_graphs(max_nodes=2, max_links=3),
       st.integers(1, 2).flatmap(lambda n: small_graphs(max_nodes=n, max_links=3)))
@settings(max_examples=40, deadline=None)
def test_currying_counts_agree(c, b, a):
    if a.num_nodes == 0:
        a = nodes_only(1)
    ex = exponent(a, b, link_types={'edge'}).graph
    left = len(brute_force_homs(meet(c, b), a))
    right, exhaustive = count_homomorphisms(c, ex)
    assert exhaustive
    assert left == right


def test_cost_order_reflexive():
    assert cost_leq(triangle(), triangle())


def test_cost_order_needs_homomorphism():
    assert not cost_leq(triangle(), edge())


def test_facial_expressions_below_physical_actions():
    facial = cycle(3, node_type='act')
    physical = cycle(3, node_type='act')
    x, y = physical.add_node('act'), physical.add_node('act')
    physical.add_link('edge', (x, 0))
    physical.add_link('edge', (y, x))
    assert cost_leq(facial, physical)
    assert not cost_leq(physical, facial)


def test_cost_order_path_collapse():
    # path-3 可以合并成一条自环，自环由 path-3 同态得到
    assert cost_leq(self_loop(), path(3))


def test_subobject_lattice_operations():
    g = path(3)
    x = subobject(g, [3])
    y = subobject(g, [4])
    assert x.atom_ids == {0, 1, 3}
    assert sub_meet(x, y).atom_ids == {1}
    assert sub_join(x, y).atom_ids == {0, 1, 2, 3, 4}
    assert pseudo_complement(x).atom_ids == {2}
    assert top(g).atom_ids == {0, 1, 2, 3, 4}
    assert bottom(g).atom_ids == frozenset()


def test_relative_pseudo_complement_is_largest():
    g = path(3)
    elements = list(closed_subobjects(g))
    for x in elements:
        for y in elements:
            z = sub_implies(x, y)
            assert sub_meet(z, x) <= y
            for w in elements:
                if sub_meet(w, x) <= y:
                    assert w <= z


def test_double_negation_fails_with_links():
    witness = double_negation_witness(edge())
    assert witness is not None
    assert pseudo_complement(pseudo_complement(witness)).atom_ids != witness.atom_ids
    assert double_negation_witness(nodes_only(2)) is None
