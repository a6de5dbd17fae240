from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_builders import small_graphs, triangle
from models.errors import DanglingTargetError, HypergraphFormatError, InvalidLabelError
from models.hypergraph import (LINK, NODE, Hypergraph, Label, add_atom, format_fraction, make_label,
                               remove_atom, to_fraction)


def test_add_node_to_empty_graph():
    g = Hypergraph()
    node = add_atom(g, NODE, (), make_label('cat'))
    assert len(g) == 1
    assert g.atom(node).type_name == 'cat'


def test_ternary_link_keeps_target_order():
    g = Hypergraph()
    a, b, c = (g.add_node('v') for _ in range(3))
    link = g.add_link('rel', (a, b, c))
    assert g.atom(link).targets == (a, b, c)
    assert g.atom(link).arity == 3
    assert g.incoming(b) == (link,)


def test_link_to_missing_target_is_dangling():
    g = Hypergraph()
    g.add_node('v')
    with pytest.raises(DanglingTargetError) as info:
        g.add_link('edge', (0, 99))
    assert info.value.missing_id == 99
    assert len(g) == 1


def test_links_may_target_links():
    g = Hypergraph()
    a, b = g.add_node('v'), g.add_node('v')
    inner = g.add_link('edge', (a, b))
    outer = g.add_link('about', (inner,))
    assert g.atom(outer).targets == (inner,)
    assert g.check_closure() == []


@pytest.mark.parametrize("type_name", ["", "   ", "two words"])
def test_bad_label_names_rejected(type_name):
    with pytest.raises(InvalidLabelError):
        Label(type_name)


def test_label_weights_become_fractions():
    label = Label('implication', (0.5, '1/3', 2))
    assert label.weights == (Fraction(1, 2), Fraction(1, 3), Fraction(2))


def test_weights_without_type_rejected():
    with pytest.raises(InvalidLabelError):
        make_label(None, [1])


def test_to_fraction_rejects_bool_and_nan():
    with pytest.raises(InvalidLabelError):
        to_fraction(True)
    with pytest.raises(InvalidLabelError):
        to_fraction(float('nan'))


def test_format_fraction():
    assert format_fraction(Fraction(7, 10)) == '7/10'
    assert format_fraction(Fraction(2)) == '2'
    assert format_fraction(None) == '-'
    assert format_fraction(float('inf')) == 'inf'


def test_remove_node_cascades_to_link():
    g = Hypergraph()
    a, b = g.add_node('v'), g.add_node('v')
    g.add_link('edge', (a, b))
    result = remove_atom(g, a)
    assert result.node_ids() == [b]
    assert result.num_links == 0
    # 原图不受影响
    assert len(g) == 3


def test_remove_only_node_gives_empty_graph():
    g = Hypergraph()
    g.add_node('v')
    assert len(remove_atom(g, 0)) == 0


def test_remove_link_leaves_nodes():
    g = triangle()
    result = remove_atom(g, 3)
    assert result.num_nodes == 3
    assert result.num_links == 2


def test_remove_missing_id_is_noop(caplog):
    g = triangle()
    result = remove_atom(g, 42)
    assert result == g
    assert "42" in caplog.text


def test_cascade_through_link_of_link():
    g = Hypergraph()
    a, b = g.add_node('v'), g.add_node('v')
    inner = g.add_link('edge', (a, b))
    g.add_link('about', (inner,))
    assert g.discard(a) == [0, 2, 3]
    assert g.node_ids() == [b]


def test_subgraph_pulls_in_targets():
    g = triangle()
    sub = g.subgraph([3])
    assert sorted(a.id for a in sub) == [0, 1, 3]


def test_induced_subgraph_keeps_internal_links():
    g = triangle()
    sub = g.induced_subgraph([0, 1])
    assert sub.node_ids() == [0, 1]
    assert [l.targets for l in sub.links()] == [(0, 1)]


def test_text_format_allows_forward_references():
    text = "# 注释\n2 LINK edge (0,1) [1/2]\n0 NODE v\n1 NODE -\n"
    g = Hypergraph.from_text(text)
    assert g.atom(2).weights == (Fraction(1, 2),)
    assert g.atom(1).label is None
    assert g.to_text() == "0 NODE v\n1 NODE -\n2 LINK edge (0,1) [1/2]\n"


def test_text_format_errors():
    with pytest.raises(HypergraphFormatError):
        Hypergraph.from_text("0 NOD v\n")
    with pytest.raises(DanglingTargetError):
        Hypergraph.from_text("0 NODE v\n1 LINK edge (0,5)\n")


@given(small_graphs(max_nodes=5, max_links=6, node_types=('a', 'b'), link_types=('x', 'y')))
@settings(max_examples=80, deadline=None)
def test_text_format_reproduces_graph(g):
    assert Hypergraph.from_text(g.to_text()) == g


@given(small_graphs(max_nodes=5, max_links=6), st.data())
@settings(max_examples=80, deadline=None)
def test_removal_keeps_graph_closed(g, data):
    if len(g) == 0:
        return
    victim = data.draw(st.sampled_from([a.id for a in g]))
    result = remove_atom(g, victim)
    assert victim not in result
    assert result.check_closure() == []
    assert all(a.kind in (NODE, LINK) for a in result)
    # 剩下的原子在原图中原样存在
    assert all(g.atom(a.id) == a for a in result)
