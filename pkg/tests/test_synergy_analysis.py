from fractions import Fraction

import pytest

from graph_builders import path
from models.cpt_graph import CatalogEntry, extract_cpt
from models.errors import InvalidPartitionError, ZeroWeightsError
from models.synergy_analysis import (Cell, StuckRecord, cell_weights, cog_syn, cog_syn_triple,
                                     compute_stuck_records, connected_subgraphs, hom_iso_census,
                                     make_partition, stuck_set, stuck_set_triple, validate_partition)
from store_builders import GOAL, episode, store_of

F = Fraction


def _line_store():
    """单段经历，每个时刻 0..3 各一条转移"""
    return store_of(episode('s', [({}, 0)] * 5, [(t, 'A') for t in range(4)]))


def _records():
    rows = [
        {'A': F(1), 'B': F(0), 'C': F(0)},
        {'A': F(1), 'B': F(1, 2), 'C': F(1)},
        {'A': F(0), 'B': F(0), 'C': F(0)},
        {'A': F(1, 2), 'B': F(3, 4), 'C': F(1, 2)},
    ]
    return [StuckRecord('s', tick, degrees) for tick, degrees in enumerate(rows)]


def test_partition_cells_are_half_open():
    cells = make_partition(4)
    assert str(cells[0]) == '[0,1/4]'
    assert str(cells[1]) == '(1/4,1/2]'
    assert 0 in cells[0]
    assert F(1, 2) in cells[1]
    assert F(1, 2) not in cells[2]
    assert sum(sum(1 for c in cells if x in c) for x in [F(0), F(1, 4), F(3, 5), F(1)]) == 4


def test_partition_validation():
    with pytest.raises(InvalidPartitionError):
        make_partition(0)
    with pytest.raises(InvalidPartitionError):
        validate_partition([])
    with pytest.raises(InvalidPartitionError):
        validate_partition([Cell(F(0), F(1, 2), True), Cell(F(3, 5), F(1))])
    with pytest.raises(InvalidPartitionError):
        validate_partition([Cell(F(0), F(1))])
    assert validate_partition(make_partition(3)) == make_partition(3)


def test_cell_weights():
    cells = make_partition(2)
    assert cell_weights(cells) == [F(1, 4), F(3, 4)]
    assert cell_weights(cells, 'uniform') == [1, 1]
    assert cell_weights(cells, [2, 1]) == [2, 1]
    with pytest.raises(InvalidPartitionError):
        cell_weights(cells, [1])
    with pytest.raises(ZeroWeightsError):
        cell_weights(cells, [1, -1])


def test_stuck_sets_exclusive_or():
    cells = make_partition(4)
    records = _records()
    assert stuck_set(records, 'A', 'B', cells[0]) == [('s', 0)]
    assert stuck_set(records, 'A', 'B', cells[1]) == [('s', 1), ('s', 3)]
    # 恰好落在下端点 1/2 的 A 不属于 (1/2,3/4]
    assert stuck_set(records, 'A', 'B', cells[2]) == [('s', 3)]
    assert stuck_set(records, 'A', 'B', cells[3]) == [('s', 0), ('s', 1)]
    assert stuck_set(records, 'A', 'A', cells[3]) == []


def test_stuck_set_triple_needs_exactly_two():
    cells = make_partition(4)
    records = _records()
    assert stuck_set_triple(records, 'A', 'B', 'C', cells[0]) == [('s', 0)]
    assert stuck_set_triple(records, 'A', 'B', 'C', cells[2]) == []
    assert stuck_set_triple(records, 'A', 'B', 'C', cells[3]) == [('s', 1)]
    assert stuck_set_triple(records, 'A', 'B', 'C', cells[1]) == [('s', 3)]


def test_cog_syn_weighted_by_transition_mass():
    store, records = _line_store(), _records()
    report = cog_syn(store, records, 'A', 'B', make_partition(4))
    assert report.probabilities == [F(1, 4), F(1, 2), F(1, 4), F(1, 2)]
    assert report.value == F(13, 32)
    assert cog_syn(store, records, 'A', 'B', make_partition(4), 'uniform').value == F(3, 8)
    assert cog_syn(store, records, 'A', 'B', make_partition(4), [1, 0, 0, 0]).value == F(1, 4)
    assert report.functional == 'transition-mass'
    assert [row['stuck_pairs'] for row in report.rows()] == [1, 2, 1, 2]


def test_cog_syn_of_process_with_itself_is_zero():
    report = cog_syn(_line_store(), _records(), 'B', 'B')
    assert report.value == 0
    assert all(p == 0 for p in report.probabilities)


def test_cog_syn_rejects_zero_weights():
    with pytest.raises(ZeroWeightsError):
        cog_syn(_line_store(), _records(), 'A', 'B', make_partition(2), [0, 0])


def test_single_cell_partition_never_separates():
    whole = [Cell(F(0), F(1), True)]
    assert cog_syn(_line_store(), _records(), 'A', 'B', whole).value == 0
    assert cog_syn_triple(_line_store(), _records(), 'A', 'B', 'C', whole).value == 0


def test_triple_synergy_uses_two_of_three():
    report = cog_syn_triple(_line_store(), _records(), 'A', 'B', 'C', make_partition(4), 'uniform')
    assert report.processes == ('A', 'B', 'C')
    assert report.probabilities[3] == F(1, 4)


def _trial_store():
    outcomes = [1, 1, 1, 0]
    return store_of(*[
        episode(f"e{i}", [({'P': 0}, 0), ({'P': hit}, hit)], [(0, 'A')])
        for i, hit in enumerate(outcomes, start=1)
    ], processes=['B'])


def test_stuck_records_from_store():
    store = _trial_store()
    records, details = compute_stuck_records(store, ['A', 'B'], [CatalogEntry('P', None, 'k')], [GOAL])
    assert [r.key for r in records] == [('e1', 0), ('e2', 0), ('e3', 0), ('e4', 0)]
    assert [r.degrees['A'] for r in records] == [F(7, 10)] * 3 + [F(1)]
    assert all(r.degrees['B'] == 1 for r in records)
    assert details[('e1', 0, 'A')].argmax_pattern == 'P'

    report = cog_syn(store, records, 'A', 'B')
    assert report.probabilities[6] == F(3, 4)
    assert report.probabilities[9] == F(3, 4)
    assert report.value == F(6, 25)


def test_connected_subgraphs():
    subs = connected_subgraphs(path(3), 2)
    assert [sub.num_nodes for sub in subs] == [1, 1, 1, 2, 2]
    assert all(sub.num_links == 1 for sub in subs[3:])


def test_census_counts():
    record = hom_iso_census(path(2), path(2), cost_ceiling=2, size_bound=2)
    # 单点→单点 4 个（均同构），单点→边 4 个，边→边 1 个（同构）
    assert (record.n_hom, record.n_iso) == (9, 5)
    assert record.pairs == 9
    assert not record.truncated


def test_census_disjoint_alphabets():
    record = hom_iso_census(path(2, 'v'), path(2, 'w'), cost_ceiling=2, size_bound=2)
    assert (record.n_hom, record.n_iso) == (0, 0)
    assert record.ratio is None


def test_census_truncation():
    record = hom_iso_census(path(2), path(2), 2, 2, params={'census_max_pairs': 1})
    assert record.truncated
    assert record.pairs == 1


def test_cog_syn_is_symmetric():
    store, records = _line_store(), _records()
    for weights in ('midpoint', 'uniform'):
        forward = cog_syn(store, records, 'A', 'B', make_partition(4), weights)
        backward = cog_syn(store, records, 'B', 'A', make_partition(4), weights)
        assert forward.value == backward.value
        assert forward.stuck_sets == backward.stuck_sets


def test_census_counts_repeated_transitions_once():
    # 同一对状态之间 A 的两次转移
    store = store_of(episode('s', [({'P': 0}, 0), ({'P': 1}, 0), ({'P': 0}, 0), ({'P': 1}, 0)],
                             [(0, 'A'), (2, 'A')]))
    graph = extract_cpt(store, 'A').graph
    assert graph.num_links == 1
    record = hom_iso_census(graph, graph, cost_ceiling=2, size_bound=2)
    assert (record.n_hom, record.n_iso) == (9, 5)
