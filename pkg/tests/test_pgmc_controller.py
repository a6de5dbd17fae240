import math
from fractions import Fraction

import pytest

from graph_builders import path
from models.cpt_graph import CatalogEntry
from models.errors import CogSynError, TooLargeError
from models.hypergraph import Hypergraph
from models.pattern_matching import HPattern, pattern_key
from models.pgmc_controller import (IMPLICATION_LINK, fitness_distribution, mine_history_patterns,
                                    pgmc_choose, sample_actions, write_implication_links)
from models.stuckness import StucknessResult
from store_builders import GOAL, episode, store_of

LINKED = "0 NODE variable\n1 NODE variable\n2 LINK edge (0,1)\n"


def _trial_store():
    outcomes = [1, 1, 1, 0]
    return store_of(*[
        episode(f"e{i}", [({'P': 0, 'Q': 0}, 0), ({'P': hit, 'Q': hit}, hit)], [(0, 'A')])
        for i, hit in enumerate(outcomes, start=1)
    ], processes=['B'])


def _pattern_node(memory, name):
    return next(node.id for node in memory.nodes() if node.type_name == f"pattern:{name}")


def test_distribution_is_exact_and_floored():
    assert fitness_distribution({'A': Fraction(3, 10), 'B': Fraction(1, 10)}) == {
        'A': Fraction(3, 4), 'B': Fraction(1, 4)}
    assert fitness_distribution({'A': 1, 'B': 0}, epsilon=Fraction(1, 10)) == {
        'A': Fraction(10, 11), 'B': Fraction(1, 11)}
    assert fitness_distribution({'B': None, 'A': None}) == {'A': Fraction(1, 2), 'B': Fraction(1, 2)}
    with pytest.raises(CogSynError):
        fitness_distribution({})


def test_single_action_always_chosen():
    assert sample_actions(fitness_distribution({'only': 0}), seed=3, draws=20) == ['only'] * 20


def test_sampling_frequencies_match_distribution():
    draws = 10_000
    picks = sample_actions({'A': Fraction(3, 4), 'B': Fraction(1, 4)}, seed=11, draws=draws)
    sigma = math.sqrt(draws * 0.75 * 0.25)
    assert abs(picks.count('A') - 0.75 * draws) <= 4 * sigma
    assert picks == sample_actions({'A': Fraction(3, 4), 'B': Fraction(1, 4)}, seed=11, draws=draws)


def test_pgmc_prefers_effective_process():
    choice = pgmc_choose(['B', 'A'], _trial_store(), 'e1', 0, [CatalogEntry('P', None, 'k-p')], [GOAL], seed=5)
    assert choice.fitness == {'A': Fraction(3, 10), 'B': 0}
    assert choice.distribution['A'] > Fraction(999, 1000)
    assert choice.action == 'A'
    assert choice.written_links == []


def test_pgmc_writes_implication_links_once():
    memory = Hypergraph('memory')
    candidates = [CatalogEntry('P', None, 'k-p')]
    choice = pgmc_choose(['A', 'B'], _trial_store(), 'e1', 1, candidates, [GOAL], seed=0, memory=memory)
    assert choice.distribution == {'A': Fraction(1, 2), 'B': Fraction(1, 2)}
    # 当前显示 P 和 Q，两个过程的最优候选都是 P，重复的链接只写一次
    assert len(choice.written_links) == 2
    target = _pattern_node(memory, 'P')
    assert memory.has_link(IMPLICATION_LINK, (_pattern_node(memory, 'Q'), target))
    assert memory.has_link(IMPLICATION_LINK, (target, target))


def test_pgmc_needs_actions():
    with pytest.raises(CogSynError):
        pgmc_choose([], _trial_store(), 'e1', 0, [], [GOAL], seed=0)


def test_implication_weights_are_efficacy_and_confidence():
    memory = Hypergraph('memory')
    result = StucknessResult(Fraction(9, 50), Fraction(41, 50), 'P', 'k',
                             (Fraction(4, 5), Fraction(1, 2), Fraction(3, 4), Fraction(4, 5)))
    written = write_implication_links(memory, ['R'], result)
    assert len(written) == 1
    assert memory.atom(written[0]).weights == (Fraction(3, 4), Fraction(4, 5))
    assert write_implication_links(memory, ['R'], result) == []
    assert write_implication_links(memory, ['R'], StucknessResult(Fraction(0), Fraction(1))) == []


def test_mining_finds_linked_pair():
    history = [path(2), path(3)]
    mined = mine_history_patterns(history, min_support=2, max_atoms=3)
    key = pattern_key(HPattern.from_text(LINKED))
    assert key in mined.keys()
    entry = next(e for e in mined if e.key == key)
    assert entry.support == 2
    assert all(e.name.startswith('mined-') for e in mined)


def test_mining_drops_isolated_variables():
    mined = mine_history_patterns([path(2), path(2)], min_support=2, max_atoms=1)
    assert len(mined) == 1
    (entry,) = list(mined)
    assert entry.name == 'mined-001'
    assert [node.type_name for node in entry.pattern.body.nodes()] == ['v']


def test_mining_support_and_size_limits():
    assert len(mine_history_patterns([path(2)], min_support=2, max_atoms=3)) == 0
    with pytest.raises(TooLargeError):
        mine_history_patterns([path(2)], min_support=1, max_atoms=7)


def test_mining_reads_store_memories():
    store = store_of(episode('x', [({}, 0)]))
    store.episode('x').memories.append(path(2))
    mined = mine_history_patterns(store, min_support=1, max_atoms=3)
    assert pattern_key(HPattern.from_text(LINKED)) in mined.keys()


def test_three_action_frequencies():
    draws = 10_000
    distribution = fitness_distribution({'A': Fraction(1, 2), 'B': Fraction(3, 10), 'C': Fraction(1, 5)})
    picks = sample_actions(distribution, seed=2024, draws=draws)
    for action, probability in distribution.items():
        p = float(probability)
        assert abs(picks.count(action) - p * draws) <= 4 * math.sqrt(draws * p * (1 - p))
