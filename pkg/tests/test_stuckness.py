from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.cpt_graph import CatalogEntry, Episode, GoalSpec, ResourceBudget, SystemState
from models.errors import CogSynError, NoGoalsError, ZeroWeightsError
from models.stuckness import (Estimate, action_efficacy, action_efficacy_over, confidence_function,
                              confidence_of_g, conf_and_stuckness, four_factor_conf, g_conditional,
                              g_global, goal_achievement, unit_intervals_after)
from store_builders import GOAL, episode, store_of


def _trial_store():
    """四段经历：A 从空轮廓出发，其中三次之后 P 和 Q 出现，目标随之达成"""
    outcomes = [1, 1, 1, 0]
    return store_of(*[
        episode(f"e{i}", [({'P': 0, 'Q': 0}, 0), ({'P': hit, 'Q': hit}, hit)], [(0, 'A')])
        for i, hit in enumerate(outcomes, start=1)
    ])


def test_goal_achievement_weighted_average():
    goals = [GoalSpec('a', weight=2), GoalSpec('b', weight=1)]
    snap = SystemState('w@0', 'w', 0, {}, {'a': Fraction(9, 10), 'b': Fraction(3, 10)})
    store = store_of(Episode('w', snapshots=[snap]))
    assert goal_achievement(store, 'w', (0, 0), goals) == Fraction(7, 10)


def test_goal_achievement_errors():
    store = _trial_store()
    with pytest.raises(NoGoalsError):
        goal_achievement(store, 'e1', (0, 0), [])
    with pytest.raises(ZeroWeightsError):
        goal_achievement(store, 'e1', (0, 0), [GoalSpec('goal', weight=0)])
    with pytest.raises(CogSynError):
        goal_achievement(store, 'e1', (0, 4), [GOAL])


def test_g_global_weighted_by_presence():
    store = store_of(episode('x', [({'P': 1}, Fraction(9, 10))]),
                     episode('y', [({'P': Fraction(1, 2)}, Fraction(3, 10))]))
    estimate = g_global(store, 'P', [GOAL])
    assert estimate == Estimate(Fraction(7, 10), Fraction(3, 5))


def test_g_global_without_evidence():
    store = store_of(episode('x', [({'P': 0}, 1)]))
    assert g_global(store, 'P', [GOAL]) == Estimate(None, Fraction(0))


def test_g_conditional_over_branches():
    root = episode('root', [({'P': 0}, 0)])
    first = episode('b1', [({}, 0), ({'P': 1}, Fraction(1, 5))], branch_of=('root', 0))
    second = episode('b2', [({}, 0), ({'P': 1}, Fraction(3, 5))], branch_of=('root', 0))
    store = store_of(root, first, second)
    estimate = g_conditional(store, 'P', [GOAL], 'root', (0, 0))
    assert estimate == Estimate(Fraction(2, 5), Fraction(1, 2))
    assert confidence_of_g(store, 'P', 'root', (0, 0)) == Fraction(1, 2)


def test_g_conditional_without_continuation():
    store = store_of(episode('root', [({'P': 1}, 1)]))
    assert g_conditional(store, 'P', [GOAL], 'root', (0, 0)) == Estimate(None, Fraction(0))


def test_action_efficacy_counts_trials():
    store = _trial_store()
    estimate = action_efficacy(store, 'A', 'e1', (0, 0), 'P')
    assert estimate == Estimate(Fraction(3, 4), Fraction(4, 5))
    assert action_efficacy_over(store, 'A', 'e1', (0, 0), 'P', [(1, 1)]) == estimate


def test_action_efficacy_filters():
    store = _trial_store()
    assert action_efficacy(store, 'B', 'e1', (0, 0), 'P') == Estimate(None, Fraction(0))
    costly = (ResourceBudget(1, 0), ResourceBudget(5, 5))
    assert action_efficacy(store, 'A', 'e1', (0, 0), 'P', budget_interval=costly).value is None
    # 终点时刻的轮廓是 P+Q 或 ∅，只有 ∅ 上有 A 的转移
    assert action_efficacy(store, 'A', 'e1', (1, 1), 'P').value is None
    with pytest.raises(CogSynError):
        action_efficacy(store, 'A', 'e1', (0, 0), 'P', offset_interval=(0, 1))


def test_four_factor_product():
    assert four_factor_conf(Fraction(4, 5), Fraction(1, 2), Fraction(9, 10), Fraction(1, 2)) == Fraction(9, 50)
    assert four_factor_conf(None, 1, 1, 1) == 0


def test_conf_and_stuckness_example():
    store = _trial_store()
    cache = {}
    result = conf_and_stuckness(store, 'A', 'e1', (0, 0), [CatalogEntry('P', None, 'k-p')], [GOAL],
                                g_cache=cache)
    assert result.factors == (1, Fraction(1, 2), Fraction(3, 4), Fraction(4, 5))
    assert result.conf == Fraction(3, 10)
    assert result.stuck == Fraction(7, 10)
    assert result.argmax_pattern == 'P'
    assert [(key[0], key[1], key[-1]) for key in cache] == [('e1', (0, 0), 'P')]


def test_g_cache_separates_goal_lists():
    store = _trial_store()
    candidates = [CatalogEntry('P', None, 'k-p')]
    cache = {}
    first = conf_and_stuckness(store, 'A', 'e1', (0, 0), candidates, [GOAL], g_cache=cache)
    # 查表目标在所有状态上程度为 0
    never = GoalSpec('never', table={})
    second = conf_and_stuckness(store, 'A', 'e1', (0, 0), candidates, [never], g_cache=cache)
    assert (first.stuck, second.stuck) == (Fraction(7, 10), 1)
    assert len(cache) == 2


def test_conf_ties_broken_by_canonical_key():
    store = _trial_store()
    candidates = [CatalogEntry('P', None, 'zzz'), CatalogEntry('Q', None, 'aaa')]
    result = conf_and_stuckness(store, 'A', 'e1', (0, 0), candidates, [GOAL])
    assert result.scores['P'] == result.scores['Q']
    assert (result.argmax_pattern, result.argmax_key) == ('Q', 'aaa')


def test_empty_candidates_fully_stuck():
    result = conf_and_stuckness(_trial_store(), 'A', 'e1', (0, 0), [], [GOAL])
    assert (result.conf, result.stuck, result.flagged) == (0, 1, True)


def test_idle_process_fully_stuck():
    result = conf_and_stuckness(_trial_store(), 'B', 'e1', (0, 0), [CatalogEntry('P', None, 'k')], [GOAL])
    assert result.stuck == 1
    assert not result.flagged


def test_unit_intervals_after():
    assert unit_intervals_after(3, 2) == [(4, 4), (5, 5)]


@given(st.fractions(min_value=0, max_value=1000), st.fractions(min_value=0, max_value=1000))
@settings(max_examples=200, deadline=None)
def test_confidence_function_monotone_and_bounded(a, b):
    low, high = sorted((a, b))
    assert 0 <= confidence_function(low) <= confidence_function(high) < 1


degree_values = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1)])


@st.composite
def random_stores(draw):
    episodes = []
    for index in range(draw(st.integers(1, 4))):
        length = draw(st.integers(2, 5))
        rows = [({'P': draw(degree_values)}, draw(degree_values)) for _ in range(length)]
        steps = [(t, draw(st.sampled_from('AB'))) for t in range(length - 1)]
        episodes.append(episode(f"r{index}", rows, steps))
    return store_of(*episodes)


@given(random_stores(), st.sampled_from('AB'))
@settings(max_examples=100, deadline=None)
def test_stuckness_stays_in_unit_interval(store, process):
    candidates = [CatalogEntry('P', None, 'k')]
    for item in store:
        for tick in item.ticks():
            result = conf_and_stuckness(store, process, item.situation, (tick, tick), candidates, [GOAL])
            assert 0 <= result.stuck <= 1
            assert result.stuck == 1 - result.conf
