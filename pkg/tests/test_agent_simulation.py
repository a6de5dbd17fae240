import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.agent_simulation import (ActivationRule, Cognit, ConstantEnvironment, ConstantPolicy, Entity,
                                     Event, Memory, TableEnvironment, TablePolicy, UniformPolicy,
                                     activate_cognit, cognit_entity, cognit_product, dump_episode_log,
                                     format_event_line, load_episode_log, parse_event_line, run_episode)
from models.errors import (ActivationDepthError, CogSynError, CognitAbsentError,
                           InvalidDistributionError)


def coin_environment():
    return TableEnvironment({
        'flip': [('heads', '1', '1/2'), ('tails', '0', '1/2')],
        '*': [('quiet', '0', '1')],
    })


def test_zero_ticks_gives_empty_history():
    assert run_episode(ConstantPolicy('think'), ConstantEnvironment('quiet', 0), 0, seed=1) == []


def test_constant_rewards():
    events = run_episode(ConstantPolicy('think'), ConstantEnvironment('quiet', '1/2'), 3, seed=1)
    assert [e.reward for e in events if e.kind == 'percept'] == [Fraction(1, 2)] * 3
    assert [(e.tick, e.slot, e.kind) for e in events[:2]] == [(0, 0, 'action'), (0, 1, 'percept')]


def test_same_seed_same_history():
    policy = UniformPolicy(['flip', 'rest'])
    first = run_episode(policy, coin_environment(), 12, seed=99)
    second = run_episode(policy, coin_environment(), 12, seed=99)
    assert first == second


def test_shorter_run_is_prefix():
    policy = UniformPolicy(['flip', 'rest'])
    short = run_episode(policy, coin_environment(), 3, seed=5)
    longer = run_episode(policy, coin_environment(), 4, seed=5)
    assert longer[:len(short)] == short


def test_goal_seeking_agent_receives_goals():
    env = ConstantEnvironment('quiet', 0, goal_weights={'connected': 1, 'ignored': 0})
    memory = Memory(16)
    events = run_episode(ConstantPolicy('think', goal_seeking=True), env, 2, seed=3, memory=memory)
    goals = [e for e in events if e.kind == 'goal']
    assert [(e.tick, e.slot, e.goal) for e in goals] == [(0, 2, 'connected'), (1, 2, 'connected')]
    assert memory.count(Entity('goal', 'connected')) == 2


def test_executed_action_takes_next_action_slot():
    jumper = Cognit('jumper', ActivationRule('1', executes=('jump',)))
    memory = Memory(32, [jumper.entity])
    events = run_episode(ConstantPolicy('think'), ConstantEnvironment('quiet', 0), 2, seed=0,
                         memory=memory, cognits={'jumper': jumper}, schedule={0: ['jumper']})
    assert [e.action for e in events if e.kind == 'action'] == ['think', 'jump']
    assert events[2] == Event(0, 2, 'cognit', cognit='jumper')


def test_episode_log_reads_back():
    events = run_episode(UniformPolicy(['flip', 'rest']), coin_environment(), 6, seed=11)
    text = dump_episode_log(events)
    assert load_episode_log(text) == events
    assert all(line.count('\t') == 3 for line in text.splitlines())


def test_event_line_format():
    event = Event(3, 1, 'percept', observation='heads', reward=Fraction(1, 2))
    assert format_event_line(event) == "3\t1\tpercept\to=heads;r=1/2"
    assert parse_event_line("0\t0\tnoop\t-") == Event(0, 0, 'noop')
    with pytest.raises(CogSynError):
        parse_event_line("0\t0\taction")


def test_reward_must_be_in_unit_interval():
    with pytest.raises(CogSynError):
        Event(0, 1, 'percept', reward=Fraction(3, 2))


@pytest.mark.parametrize("symbol", ["a;b", "a=b", "a\tb", "a\nb"])
def test_log_separators_rejected_in_symbols(symbol):
    with pytest.raises(CogSynError):
        Event(0, 0, 'action', action=symbol)
    with pytest.raises(CogSynError):
        Event(0, 1, 'percept', observation=symbol)


def test_log_keeps_other_punctuation():
    event = Event(2, 0, 'action', action='look-at:cat')
    assert load_episode_log(dump_episode_log([event])) == [event]


def test_distributions_must_sum_to_one():
    with pytest.raises(InvalidDistributionError):
        TablePolicy({'*': {'a': '1/2', 'b': '1/3'}})
    with pytest.raises(InvalidDistributionError):
        TablePolicy({'seen': {'a': 1}})
    with pytest.raises(InvalidDistributionError):
        TableEnvironment({'flip': [('heads', 0, 1)]})


def test_policy_normalized_on_short_histories():
    policy = TablePolicy({
        'heads': {'flip': '2/3', 'rest': '1/3'},
        'tails': {'flip': '1', 'rest': '0'},
        '*': {'flip': '1/2', 'rest': '1/2'},
    })
    env = coin_environment()
    observations = ['heads', 'tails', 'quiet']
    for length in range(5):
        for seen in itertools.product(observations, repeat=length):
            history = [Event(t, 1, 'percept', observation=o, reward=0) for t, o in enumerate(seen)]
            assert sum(p for _, p in policy.distribution(history)) == 1
            for action in ('flip', 'rest'):
                assert sum(p for _, p in env.distribution(history, action)) == 1


def test_memory_counts_repeated_creation():
    memory = Memory(8)
    x = Entity('observation', 'x')
    memory.add(x)
    memory.add(x)
    assert memory.count(x) == 2
    assert len(memory) == 1


def test_memory_evicts_lowest_count_then_oldest():
    a, b, c = (Entity('observation', name) for name in 'abc')
    memory = Memory(3, [a, a, b])
    assert memory.add(c) == [b]
    assert memory.counts() == {a: 2, c: 1}
    assert memory.add(b) == [c]


@given(st.lists(st.tuples(st.sampled_from(['add', 'forget']), st.sampled_from('abcd')), max_size=40),
       st.integers(1, 5))
@settings(max_examples=100, deadline=None)
def test_memory_never_exceeds_capacity(ops, capacity):
    memory = Memory(capacity)
    for op, name in ops:
        entity = Entity('observation', name)
        if op == 'add':
            memory.add(entity)
            assert entity in memory
        else:
            memory.forget(entity)
            assert entity not in memory
        assert memory.total <= capacity
        assert all(n > 0 for n in memory.counts().values())


def test_option_five_does_nothing():
    idle = Cognit('idle')
    memory = Memory(8, [idle.entity])
    assert activate_cognit(memory, idle) == []
    assert memory.counts() == {idle.entity: 1}


def test_double_creation_counts_twice():
    target = Entity('cognit', 'cj')
    maker = Cognit('maker', ActivationRule('1', creates=(target, target)))
    memory = Memory(8, [maker.entity])
    activate_cognit(memory, maker)
    assert memory.count(target) == 2


def test_return_activation_ends_with_activator():
    callee = Cognit('c2', ActivationRule('2a'))
    caller = Cognit('c1', ActivationRule('2', activates=('c2',)))
    memory = Memory(8, [caller.entity, callee.entity])
    effects = activate_cognit(memory, caller, {'c1': caller, 'c2': callee})
    assert [(e.kind, e.target) for e in effects] == [('activate', 'c2'), ('activate', 'c1')]


def test_activation_depth_bound():
    looper = Cognit('loop', ActivationRule('2', activates=('loop',)))
    memory = Memory(8, [looper.entity])
    with pytest.raises(ActivationDepthError) as info:
        activate_cognit(memory, looper, {'loop': looper}, depth_limit=5)
    assert len(info.value.partial_effects) == 6


def test_absent_cognit_cannot_activate():
    with pytest.raises(CognitAbsentError):
        activate_cognit(Memory(4), Cognit('ghost'))


def test_forget_and_conditional_create():
    x, y = Entity('observation', 'x'), Entity('observation', 'y')
    forgetter = Cognit('forgetter', ActivationRule('4', forgets=(x,)))
    builder = Cognit('builder', ActivationRule('3', requires=(x,), creates=(y,)))
    memory = Memory(8, [forgetter.entity, builder.entity, x])
    assert [e.kind for e in activate_cognit(memory, builder)] == ['create']
    activate_cognit(memory, forgetter)
    assert x not in memory
    assert activate_cognit(memory, builder) == []


def test_identity_and_annihilator_products():
    x = Entity('observation', 'x')
    identity = Cognit('id', ActivationRule('1'))
    annihilator = Cognit('zero', ActivationRule('1', default_product='annihilate'))
    assert cognit_product(identity, x) == x
    assert cognit_product(annihilator, x) is None


def test_products_do_not_commute():
    z, w = Entity('observation', 'z'), Entity('observation', 'w')
    c1 = Cognit('c1', ActivationRule('1', products=((cognit_entity('c2'), z),)))
    c2 = Cognit('c2', ActivationRule('1', products=((cognit_entity('c1'), w),)))
    assert cognit_product(c1, c2.entity) == z
    assert cognit_product(c2, c1.entity) == w
