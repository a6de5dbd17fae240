"""
智能体模型层次
- 基本强化学习循环：智能体与环境轮流发送信号（动作 / 观察 + 奖励），目标寻求型智能体还会收到目标
- 认知元（cognit）智能体：记忆为有限多重集，认知元被激活时对记忆产生效果
- 事件日志：每行一个事件 `tick<TAB>slot<TAB>kind<TAB>payload`
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from models.errors import (ActivationDepthError, CogSynError, CognitAbsentError,
                           InvalidDistributionError)
from models.hypergraph import format_fraction, to_fraction
from models.parameter_config import agent_params

logger = logging.getLogger(__name__)

_PAYLOAD_KEYS = (('c', 'cognit'), ('a', 'action'), ('o', 'observation'), ('g', 'goal'), ('r', 'reward'))
# 事件日志的分隔符，不能出现在符号里
LOG_SEPARATORS = frozenset(';=\t\n')


def log_safe(symbol):
    return not any(ch in LOG_SEPARATORS for ch in str(symbol))


@dataclass(frozen=True)
class Event:
    tick: int
    slot: int = 0
    kind: str = 'action'
    cognit: str = None
    action: str = None
    observation: str = None
    goal: str = None
    reward: Fraction = None

    def __post_init__(self):
        if self.tick < 0:
            raise CogSynError(f"事件时刻不能为负: {self.tick}")
        for attr in ('kind', 'cognit', 'action', 'observation', 'goal'):
            value = getattr(self, attr)
            if value is not None and not log_safe(value):
                raise CogSynError(f"事件符号不能包含 ; = 制表符或换行: {value!r}", field=attr)
        if self.reward is not None:
            reward = to_fraction(self.reward)
            if not 0 <= reward <= 1:
                raise CogSynError(f"奖励必须在 [0,1] 内: {reward}")
            object.__setattr__(self, 'reward', reward)


def format_event_line(event):
    parts = []
    for short, attr in _PAYLOAD_KEYS:
        value = getattr(event, attr)
        if value is not None:
            parts.append(f"{short}={format_fraction(value) if attr == 'reward' else value}")
    payload = ';'.join(parts) if parts else '-'
    return f"{event.tick}\t{event.slot}\t{event.kind}\t{payload}"


def parse_event_line(line):
    try:
        tick, slot, kind, payload = line.rstrip('\n').split('\t')
        values = {}
        if payload != '-':
            lookup = dict(_PAYLOAD_KEYS)
            for item in payload.split(';'):
                key, value = item.split('=', 1)
                values[lookup[key]] = value
        return Event(int(tick), int(slot), kind, **values)
    except (ValueError, KeyError) as exc:
        raise CogSynError(f"无法解析事件行: {line!r}") from exc


def dump_episode_log(events):
    return ''.join(format_event_line(e) + '\n' for e in events)


def load_episode_log(text):
    return [parse_event_line(line) for line in text.splitlines() if line.strip()]


# ---- 多重集记忆 ----

@dataclass(frozen=True, order=True)
class Entity:
    kind: str
    name: str

    def __str__(self):
        return f"{self.kind}:{self.name}"


def cognit_entity(cognit_id):
    return Entity('cognit', cognit_id)


class Memory:
    """
    有限多重集记忆。创建已有实体时计数加一；超出容量时淘汰计数最低、其次最早进入的实体的一份拷贝。
    """

    def __init__(self, capacity=None, entities=()):
        self.capacity = capacity or agent_params()['memory_capacity']
        if self.capacity < 1:
            raise CogSynError("记忆容量必须为正")
        self._counts = {}
        for entity in entities:
            self.add(entity)

    def __contains__(self, entity):
        return self._counts.get(entity, 0) > 0

    def __len__(self):
        return len(self._counts)

    def count(self, entity):
        return self._counts.get(entity, 0)

    @property
    def total(self):
        return sum(self._counts.values())

    def entities(self):
        return list(self._counts)

    def counts(self):
        return dict(self._counts)

    def copy(self):
        clone = Memory(self.capacity)
        clone._counts = dict(self._counts)
        return clone

    def _evict_one(self, protect):
        candidates = [e for e in self._counts if e != protect] or list(self._counts)
        order = {e: i for i, e in enumerate(self._counts)}
        victim = min(candidates, key=lambda e: (self._counts[e], order[e]))
        self._decrement(victim)
        return victim

    def _decrement(self, entity):
        self._counts[entity] -= 1
        if self._counts[entity] == 0:
            del self._counts[entity]

    def add(self, entity, n=1):
        """增加 n 份拷贝，返回被淘汰的实体列表"""
        evicted = []
        for _ in range(n):
            if self.total >= self.capacity:
                evicted.append(self._evict_one(entity))
            self._counts[entity] = self._counts.get(entity, 0) + 1
        return evicted

    def forget(self, entity):
        """把实体从记忆中完全移除"""
        return self._counts.pop(entity, 0) > 0


# ---- 认知元与激活 ----

OPTIONS = ('1', '2', '2a', '3', '4', '5')


@dataclass(frozen=True)
class ActivationRule:
    """
    激活规则
      1  创建新实体（creates），执行动作（executes），并按乘积表改写其他实体
      2  激活其他认知元（activates）；2a 额外在末尾回激活发起者
      3  记忆中包含 requires 全部实体时创建 creates
      4  遗忘 forgets
      5  什么也不做
    """

    option: str = '5'
    creates: tuple = ()
    executes: tuple = ()
    activates: tuple = ()
    requires: tuple = ()
    forgets: tuple = ()
    products: tuple = ()
    default_product: str = 'identity'

    def __post_init__(self):
        if self.option not in OPTIONS:
            raise CogSynError(f"未知激活选项: {self.option}")
        if self.default_product not in ('identity', 'annihilate'):
            raise CogSynError(f"未知默认乘积: {self.default_product}")

    def product_table(self):
        return dict(self.products)


@dataclass(frozen=True)
class Cognit:
    cognit_id: str
    rule: ActivationRule = field(default_factory=ActivationRule)
    body: object = None

    @property
    def entity(self):
        return cognit_entity(self.cognit_id)


@dataclass(frozen=True)
class Effect:
    kind: str
    target: object = None
    depth: int = 0


def _product_effects(cognit, entity):
    table = cognit.rule.product_table()
    if entity in table:
        result = table[entity]
    elif cognit.rule.default_product == 'identity':
        return []
    else:
        result = None
    if result == entity:
        return []
    effects = [Effect('forget', entity)]
    if result is not None:
        effects.append(Effect('create', result))
    return effects


def _apply(memory, effect):
    if effect.kind == 'forget':
        memory.forget(effect.target)
    elif effect.kind == 'create':
        memory.add(effect.target)


def activate_cognit(memory, cognit, registry=None, activator=None, depth_limit=None, _depth=0, _effects=None):
    """
    激活认知元，按顺序产生并逐个应用效果

    Args:
        memory: 多重集记忆（就地修改）
        registry: 认知元编号 → Cognit，用于级联激活
        activator: 发起激活的认知元编号（2a 回激活用）
        depth_limit: 级联深度上限，默认 64

    Returns:
        效果列表；execute 效果由调用方排入下一个动作时隙
    """
    registry = registry or {}
    depth_limit = depth_limit or agent_params()['activation_depth']
    effects = [] if _effects is None else _effects
    if cognit.entity not in memory:
        raise CognitAbsentError(f"认知元 {cognit.cognit_id} 不在记忆中", cognit=cognit.cognit_id)
    if _depth > depth_limit:
        raise ActivationDepthError(f"激活链超过深度上限 {depth_limit}", partial_effects=effects)

    rule = cognit.rule

    def emit(effect):
        _apply(memory, effect)
        effects.append(effect)

    if rule.option == '1':
        for entity in sorted(memory.entities()):
            if entity != cognit.entity:
                for effect in _product_effects(cognit, entity):
                    emit(Effect(effect.kind, effect.target, _depth))
        for entity in rule.creates:
            emit(Effect('create', entity, _depth))
        for action in rule.executes:
            emit(Effect('execute', action, _depth))
    elif rule.option in ('2', '2a'):
        for target_id in rule.activates:
            effects.append(Effect('activate', target_id, _depth))
            target = registry.get(target_id)
            if target is None or target.entity not in memory:
                logger.debug(f"跳过不可激活的认知元 {target_id}")
                continue
            activate_cognit(memory, target, registry, cognit.cognit_id, depth_limit, _depth + 1, effects)
        if rule.option == '2a' and activator is not None:
            effects.append(Effect('activate', activator, _depth))
    elif rule.option == '3':
        if all(entity in memory for entity in rule.requires):
            for entity in rule.creates:
                emit(Effect('create', entity, _depth))
    elif rule.option == '4':
        for entity in rule.forgets:
            emit(Effect('forget', entity, _depth))
    return effects


def cognit_product(cognit, entity):
    """
    c * x：在只含 c 和 x 的临时记忆上让 c 作用于 x，返回结果实体，作用为空时返回 None
    """
    scratch = Memory(capacity=4, entities=[cognit.entity, entity])
    for effect in _product_effects(cognit, entity):
        _apply(scratch, effect)
    remaining = [e for e in scratch.entities() if e != cognit.entity]
    if not remaining:
        return None if entity != cognit.entity else cognit.entity
    return remaining[0]


# ---- 策略与环境 ----

def _validate_distribution(options, context):
    total = sum((p for _, p in options), Fraction(0))
    if any(p < 0 for _, p in options) or total != 1:
        raise InvalidDistributionError(f"{context} 的概率之和必须为 1，当前为 {total}")
    return options


def _normalize(mapping, context):
    options = [(key, to_fraction(p)) for key, p in mapping.items()]
    return _validate_distribution(options, context)


def _sample(options, rng):
    if len(options) == 1:
        return options[0][0]
    probabilities = np.array([float(p) for _, p in options])
    index = int(rng.choice(len(options), p=probabilities / probabilities.sum()))
    return options[index][0]


def last_observation(history):
    for event in reversed(history):
        if event.observation is not None:
            return event.observation
    return None


class AgentPolicy:
    """π(a_t | ax_<t)"""

    goal_seeking = False

    def distribution(self, history):
        raise NotImplementedError

    def choose(self, history, rng):
        return _sample(self.distribution(history), rng)


class ConstantPolicy(AgentPolicy):
    def __init__(self, action, goal_seeking=False):
        self.action = action
        self.goal_seeking = goal_seeking

    def distribution(self, history):
        return [(self.action, Fraction(1))]


class UniformPolicy(AgentPolicy):
    def __init__(self, actions, goal_seeking=False):
        if not actions:
            raise InvalidDistributionError("动作集不能为空")
        self.actions = list(actions)
        self.goal_seeking = goal_seeking

    def distribution(self, history):
        p = Fraction(1, len(self.actions))
        return [(a, p) for a in self.actions]


class TablePolicy(AgentPolicy):
    """按上一次观察查表；'*' 为缺省行"""

    def __init__(self, table, goal_seeking=False):
        self.table = {key: _normalize(row, f"策略表行 {key}") for key, row in table.items()}
        if '*' not in self.table:
            raise InvalidDistributionError("策略表缺少缺省行 '*'")
        self.goal_seeking = goal_seeking

    def distribution(self, history):
        return self.table.get(last_observation(history), self.table['*'])


class Environment:
    """μ(x_k | ax_<k a_k)，以及目标权重 γ(g, μ)"""

    def __init__(self, goal_weights=None):
        self.goal_weights = {g: to_fraction(w) for g, w in (goal_weights or {}).items()}
        if any(w < 0 for w in self.goal_weights.values()):
            raise InvalidDistributionError("目标权重 γ 必须非负")

    def distribution(self, history, action):
        """返回 [((observation, reward), 概率)]"""
        raise NotImplementedError

    def respond(self, history, action, rng):
        return _sample(self.distribution(history, action), rng)

    def goal(self, rng):
        weights = {g: w for g, w in self.goal_weights.items() if w > 0}
        if not weights:
            return None
        total = sum(weights.values())
        return _sample([(g, w / total) for g, w in sorted(weights.items())], rng)


class ConstantEnvironment(Environment):
    def __init__(self, observation, reward, goal_weights=None):
        super().__init__(goal_weights)
        self.observation = observation
        self.reward = to_fraction(reward)

    def distribution(self, history, action):
        return [((self.observation, self.reward), Fraction(1))]


class TableEnvironment(Environment):
    """按动作查表，每行是 [(observation, reward, probability)]；'*' 为缺省行"""

    def __init__(self, table, goal_weights=None):
        super().__init__(goal_weights)
        self.table = {}
        for action, rows in table.items():
            options = [((obs, to_fraction(reward)), to_fraction(p)) for obs, reward, p in rows]
            self.table[action] = _validate_distribution(options, f"环境表行 {action}")
        if '*' not in self.table:
            raise InvalidDistributionError("环境表缺少缺省行 '*'")

    def distribution(self, history, action):
        return self.table.get(action, self.table['*'])


def run_episode(agent, env, ticks, seed, memory=None, cognits=None, schedule=None):
    """
    运行一段经历：每个时刻依次是动作时隙、感知时隙，目标寻求型智能体还有目标时隙；
    给定 schedule 时在最后按时刻激活认知元，其 execute 效果排入下一个动作时隙。

    Args:
        ticks: 时刻数
        seed: 64 位种子，全部随机性来自它
        memory: 可选多重集记忆，感知到的实体写入记忆
        cognits: 认知元编号 → Cognit
        schedule: 时刻 → 要激活的认知元编号列表

    Returns:
        事件列表
    """
    rng = np.random.default_rng(seed)
    history = []
    queued = []
    cognits = cognits or {}
    schedule = schedule or {}
    for tick in range(ticks):
        action = queued.pop(0) if queued else agent.choose(history, rng)
        history.append(Event(tick, 0, 'action', action=action))
        observation, reward = env.respond(history, action, rng)
        history.append(Event(tick, 1, 'percept', observation=observation, reward=reward))
        slot = 2
        if agent.goal_seeking:
            goal = env.goal(rng)
            history.append(Event(tick, slot, 'goal', goal=goal))
            slot += 1
            if memory is not None and goal is not None:
                memory.add(Entity('goal', goal))
        if memory is not None:
            memory.add(Entity('action', action))
            memory.add(Entity('observation', observation))
            memory.add(Entity('reward', format_fraction(reward)))
        for cognit_id in schedule.get(tick, ()):
            cognit = cognits[cognit_id]
            history.append(Event(tick, slot, 'cognit', cognit=cognit_id))
            slot += 1
            if memory is None or cognit.entity not in memory:
                continue
            for effect in activate_cognit(memory, cognit, cognits):
                if effect.kind == 'execute':
                    queued.append(effect.target)
    logger.debug(f"经历结束: {ticks} 个时刻, {len(history)} 个事件, seed={seed}")
    return history
