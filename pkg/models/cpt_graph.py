"""
认知过程转移图（CPT 图）与元系统记录
- SystemState：某一快照上各 h-模式的显示程度
- Transition：由某个认知过程（或外部输入）引起的状态转移，带概率、置信度和资源代价
- EpisodeStore：元系统，记录所有实际与反事实经历，只追加
"""

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from models.errors import (CogSynError, DuplicateSituationError, InsufficientBudgetError,
                           InvalidTransitionError, UnknownProcessError)
from models.hypergraph import Hypergraph, to_fraction
from models.pattern_matching import match_degree, pattern_key

logger = logging.getLogger(__name__)

EXOGENOUS = 'exogenous'
STATE_TYPE = 'state'
TRANSITION_TYPE = 'transition'
EMPTY_PROFILE = '∅'


def _unit(value, what):
    value = to_fraction(value)
    if not 0 <= value <= 1:
        raise CogSynError(f"{what} 必须在 [0,1] 内: {value}")
    return value


# ---- 模式目录 ----

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    pattern: object
    key: str
    support: int = None


class PatternCatalog:
    """名称 → 模式；名称用于状态轮廓，规范键用于去重和平局裁决"""

    def __init__(self, entries=()):
        self._entries = {}
        for entry in entries:
            self.add(entry)

    @classmethod
    def from_patterns(cls, patterns):
        return cls(CatalogEntry(name, p, pattern_key(p)) for name, p in patterns.items())

    def add(self, entry):
        if entry.name in self._entries:
            raise CogSynError(f"模式名称重复: {entry.name}")
        self._entries[entry.name] = entry

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def __contains__(self, name):
        return name in self._entries

    def get(self, name):
        return self._entries[name]

    def names(self):
        return list(self._entries)

    def keys(self):
        return {entry.key for entry in self._entries.values()}

    def merged(self, other):
        """合并另一个目录，规范键已存在的模式跳过"""
        result = PatternCatalog(self)
        known = result.keys()
        for entry in other:
            if entry.key not in known and entry.name not in result:
                result.add(entry)
                known.add(entry.key)
        return result


# ---- 状态与转移 ----

def profile_key(pattern_degrees):
    shown = sorted(name for name, degree in pattern_degrees.items() if degree == 1)
    return '+'.join(shown) if shown else EMPTY_PROFILE


@dataclass(frozen=True)
class SystemState:
    snapshot_id: str
    situation: str
    tick: int
    pattern_degrees: dict = field(default_factory=dict)
    goal_degrees: dict = field(default_factory=dict)
    label: str = None

    def __post_init__(self):
        object.__setattr__(self, 'pattern_degrees',
                           {k: _unit(v, f"模式 {k} 的程度") for k, v in self.pattern_degrees.items()})
        object.__setattr__(self, 'goal_degrees',
                           {k: _unit(v, f"目标 {k} 的程度") for k, v in self.goal_degrees.items()})

    @property
    def key(self):
        return self.label if self.label is not None else profile_key(self.pattern_degrees)

    def degree(self, name):
        return self.pattern_degrees.get(name, Fraction(0))


@dataclass(frozen=True)
class ResourceBudget:
    space: Fraction = Fraction(0)
    time: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'space', to_fraction(self.space))
        object.__setattr__(self, 'time', to_fraction(self.time))
        if self.space < 0 or self.time < 0:
            raise CogSynError(f"资源量不能为负: ({self.space}, {self.time})")

    def __add__(self, other):
        return ResourceBudget(self.space + other.space, self.time + other.time)

    def __sub__(self, other):
        return ResourceBudget(self.space - other.space, self.time - other.time)

    def fits_within(self, other):
        return self.space <= other.space and self.time <= other.time

    def within(self, interval):
        """interval 为 (下界预算, 上界预算)，逐分量闭区间"""
        low, high = interval
        return low.fits_within(self) and self.fits_within(high)

    @property
    def total(self):
        return self.space + self.time


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    cause: str
    probability: Fraction = Fraction(1)
    confidence: Fraction = Fraction(1)
    resource_cost: ResourceBudget = field(default_factory=ResourceBudget)
    interval: tuple = (0, 0)
    situation: str = ''

    def __post_init__(self):
        try:
            object.__setattr__(self, 'probability', _unit(self.probability, "转移概率"))
            object.__setattr__(self, 'confidence', _unit(self.confidence, "转移置信度"))
        except CogSynError as exc:
            raise InvalidTransitionError(exc.message) from exc
        if not isinstance(self.resource_cost, ResourceBudget):
            object.__setattr__(self, 'resource_cost', ResourceBudget(*self.resource_cost))
        start, end = self.interval
        if start > end:
            raise InvalidTransitionError(f"转移区间起点晚于终点: {self.interval}")

    @property
    def cost(self):
        return self.resource_cost.total

    @property
    def start(self):
        return self.interval[0]


class CPTGraph:
    """
    单个认知过程的转移超图：节点是状态，链接是该过程引起的转移。
    同一对状态之间重复出现的转移折叠为一条链接，权重取各次转移的均值。
    """

    def __init__(self, process_id):
        self.process_id = process_id
        self.graph = Hypergraph(f"CPT[{process_id}]")
        self.state_nodes = {}
        self.transitions = []
        self.link_transitions = {}

    def state_node(self, key):
        if key not in self.state_nodes:
            self.state_nodes[key] = self.graph.add_node(STATE_TYPE)
        return self.state_nodes[key]

    def add_transition(self, transition):
        if transition.cause != self.process_id:
            raise InvalidTransitionError(
                f"转移由 {transition.cause} 引起，不能加入 {self.process_id} 的 CPT 图")
        source = self.state_node(transition.source)
        target = self.state_node(transition.target)
        existing = self.graph.find_links(TRANSITION_TYPE, (source, target))
        link_id = existing[0] if existing else None
        members = self.link_transitions.pop(link_id, []) + [transition]
        if link_id is not None:
            self.graph.discard(link_id)
        link_id = self.graph.add_link(TRANSITION_TYPE, (source, target), _mean_weights(members), link_id)
        self.link_transitions[link_id] = members
        self.transitions.append(transition)
        return link_id

    def state_key(self, node_id):
        for key, nid in self.state_nodes.items():
            if nid == node_id:
                return key
        raise KeyError(node_id)

    @property
    def num_states(self):
        return len(self.state_nodes)

    @property
    def num_transitions(self):
        return len(self.transitions)

    def to_networkx(self):
        digraph = nx.MultiDiGraph()
        digraph.add_nodes_from(self.state_nodes)
        for key, transition in enumerate(self.transitions):
            digraph.add_edge(transition.source, transition.target, key=key,
                             cost=transition.cost, transition=transition)
        return digraph


def _mean_weights(transitions):
    n = len(transitions)
    return [
        sum((t.probability for t in transitions), Fraction(0)) / n,
        sum((t.confidence for t in transitions), Fraction(0)) / n,
        sum((t.resource_cost.space for t in transitions), Fraction(0)) / n,
        sum((t.resource_cost.time for t in transitions), Fraction(0)) / n,
    ]


# ---- 元系统 ----

@dataclass
class Episode:
    situation: str
    seed: int = 0
    snapshots: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    events: list = field(default_factory=list)
    memories: list = field(default_factory=list)
    branch_of: tuple = None

    def ticks(self):
        return [s.tick for s in self.snapshots]

    def snapshot(self, tick):
        for state in self.snapshots:
            if state.tick == tick:
                return state
        return None

    def covers(self, interval):
        ticks = set(self.ticks())
        return all(t in ticks for t in range(interval[0], interval[1] + 1))

    @property
    def last_tick(self):
        return max(self.ticks()) if self.snapshots else None


class EpisodeStore:
    """元系统：只追加的经历集合，写入串行化，读取可以并行"""

    def __init__(self, processes=()):
        self._episodes = {}
        self._declared = set(processes)
        self._lock = threading.Lock()

    def declare_process(self, process_id):
        self._declared.add(process_id)

    def add_episode(self, episode):
        with self._lock:
            if episode.situation in self._episodes:
                raise DuplicateSituationError(f"情境编号重复: {episode.situation}")
            ticks = set(episode.ticks())
            for transition in episode.transitions:
                start, end = transition.interval
                if start not in ticks or end not in ticks:
                    raise InvalidTransitionError(
                        f"转移 {transition.interval} 引用了未记录的快照", situation=episode.situation)
            self._episodes[episode.situation] = episode
        return episode

    def __len__(self):
        return len(self._episodes)

    def __iter__(self):
        return iter(self._episodes.values())

    def episode(self, situation):
        return self._episodes[situation]

    def situations(self):
        return list(self._episodes)

    def processes(self):
        causes = {t.cause for e in self._episodes.values() for t in e.transitions}
        return sorted((causes | self._declared) - {EXOGENOUS})

    def all_transitions(self):
        return [t for e in self._episodes.values() for t in e.transitions]

    def memory_snapshots(self):
        return [m for e in self._episodes.values() for m in e.memories]

    def snapshot_count(self):
        return sum(len(e.snapshots) for e in self._episodes.values())

    def state_at(self, situation, tick):
        state = self.episode(situation).snapshot(tick)
        if state is None:
            raise CogSynError(f"情境 {situation} 没有时刻 {tick} 的快照")
        return state

    def continuations(self, situation, tick):
        """
        (S, t) 的延续：S 自身在 t 之后的未来，加上所有声明 branch_of == (S, t) 的反事实分支，等权
        """
        members = []
        own = self._episodes.get(situation)
        if own is not None and any(t > tick for t in own.ticks()):
            members.append(situation)
        members.extend(e.situation for e in self._episodes.values()
                       if e.branch_of is not None and tuple(e.branch_of) == (situation, tick))
        if not members:
            return {}
        weight = Fraction(1, len(members))
        return {m: weight for m in members}

    def pattern_degree(self, situation, interval, name, pattern=None):
        """P(S,I)：区间内各快照程度的平均；快照缺少该模式时按需在记忆上求值"""
        episode = self.episode(situation)
        if not episode.covers(interval):
            return None
        degrees = []
        for tick in range(interval[0], interval[1] + 1):
            state = episode.snapshot(tick)
            if name in state.pattern_degrees:
                degrees.append(state.pattern_degrees[name])
            elif pattern is not None and episode.memories:
                degrees.append(match_degree(pattern, episode.memories[episode.ticks().index(tick)]))
            else:
                degrees.append(Fraction(0))
        return sum(degrees, Fraction(0)) / len(degrees)


@dataclass(frozen=True)
class GoalSpec:
    """目标：状态上的模糊程度函数与权重；程度来自某个模式的显示程度或按状态键查表"""

    goal_id: str
    weight: Fraction = Fraction(1)
    pattern_name: str = None
    table: dict = None

    def __post_init__(self):
        object.__setattr__(self, 'weight', to_fraction(self.weight))
        if self.weight < 0:
            raise CogSynError(f"目标权重不能为负: {self.goal_id}")
        if self.table is not None:
            object.__setattr__(self, 'table', {k: _unit(v, f"目标 {self.goal_id} 的程度")
                                               for k, v in self.table.items()})

    def degree(self, pattern_degrees, state_key=None):
        if self.pattern_name is not None:
            return pattern_degrees.get(self.pattern_name, Fraction(0))
        if self.table is not None:
            return self.table.get(state_key, Fraction(0))
        return Fraction(0)


def snapshot_state(memory, catalog, tick, situation='', goals=(), snapshot_id=None, params=None):
    """
    在某一时刻给记忆拍快照：每个目录模式的显示程度，以及每个目标的达成程度
    """
    if len(catalog) == 0:
        raise CogSynError("模式目录不能为空")
    degrees = {entry.name: match_degree(entry.pattern, memory, params) for entry in catalog}
    key = profile_key(degrees)
    goal_degrees = {goal.goal_id: goal.degree(degrees, key) for goal in goals}
    return SystemState(snapshot_id or f"{situation}@{tick}", situation, tick, degrees, goal_degrees)


def extract_cpt(store, process_id, situations=None, interval=None):
    """
    G_A^{S,I}：某过程在给定情境与时间区间内显式记录的转移

    Args:
        situations: 情境编号集合，None 表示全部
        interval: (起点, 终点)，转移区间需完全落在其中
    """
    if process_id not in store.processes() and process_id != EXOGENOUS:
        raise UnknownProcessError(f"未知认知过程: {process_id}", process=process_id)
    cpt = CPTGraph(process_id)
    for episode in store:
        if situations is not None and episode.situation not in situations:
            continue
        for transition in episode.transitions:
            if transition.cause != process_id:
                continue
            if interval is not None and not (interval[0] <= transition.interval[0]
                                             and transition.interval[1] <= interval[1]):
                continue
            cpt.add_transition(transition)
    return cpt


def system_graph(store):
    """
    元系统的实例超图：每个快照一个 state 节点，每个转移一条 transition 链接

    Returns:
        (超图, (情境, 起始时刻) → 链接编号列表)
    """
    graph = Hypergraph('meta-system')
    nodes = {}
    by_start = {}
    for episode in store:
        for state in episode.snapshots:
            nodes[(episode.situation, state.tick)] = graph.add_node(STATE_TYPE)
        for transition in episode.transitions:
            source = nodes[(episode.situation, transition.interval[0])]
            target = nodes[(episode.situation, transition.interval[1])]
            link_id = graph.add_link(TRANSITION_TYPE, (source, target), [
                transition.probability, transition.confidence,
                transition.resource_cost.space, transition.resource_cost.time,
            ])
            by_start.setdefault((episode.situation, transition.interval[0]), []).append(link_id)
    return graph, by_start


def resource_transfer(budgets, source, target, amount):
    """
    把 source 的部分资源转给 target，总量逐分量守恒

    Returns:
        新的预算字典
    """
    for process in (source, target):
        if process not in budgets:
            raise UnknownProcessError(f"未知认知过程: {process}", process=process)
    if not isinstance(amount, ResourceBudget):
        amount = ResourceBudget(*amount)
    if not amount.fits_within(budgets[source]):
        raise InsufficientBudgetError(
            f"{source} 的剩余预算 ({budgets[source].space}, {budgets[source].time}) 不足以转出 "
            f"({amount.space}, {amount.time})", source=source)
    updated = dict(budgets)
    updated[source] = budgets[source] - amount
    if source != target:
        updated[target] = updated[target] + amount
    else:
        updated[target] = budgets[source]
    return updated
