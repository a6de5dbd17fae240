"""
玩具认知过程规则库与情境模拟
每个认知过程只做基本的超图改写（建链、合并、分裂、删除、创建），
因此记录下来的 CPT 图本身就由合并/分裂同态组成。
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from models.agent_simulation import Event
from models.cpt_graph import Episode, ResourceBudget, Transition, snapshot_state
from models.errors import CogSynError, UnknownProcessError
from models.homomorphism import merge_nodes, split_node
from models.hypergraph import Hypergraph

logger = logging.getLogger(__name__)


def _typed_nodes(memory, node_type):
    return [n.id for n in memory.nodes() if node_type is None or n.type_name == node_type]


def _linked(memory, link_type, u, v):
    return memory.has_link(link_type, (u, v)) or memory.has_link(link_type, (v, u))


def _unlinked_pairs(memory, node_type, link_type):
    nodes = _typed_nodes(memory, node_type)
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:] if not _linked(memory, link_type, u, v)]


def link_first_pair(memory, spec, rng):
    pairs = _unlinked_pairs(memory, spec.node_type, spec.link_type)
    if not pairs:
        return memory, False
    result = memory.copy()
    result.add_link(spec.link_type, pairs[0])
    return result, True


def link_random_pair(memory, spec, rng):
    pairs = _unlinked_pairs(memory, spec.node_type, spec.link_type)
    if not pairs:
        return memory, False
    result = memory.copy()
    result.add_link(spec.link_type, pairs[int(rng.integers(len(pairs)))])
    return result, True


def merge_first_pair(memory, spec, rng):
    nodes = _typed_nodes(memory, spec.node_type)
    pairs = [(u, v) for u, v in itertools.combinations(nodes, 2)
             if memory.atom(u).type_name == memory.atom(v).type_name]
    if not pairs:
        return memory, False
    result, _ = merge_nodes(memory, *pairs[0])
    return result, True


def split_busiest(memory, spec, rng):
    nodes = [n for n in _typed_nodes(memory, spec.node_type) if memory.degree(n) >= 2]
    if not nodes:
        return memory, False
    hub = max(nodes, key=lambda n: (memory.degree(n), -n))
    incident = list(memory.incoming(hub))
    half = len(incident) // 2
    result, _ = split_node(memory, hub, (incident[:half], incident[half:]))
    return result, True


def forget_first(memory, spec, rng):
    nodes = _typed_nodes(memory, spec.node_type)
    if not nodes:
        return memory, False
    result = memory.copy()
    result.discard(nodes[0])
    return result, True


def create_node(memory, spec, rng):
    result = memory.copy()
    result.add_node(spec.node_type)
    return result, True


def idle(memory, spec, rng):
    return memory, False


RULES = {
    'linker': link_first_pair,
    'random_linker': link_random_pair,
    'merger': merge_first_pair,
    'splitter': split_busiest,
    'forgetter': forget_first,
    'creator': create_node,
    'idle': idle,
}


@dataclass(frozen=True)
class ProcessSpec:
    """一个命名的玩具认知过程：规则 + 参数 + 每次行动的资源代价"""

    process_id: str
    rule: str = 'idle'
    node_type: str = None
    link_type: str = 'edge'
    cost: ResourceBudget = field(default_factory=lambda: ResourceBudget(1, 0))

    def __post_init__(self):
        if self.rule not in RULES:
            raise CogSynError(f"未知规则 {self.rule}，可选: {', '.join(sorted(RULES))}",
                              process=self.process_id)
        if self.rule == 'creator' and self.node_type is None:
            raise CogSynError("creator 规则需要 node_type", process=self.process_id)
        if not isinstance(self.cost, ResourceBudget):
            object.__setattr__(self, 'cost', ResourceBudget(*self.cost))

    def apply(self, memory, rng):
        """返回 (新记忆, 是否改变)；不修改输入"""
        return RULES[self.rule](memory, self, rng)


@dataclass
class SituationSpec:
    situation: str
    seed: int = 0
    memory: Hypergraph = field(default_factory=Hypergraph)
    schedule: tuple = ()
    branch_of: tuple = None


@dataclass
class SituationRun:
    """模拟的原始结果：逐时刻记忆和引起每步变化的过程，状态待目录确定后再计算"""

    spec: SituationSpec
    memories: list
    causes: list
    events: list


def simulate_situation(spec, processes, ticks):
    """
    按日程逐时刻执行认知过程；时刻 0 是初始记忆，时刻 t ≥ 1 是执行日程第 t 项之后的记忆

    Args:
        processes: 过程编号 → ProcessSpec
        ticks: 执行的步数；日程短于步数时循环使用
    """
    if not spec.schedule:
        raise CogSynError(f"情境 {spec.situation} 的日程为空", situation=spec.situation)
    for process_id in spec.schedule:
        if process_id not in processes:
            raise UnknownProcessError(f"情境 {spec.situation} 引用了未定义的过程 {process_id}",
                                      process=process_id)
    rng = np.random.default_rng(spec.seed)
    memories = [spec.memory.copy()]
    causes = []
    events = []
    for tick in range(1, ticks + 1):
        process = processes[spec.schedule[(tick - 1) % len(spec.schedule)]]
        memory, changed = process.apply(memories[-1], rng)
        memories.append(memory)
        causes.append(process.process_id)
        events.append(Event(tick, 0, 'cognit', cognit=process.process_id))
        if not changed:
            logger.debug(f"{spec.situation}@{tick}: {process.process_id} 没有可做的改写")
    return SituationRun(spec, memories, causes, events)


def build_episode(run, processes, catalog, goals=(), params=None):
    """在给定模式目录下为一次模拟计算快照和转移"""
    situation = run.spec.situation
    snapshots = [snapshot_state(memory, catalog, tick, situation, goals, params=params)
                 for tick, memory in enumerate(run.memories)]
    transitions = []
    for tick, cause in enumerate(run.causes, start=1):
        transitions.append(Transition(
            snapshots[tick - 1].key, snapshots[tick].key, cause,
            resource_cost=processes[cause].cost, interval=(tick - 1, tick), situation=situation,
        ))
    return Episode(situation, run.spec.seed, snapshots, transitions, list(run.events),
                   list(run.memories), run.spec.branch_of)
