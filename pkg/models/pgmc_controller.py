"""
PGMC 控制：从历史中挖掘 h-模式，按模式估计的适应度抽样下一个认知动作
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from models.cpt_graph import CatalogEntry, PatternCatalog
from models.errors import CogSynError, TooLargeError
from models.homomorphism import canonical_form
from models.hypergraph import NODE, VARIABLE, Hypergraph
from models.parameter_config import metric_params, search_params
from models.pattern_matching import HPattern, has_match
from models.stuckness import conf_and_stuckness

logger = logging.getLogger(__name__)

IMPLICATION_LINK = 'implication'
PATTERN_NODE_PREFIX = 'pattern:'


# ---- 适应度抽样 ----

def fitness_distribution(fitness, epsilon=None):
    """
    适应度（None 视为 0）先以 ε 为下限，再归一化为精确概率

    Args:
        fitness: 动作 → 适应度
    """
    if not fitness:
        raise CogSynError("至少需要一个可选动作")
    epsilon = Fraction(epsilon if epsilon is not None else metric_params()['epsilon'])
    floored = {action: max(Fraction(value) if value is not None else Fraction(0), epsilon)
               for action, value in fitness.items()}
    total = sum(floored.values(), Fraction(0))
    return {action: value / total for action, value in sorted(floored.items())}


def sample_actions(distribution, seed, draws=1):
    """按分布抽样；同一种子得到同一序列"""
    actions = list(distribution)
    probabilities = np.array([float(distribution[a]) for a in actions])
    probabilities = probabilities / probabilities.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(actions), size=draws, p=probabilities)
    return [actions[i] for i in picks]


@dataclass
class PGMCChoice:
    action: str
    distribution: dict
    fitness: dict
    results: dict = field(default_factory=dict)
    written_links: list = field(default_factory=list)


def _pattern_node(memory, name):
    type_name = f"{PATTERN_NODE_PREFIX}{name}"
    for node in memory.nodes():
        if node.type_name == type_name:
            return node.id
    return memory.add_node(type_name)


def write_implication_links(memory, current_patterns, result):
    """
    从当前状态显示的模式节点指向候选未来模式节点的 implication 链接，权重 [e, c_e]
    """
    if result.argmax_pattern is None:
        return []
    e, c_e = result.factors[2], result.factors[3]
    weights = [e if e is not None else Fraction(0), c_e]
    target = _pattern_node(memory, result.argmax_pattern)
    written = []
    for name in current_patterns:
        source = _pattern_node(memory, name)
        if memory.has_link(IMPLICATION_LINK, (source, target)):
            continue
        written.append(memory.add_link(IMPLICATION_LINK, (source, target), weights))
    return written


def pgmc_choose(actions, store, situation, tick, candidates, goals, seed,
                memory=None, params=None, write_links=True):
    """
    PGMC 一步：对每个可选认知过程计算四因子置信度作为适应度，按适应度比例抽样

    Args:
        actions: 可选认知过程编号
        candidates: 模式候选（挖掘结果或目录）
        memory: 记忆超图；给出且 write_links 为真时写入 implication 链接

    Returns:
        PGMCChoice
    """
    params = metric_params(params)
    actions = sorted(set(actions))
    if not actions:
        raise CogSynError("至少需要一个可选动作")
    candidates = list(candidates)
    g_cache = {}
    results = {}
    fitness = {}
    for action in actions:
        result = conf_and_stuckness(store, action, situation, (tick, tick), candidates, goals,
                                    params=params, g_cache=g_cache)
        results[action] = result
        fitness[action] = result.conf

    distribution = fitness_distribution(fitness, params['epsilon'])
    chosen = sample_actions(distribution, seed)[0]

    written = []
    if memory is not None and write_links:
        state = store.state_at(situation, tick)
        current = sorted(name for name, degree in state.pattern_degrees.items() if degree == 1)
        for action in actions:
            written.extend(write_implication_links(memory, current, results[action]))
    logger.debug(f"PGMC 在 {situation}@{tick} 选择 {chosen}，分布 {distribution}")
    return PGMCChoice(chosen, distribution, fitness, results, written)


# ---- 历史模式挖掘 ----

def _snapshots(source):
    if isinstance(source, (list, tuple)):
        return list(source)
    return source.memory_snapshots()


def _observed_signatures(snapshots):
    node_types = set()
    link_signatures = set()
    for graph in snapshots:
        for atom in graph:
            if atom.kind == NODE:
                if atom.type_name is not None:
                    node_types.add(atom.type_name)
            elif atom.type_name is not None and all(graph.atom(t).kind == NODE for t in atom.targets):
                link_signatures.add((atom.type_name, atom.arity))
    return sorted(node_types), sorted(link_signatures)


def _extensions(body, node_types, link_signatures):
    for type_name in [VARIABLE] + [t for t in node_types if t != VARIABLE]:
        extended = body.copy()
        extended.add_node(type_name)
        yield extended
    node_ids = body.node_ids()
    for type_name, arity in link_signatures:
        for targets in itertools.product(node_ids, repeat=arity):
            if body.has_link(type_name, targets):
                continue
            extended = body.copy()
            extended.add_link(type_name, targets)
            yield extended


def _has_isolated_variable(body):
    return any(atom.is_variable and not body.incoming(atom.id) for atom in body)


def _support(body, snapshots, params):
    return sum(1 for graph in snapshots if has_match(body, graph, params))


def mine_history_patterns(source, min_support, max_atoms, params=None):
    """
    逐原子扩展的频繁子超图挖掘，规范形去重，在 max_atoms 以内穷尽

    Args:
        source: EpisodeStore 或记忆快照列表
        min_support: 最小支持度（匹配的快照个数）

    Returns:
        PatternCatalog，条目名为 mined-NNN，按 (原子数, 规范键) 排序
    """
    params = search_params(params)
    if max_atoms > params['mine_max_atoms']:
        raise TooLargeError(f"max_atoms={max_atoms} 超过挖掘上限 {params['mine_max_atoms']}",
                            max_atoms=max_atoms)
    snapshots = _snapshots(source)
    if min_support > len(snapshots) or max_atoms < 1:
        return PatternCatalog()

    node_types, link_signatures = _observed_signatures(snapshots)
    frequent = {}
    frontier = []
    for type_name in [VARIABLE] + node_types:
        seed = Hypergraph('mined')
        seed.add_node(type_name)
        key = canonical_form(seed, params)
        support = _support(seed, snapshots, params)
        if key not in frequent and support >= min_support:
            frequent[key] = (seed, support)
            frontier.append(seed)

    size = 1
    while frontier and size < max_atoms:
        next_frontier = []
        for body in frontier:
            for extended in _extensions(body, node_types, link_signatures):
                key = canonical_form(extended, params)
                if key in frequent:
                    continue
                support = _support(extended, snapshots, params)
                if support >= min_support:
                    frequent[key] = (extended, support)
                    next_frontier.append(extended)
        frontier = next_frontier
        size += 1

    kept = sorted(((len(body), key, body, support) for key, (body, support) in frequent.items()
                   if not _has_isolated_variable(body)), key=lambda item: (item[0], item[1]))
    catalog = PatternCatalog()
    for index, (_, key, body, support) in enumerate(kept, start=1):
        catalog.add(CatalogEntry(f"mined-{index:03d}", HPattern.atomic(body), key, support))
    logger.info(f"📊 从 {len(snapshots)} 个快照中挖掘出 {len(catalog)} 个频繁模式")
    return catalog
