"""
认知协同分析
- 停滞记录：每个 (情境, 时刻) 上各认知过程的停滞度
- cog-syn：在 [0,1] 的划分上，对"恰好一个过程停滞在该单元"的情形的概率加权平均
- 三元协同：恰好三个中的两个停滞在该单元
- 同态/同构普查：两个 CPT 图连通子图对之间的低代价同态与同构个数
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from models.cpt_graph import system_graph
from models.errors import InvalidPartitionError, ZeroWeightsError
from models.graph_probability import TransitionMassProbability
from models.homomorphism import find_homomorphisms
from models.hypergraph import NODE
from models.parameter_config import metric_params, search_params
from models.stuckness import conf_and_stuckness

logger = logging.getLogger(__name__)


# ---- 划分 ----

@dataclass(frozen=True)
class Cell:
    """I_d = (lower, upper]；closed_lower 为真时下端点也包含在内"""

    lower: Fraction
    upper: Fraction
    closed_lower: bool = False

    def __contains__(self, value):
        above = self.lower <= value if self.closed_lower else self.lower < value
        return above and value <= self.upper

    @property
    def midpoint(self):
        return (self.lower + self.upper) / 2

    def __str__(self):
        left = '[' if self.closed_lower else '('
        return f"{left}{self.lower},{self.upper}]"


def make_partition(cells=10):
    """等距划分：第一个单元 [0, 1/n] 闭，其余 (L, U] 半开"""
    if cells < 1:
        raise InvalidPartitionError(f"单元数必须为正: {cells}")
    return [Cell(Fraction(i, cells), Fraction(i + 1, cells), closed_lower=(i == 0)) for i in range(cells)]


def validate_partition(partition):
    """单元必须首尾相接、互不相交且覆盖 [0,1]"""
    if not partition:
        raise InvalidPartitionError("划分不能为空")
    cells = list(partition)
    if cells[0].lower != 0 or not cells[0].closed_lower:
        raise InvalidPartitionError("第一个单元必须是以 0 开始的闭区间")
    if cells[-1].upper != 1:
        raise InvalidPartitionError("最后一个单元必须以 1 结束")
    for previous, current in zip(cells, cells[1:]):
        if current.lower != previous.upper or current.closed_lower:
            raise InvalidPartitionError(f"单元 {previous} 与 {current} 没有首尾相接")
    for cell in cells:
        if cell.lower >= cell.upper and not (cell.closed_lower and cell.lower == cell.upper):
            raise InvalidPartitionError(f"单元 {cell} 为空")
    return cells


def cell_weights(partition, weights='midpoint'):
    if weights == 'midpoint':
        return [cell.midpoint for cell in partition]
    if weights == 'uniform':
        return [Fraction(1)] * len(partition)
    values = [Fraction(w) for w in weights]
    if len(values) != len(partition):
        raise InvalidPartitionError(f"权重个数 {len(values)} 与单元数 {len(partition)} 不一致")
    if any(w < 0 for w in values):
        raise ZeroWeightsError("单元权重不能为负")
    return values


# ---- 停滞记录 ----

@dataclass(frozen=True)
class StuckRecord:
    situation: str
    tick: int
    degrees: dict = field(default_factory=dict)

    @property
    def key(self):
        return self.situation, self.tick


def compute_stuck_records(store, processes, candidates, goals, params=None, budget_interval=None):
    """
    对每个有出向转移的 (情境, 时刻) 计算各过程的停滞度

    Returns:
        按 (情境, 时刻) 排序的 StuckRecord 列表，以及 (情境, 时刻, 过程) → StucknessResult
    """
    params = metric_params(params)
    candidates = list(candidates)
    records = []
    details = {}
    for episode in store:
        starts = sorted({t.interval[0] for t in episode.transitions})
        for tick in starts:
            g_cache = {}
            degrees = {}
            for process in processes:
                result = conf_and_stuckness(store, process, episode.situation, (tick, tick), candidates,
                                            goals, budget_interval=budget_interval, params=params,
                                            g_cache=g_cache)
                degrees[process] = result.stuck
                details[(episode.situation, tick, process)] = result
            records.append(StuckRecord(episode.situation, tick, degrees))
    records.sort(key=lambda r: r.key)
    logger.info(f"📊 计算了 {len(records)} 个 (情境, 时刻) 上 {len(processes)} 个过程的停滞度")
    return records, details


def stuck_set(records, a, b, cell):
    """恰好一个过程的停滞度落在单元内的 (情境, 时刻)，按字典序"""
    return sorted(r.key for r in records if (r.degrees[a] in cell) != (r.degrees[b] in cell))


def stuck_set_triple(records, a, b, c, cell):
    """恰好三个中的两个停滞在单元内"""
    return sorted(r.key for r in records
                  if sum(r.degrees[p] in cell for p in (a, b, c)) == 2)


# ---- 协同指数 ----

@dataclass
class SynergyReport:
    processes: tuple
    cells: list
    weights: list
    probabilities: list
    stuck_sets: list
    value: Fraction
    functional: str = 'transition-mass'

    def rows(self):
        return [
            {
                'processes': '|'.join(self.processes),
                'cell': str(cell),
                'weight': weight,
                'probability': probability,
                'stuck_pairs': len(pairs),
            }
            for cell, weight, probability, pairs in zip(self.cells, self.weights, self.probabilities,
                                                        self.stuck_sets)
        ]


def _synergy(store, processes, pair_finder, partition, weights, functional):
    cells = validate_partition(partition if partition is not None else make_partition())
    values = cell_weights(cells, weights)
    total_weight = sum(values, Fraction(0))
    if total_weight == 0:
        raise ZeroWeightsError("单元权重全为 0")
    functional = functional or TransitionMassProbability()
    ambient, by_start = system_graph(store)

    probabilities = []
    stuck_sets = []
    for cell in cells:
        pairs = pair_finder(cell)
        link_ids = [link_id for pair in pairs for link_id in by_start.get(pair, ())]
        sub = ambient.subgraph(link_ids)
        probabilities.append(Fraction(functional(sub, ambient).value))
        stuck_sets.append(pairs)
    value = sum((w * p for w, p in zip(values, probabilities)), Fraction(0)) / total_weight
    return SynergyReport(tuple(processes), cells, values, probabilities, stuck_sets, value, functional.name)


def cog_syn(store, records, a, b, partition=None, weights='midpoint', functional=None):
    """
    cog-syn_{A,B,𝓟} = Σ w_{I_d}·Prob(G^stuck_{A,B,I_d}) / Σ w_{I_d}

    Args:
        records: compute_stuck_records 的结果
        weights: 'midpoint'、'uniform' 或与单元一一对应的列表
        functional: 概率泛函，默认按元系统中转移链接的实例质量计
    """
    return _synergy(store, (a, b), lambda cell: stuck_set(records, a, b, cell),
                    partition, weights, functional)


def cog_syn_triple(store, records, a, b, c, partition=None, weights='midpoint', functional=None):
    return _synergy(store, (a, b, c), lambda cell: stuck_set_triple(records, a, b, c, cell),
                    partition, weights, functional)


# ---- 同态/同构普查 ----

@dataclass(frozen=True)
class CensusRecord:
    n_hom: int
    n_iso: int
    pairs: int
    truncated: bool = False

    @property
    def ratio(self):
        if self.n_iso:
            return Fraction(self.n_hom, self.n_iso)
        return float('inf') if self.n_hom else None


def _skeleton(g):
    skeleton = nx.Graph()
    skeleton.add_nodes_from(g.node_ids())
    for link in g.links():
        nodes = [t for t in link.targets if g.atom(t).kind == NODE]
        skeleton.add_edges_from(itertools.combinations(nodes, 2))
    return skeleton


def connected_subgraphs(g, size_bound):
    """节点数不超过 size_bound 的连通诱导子图（按节点组合的字典序）"""
    skeleton = _skeleton(g)
    node_ids = g.node_ids()
    result = []
    for size in range(1, min(size_bound, len(node_ids)) + 1):
        for subset in itertools.combinations(node_ids, size):
            if nx.is_connected(skeleton.subgraph(subset)):
                result.append(g.induced_subgraph(subset))
    return result


def _is_bijective(hom, src, dst):
    if src.num_nodes != dst.num_nodes or src.num_links != dst.num_links:
        return False
    images = {hom.vertex_map[a.id] for a in src}
    return len(images) == len(src)


def hom_iso_census(graph_a, graph_b, cost_ceiling, size_bound, params=None):
    """
    统计两图连通子图对之间代价不超过上限的同态个数，以及其中的同构个数；同构一定也计为同态

    Returns:
        CensusRecord；子图对超过上限或搜索被截断时 truncated 为真
    """
    params = search_params(params)
    subs_a = connected_subgraphs(graph_a, size_bound)
    subs_b = connected_subgraphs(graph_b, size_bound)
    n_hom = n_iso = pairs = 0
    truncated = False
    for x, y in itertools.product(subs_a, subs_b):
        if pairs >= params['census_max_pairs']:
            truncated = True
            logger.warning(f"⚠️ 普查达到子图对上限 {params['census_max_pairs']}，结果不完整")
            break
        pairs += 1
        homs = find_homomorphisms(x, y, max_cost=cost_ceiling, params=params)
        truncated = truncated or homs.truncated
        n_hom += len(homs)
        n_iso += sum(1 for hom in homs if _is_bijective(hom, x, y))
    return CensusRecord(n_hom, n_iso, pairs, truncated)
