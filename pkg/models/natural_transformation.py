"""
函子投影与自然变换
- F_A(X)：把转移子图 X 中每个非 A 转移替换为 A 已记录转移中连接同一对状态的最短路径；
  找不到路径的转移记为缺口，代价为无穷
- 对象是记录下来的转移集合，态射是包含关系 X ⊆ Y，F(f) 是诱导的包含
- η_X: F_A(X) → F_B(X) 是状态图之间的同态；自然性要求 η_Y 在 F_A(X) 的状态上与 η_X 完全一致
- 代价比较：cost(η^{A,B}_X) + cost(F_B(f)) + cost(η^{B,A}_Y) 对 cost(F_A(f))
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from models.cpt_graph import Episode, EpisodeStore, ResourceBudget, SystemState, Transition
from models.errors import CogSynError, NoComponentError, UndecidedAtScaleError
from models.homomorphism import find_homomorphisms
from models.hypergraph import Hypergraph
from models.parameter_config import search_params

logger = logging.getLogger(__name__)

INFINITE = math.inf


def total_cost(transitions):
    return sum((t.cost for t in transitions), Fraction(0))


def _transition_order(transition):
    return transition.situation, transition.interval, transition.cause, transition.source, transition.target


@dataclass(frozen=True)
class FunctorProjection:
    source: frozenset
    process: str
    legs: dict = field(default_factory=dict, compare=False)
    transitions: frozenset = frozenset()
    gaps: tuple = ()
    identities: tuple = ()

    @property
    def cost(self):
        return INFINITE if self.gaps else total_cost(self.transitions)

    def states(self):
        keys = set()
        for transition in self.transitions:
            keys.update((transition.source, transition.target))
        for gap in self.gaps:
            keys.update((gap.source, gap.target))
        return keys


class Functor:
    """F_A：沿 A 的已记录转移做最短路径替换；同一转移总是得到同一条路径"""

    def __init__(self, process, transitions):
        self.process = process
        self.graph = nx.DiGraph()
        for transition in sorted(transitions, key=_transition_order):
            if transition.cause != process:
                continue
            u, v = transition.source, transition.target
            current = self.graph.get_edge_data(u, v)
            if current is None or transition.cost < current['cost']:
                self.graph.add_edge(u, v, cost=transition.cost, transition=transition)

    @classmethod
    def from_store(cls, process, store):
        return cls(process, store.all_transitions())

    def replacement(self, transition):
        """
        返回替换路径（转移元组），没有 A 路径时返回 None。
        A 以外的自环替换为该状态上的恒等（空路径，代价 0），调用方从 identities 中可以看到这些转移。
        """
        if transition.cause == self.process:
            return (transition,)
        if transition.source == transition.target:
            return ()
        try:
            path = nx.dijkstra_path(self.graph, transition.source, transition.target, weight='cost')
        except (nx.NetworkXNoPath, nx.NodeNotFound):
            return None
        return tuple(self.graph.edges[u, v]['transition'] for u, v in zip(path, path[1:]))

    def __call__(self, transitions):
        source = frozenset(transitions)
        legs = {}
        kept = set()
        gaps = []
        identities = []
        for transition in sorted(source, key=_transition_order):
            path = self.replacement(transition)
            legs[transition] = path
            if path is None:
                gaps.append(transition)
            else:
                kept.update(path)
                if not path:
                    identities.append(transition)
        if gaps:
            logger.info(f"⚠️ F_{self.process} 有 {len(gaps)} 个转移找不到替代路径")
        if identities:
            logger.debug(f"F_{self.process} 把 {len(identities)} 个自环投影为恒等")
        return FunctorProjection(source, self.process, legs, frozenset(kept), tuple(gaps), tuple(identities))

    def morphism_cost(self, morphism):
        """F(f) 的代价：F(Y) 中不属于 F(X) 的转移代价之和；新增缺口时为无穷"""
        small = self(morphism.source)
        large = self(morphism.target)
        if set(large.gaps) - set(small.gaps):
            return INFINITE
        return total_cost(large.transitions - small.transitions)


def functor_project(transitions, process, store):
    return Functor.from_store(process, store)(transitions)


@dataclass(frozen=True)
class Morphism:
    source: frozenset
    target: frozenset
    name: str = 'f'

    def __post_init__(self):
        object.__setattr__(self, 'source', frozenset(self.source))
        object.__setattr__(self, 'target', frozenset(self.target))
        if not self.source <= self.target:
            raise CogSynError(f"态射 {self.name} 不是包含关系")

    def then(self, other):
        if other.source != self.target:
            raise CogSynError(f"态射 {self.name} 与 {other.name} 不可复合")
        return Morphism(self.source, other.target, f"{other.name}∘{self.name}")


# ---- 状态图与分量 ----

def state_graph(projection):
    """
    投影的状态图：每个状态键一个 state 节点（按键排序），每对 (起点, 终点) 一条 transition 链接

    Returns:
        (超图, 节点编号 → 状态键)
    """
    graph = Hypergraph(f"F_{projection.process}")
    ids = {}
    for key in sorted(projection.states()):
        ids[key] = graph.add_node('state')
    for transition in sorted(projection.transitions, key=_transition_order):
        pair = (ids[transition.source], ids[transition.target])
        if not graph.has_link('transition', pair):
            graph.add_link('transition', pair)
    return graph, {node_id: key for key, node_id in ids.items()}


@dataclass(frozen=True)
class Component:
    """η_X：状态键之间的映射及其代价"""

    mapping: tuple
    merges: Fraction = Fraction(0)
    translation: Fraction = Fraction(0)

    @property
    def cost(self):
        return self.merges + self.translation

    def as_dict(self):
        return dict(self.mapping)

    @property
    def is_identity(self):
        return all(k == v for k, v in self.mapping)

    def sort_key(self):
        return self.cost, not self.is_identity, self.mapping


def candidate_components(source, target, translation_cost, params):
    """
    F_A(X) → F_B(X) 的候选分量，按 (代价, 非恒等, 映射) 排序

    Returns:
        (候选列表, 是否完整)
    """
    src_graph, src_keys = state_graph(source)
    dst_graph, dst_keys = state_graph(target)
    homs = find_homomorphisms(src_graph, dst_graph, params=params)
    components = {}
    for hom in homs:
        mapping = tuple(sorted((src_keys[n], dst_keys[hom.vertex_map[n]]) for n in src_keys))
        component = Component(mapping, hom.cost, Fraction(translation_cost))
        components[mapping] = component
    ordered = sorted(components.values(), key=Component.sort_key)
    limit = params['nat_trans_max_candidates']
    complete = not homs.truncated and len(ordered) <= limit
    return ordered[:limit], complete


def commutes(eta_x, eta_y, source_states):
    """η_Y ∘ F_A(f) = F_B(f) ∘ η_X，在 F_A(X) 的每个状态上逐点比较"""
    x_map = eta_x.as_dict()
    y_map = eta_y.as_dict()
    return all(y_map.get(state) == x_map.get(state) for state in source_states)


@dataclass
class NaturalTransformation:
    source: Functor
    target: Functor
    components: dict
    verified: bool = False

    @property
    def pair(self):
        return self.source.process, self.target.process

    def component(self, obj):
        obj = frozenset(obj)
        if obj not in self.components:
            raise NoComponentError(f"η^{{{self.source.process},{self.target.process}}} 在该对象上没有分量")
        return self.components[obj]


@dataclass
class NaturalityFailure:
    """失败证书：第一个找不到交换选择的自然性方块"""

    pair: tuple
    morphism: Morphism = None
    obj: frozenset = None
    reason: str = ''


def nat_trans_search(functor_a, functor_b, objects, morphisms=(), params=None, translation_cost=1):
    """
    在桌面规模上穷尽搜索自然变换 η: F_A ⇒ F_B

    Args:
        objects: 转移集合列表
        morphisms: Morphism 列表，端点必须在 objects 中
        translation_cost: 不同过程之间每个分量的固定翻译代价；F_A 与 F_B 相同时为 0

    Returns:
        NaturalTransformation（已复核）或 NaturalityFailure
    """
    params = search_params(params)
    objects = [frozenset(o) for o in dict.fromkeys(frozenset(o) for o in objects)]
    morphisms = list(morphisms)
    pair = (functor_a.process, functor_b.process)
    for morphism in morphisms:
        for end in (morphism.source, morphism.target):
            if end not in objects:
                raise CogSynError(f"态射 {morphism.name} 的端点不在对象列表中")
    translation = 0 if functor_a.process == functor_b.process else translation_cost

    projections_a = {o: functor_a(o) for o in objects}
    projections_b = {o: functor_b(o) for o in objects}
    candidates = {}
    complete = True
    for obj in objects:
        options, exhaustive = candidate_components(projections_a[obj], projections_b[obj], translation, params)
        complete = complete and exhaustive
        if not options:
            if exhaustive:
                return NaturalityFailure(pair, obj=obj, reason='no-component')
            raise UndecidedAtScaleError("分量候选搜索被截断，无法判定")
        candidates[obj] = options

    combinations = math.prod(len(candidates[o]) for o in objects)
    if combinations > params['nat_trans_max_combinations']:
        raise UndecidedAtScaleError(f"分量组合数 {combinations} 超过上限", combinations=combinations)

    for morphism in morphisms:
        states = projections_a[morphism.source].states()
        if not any(commutes(ex, ey, states)
                   for ex, ey in itertools.product(candidates[morphism.source], candidates[morphism.target])):
            if not complete:
                raise UndecidedAtScaleError(f"方块 {morphism.name} 在截断的候选集上不交换")
            return NaturalityFailure(pair, morphism=morphism, reason='square-never-commutes')

    index = {o: i for i, o in enumerate(objects)}
    checks = {i: [] for i in range(len(objects))}
    for morphism in morphisms:
        checks[max(index[morphism.source], index[morphism.target])].append(morphism)

    chosen = {}
    deepest = [None]

    def assign(i):
        if i == len(objects):
            return True
        obj = objects[i]
        for option in candidates[obj]:
            chosen[obj] = option
            failed = next((m for m in checks[i]
                           if not commutes(chosen[m.source], chosen[m.target],
                                           projections_a[m.source].states())), None)
            if failed is None and assign(i + 1):
                return True
            if failed is not None:
                deepest[0] = failed
            del chosen[obj]
        return False

    if not assign(0):
        if not complete:
            raise UndecidedAtScaleError("候选集被截断，未找到自然变换")
        return NaturalityFailure(pair, morphism=deepest[0], reason='no-global-choice')

    transformation = NaturalTransformation(functor_a, functor_b, dict(chosen))
    transformation.verified = not verify_naturality(transformation, morphisms)
    return transformation


def verify_naturality(transformation, morphisms):
    """
    独立复核：按映射复合逐点检查每个方块

    Returns:
        不交换的 (态射名, 状态) 列表
    """
    failures = []
    for morphism in morphisms:
        eta_x = transformation.component(morphism.source).as_dict()
        eta_y = transformation.component(morphism.target).as_dict()
        small_b = transformation.target(morphism.source).states()
        large_b = transformation.target(morphism.target).states()
        for state in sorted(transformation.source(morphism.source).states()):
            # F_A(f) 与 F_B(f) 都是包含映射
            left = eta_y.get(state)
            right = eta_x.get(state)
            if left is None or right is None or left != right or right not in small_b or right not in large_b:
                failures.append((morphism.name, state))
    return failures


# ---- 代价不等式 ----

@dataclass(frozen=True)
class CostComparison:
    indirect: object
    direct: object
    holds: bool
    margin: object
    legs: tuple = ()


def commutation_cost_compare(eta_ab, eta_ba, morphism):
    """
    cost(η^{A,B}_X) + cost(F_B(f)) + cost(η^{B,A}_Y) 对 cost(F_A(f))；holds 表示严格小于
    """
    functor_a, functor_b = eta_ab.source, eta_ab.target
    leg_x = eta_ab.component(morphism.source).cost
    leg_f = functor_b.morphism_cost(morphism)
    leg_y = eta_ba.component(morphism.target).cost
    indirect = leg_x + leg_f + leg_y
    direct = functor_a.morphism_cost(morphism)
    holds = indirect < direct
    if indirect == INFINITE and direct == INFINITE:
        margin = None
    else:
        margin = direct - indirect
    return CostComparison(indirect, direct, holds, margin, (leg_x, leg_f, leg_y))


# ---- 推理/进化示例 ----

START, BOB_NICE, BOB_HELPFUL = 'Start', 'BobNice', 'BobHelpful'
INFERENCE, EVOLUTION = 'inference', 'evolution'


def _bob_episode(situation, process, costs):
    labels = (START, BOB_NICE, BOB_HELPFUL)
    snapshots = [SystemState(f"{situation}@{t}", situation, t, label=label) for t, label in enumerate(labels)]
    transitions = [
        Transition(labels[t], labels[t + 1], process, resource_cost=ResourceBudget(0, cost),
                   interval=(t, t + 1), situation=situation)
        for t, cost in enumerate(costs)
    ]
    return Episode(situation, 0, snapshots, transitions)


@dataclass
class DiagramReport:
    corners: dict
    comparison: CostComparison
    swapped: CostComparison
    forward: NaturalTransformation
    backward: NaturalTransformation


def bob_nice_store(equal_costs=False):
    """
    两个玩具过程：类推理过程从"Bob 友善"推出"Bob 乐于助人"代价高，类进化过程代价低。
    equal_costs 为真时所有转移代价都是 1（对照组）

    Returns:
        (store, X, Y)
    """
    slow = 1 if equal_costs else 10
    store = EpisodeStore([INFERENCE, EVOLUTION])
    inference = store.add_episode(_bob_episode('bob-inference', INFERENCE, (1, slow)))
    store.add_episode(_bob_episode('bob-evolution', EVOLUTION, (1, 1)))
    x = frozenset(inference.transitions[:1])
    y = frozenset(inference.transitions)
    return store, x, y


def demo_diagrams(equal_costs=False, params=None):
    """运行推理/进化示例：四个角、各腿代价和代价比较"""
    store, x, y = bob_nice_store(equal_costs)
    functor_a = Functor.from_store(INFERENCE, store)
    functor_b = Functor.from_store(EVOLUTION, store)
    f = Morphism(x, y, 'f')
    forward = nat_trans_search(functor_a, functor_b, [x, y], [f], params)
    backward = nat_trans_search(functor_b, functor_a, [x, y], [f], params)
    for transformation in (forward, backward):
        if isinstance(transformation, NaturalityFailure):
            raise CogSynError(f"示例中找不到自然变换: {transformation.reason}")
    corners = {
        'F_A(X)': functor_a(x),
        'F_A(Y)': functor_a(y),
        'F_B(X)': functor_b(x),
        'F_B(Y)': functor_b(y),
    }
    comparison = commutation_cost_compare(forward, backward, f)
    swapped = commutation_cost_compare(backward, forward, f)
    return DiagramReport(corners, comparison, swapped, forward, backward)
