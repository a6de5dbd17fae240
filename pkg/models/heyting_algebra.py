"""
超图上的 Heyting 代数
- 并（join）：不相交并
- 交（meet）：范畴直积
- 指数 A^B：节点是 B 的状态到 A 的状态的全函数；也就是蕴涵 B → A
- 代价序：A ≤ A1 当且仅当存在同态 A1 → A，且 A 位于 A1 的最短构造路径上
- 固定环境图内的子对象格：并、交、相对蕴涵、伪补
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass

from models.errors import CogSynError, ExponentTooLargeError, UndecidedAtScaleError
from models.homomorphism import MapSearch, canonical_form, merge_nodes
from models.hypergraph import LINK, NODE, Hypergraph, Label
from models.parameter_config import search_params

logger = logging.getLogger(__name__)

FUNCTION_TYPE = 'function'


def join_with_maps(a, b):
    """
    Returns:
        (不相交并, A 的编号映射, B 的编号映射)
    """
    result = Hypergraph()
    maps = []
    for graph in (a, b):
        mapping = {}
        for atom in graph:
            targets = tuple(mapping[t] for t in atom.targets)
            mapping[atom.id] = result.add_atom(atom.kind, targets, atom.label)
        maps.append(mapping)
    return result, maps[0], maps[1]


def join(a, b):
    return join_with_maps(a, b)[0]


def product_type(type_a, type_b):
    """积的类型名：成分集合排序后以 & 连接，因此 t&t = t，缺省类型视为单位"""
    parts = set()
    for type_name in (type_a, type_b):
        if type_name is not None:
            parts.update(type_name.split('&'))
    return '&'.join(sorted(parts)) if parts else None


def product_label(label_a, label_b):
    type_name = product_type(label_a.type_name if label_a else None,
                             label_b.type_name if label_b else None)
    if type_name is None:
        return None
    weights = ()
    if label_a and label_b and label_a.weights and len(label_a.weights) == len(label_b.weights):
        weights = tuple(x * y for x, y in zip(label_a.weights, label_b.weights))
    return Label(type_name, weights)


def meet_with_pairs(a, b):
    """
    Returns:
        (直积超图, 积中原子编号 → (A 原子, B 原子))
    """
    result = Hypergraph()
    pair_id = {}
    for node_a in a.nodes():
        for node_b in b.nodes():
            pair_id[(node_a.id, node_b.id)] = result.add_atom(
                NODE, (), product_label(node_a.label, node_b.label))
    for link_a in a.links():
        for link_b in b.links():
            if link_a.type_name != link_b.type_name or link_a.arity != link_b.arity:
                continue
            pairs = tuple(zip(link_a.targets, link_b.targets))
            if any(p not in pair_id for p in pairs):
                continue
            pair_id[(link_a.id, link_b.id)] = result.add_atom(
                LINK, tuple(pair_id[p] for p in pairs), product_label(link_a.label, link_b.label))
    return result, {v: k for k, v in pair_id.items()}


def meet(a, b):
    return meet_with_pairs(a, b)[0]


@dataclass
class ExponentGraph:
    graph: Hypergraph
    functions: dict

    def function(self, node_id):
        return dict(self.functions[node_id])

    def node_for(self, mapping):
        for node_id, pairs in self.functions.items():
            if dict(pairs) == dict(mapping):
                return node_id
        raise KeyError(mapping)


def _shared_node_type(a, b):
    types = {n.type_name for n in a.nodes()} | {n.type_name for n in b.nodes()}
    if len(types) == 1:
        return next(iter(types))
    return FUNCTION_TYPE


def exponent(a, b, params=None, link_types=None):
    """
    构造 A^B：对每种二元链接类型 τ，(F, G) 之间有 τ 链接当且仅当
    B 中每条 τ 链接 (x, y) 都满足 (F(x), G(y)) 是 A 中的 τ 链接。
    其他元数的超链接不参与，记录警告。

    Args:
        link_types: 参与构造的链接类型，默认取 A、B 中出现的二元链接类型
    """
    params = search_params(params)
    a_nodes = a.node_ids()
    b_nodes = b.node_ids()
    size = len(a_nodes) ** len(b_nodes)
    if size > params['exponent_max_nodes']:
        raise ExponentTooLargeError(f"指数图需要 {size} 个节点，超过上限 {params['exponent_max_nodes']}",
                                    size=size)
    ignored = [l.id for l in a.links() + b.links() if l.arity != 2]
    if ignored:
        logger.warning(f"⚠️ 指数构造忽略 {len(ignored)} 个非二元超链接")

    if link_types is None:
        link_types = {l.type_name for l in a.links() + b.links() if l.arity == 2}
    link_types = sorted(link_types, key=lambda t: (t is not None, t or ''))

    node_type = _shared_node_type(a, b)
    result = Hypergraph()
    functions = {}
    index_of = {}
    for images in itertools.product(a_nodes, repeat=len(b_nodes)):
        node_id = result.add_node(node_type)
        functions[node_id] = tuple(zip(b_nodes, images))
        index_of[images] = node_id

    position = {n: i for i, n in enumerate(a_nodes)}
    for link_type in link_types:
        successors = {n: set() for n in a_nodes}
        for link in a.links():
            if link.type_name == link_type and link.arity == 2 and all(t in successors for t in link.targets):
                successors[link.targets[0]].add(link.targets[1])
        constraints = [l.targets for l in b.links()
                       if l.type_name == link_type and l.arity == 2 and all(b.atom(t).is_node for t in l.targets)]

        for f_images, f_id in index_of.items():
            f_map = dict(zip(b_nodes, f_images))
            allowed = []
            for y in b_nodes:
                candidates = set(a_nodes)
                for x, target in constraints:
                    if target == y:
                        candidates &= successors[f_map[x]]
                allowed.append(sorted(candidates, key=position.get))
            for g_images in itertools.product(*allowed):
                result.add_link(link_type, (f_id, index_of[g_images]))
    return ExponentGraph(result, functions)


def implication(b, a, params=None, link_types=None):
    """蕴涵 B → A，即 A^B"""
    return exponent(a, b, params, link_types)


def _reductions(g):
    """A1 一步可达的缩减：删除无入链的链接、删除孤立节点、不折叠链接的合并"""
    for link_id in g.link_ids():
        if not g.incoming(link_id):
            reduced = g.copy()
            reduced.discard(link_id)
            yield reduced
    for node_id in g.node_ids():
        if not g.incoming(node_id):
            reduced = g.copy()
            reduced.discard(node_id)
            yield reduced
    nodes = g.nodes()
    for first, second in itertools.combinations(nodes, 2):
        if first.type_name != second.type_name:
            continue
        merged, _ = merge_nodes(g, first.id, second.id)
        if merged.num_links == g.num_links:
            yield merged


def cost_leq(a, a1, params=None):
    """
    A ≤ A1（按构造代价）：存在同态 A1 → A，且从 A1 出发经单原子缩减可以到达与 A 同构的图。
    超出状态上限时报 undecided-at-scale，而不是猜测。
    """
    params = search_params(params)
    search = MapSearch(a1, a, max_steps=params['max_search_steps'])
    if next(iter(search), None) is None:
        if search.exhausted:
            raise UndecidedAtScaleError("代价序的同态检查超出步数上限")
        return False

    target = canonical_form(a, params)
    start_key = canonical_form(a1, params)
    if start_key == target:
        return True
    seen = {start_key}
    queue = deque([a1])
    while queue:
        current = queue.popleft()
        for reduced in _reductions(current):
            if reduced.num_nodes < a.num_nodes or reduced.num_links < a.num_links:
                continue
            key = canonical_form(reduced, params)
            if key == target:
                return True
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > params['cost_order_max_states']:
                raise UndecidedAtScaleError(f"代价序搜索超过 {params['cost_order_max_states']} 个状态",
                                            states=len(seen))
            queue.append(reduced)
    return False


# ---- 子对象格 ----

@dataclass(frozen=True)
class HeytingElement:
    graph: Hypergraph
    ambient: Hypergraph = None

    def __post_init__(self):
        if self.ambient is None:
            return
        for atom in self.graph:
            if atom.id not in self.ambient or self.ambient.atom(atom.id) != atom:
                raise CogSynError(f"原子 {atom.id} 不属于环境图", atom_id=atom.id)

    @property
    def atom_ids(self):
        return frozenset(a.id for a in self.graph)

    def __le__(self, other):
        return self.atom_ids <= other.atom_ids


def subobject(ambient, atom_ids):
    """环境图中由给定原子（补齐目标闭包）构成的子对象"""
    return HeytingElement(ambient.subgraph(atom_ids), ambient)


def top(ambient):
    return subobject(ambient, [a.id for a in ambient])


def bottom(ambient):
    return subobject(ambient, [])


def _closure(ambient, atom_id):
    seen = set()
    stack = [atom_id]
    while stack:
        current = stack.pop()
        if current not in seen:
            seen.add(current)
            stack.extend(ambient.atom(current).targets)
    return seen


def sub_join(x, y):
    return subobject(x.ambient, x.atom_ids | y.atom_ids)


def sub_meet(x, y):
    return subobject(x.ambient, x.atom_ids & y.atom_ids)


def sub_implies(x, y):
    """最大的子对象 Z 使 Z ∧ X ≤ Y：原子 a 属于 Z 当且仅当其闭包中落在 X 的原子都落在 Y"""
    ambient = x.ambient
    xs, ys = x.atom_ids, y.atom_ids
    keep = [a.id for a in ambient
            if all(b not in xs or b in ys for b in _closure(ambient, a.id))]
    return subobject(ambient, keep)


def pseudo_complement(x):
    return sub_implies(x, bottom(x.ambient))


def closed_subobjects(ambient):
    atom_ids = [a.id for a in ambient]
    for size in range(len(atom_ids) + 1):
        for subset in itertools.combinations(atom_ids, size):
            chosen = set(subset)
            if all(t in chosen for atom_id in subset for t in ambient.atom(atom_id).targets):
                yield subobject(ambient, subset)


def double_negation_witness(ambient):
    """返回第一个满足 ¬¬X ≠ X 的子对象；布尔情形返回 None"""
    for element in closed_subobjects(ambient):
        if pseudo_complement(pseudo_complement(element)).atom_ids != element.atom_ids:
            return element
    return None
