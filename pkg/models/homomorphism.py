"""
同态与同构
- 基本同态：合并两个节点，新节点继承双亲的全部链接
- 分裂：合并的逆操作
- 回溯搜索同态/同构，代价 = 隐含的合并次数
- 规范形：颜色细化 + 类内排列穷举
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from models.errors import (BadPartitionError, MergeNonNodeError, MergeTypeMismatchError,
                           TooLargeError, UndecidedAtScaleError)
from models.hypergraph import LINK, NODE, Hypergraph
from models.parameter_config import search_params

logger = logging.getLogger(__name__)

EMPTY_CANONICAL = '<empty>'


def same_type(src_atom, dst_atom):
    return src_atom.type_name == dst_atom.type_name


def search_plan(src):
    """
    回溯顺序：按插入顺序逐个节点赋值，每个链接在其所有节点（传递）目标赋值后立即检查
    """
    node_order = src.node_ids()
    position = {node_id: i for i, node_id in enumerate(node_order)}
    level = {}
    buckets = [[] for _ in node_order]
    for atom in src:
        if atom.kind == NODE:
            level[atom.id] = position[atom.id]
        else:
            level[atom.id] = max(level[t] for t in atom.targets)
            buckets[level[atom.id]].append(atom)
    plan = []
    for i, node_id in enumerate(node_order):
        plan.append(src.atom(node_id))
        plan.extend(buckets[i])
    return plan


class MapSearch:
    """
    枚举 src → dst 的全部原子映射：节点到节点、链接到同类型同元数且目标逐点对应的链接。

    Args:
        node_compat: 节点兼容判定 (src_atom, dst_atom) -> bool，默认要求类型名相同
        injective: 只枚举单射（同构检查用）
        max_steps: 尝试候选的步数上限，耗尽时 exhausted 置位
        fixed: 预先固定的节点映射
    """

    def __init__(self, src, dst, node_compat=None, injective=False, max_steps=None, fixed=None):
        self.src = src
        self.dst = dst
        self.node_compat = node_compat or same_type
        self.injective = injective
        self.max_steps = max_steps
        self.fixed = dict(fixed or {})
        self.steps = 0
        self.exhausted = False

    def __iter__(self):
        plan = search_plan(self.src)
        dst_nodes = self.dst.nodes()
        assignment = {}
        used = set()

        def extend(i):
            if i == len(plan):
                yield dict(assignment)
                return
            atom = plan[i]
            if atom.kind == NODE:
                if atom.id in self.fixed:
                    target = self.dst.atom(self.fixed[atom.id])
                    candidates = [target.id] if target.kind == NODE and self.node_compat(atom, target) else []
                else:
                    candidates = [n.id for n in dst_nodes if self.node_compat(atom, n)]
            else:
                mapped = tuple(assignment[t] for t in atom.targets)
                candidates = self.dst.find_links(atom.type_name, mapped)
            for candidate in candidates:
                if self.injective and candidate in used:
                    continue
                self.steps += 1
                if self.max_steps is not None and self.steps > self.max_steps:
                    self.exhausted = True
                    return
                assignment[atom.id] = candidate
                used.add(candidate)
                yield from extend(i + 1)
                del assignment[atom.id]
                used.discard(candidate)
                if self.exhausted:
                    return

        return extend(0)


@dataclass(frozen=True)
class MergeStep:
    first: int
    second: int
    merged: int


@dataclass(frozen=True)
class Homomorphism:
    vertex_map: dict
    steps: tuple = ()
    cost: Fraction = Fraction(0)
    source_nodes: tuple = ()

    def __call__(self, atom_id):
        return self.vertex_map[atom_id]

    def node_map(self):
        return {n: self.vertex_map[n] for n in self.source_nodes}

    def image_nodes(self):
        return {self.vertex_map[n] for n in self.source_nodes}

    def sort_key(self):
        return self.cost, tuple(sorted(self.vertex_map.items()))

    def then(self, other):
        """先做 self 再做 other；代价按合并次数重新计算，不超过两者之和"""
        composed = {k: other.vertex_map[v] for k, v in self.vertex_map.items()}
        image = {composed[n] for n in self.source_nodes}
        return Homomorphism(composed, self.steps + other.steps,
                            Fraction(len(self.source_nodes) - len(image)), self.source_nodes)

    def is_valid(self, src, dst):
        """事后检查：每个节点映到同类型节点，每个链接的像仍是链接"""
        for atom in src:
            if atom.id not in self.vertex_map or self.vertex_map[atom.id] not in dst:
                return False
            image = dst.atom(self.vertex_map[atom.id])
            if image.kind != atom.kind or image.type_name != atom.type_name:
                return False
            if atom.kind == LINK and image.targets != tuple(self.vertex_map[t] for t in atom.targets):
                return False
        return True


def merge_count_cost(vertex_map, source_nodes):
    return Fraction(len(source_nodes) - len({vertex_map[n] for n in source_nodes}))


def implied_merges(vertex_map, source_nodes):
    """把一个节点映射分解为基本合并步骤"""
    groups = {}
    for node_id in source_nodes:
        groups.setdefault(vertex_map[node_id], []).append(node_id)
    steps = []
    for image, members in groups.items():
        for other in members[1:]:
            steps.append(MergeStep(members[0], other, image))
    return tuple(steps)


def build_homomorphism(vertex_map, src, dst, cost_model=None):
    source_nodes = tuple(src.node_ids())
    if cost_model is None:
        cost = merge_count_cost(vertex_map, source_nodes)
    else:
        cost = Fraction(cost_model(vertex_map, src, dst))
    return Homomorphism(vertex_map, implied_merges(vertex_map, source_nodes), cost, source_nodes)


def merge_nodes(g, a, b):
    """
    合并同类型节点 a、b 为一个新节点，新节点继承双亲的链接；重复链接折叠

    Returns:
        (新超图, 代价为 1 的同态)
    """
    for atom_id in (a, b):
        if g.atom(atom_id).kind != NODE:
            raise MergeNonNodeError(f"只能合并节点，{atom_id} 是链接", atom_id=atom_id)
    if a == b:
        raise MergeNonNodeError(f"合并需要两个不同的节点: {a}", atom_id=a)
    if g.atom(a).type_name != g.atom(b).type_name:
        raise MergeTypeMismatchError(
            f"只能合并同类型节点: {g.atom(a).type_name} 与 {g.atom(b).type_name}", first=a, second=b)

    merged_id = g.next_id
    result = Hypergraph(g.name)
    vertex_map = {}
    for atom in g.nodes():
        if atom.id not in (a, b):
            result.add_atom(NODE, (), atom.label, atom.id)
            vertex_map[atom.id] = atom.id
    result.add_atom(NODE, (), g.atom(a).label, merged_id)
    vertex_map[a] = vertex_map[b] = merged_id

    for atom in g.links():
        targets = tuple(vertex_map[t] for t in atom.targets)
        existing = result.find_links(atom.type_name, targets)
        if existing:
            vertex_map[atom.id] = existing[0]
            continue
        result.add_atom(LINK, targets, atom.label, atom.id)
        vertex_map[atom.id] = atom.id

    hom = Homomorphism(vertex_map, (MergeStep(a, b, merged_id),), Fraction(1), tuple(g.node_ids()))
    return result, hom


def split_node(g, a, link_partition):
    """
    把节点 a 分裂为两个新节点，两部分关联链接分别改指向两个孩子

    Args:
        link_partition: 两个链接编号集合，恰好划分 a 的全部直接关联链接（允许为空）

    Returns:
        (新超图, (孩子1, 孩子2))
    """
    atom = g.atom(a)
    if atom.kind != NODE:
        raise MergeNonNodeError(f"只能分裂节点，{a} 是链接", atom_id=a)
    if len(link_partition) != 2:
        raise BadPartitionError("分裂需要恰好两部分链接", parts=len(link_partition))
    first_part, second_part = (set(part) for part in link_partition)
    incident = set(g.incoming(a))
    overlap = first_part & second_part
    if overlap:
        raise BadPartitionError(f"划分重叠: {sorted(overlap)}", overlap=sorted(overlap))
    if first_part | second_part != incident:
        missing = sorted(incident - first_part - second_part)
        extra = sorted((first_part | second_part) - incident)
        raise BadPartitionError(f"划分未恰好覆盖关联链接，缺少 {missing}，多余 {extra}",
                                missing=missing, extra=extra)

    first, second = g.next_id, g.next_id + 1
    result = Hypergraph(g.name)
    for node in g.nodes():
        if node.id == a:
            result.add_atom(NODE, (), node.label, first)
            result.add_atom(NODE, (), node.label, second)
        else:
            result.add_atom(NODE, (), node.label, node.id)
    for link in g.links():
        replacement = first if link.id in first_part else second if link.id in second_part else None
        targets = tuple(replacement if t == a and replacement is not None else t for t in link.targets)
        result.add_atom(LINK, targets, link.label, link.id)
    return result, (first, second)


class HomomorphismList(list):
    """同态列表；truncated 表示搜索空间、搜索步数或结果数达到上限"""

    truncated = False


def map_space(src, dst, node_compat=None):
    """暴力枚举的节点映射数：每个源节点可选的兼容目标节点数之积"""
    node_compat = node_compat or same_type
    dst_nodes = dst.nodes()
    return math.prod(sum(1 for n in dst_nodes if node_compat(node, n)) for node in src.nodes())


def node_map_key(vertex_map, src):
    return tuple(vertex_map[n] for n in src.node_ids())


def find_homomorphisms(src, dst, max_cost=None, max_results=None, params=None, cost_model=None):
    """
    枚举 src → dst 的保类型、保链接映射，按 (代价, 映射) 排序。
    同态由节点映射决定，目标图的平行链接带来的重复原子映射只保留排序最前的一个；
    节点映射空间超过 exact_threshold 时不搜索，返回截断的空列表。

    Args:
        max_cost: 代价上限（含）
        max_results: 返回条数上限
        cost_model: 可选代价函数 (vertex_map, src, dst) -> 有理数，默认合并次数
    """
    params = search_params(params)
    space = map_space(src, dst)
    if space > params['exact_threshold']:
        logger.warning(f"⚠️ 同态搜索空间 {space} 超过上限 {params['exact_threshold']}，未搜索")
        result = HomomorphismList()
        result.truncated = True
        return result

    search = MapSearch(src, dst, max_steps=params['max_search_steps'])
    best = {}
    for vertex_map in search:
        hom = build_homomorphism(vertex_map, src, dst, cost_model)
        if max_cost is not None and hom.cost > max_cost:
            continue
        key = node_map_key(vertex_map, src)
        if key not in best or hom.sort_key() < best[key].sort_key():
            best[key] = hom
    found = sorted(best.values(), key=Homomorphism.sort_key)

    result = HomomorphismList(found if max_results is None else found[:max_results])
    result.truncated = search.exhausted or (max_results is not None and len(found) > max_results)
    if search.exhausted:
        logger.warning(f"⚠️ 同态搜索在 {params['max_search_steps']} 步后截断")
    return result


def count_homomorphisms(src, dst, params=None, node_compat=None):
    """返回 (不同节点映射的同态个数, 是否穷尽)"""
    params = search_params(params)
    if map_space(src, dst, node_compat) > params['exact_threshold']:
        return 0, False
    search = MapSearch(src, dst, node_compat=node_compat, max_steps=params['max_search_steps'])
    count = len({node_map_key(vertex_map, src) for vertex_map in search})
    return count, not search.exhausted


def _type_profile(g):
    return Counter((a.kind, a.type_name, a.arity) for a in g)


def is_isomorphic(g1, g2, params=None):
    """
    Returns:
        (是否同构, 见证映射或 None)
    """
    if g1.num_nodes != g2.num_nodes or g1.num_links != g2.num_links:
        return False, None
    if _type_profile(g1) != _type_profile(g2):
        return False, None
    params = search_params(params)
    search = MapSearch(g1, g2, injective=True, max_steps=params['max_search_steps'])
    for witness in search:
        return True, witness
    if search.exhausted:
        raise UndecidedAtScaleError("同构搜索超出步数上限", steps=search.steps)
    return False, None


def _rank(values):
    ordered = sorted(set(values.values()))
    index = {v: i for i, v in enumerate(ordered)}
    return {k: index[v] for k, v in values.items()}


def refine_colors(g):
    """颜色细化：反复用出边目标颜色序列和入边 (颜色, 位置) 多重集细分原子类"""
    ranks = _rank({a.id: (a.kind, a.type_name or '-', a.arity) for a in g})
    while True:
        signature = {}
        for atom in g:
            out = tuple(ranks[t] for t in atom.targets)
            inc = sorted(
                (ranks[link_id], tuple(i for i, t in enumerate(g.atom(link_id).targets) if t == atom.id))
                for link_id in g.incoming(atom.id)
            )
            signature[atom.id] = (ranks[atom.id], out, tuple(inc))
        refined = _rank(signature)
        if len(set(refined.values())) == len(set(ranks.values())):
            return refined
        ranks = refined


def _encode(g, order):
    index = {atom_id: i for i, atom_id in enumerate(order)}
    parts = []
    for atom_id in order:
        atom = g.atom(atom_id)
        tag = 'N' if atom.kind == NODE else 'L'
        parts.append(f"{tag}:{atom.type_name or '-'}:{','.join(str(index[t]) for t in atom.targets)}")
    return ';'.join(parts)


def canonical_form(g, params=None):
    """
    同构不变的规范字符串：两个图规范形相等当且仅当同构（只比较类型名，不比较权重）
    """
    if len(g) == 0:
        return EMPTY_CANONICAL
    params = search_params(params)
    ranks = refine_colors(g)
    classes = {}
    for atom_id in sorted(ranks):
        classes.setdefault(ranks[atom_id], []).append(atom_id)
    blocks = [classes[r] for r in sorted(classes)]
    permutations = math.prod(math.factorial(len(block)) for block in blocks)
    if permutations > params['canonical_max_permutations']:
        raise TooLargeError(f"规范形需要枚举 {permutations} 个排列，超过上限",
                            permutations=permutations)

    best = None
    for combo in itertools.product(*(itertools.permutations(block) for block in blocks)):
        text = _encode(g, [atom_id for block in combo for atom_id in block])
        if best is None or text < best:
            best = text
    return best
