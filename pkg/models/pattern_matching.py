"""
h-模式匹配
模式体是一个超图，类型名为 variable 的节点可以匹配任意节点，其余原子按类型名匹配（权重不参与匹配）。
模式可用 and / or / not 组合；not 只能作为 and 的直接子模式出现，相对同一张目标图求值。
匹配是同态意义下的：不同变量可以绑定到同一个原子。
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

from models.errors import InvalidPatternError, UnboundedNegationError
from models.homomorphism import MapSearch, canonical_form
from models.hypergraph import LINK, VARIABLE, Hypergraph
from models.parameter_config import search_params

logger = logging.getLogger(__name__)

ATOMIC = 'atomic'
AND = 'and'
OR = 'or'
NOT = 'not'


@dataclass(frozen=True)
class HPattern:
    combinator: str = ATOMIC
    body: Hypergraph = None
    operands: tuple = ()

    def __post_init__(self):
        if self.combinator == ATOMIC:
            if not isinstance(self.body, Hypergraph):
                raise InvalidPatternError("原子模式需要一个超图作为模式体")
            for atom in self.body:
                if atom.kind == LINK and atom.type_name == VARIABLE:
                    raise InvalidPatternError(f"变量只能是节点，原子 {atom.id} 是链接", atom_id=atom.id)
        elif self.combinator in (AND, OR):
            if len(self.operands) != 2:
                raise InvalidPatternError(f"{self.combinator} 需要两个子模式")
        elif self.combinator == NOT:
            if len(self.operands) != 1:
                raise InvalidPatternError("not 需要一个子模式")
        else:
            raise InvalidPatternError(f"未知组合子: {self.combinator}")

    @classmethod
    def atomic(cls, body):
        return cls(ATOMIC, body)

    @classmethod
    def from_text(cls, text, name=None):
        return cls.atomic(Hypergraph.from_text(text, name))

    def __and__(self, other):
        return HPattern(AND, None, (self, other))

    def __or__(self, other):
        return HPattern(OR, None, (self, other))

    def __invert__(self):
        return HPattern(NOT, None, (self,))

    def variables(self):
        if self.combinator == ATOMIC:
            return sorted(a.id for a in self.body if a.is_variable)
        return sorted({v for op in self.operands for v in op.variables()})

    def atom_count(self):
        if self.combinator == ATOMIC:
            return len(self.body)
        return sum(op.atom_count() for op in self.operands)


def pattern_key(pattern, params=None):
    """模式的稳定键：原子模式取模式体的规范形"""
    if pattern.combinator == ATOMIC:
        return canonical_form(pattern.body, params)
    inner = '|'.join(pattern_key(op, params) for op in pattern.operands)
    return f"{pattern.combinator}({inner})"


@dataclass(frozen=True)
class Binding:
    """变量原子编号 → 目标图原子编号；只覆盖变量"""

    items: tuple = ()

    @classmethod
    def of(cls, mapping):
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self):
        return dict(self.items)

    def __getitem__(self, variable_id):
        return self.as_dict()[variable_id]

    def __len__(self):
        return len(self.items)

    def variables(self):
        return tuple(v for v, _ in self.items)

    def targets(self):
        return tuple(t for _, t in self.items)

    def sort_key(self):
        return self.targets(), self.variables()

    def consistent_with(self, other):
        mine = self.as_dict()
        return all(mine.get(v, t) == t for v, t in other.items)

    def merge(self, other):
        combined = self.as_dict()
        combined.update(other.as_dict())
        return Binding.of(combined)


def pattern_compatible(src_atom, dst_atom):
    return src_atom.is_variable or src_atom.type_name == dst_atom.type_name


def _atomic_bindings(body, g, params):
    variables = [a.id for a in body if a.is_variable]
    search = MapSearch(body, g, node_compat=pattern_compatible, max_steps=params['max_search_steps'])
    bindings = {Binding.of({v: vertex_map[v] for v in variables}) for vertex_map in search}
    if search.exhausted:
        logger.warning(f"⚠️ 模式匹配在 {params['max_search_steps']} 步后截断，结果不完整")
    return bindings


def _evaluate(pattern, g, params):
    if pattern.combinator == ATOMIC:
        return _atomic_bindings(pattern.body, g, params)
    if pattern.combinator == NOT:
        raise UnboundedNegationError("not 只能作为 and 的直接子模式求值")
    if pattern.combinator == OR:
        left, right = (_evaluate(op, g, params) for op in pattern.operands)
        return left | right

    positives = [op for op in pattern.operands if op.combinator != NOT]
    negatives = [op.operands[0] for op in pattern.operands if op.combinator == NOT]
    if not positives:
        raise UnboundedNegationError("and 的两个子模式都是 not，缺少正向约束")
    result = _evaluate(positives[0], g, params)
    for positive in positives[1:]:
        other = _evaluate(positive, g, params)
        result = {a.merge(b) for a in result for b in other if a.consistent_with(b)}
    for negative in negatives:
        forbidden = _evaluate(negative, g, params)
        result = {b for b in result if not any(b.consistent_with(f) for f in forbidden)}
    return result


def match_pattern(pattern, g, params=None):
    """
    Returns:
        按目标编号序列字典序排列的 Binding 列表
    """
    params = search_params(params)
    return sorted(_evaluate(pattern, g, params), key=Binding.sort_key)


def has_match(body, g, params=None):
    params = search_params(params)
    search = MapSearch(body, g, node_compat=pattern_compatible, max_steps=params['max_search_steps'])
    return next(iter(search), None) is not None


def match_degree(pattern, g, params=None):
    """
    模式在图中的显示程度：完全匹配为 1，否则为最佳部分绑定覆盖的原子比例。
    部分绑定取模式体中对目标闭合的原子子集；组合模式只取 0 或 1。
    """
    params = search_params(params)
    if pattern.combinator != ATOMIC:
        return Fraction(1) if _evaluate(pattern, g, params) else Fraction(0)
    body = pattern.body
    total = len(body)
    if total == 0 or has_match(body, g, params):
        return Fraction(1)
    atom_ids = [a.id for a in body]
    for size in range(total - 1, 0, -1):
        for subset in itertools.combinations(atom_ids, size):
            chosen = set(subset)
            if any(t not in chosen for atom_id in subset for t in body.atom(atom_id).targets):
                continue
            if has_match(body.subgraph(subset), g, params):
                return Fraction(size, total)
    return Fraction(0)
