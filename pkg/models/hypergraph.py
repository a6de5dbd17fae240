"""
带标签超图
节点与超链接统称为原子（Atom）；链接可以指向任意个节点或其他链接，
删除原子时级联删除所有指向它的链接，保证图始终闭合。
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction

from models.errors import CogSynError, DanglingTargetError, HypergraphFormatError, InvalidLabelError

logger = logging.getLogger(__name__)

NODE = 'node'
LINK = 'link'
VARIABLE = 'variable'

_LINE_RE = re.compile(
    r'^(?P<id>\d+)\s+(?P<kind>NODE|LINK)\s+(?P<type>\S+)'
    r'(?:\s+\((?P<targets>[^)]*)\))?'
    r'(?:\s+\[(?P<weights>[^\]]*)\])?\s*$'
)


def to_fraction(value):
    """把整数、'p/q' 字符串或有限浮点数转换为精确有理数"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidLabelError(f"权重不能是布尔值: {value!r}")
    try:
        return Fraction(value)
    except (ValueError, OverflowError, TypeError, ZeroDivisionError) as exc:
        raise InvalidLabelError(f"权重必须是有限有理数: {value!r}") from exc


def format_fraction(value):
    """有理数输出为 p/q，无穷输出为 inf，空值输出为 -"""
    if value is None:
        return '-'
    if isinstance(value, float) and value == float('inf'):
        return 'inf'
    return str(Fraction(value))


@dataclass(frozen=True)
class Label:
    type_name: str
    weights: tuple = ()

    def __post_init__(self):
        if not isinstance(self.type_name, str) or not self.type_name.strip():
            raise InvalidLabelError("标签类型名不能为空")
        if any(ch.isspace() for ch in self.type_name):
            raise InvalidLabelError(f"标签类型名不能包含空白: {self.type_name!r}")
        object.__setattr__(self, 'weights', tuple(to_fraction(w) for w in self.weights))


@dataclass(frozen=True)
class Atom:
    id: int
    kind: str
    targets: tuple = ()
    label: Label = None

    @property
    def is_node(self):
        return self.kind == NODE

    @property
    def is_link(self):
        return self.kind == LINK

    @property
    def type_name(self):
        return self.label.type_name if self.label is not None else None

    @property
    def weights(self):
        return self.label.weights if self.label is not None else ()

    @property
    def is_variable(self):
        return self.kind == NODE and self.type_name == VARIABLE

    @property
    def arity(self):
        return len(self.targets)


def make_label(type_name=None, weights=()):
    if type_name is None:
        if weights:
            raise InvalidLabelError("没有类型名的标签不能携带权重")
        return None
    return Label(type_name, tuple(weights))


class Hypergraph:
    """
    可变的超图容器，同一时刻只由一个所有者修改。
    原子编号为十进制整数，按插入顺序分配；插入顺序同时是拓扑顺序（目标总是先于链接出现）。
    """

    def __init__(self, name=None):
        self.name = name
        self._atoms = {}
        self._incoming = {}
        self._link_index = {}
        self._next_id = 0

    # ---- 查询 ----

    def __len__(self):
        return len(self._atoms)

    def __iter__(self):
        return iter(self._atoms.values())

    def __contains__(self, atom_id):
        return atom_id in self._atoms

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self._atoms == other._atoms

    __hash__ = None

    def __repr__(self):
        return f"Hypergraph(name={self.name!r}, nodes={self.num_nodes}, links={self.num_links})"

    @property
    def next_id(self):
        return self._next_id

    def atom(self, atom_id):
        try:
            return self._atoms[atom_id]
        except KeyError:
            raise DanglingTargetError(atom_id) from None

    def atoms(self):
        return list(self._atoms.values())

    def nodes(self):
        return [a for a in self._atoms.values() if a.kind == NODE]

    def links(self):
        return [a for a in self._atoms.values() if a.kind == LINK]

    def node_ids(self):
        return [a.id for a in self._atoms.values() if a.kind == NODE]

    def link_ids(self):
        return [a.id for a in self._atoms.values() if a.kind == LINK]

    @property
    def num_nodes(self):
        return sum(1 for a in self._atoms.values() if a.kind == NODE)

    @property
    def num_links(self):
        return sum(1 for a in self._atoms.values() if a.kind == LINK)

    def incoming(self, atom_id):
        """直接指向 atom_id 的链接编号（升序）"""
        return tuple(sorted(self._incoming.get(atom_id, ())))

    def degree(self, atom_id):
        return len(self._incoming.get(atom_id, ()))

    def find_links(self, type_name, targets):
        return tuple(self._link_index.get((type_name, tuple(targets)), ()))

    def has_link(self, type_name, targets):
        return bool(self._link_index.get((type_name, tuple(targets))))

    def check_closure(self):
        """扫描所有链接，返回 (链接编号, 缺失目标) 列表；闭合的图返回空列表"""
        return [(a.id, t) for a in self._atoms.values() for t in a.targets if t not in self._atoms]

    # ---- 修改 ----

    def add_atom(self, kind, targets=(), label=None, atom_id=None):
        targets = tuple(targets)
        if kind not in (NODE, LINK):
            raise CogSynError(f"未知原子种类: {kind}")
        if kind == NODE and targets:
            raise CogSynError("节点不能带目标")
        if kind == LINK and not targets:
            raise CogSynError("链接的元数至少为 1")
        for target in targets:
            if target not in self._atoms:
                raise DanglingTargetError(target)
        if atom_id is None:
            atom_id = self._next_id
        elif not isinstance(atom_id, int) or atom_id < 0 or atom_id in self._atoms:
            raise CogSynError(f"原子编号不可用: {atom_id}")

        atom = Atom(atom_id, kind, targets, label)
        self._atoms[atom_id] = atom
        self._next_id = max(self._next_id, atom_id + 1)
        if kind == LINK:
            self._link_index.setdefault((atom.type_name, targets), []).append(atom_id)
            for target in set(targets):
                self._incoming.setdefault(target, set()).add(atom_id)
        return atom_id

    def add_node(self, type_name=None, weights=(), atom_id=None):
        return self.add_atom(NODE, (), make_label(type_name, weights), atom_id)

    def add_link(self, type_name, targets, weights=(), atom_id=None):
        return self.add_atom(LINK, targets, make_label(type_name, weights), atom_id)

    def discard(self, atom_id):
        """就地删除原子及所有（传递地）指向它的链接，返回被删除的编号"""
        if atom_id not in self._atoms:
            return []
        doomed = set()
        stack = [atom_id]
        while stack:
            current = stack.pop()
            if current in doomed:
                continue
            doomed.add(current)
            stack.extend(self._incoming.get(current, ()))

        for current in doomed:
            atom = self._atoms.pop(current)
            self._incoming.pop(current, None)
            if atom.kind == LINK:
                key = (atom.type_name, atom.targets)
                bucket = self._link_index[key]
                bucket.remove(current)
                if not bucket:
                    del self._link_index[key]
                for target in set(atom.targets):
                    if target in self._incoming:
                        self._incoming[target].discard(current)
        return sorted(doomed)

    def copy(self, name=None):
        clone = Hypergraph(self.name if name is None else name)
        clone._atoms = dict(self._atoms)
        clone._incoming = {k: set(v) for k, v in self._incoming.items()}
        clone._link_index = {k: list(v) for k, v in self._link_index.items()}
        clone._next_id = self._next_id
        return clone

    def subgraph(self, atom_ids, name=None):
        """保留给定原子及其（传递）目标，编号不变"""
        keep = set()
        stack = list(atom_ids)
        while stack:
            current = stack.pop()
            if current in keep:
                continue
            atom = self.atom(current)
            keep.add(current)
            stack.extend(atom.targets)
        result = Hypergraph(name)
        for atom in self._atoms.values():
            if atom.id in keep:
                result.add_atom(atom.kind, atom.targets, atom.label, atom.id)
        return result

    def induced_subgraph(self, node_ids, name=None):
        """给定节点集合诱导的子超图：所有目标都在集合内的链接都保留"""
        keep = set(node_ids)
        result = Hypergraph(name)
        for atom in self._atoms.values():
            if atom.kind == NODE and atom.id in keep:
                result.add_atom(NODE, (), atom.label, atom.id)
        for atom in self._atoms.values():
            if atom.kind == LINK and all(t in result for t in atom.targets):
                result.add_atom(LINK, atom.targets, atom.label, atom.id)
        return result

    # ---- 文本序列化 ----

    def to_text(self):
        lines = []
        for atom_id in sorted(self._atoms):
            atom = self._atoms[atom_id]
            type_token = atom.type_name if atom.label is not None else '-'
            if atom.kind == NODE:
                line = f"{atom.id} NODE {type_token}"
            else:
                line = f"{atom.id} LINK {type_token} ({','.join(str(t) for t in atom.targets)})"
            if atom.weights:
                line += f" [{','.join(format_fraction(w) for w in atom.weights)}]"
            lines.append(line)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text, name=None):
        """解析逐行文本格式；链接行可以出现在其目标之前"""
        graph = cls(name)
        pending = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            match = _LINE_RE.match(line)
            if match is None:
                raise HypergraphFormatError(f"第 {lineno} 行无法解析: {line!r}", line=lineno)
            atom_id = int(match.group('id'))
            type_token = match.group('type')
            weights = []
            if match.group('weights'):
                weights = [w.strip() for w in match.group('weights').split(',') if w.strip()]
            label = make_label(None if type_token == '-' else type_token, weights)
            if match.group('kind') == 'NODE':
                if match.group('targets') is not None:
                    raise HypergraphFormatError(f"第 {lineno} 行：节点不能带目标", line=lineno)
                graph.add_atom(NODE, (), label, atom_id)
            else:
                raw_targets = match.group('targets') or ''
                targets = tuple(int(t) for t in raw_targets.split(',') if t.strip())
                pending.append((lineno, atom_id, targets, label))

        while pending:
            ready = [p for p in pending if all(t in graph for t in p[2])]
            if not ready:
                lineno, _, targets, _ = pending[0]
                missing = next(t for t in targets if t not in graph)
                raise DanglingTargetError(missing, f"第 {lineno} 行引用了不存在的原子: {missing}")
            for lineno, atom_id, targets, label in ready:
                graph.add_atom(LINK, targets, label, atom_id)
            pending = [p for p in pending if p not in ready]
        return graph


def add_atom(g, kind, targets=(), label=None):
    """在 g 中插入原子并返回新编号；目标缺失时报 dangling 错误"""
    return g.add_atom(kind, targets, label)


def remove_atom(g, atom_id):
    """
    返回删除 atom_id（及级联链接）后的新超图；编号不存在时记录警告并原样返回副本
    """
    result = g.copy()
    if atom_id not in result:
        logger.warning(f"⚠️ 删除不存在的原子 {atom_id}，忽略")
        return result
    removed = result.discard(atom_id)
    logger.debug(f"删除原子 {atom_id}，级联删除 {len(removed) - 1} 个链接")
    return result
