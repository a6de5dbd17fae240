"""
超图智能体：记忆是一张超图，认知元是带特定类型标签的节点。
激活选项：
  1  依据标签和输入链接创建新原子（常量、加、乘、与、或、非），并回激活发起者（2a）
  2  沿 activates 链接传播激活（call / spread）
  3  用模式匹配整张记忆，为每个绑定插入 match 链接
  4  删除 removes 链接指向的原子
  5  什么也不做（inert）
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from models.agent_simulation import Event
from models.errors import ActivationDepthError, NotActivatableError
from models.hypergraph import LINK, NODE, VARIABLE
from models.parameter_config import agent_params
from models.pattern_matching import match_pattern

logger = logging.getLogger(__name__)

COGNIT_OPTIONS = {
    'constant': '1',
    'plus': '1',
    'times': '1',
    'and': '1',
    'or': '1',
    'not': '1',
    'call': '2',
    'spread': '2',
    'pattern': '3',
    'remove': '4',
    'inert': '5',
}

RESULT_LINK = 'result'
INPUT_LINK = 'input'
ACTIVATES_LINK = 'activates'
REMOVES_LINK = 'removes'
MATCH_LINK = 'match'


@dataclass(frozen=True)
class HEffect:
    kind: str
    atom_id: int
    option: str
    depth: int = 0


def is_activatable(g, atom_id):
    if atom_id not in g:
        return False
    atom = g.atom(atom_id)
    return atom.kind == NODE and atom.type_name in COGNIT_OPTIONS


def out_targets(g, cognit_id, link_type):
    """从认知元出发的某类链接（第一个目标是认知元）指向的其余原子"""
    targets = []
    for link_id in g.incoming(cognit_id):
        link = g.atom(link_id)
        if link.type_name == link_type and link.targets[0] == cognit_id:
            targets.extend(link.targets[1:])
    return targets


def _input_values(g, cognit_id):
    values = []
    for atom_id in out_targets(g, cognit_id, INPUT_LINK):
        weights = g.atom(atom_id).weights
        values.append(weights[0] if weights else Fraction(0))
    return values


def _compute(g, atom):
    kind = atom.type_name
    values = _input_values(g, atom.id)
    if kind == 'constant':
        return 'number', atom.weights[0] if atom.weights else Fraction(0)
    if kind == 'plus':
        return 'number', sum(values, Fraction(0))
    if kind == 'times':
        return 'number', math.prod(values, start=Fraction(1))
    if kind == 'and':
        return 'truth', Fraction(int(all(v != 0 for v in values)))
    if kind == 'or':
        return 'truth', Fraction(int(any(v != 0 for v in values)))
    return 'truth', Fraction(int(not (values and values[0] != 0)))


def hypergraph_activate(g, cognit_id, activator=None, patterns=None, depth_limit=None):
    """
    激活记忆超图中的认知元节点（就地修改 g）

    Args:
        patterns: 模式认知元编号 → HPattern
        activator: 发起激活的原子编号

    Returns:
        HEffect 列表
    """
    depth_limit = depth_limit or agent_params()['activation_depth']
    effects = []
    _activate(g, cognit_id, activator, patterns or {}, depth_limit, 0, effects)
    return effects


def _activate(g, cognit_id, activator, patterns, depth_limit, depth, effects):
    if depth > depth_limit:
        raise ActivationDepthError(f"激活链超过深度上限 {depth_limit}", partial_effects=effects)
    if not is_activatable(g, cognit_id):
        raise NotActivatableError(f"原子 {cognit_id} 不是可激活的认知元", atom_id=cognit_id)
    atom = g.atom(cognit_id)
    option = COGNIT_OPTIONS[atom.type_name]

    if option == '1':
        value_type, value = _compute(g, atom)
        node_id = g.add_node(value_type, [value])
        effects.append(HEffect('create', node_id, option, depth))
        holder = activator if activator is not None and activator in g else cognit_id
        link_id = g.add_link(RESULT_LINK, (holder, node_id))
        effects.append(HEffect('create', link_id, option, depth))
        if activator is not None:
            effects.append(HEffect('activate', activator, '2a', depth))
    elif option == '2':
        for target in out_targets(g, cognit_id, ACTIVATES_LINK):
            effects.append(HEffect('activate', target, option, depth))
            if is_activatable(g, target):
                _activate(g, target, cognit_id, patterns, depth_limit, depth + 1, effects)
            else:
                logger.debug(f"跳过不可激活的原子 {target}")
    elif option == '3':
        pattern = patterns.get(cognit_id)
        if pattern is None:
            logger.warning(f"⚠️ 模式认知元 {cognit_id} 没有登记模式")
            return
        for binding in match_pattern(pattern, g):
            link_id = g.add_link(MATCH_LINK, (cognit_id, *binding.targets()))
            effects.append(HEffect('create', link_id, option, depth))
    elif option == '4':
        for target in out_targets(g, cognit_id, REMOVES_LINK):
            for removed in g.discard(target):
                effects.append(HEffect('remove', removed, option, depth))


def effects_to_events(effects, tick, first_slot=0):
    """把激活效果记为事件日志行"""
    return [Event(tick, first_slot + i, effect.kind, cognit=f"{effect.atom_id}@{effect.option}")
            for i, effect in enumerate(effects)]


# ---- 富语言标签 ----

@dataclass(frozen=True)
class Violation:
    atom_id: int
    code: str
    message: str


def _in_unit(value):
    return 0 <= value <= 1


def rich_language_check(g):
    """
    检查保留标签的合法性，只报告不抛错：
    implication 链接带 [0,1] 概率（可选置信度），after 链接带非负时长，
    atTime 链接的第一个目标是 time 节点，variable 与 time 只能标注节点
    """
    violations = []

    def report(atom_id, code, message):
        violations.append(Violation(atom_id, code, message))

    for atom in g:
        type_name = atom.type_name
        if type_name == VARIABLE and atom.kind == LINK:
            report(atom.id, 'variable-not-node', "variable 标签只能用于节点")
        if type_name == 'time' and atom.kind == LINK:
            report(atom.id, 'time-not-node', "time 标签只能用于节点")
        if type_name == 'time' and atom.kind == NODE and not atom.weights:
            report(atom.id, 'missing-time', "time 节点缺少时刻值")
        if atom.kind != LINK:
            continue

        if type_name == 'implication':
            if atom.arity != 2:
                report(atom.id, 'bad-arity', "implication 链接必须是二元的")
            if not atom.weights:
                report(atom.id, 'missing-probability', "implication 链接缺少概率")
            elif not all(_in_unit(w) for w in atom.weights[:2]):
                report(atom.id, 'prob-out-of-range', f"implication 概率/置信度超出 [0,1]: {atom.weights[:2]}")
        elif type_name == 'after':
            if atom.arity != 2:
                report(atom.id, 'bad-arity', "after 链接必须是二元的")
            if not atom.weights:
                report(atom.id, 'missing-duration', "after 链接缺少时长")
            elif atom.weights[0] < 0:
                report(atom.id, 'negative-duration', f"after 时长为负: {atom.weights[0]}")
        elif type_name == 'atTime':
            if atom.arity != 2:
                report(atom.id, 'bad-arity', "atTime 链接必须是二元的")
            first = g.atom(atom.targets[0])
            if not (first.kind == NODE and first.type_name == 'time'):
                report(atom.id, 'attime-needs-time-node', "atTime 的第一个目标必须是 time 节点")
        elif type_name == 'lambda':
            if atom.arity < 2:
                report(atom.id, 'bad-arity', "lambda 链接至少二元")
            elif not g.atom(atom.targets[0]).is_variable:
                report(atom.id, 'lambda-needs-variable', "lambda 的第一个目标必须是变量节点")
    return violations


def record_reflection(g, tick, link_ids=None):
    """
    写入 "时刻 T 时链接 L 存在" 的反思结构：一个 time 节点和若干 atTime 链接

    Returns:
        (time 节点编号, atTime 链接编号列表)
    """
    if link_ids is None:
        link_ids = [l.id for l in g.links() if l.type_name != 'atTime']
    time_id = g.add_node('time', [tick])
    created = [g.add_link('atTime', (time_id, link_id)) for link_id in link_ids]
    return time_id, created
