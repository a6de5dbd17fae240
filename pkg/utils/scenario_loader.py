"""
场景文件加载与验证
场景是 TOML 文本（嵌套键值节），所有引用的名称必须能解析，种子必须显式给出。
验证错误一次性收集，每条诊断给出字段路径和原因。
"""

import hashlib
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

from models.agent_simulation import (ConstantEnvironment, ConstantPolicy, TableEnvironment,
                                     TablePolicy, UniformPolicy, log_safe)
from models.cognitive_processes import RULES, ProcessSpec, SituationSpec
from models.cpt_graph import CatalogEntry, GoalSpec, PatternCatalog, ResourceBudget
from models.errors import CogSynError, ScenarioValidationError
from models.hypergraph import Hypergraph, to_fraction
from models.pattern_matching import HPattern, pattern_key

logger = logging.getLogger(__name__)


@dataclass
class AnalysisSpec:
    pairs: list = field(default_factory=list)
    triples: list = field(default_factory=list)
    partition_cells: int = 10
    weights: object = 'midpoint'
    census: dict = None
    mine_min_support: int = 0
    mine_max_atoms: int = 3


@dataclass
class Scenario:
    name: str
    ticks: int
    environment: object
    agent: object
    processes: dict
    catalog: PatternCatalog
    goals: list
    situations: list
    analysis: AnalysisSpec
    alphabets: dict = field(default_factory=dict)
    memory_capacity: int = None
    source_hash: str = ''
    source_path: str = None

    def seeds(self):
        return {s.situation: s.seed for s in self.situations}


class _Diagnostics:
    def __init__(self):
        self.items = []

    def add(self, path, reason):
        self.items.append((path, reason))

    def require(self, table, key, path, kind=None):
        if not isinstance(table, dict) or key not in table:
            self.add(f"{path}.{key}" if path else key, "缺少必需字段")
            return None
        value = table[key]
        if kind is not None and not isinstance(value, kind):
            self.add(f"{path}.{key}" if path else key, f"类型应为 {kind.__name__}")
            return None
        return value

    def guard(self, path, func, *args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CogSynError as exc:
            self.add(path, exc.message)
        except (TypeError, ValueError) as exc:
            self.add(path, str(exc))
        return None


def _fraction(value):
    return to_fraction(value if not isinstance(value, float) else str(value))


def _build_environment(section, diag):
    if section is None:
        diag.add('environment', "缺少必需的节 [environment]")
        return None
    kind = section.get('kind', 'constant')
    goal_weights = section.get('goal_weights')
    if kind == 'constant':
        observation = diag.require(section, 'observation', 'environment', str)
        reward = diag.require(section, 'reward', 'environment')
        if observation is None or reward is None:
            return None
        return diag.guard('environment', ConstantEnvironment, observation, _fraction(reward), goal_weights)
    if kind == 'table':
        table = diag.require(section, 'table', 'environment', dict)
        if table is None:
            return None
        rows = {action: [tuple(row) for row in options] for action, options in table.items()}
        return diag.guard('environment.table', TableEnvironment, rows, goal_weights)
    diag.add('environment.kind', f"未知环境类型 {kind!r}，可选 constant / table")
    return None


def _build_agent(section, diag):
    section = section or {'policy': 'constant', 'action': 'wait'}
    policy = section.get('policy', 'constant')
    goal_seeking = bool(section.get('goal_seeking', False))
    if policy == 'constant':
        action = section.get('action', 'wait')
        return ConstantPolicy(action, goal_seeking)
    if policy == 'uniform':
        actions = diag.require(section, 'actions', 'agent', list)
        return diag.guard('agent.actions', UniformPolicy, actions, goal_seeking) if actions is not None else None
    if policy == 'table':
        table = diag.require(section, 'table', 'agent', dict)
        return diag.guard('agent.table', TablePolicy, table, goal_seeking) if table is not None else None
    diag.add('agent.policy', f"未知策略 {policy!r}，可选 constant / uniform / table")
    return None


def _build_processes(section, diag):
    processes = {}
    if not section:
        diag.add('processes', "至少需要定义一个认知过程")
        return processes
    for process_id, spec in sorted(section.items()):
        path = f"processes.{process_id}"
        rule = spec.get('rule')
        if rule not in RULES:
            diag.add(f"{path}.rule", f"未知规则 {rule!r}，可选: {', '.join(sorted(RULES))}")
            continue
        cost = spec.get('cost', [1, 0])
        process = diag.guard(path, lambda: ProcessSpec(process_id, rule, spec.get('node_type'), spec.get('link_type', 'edge'),
                                                      ResourceBudget(*(_fraction(c) for c in cost))))
        if process is not None:
            processes[process_id] = process
    return processes


def _build_catalog(section, diag):
    entries = []
    for name, spec in sorted((section or {}).items()):
        path = f"patterns.{name}"
        body_text = diag.require(spec, 'body', path, str)
        if body_text is None:
            continue
        pattern = diag.guard(f"{path}.body", HPattern.from_text, body_text, name)
        if pattern is not None:
            key = diag.guard(path, pattern_key, pattern)
            if key is not None:
                entries.append(CatalogEntry(name, pattern, key))
    return PatternCatalog(entries)


def _build_goals(section, catalog, diag):
    goals = []
    for goal_id, spec in sorted((section or {}).items()):
        path = f"goals.{goal_id}"
        pattern_name = spec.get('pattern')
        table = spec.get('table')
        if pattern_name is None and table is None:
            diag.add(path, "目标需要 pattern 或 table")
            continue
        if pattern_name is not None and pattern_name not in catalog:
            diag.add(f"{path}.pattern", f"引用了未定义的模式 {pattern_name!r}")
            continue
        goal = diag.guard(path, lambda: GoalSpec(
            goal_id, _fraction(spec.get('weight', 1)), pattern_name,
            {k: _fraction(v) for k, v in table.items()} if table is not None else None))
        if goal is not None:
            goals.append(goal)
    if not goals:
        diag.add('goals', "至少需要定义一个目标")
    return goals


def _build_situations(items, processes, ticks, diag):
    situations = []
    seen = set()
    if not items:
        diag.add('situations', "至少需要一个情境")
        return situations
    for index, spec in enumerate(items):
        path = f"situations[{index}]"
        situation = diag.require(spec, 'id', path, str)
        seed = diag.require(spec, 'seed', path, int)
        schedule = diag.require(spec, 'schedule', path, list)
        if situation is None or seed is None or schedule is None:
            continue
        if situation in seen:
            diag.add(f"{path}.id", f"情境编号重复: {situation}")
            continue
        seen.add(situation)
        for process_id in schedule:
            if process_id not in processes:
                diag.add(f"{path}.schedule", f"引用了未定义的过程 {process_id!r}")
        memory = diag.guard(f"{path}.memory", Hypergraph.from_text, spec.get('memory', ''), situation)
        branch_of = spec.get('branch_of')
        if branch_of is not None:
            if len(branch_of) != 2 or not isinstance(branch_of[1], int) or not 0 <= branch_of[1] <= ticks:
                diag.add(f"{path}.branch_of", "branch_of 应为 [情境编号, 时刻]")
                branch_of = None
            else:
                branch_of = (branch_of[0], branch_of[1])
        if memory is not None:
            situations.append(SituationSpec(situation, seed, memory, tuple(schedule), branch_of))
    known = {s.situation for s in situations}
    for index, s in enumerate(situations):
        if s.branch_of is not None and s.branch_of[0] not in known:
            diag.add(f"situations[{index}].branch_of", f"引用了未定义的情境 {s.branch_of[0]!r}")
    return situations


def _build_analysis(section, processes, diag):
    section = section or {}
    analysis = AnalysisSpec(
        pairs=[tuple(p) for p in section.get('pairs', [])],
        triples=[tuple(t) for t in section.get('triples', [])],
        partition_cells=section.get('partition_cells', 10),
        weights=section.get('weights', 'midpoint'),
        census=section.get('census'),
        mine_min_support=section.get('mine_min_support', 0),
        mine_max_atoms=section.get('mine_max_atoms', 3),
    )
    for label, groups, size in (('pairs', analysis.pairs, 2), ('triples', analysis.triples, 3)):
        for index, group in enumerate(groups):
            if len(group) != size:
                diag.add(f"analysis.{label}[{index}]", f"需要恰好 {size} 个过程")
            for process_id in group:
                if process_id not in processes:
                    diag.add(f"analysis.{label}[{index}]", f"引用了未定义的过程 {process_id!r}")
    if not isinstance(analysis.partition_cells, int) or analysis.partition_cells < 1:
        diag.add('analysis.partition_cells', "必须为正整数")
    if isinstance(analysis.weights, str):
        if analysis.weights not in ('midpoint', 'uniform'):
            diag.add('analysis.weights', "只能是 midpoint、uniform 或数值列表")
    else:
        analysis.weights = [_fraction(w) for w in analysis.weights]
    if analysis.census is not None:
        for key in ('cost_ceiling', 'size_bound'):
            if key not in analysis.census:
                diag.add(f"analysis.census.{key}", "缺少必需字段")
    return analysis


def _check_alphabets(alphabets, agent_section, diag):
    for kind, symbols in alphabets.items():
        for symbol in symbols if isinstance(symbols, list) else ():
            if not log_safe(symbol):
                diag.add(f"alphabets.{kind}", f"符号 {symbol!r} 含有事件日志分隔符 ; = 或制表符")
    actions = alphabets.get('actions')
    if not actions or not agent_section:
        return
    declared = set(actions)
    used = set(agent_section.get('actions', []))
    if 'action' in agent_section:
        used.add(agent_section['action'])
    for action in sorted(used - declared):
        diag.add('agent', f"动作 {action!r} 不在字母表 Σ 中")


def parse_scenario(text, source=None):
    """
    解析并验证场景文本

    Raises:
        ScenarioValidationError: 带 (字段, 原因) 诊断列表
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioValidationError([('<toml>', str(exc))], source) from exc

    diag = _Diagnostics()
    name = diag.require(data, 'name', '', str)
    ticks = diag.require(data, 'ticks', '', int)
    if ticks is not None and ticks < 1:
        diag.add('ticks', "必须为正整数")
    environment = _build_environment(data.get('environment'), diag)
    agent = _build_agent(data.get('agent'), diag)
    alphabets = data.get('alphabets', {})
    _check_alphabets(alphabets, data.get('agent'), diag)
    processes = _build_processes(data.get('processes'), diag)
    for process_id in processes:
        if not log_safe(process_id):
            diag.add(f"processes.{process_id}", "过程编号含有事件日志分隔符 ; = 或制表符")
    catalog = _build_catalog(data.get('patterns'), diag)
    if len(catalog) == 0:
        diag.add('patterns', "至少需要定义一个模式")
    goals = _build_goals(data.get('goals'), catalog, diag)
    situations = _build_situations(data.get('situations'), processes, ticks or 0, diag)
    analysis = _build_analysis(data.get('analysis'), processes, diag)

    if diag.items:
        raise ScenarioValidationError(diag.items, source)
    return Scenario(
        name=name, ticks=ticks, environment=environment, agent=agent, processes=processes,
        catalog=catalog, goals=goals, situations=situations, analysis=analysis, alphabets=alphabets,
        memory_capacity=(data.get('agent') or {}).get('memory_capacity'),
        source_hash=hashlib.sha256(text.encode('utf-8')).hexdigest(), source_path=source,
    )


def load_scenario(path):
    if not os.path.exists(path):
        raise ScenarioValidationError([('<file>', f"场景文件不存在: {path}")], path)
    with open(path, 'rb') as handle:
        raw = handle.read()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as exc:
        raise ScenarioValidationError([('<file>', f"场景文件不是 UTF-8 编码: {exc}")], path) from exc
    scenario = parse_scenario(text, path)
    logger.info(f"✅ 已加载场景 {scenario.name}: {len(scenario.situations)} 个情境, "
                f"{len(scenario.processes)} 个认知过程")
    return scenario


def bundled_scenarios_dir():
    return os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'scenarios'))


def resolve_scenario_path(name_or_path):
    """允许直接写内置场景名（如 complementary-pair）"""
    if os.path.exists(name_or_path):
        return name_or_path
    candidate = os.path.join(bundled_scenarios_dir(), f"{name_or_path}.toml")
    return candidate if os.path.exists(candidate) else name_or_path


