"""
停滞度公式栈
  g(S,I)               区间内目标达成度的加权平均
  g(P)                 模式 P 对目标达成的全局蕴涵度
  g_{S,I_S,𝓘}(P)       从 (S, I_S 末端) 出发的近未来条件版本，延续概率取经验频率
  c = f(证据质量)       f(x) = x / (x + k)
  e, c_e               过程 C 在相同状态轮廓、预算区间内把 P 推入程度区间 I_P 的频率及置信度
  conf = max_P g·c·e·c_e，stuck = 1 − conf
所有量都是精确有理数；缺失的量记为 None，置信度为 0。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from models.cpt_graph import CatalogEntry
from models.errors import CogSynError, NoGoalsError, ZeroWeightsError
from models.parameter_config import metric_params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Estimate:
    value: Fraction = None
    confidence: Fraction = Fraction(0)


def confidence_function(mass, k=1):
    """f(x) = x/(x+k)，单调递增，值域 [0,1)"""
    mass = Fraction(mass)
    if mass <= 0:
        return Fraction(0)
    return mass / (mass + Fraction(k))


def unit_intervals_after(end_tick, k):
    return [(end_tick + i, end_tick + i) for i in range(1, k + 1)]


def _name_and_pattern(pattern):
    if isinstance(pattern, CatalogEntry):
        return pattern.name, pattern.pattern
    return pattern, None


def _goal_degree(state, goal):
    if goal.goal_id in state.goal_degrees:
        return state.goal_degrees[goal.goal_id]
    return goal.degree(state.pattern_degrees, state.key)


def goal_achievement(store, situation, interval, goals):
    """g(S,I)：各目标程度的加权平均，再对区间内的时刻取平均"""
    goals = list(goals)
    if not goals:
        raise NoGoalsError("至少需要一个目标")
    total_weight = sum((g.weight for g in goals), Fraction(0))
    if total_weight == 0:
        raise ZeroWeightsError("目标权重全为 0")
    episode = store.episode(situation)
    per_tick = []
    for tick in range(interval[0], interval[1] + 1):
        state = episode.snapshot(tick)
        if state is None:
            raise CogSynError(f"情境 {situation} 缺少时刻 {tick} 的快照")
        weighted = sum((g.weight * _goal_degree(state, g) for g in goals), Fraction(0))
        per_tick.append(weighted / total_weight)
    return sum(per_tick, Fraction(0)) / len(per_tick)


def g_global(store, pattern, goals, intervals=None, params=None):
    """
    g(P) = Σ g(S,I)·P(S,I) / Σ P(S,I)，对所有记录的 (S, I ∈ 𝓘)

    Args:
        intervals: 区间目录 𝓘，默认每段经历的全部单位区间
    """
    params = metric_params(params)
    name, body = _name_and_pattern(pattern)
    numerator = Fraction(0)
    denominator = Fraction(0)
    for episode in store:
        catalog = intervals if intervals is not None else [(t, t) for t in episode.ticks()]
        for interval in catalog:
            degree = store.pattern_degree(episode.situation, interval, name, body)
            if not degree:
                continue
            numerator += goal_achievement(store, episode.situation, interval, goals) * degree
            denominator += degree
    if denominator == 0:
        return Estimate(None, Fraction(0))
    return Estimate(numerator / denominator, confidence_function(denominator, params['confidence_k']))


def _conditional_terms(store, pattern, situation, situation_interval, intervals, params):
    name, body = _name_and_pattern(pattern)
    end = situation_interval[1]
    if intervals is None:
        intervals = unit_intervals_after(end, params['near_future_k'])
    weights = store.continuations(situation, end)
    terms = []
    for continuation, probability in weights.items():
        for interval in intervals:
            degree = store.pattern_degree(continuation, interval, name, body)
            if degree:
                terms.append((continuation, interval, degree, probability))
    return terms


def g_conditional(store, pattern, goals, situation, situation_interval, intervals=None, params=None):
    """
    g_{S,I_S,𝓘}(P) = Σ g(S',I)·P(S',I)·Prob((S',I)|(S,t)) / Σ P(S',I)·Prob((S',I)|(S,t))
    没有延续或分母为 0 时返回 (None, 0)
    """
    params = metric_params(params)
    terms = _conditional_terms(store, pattern, situation, situation_interval, intervals, params)
    numerator = Fraction(0)
    mass = Fraction(0)
    for continuation, interval, degree, probability in terms:
        numerator += goal_achievement(store, continuation, interval, goals) * degree * probability
        mass += degree * probability
    if mass == 0:
        return Estimate(None, Fraction(0))
    return Estimate(numerator / mass, confidence_function(mass, params['confidence_k']))


def confidence_of_g(store, pattern, situation, situation_interval, intervals=None, params=None):
    params = metric_params(params)
    terms = _conditional_terms(store, pattern, situation, situation_interval, intervals, params)
    mass = sum((degree * probability for _, _, degree, probability in terms), Fraction(0))
    return confidence_function(mass, params['confidence_k'])


def _efficacy_counts(store, process, profile, pattern, offset, budget_interval, degree_interval):
    name, body = _name_and_pattern(pattern)
    low, high = degree_interval
    trials = 0
    successes = 0
    for episode in store:
        for transition in episode.transitions:
            if transition.cause != process or transition.source != profile:
                continue
            if budget_interval is not None and not transition.resource_cost.within(budget_interval):
                continue
            start = transition.interval[0]
            outcome = store.pattern_degree(episode.situation, (start + offset[0], start + offset[1]), name, body)
            if outcome is None:
                continue
            trials += 1
            if low <= outcome <= high:
                successes += 1
    return trials, successes


def action_efficacy(store, process, situation, situation_interval, pattern,
                    budget_interval=None, offset_interval=None, degree_interval=None, params=None):
    """
    e_{C,I_R,S,I_S}(P, I, I_P)：在与 (S, I_S 末端) 相同的状态轮廓上，C 以预算区间 I_R 内的资源行动后，
    偏移区间 I 上 P 的程度落入 I_P 的频率；c_e = f(试验次数)

    Args:
        budget_interval: (下界 ResourceBudget, 上界 ResourceBudget)，None 表示不限
        offset_interval: 结果区间相对转移起点的偏移 (d1, d2)，d1 ≥ 1
        degree_interval: 程度区间 I_P
    """
    params = metric_params(params)
    offset = offset_interval or params['efficacy_offset_interval']
    degree_interval = degree_interval or params['efficacy_degree_interval']
    if offset[0] < 1:
        raise CogSynError("结果区间必须位于 I_S 之后")
    profile = store.state_at(situation, situation_interval[1]).key
    trials, successes = _efficacy_counts(store, process, profile, pattern, offset,
                                         budget_interval, degree_interval)
    if trials == 0:
        return Estimate(None, Fraction(0))
    return Estimate(Fraction(successes, trials), confidence_function(trials, params['confidence_k']))


def action_efficacy_over(store, process, situation, situation_interval, pattern, offsets,
                         budget_interval=None, degree_interval=None, params=None):
    """对一组偏移区间平均的功效；置信度取所有试验次数之和"""
    params = metric_params(params)
    degree_interval = degree_interval or params['efficacy_degree_interval']
    profile = store.state_at(situation, situation_interval[1]).key
    rates = []
    total_trials = 0
    for offset in offsets:
        trials, successes = _efficacy_counts(store, process, profile, pattern, offset,
                                             budget_interval, degree_interval)
        if trials:
            rates.append(Fraction(successes, trials))
            total_trials += trials
    if not rates:
        return Estimate(None, Fraction(0))
    return Estimate(sum(rates, Fraction(0)) / len(rates),
                    confidence_function(total_trials, params['confidence_k']))


def four_factor_conf(g, c_g, e, c_e):
    """四个因子的乘积，None 视为 0"""
    product = Fraction(1)
    for factor in (g, c_g, e, c_e):
        product *= Fraction(factor) if factor is not None else Fraction(0)
    return product


def goals_fingerprint(goals):
    """目标列表的可哈希摘要，用作 g 缓存键的一部分"""
    return tuple((g.goal_id, g.weight, g.pattern_name,
                  tuple(sorted(g.table.items())) if g.table is not None else None) for g in goals)


@dataclass(frozen=True)
class StucknessResult:
    conf: Fraction
    stuck: Fraction
    argmax_pattern: str = None
    argmax_key: str = None
    factors: tuple = ()
    flagged: bool = False
    scores: dict = field(default_factory=dict)


def conf_and_stuckness(store, process, situation, situation_interval, candidates, goals,
                       intervals=None, budget_interval=None, params=None, g_cache=None):
    """
    conf = 候选模式上四因子乘积的最大值，stuck = 1 − conf；平局取规范键最小的模式。
    候选集为空时返回 conf 0、stuck 1 并置 flagged。

    Args:
        candidates: CatalogEntry 列表（目录或挖掘结果）
        g_cache: 可选字典，在多个过程之间复用与过程无关的 g 估计
    """
    params = metric_params(params)
    candidates = list(candidates)
    if not candidates:
        logger.info(f"⚠️ {process} 在 {situation}@{situation_interval} 没有候选模式，视为完全停滞")
        return StucknessResult(Fraction(0), Fraction(1), flagged=True)

    goals = list(goals)
    context = (situation, tuple(situation_interval), goals_fingerprint(goals),
               tuple(intervals) if intervals is not None else None)
    best = None
    scores = {}
    for entry in candidates:
        cache_key = context + (entry.name,)
        if g_cache is not None and cache_key in g_cache:
            g = g_cache[cache_key]
        else:
            g = g_conditional(store, entry, goals, situation, situation_interval, intervals, params)
            if g_cache is not None:
                g_cache[cache_key] = g
        e = action_efficacy(store, process, situation, situation_interval, entry,
                            budget_interval=budget_interval, params=params)
        factors = (g.value, g.confidence, e.value, e.confidence)
        score = four_factor_conf(*factors)
        scores[entry.name] = score
        if best is None or score > best[0] or (score == best[0] and entry.key < best[1].key):
            best = (score, entry, factors)

    conf, entry, factors = best
    return StucknessResult(conf, 1 - conf, entry.name, entry.key, factors, False, scores)
