"""
场景批量执行器
按情境并行模拟认知过程，把快照和转移写入元系统，再顺序执行场景请求的分析：
停滞度、成对/三元协同指数、可选的同态/同构普查。
"""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from models.agent_simulation import Memory, run_episode
from models.cognitive_processes import build_episode, simulate_situation
from models.cpt_graph import EpisodeStore, extract_cpt
from models.hypergraph import format_fraction
from models.parameter_config import agent_params, metric_params
from models.pgmc_controller import mine_history_patterns
from models.synergy_analysis import (cog_syn, cog_syn_triple, compute_stuck_records, hom_iso_census,
                                     make_partition)

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    scenario: object
    store: EpisodeStore
    catalog: object
    seeds: dict
    records: list
    details: dict
    synergy: list = field(default_factory=list)
    census: list = field(default_factory=list)
    undecided: list = field(default_factory=list)

    def metrics_rows(self):
        rows = []
        for (situation, tick, process), result in sorted(self.details.items()):
            g, c_g, e, c_e = result.factors if result.factors else (None, None, None, None)
            rows.append({
                'situation': situation,
                'tick': tick,
                'process': process,
                'conf': format_fraction(result.conf),
                'stuck': format_fraction(result.stuck),
                'argmax_pattern': result.argmax_pattern or '-',
                'argmax_key': result.argmax_key or '-',
                'g': format_fraction(g),
                'c_g': format_fraction(c_g),
                'e': format_fraction(e),
                'c_e': format_fraction(c_e),
                'flagged': int(result.flagged),
            })
        return rows

    def state_rows(self):
        rows = []
        for episode in sorted(self.store, key=lambda e: e.situation):
            for state in episode.snapshots:
                rows.append({
                    'situation': episode.situation,
                    'tick': state.tick,
                    'state_key': state.key,
                    **{f"pattern:{name}": format_fraction(value)
                       for name, value in sorted(state.pattern_degrees.items())},
                    **{f"goal:{name}": format_fraction(value)
                       for name, value in sorted(state.goal_degrees.items())},
                })
        return rows


def derive_seeds(situations, seed=None):
    """未给出总种子时使用场景中的显式种子，否则按 (总种子, 序号) 派生"""
    if seed is None:
        return {s.situation: s.seed for s in situations}
    return {s.situation: int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
            for index, s in enumerate(situations)}


def merge_events(agent_events, process_events):
    """认知过程事件排在同一时刻的智能体时隙之后"""
    next_slot = {}
    for event in agent_events:
        next_slot[event.tick] = max(next_slot.get(event.tick, 0), event.slot + 1)
    merged = list(agent_events)
    for event in process_events:
        slot = next_slot.get(event.tick, 0)
        next_slot[event.tick] = slot + 1
        merged.append(dataclasses.replace(event, slot=slot))
    merged.sort(key=lambda e: (e.tick, e.slot))
    return merged


class ScenarioRunner:
    def __init__(self, scenario, seed=None, jobs=1, partition_cells=None, weights=None, params=None):
        """
        初始化场景执行器

        Args:
            scenario: utils.scenario_loader.Scenario
            seed: 覆盖场景中各情境种子的总种子
            jobs: 情境级并行度
            partition_cells / weights: 覆盖场景中的划分设置
        """
        self.scenario = scenario
        self.seed = seed
        self.jobs = max(1, int(jobs))
        self.params = metric_params(params)
        self.partition_cells = partition_cells or scenario.analysis.partition_cells
        self.weights = weights or scenario.analysis.weights
        self.seeds = derive_seeds(scenario.situations, seed)

    def _simulate_one(self, spec):
        spec = dataclasses.replace(spec, seed=self.seeds[spec.situation])
        run = simulate_situation(spec, self.scenario.processes, self.scenario.ticks)
        capacity = self.scenario.memory_capacity or agent_params()['memory_capacity']
        agent_events = run_episode(self.scenario.agent, self.scenario.environment, self.scenario.ticks,
                                   spec.seed, memory=Memory(capacity))
        run.events = merge_events(agent_events, run.events)
        return run

    def simulate(self):
        """并行模拟各情境；结果顺序与场景中的情境顺序一致"""
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            runs = list(executor.map(self._simulate_one, self.scenario.situations))
        logger.info(f"✅ 模拟完成: {len(runs)} 个情境, 每个 {self.scenario.ticks} 步")
        return runs

    def _catalog(self, runs):
        analysis = self.scenario.analysis
        catalog = self.scenario.catalog
        if analysis.mine_min_support > 0:
            snapshots = [memory for run in runs for memory in run.memories]
            mined = mine_history_patterns(snapshots, analysis.mine_min_support, analysis.mine_max_atoms)
            catalog = catalog.merged(mined)
        return catalog

    def record(self, runs, catalog):
        store = EpisodeStore(self.scenario.processes)
        for run in runs:
            store.add_episode(build_episode(run, self.scenario.processes, catalog,
                                            self.scenario.goals, self.params))
        return store

    def analyze(self, store, catalog):
        analysis = self.scenario.analysis
        processes = sorted(self.scenario.processes)
        records, details = compute_stuck_records(store, processes, list(catalog), self.scenario.goals,
                                                 self.params)
        partition = make_partition(self.partition_cells)
        synergy = [cog_syn(store, records, a, b, partition, self.weights) for a, b in analysis.pairs]
        synergy += [cog_syn_triple(store, records, a, b, c, partition, self.weights)
                    for a, b, c in analysis.triples]
        for report in synergy:
            logger.info(f"📊 cog-syn[{'|'.join(report.processes)}] = {format_fraction(report.value)}")

        census = []
        undecided = []
        if analysis.census is not None:
            for a, b in analysis.pairs:
                record = hom_iso_census(extract_cpt(store, a).graph, extract_cpt(store, b).graph,
                                        analysis.census['cost_ceiling'], analysis.census['size_bound'])
                census.append(((a, b), record))
                if record.truncated:
                    undecided.append(f"census {a}|{b}")
                    logger.warning(f"⚠️ {a}|{b} 的普查被截断，结果不完整")
        return records, details, synergy, census, undecided

    def run(self):
        runs = self.simulate()
        catalog = self._catalog(runs)
        store = self.record(runs, catalog)
        records, details, synergy, census, undecided = self.analyze(store, catalog)
        return RunResult(self.scenario, store, catalog, self.seeds, records, details,
                         synergy, census, undecided)


def run_scenario(scenario, seed=None, jobs=1, partition_cells=None, weights=None, params=None):
    """
    执行场景并返回全部分析结果

    Returns:
        RunResult
    """
    return ScenarioRunner(scenario, seed, jobs, partition_cells, weights, params).run()
