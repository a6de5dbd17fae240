"""
子超图在环境图中的概率泛函（可插拔）

EmbeddingProbability（默认）:
    prob = 子图到环境图的同态个数 / 子图到环境节点集上完全类型兼容图的同态个数
    精确计数；规模超过阈值时用带种子的蒙特卡洛估计并给出标准误
TransitionMassProbability:
    prob = 子图中（属于环境图的）某类链接个数 / 环境图中该类链接个数
    对环境内不相交子图严格可加，对独立直积严格可乘；协同分析用它作为实例概率
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from models.heyting_algebra import meet_with_pairs
from models.homomorphism import MapSearch, count_homomorphisms
from models.parameter_config import get_default_metric_params, search_params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProbabilityEstimate:
    estimate: object
    stderr: float = 0.0
    n_samples: int = 0
    seed: int = None
    exact: bool = True
    flag: str = None

    @property
    def value(self):
        return self.estimate

    def as_record(self):
        return {
            'estimate': self.estimate,
            'stderr': self.stderr,
            'n_samples': self.n_samples,
            'seed': self.seed,
            'exact': self.exact,
            'flag': self.flag,
        }


class ProbabilityFunctional:
    name = 'abstract'

    def __call__(self, sub, ambient, seed=None):
        raise NotImplementedError


class EmbeddingProbability(ProbabilityFunctional):
    name = 'embedding'

    def __init__(self, params=None, mc_samples=None):
        self.params = search_params(params)
        self.mc_samples = mc_samples or get_default_metric_params()['mc_samples']

    def domains(self, sub, ambient):
        ambient_nodes = ambient.nodes()
        return [[n.id for n in ambient_nodes if n.type_name == node.type_name] for node in sub.nodes()]

    def __call__(self, sub, ambient, seed=None):
        if len(sub) == 0:
            return ProbabilityEstimate(Fraction(1))
        if ambient.num_nodes == 0:
            return ProbabilityEstimate(Fraction(0), flag='empty-ambient')
        domains = self.domains(sub, ambient)
        denominator = math.prod(len(d) for d in domains)
        if denominator == 0:
            return ProbabilityEstimate(Fraction(0), flag='no-compatible-nodes')

        if denominator <= self.params['exact_threshold']:
            count, exhaustive = count_homomorphisms(sub, ambient, self.params)
            if exhaustive:
                return ProbabilityEstimate(Fraction(count, denominator))
            logger.info("精确计数超出步数上限，改用蒙特卡洛估计")
        return self._monte_carlo(sub, ambient, domains, seed)

    def _monte_carlo(self, sub, ambient, domains, seed):
        rng = np.random.default_rng(seed)
        sub_nodes = sub.node_ids()
        n = self.mc_samples
        values = np.empty(n)
        for i in range(n):
            fixed = {node: domain[int(rng.integers(len(domain)))] for node, domain in zip(sub_nodes, domains)}
            values[i] = next(iter(MapSearch(sub, ambient, fixed=fixed)), None) is not None
        stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        logger.debug(f"📊 蒙特卡洛估计: {values.mean():.4f} ± {stderr:.4f} (n={n}, seed={seed})")
        return ProbabilityEstimate(float(values.mean()), stderr, n, seed, exact=False)


class TransitionMassProbability(ProbabilityFunctional):
    name = 'transition-mass'

    def __init__(self, link_type='transition'):
        self.link_type = link_type

    def _counts(self, link):
        return self.link_type is None or link.type_name == self.link_type

    def __call__(self, sub, ambient, seed=None):
        pool = [l for l in ambient.links() if self._counts(l)]
        if not pool:
            return ProbabilityEstimate(Fraction(0), flag='empty-ambient')
        counted = 0
        foreign = 0
        for link in sub.links():
            if not self._counts(link):
                continue
            if link.id in ambient and ambient.atom(link.id) == link:
                counted += 1
            else:
                foreign += 1
        flag = 'foreign-atoms' if foreign else None
        return ProbabilityEstimate(Fraction(counted, len(pool)), flag=flag)


def prob(sub, ambient, functional=None, seed=None, params=None):
    """按指定泛函计算子图概率，默认嵌入计数泛函"""
    functional = functional or EmbeddingProbability(params)
    return functional(sub, ambient, seed)


def union_instance(ambient, *subs):
    """环境图内若干子图的并（实例意义）"""
    atom_ids = set()
    for sub in subs:
        atom_ids.update(a.id for a in sub)
    return ambient.subgraph(atom_ids)


def product_instance(sub_a, sub_b, ambient_a, ambient_b):
    """
    两个环境图直积中的子对象 sub_a × sub_b

    Returns:
        (积内子图, 积环境图)
    """
    ambient, pairs = meet_with_pairs(ambient_a, ambient_b)
    keep = [pid for pid, (x, y) in pairs.items() if x in sub_a and y in sub_b]
    return ambient.subgraph(keep), ambient
