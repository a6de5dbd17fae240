from fractions import Fraction


def get_default_search_params():
    """
    提供默认的搜索规模参数，超过这些上限时返回显式错误或截断标记
    """
    return {
        # 暴力枚举的顶点映射数上限 |V_src|^|V_dst|
        'exact_threshold': 10 ** 7,
        # 单次回溯搜索的最大步数
        'max_search_steps': 2_000_000,

        # 规范形的排列枚举上限 (8!)
        'canonical_max_permutations': 40320,

        # 指数图节点数上限
        'exponent_max_nodes': 20000,

        # 代价序广度优先搜索的状态数上限
        'cost_order_max_states': 5000,

        # 自然变换分量组合数上限
        'nat_trans_max_combinations': 100000,
        # 单个分量候选同态的上限
        'nat_trans_max_candidates': 64,

        # 同态/同构普查的子图对上限
        'census_max_pairs': 20000,

        # 模式挖掘允许的最大原子数
        'mine_max_atoms': 6,
    }


def get_default_metric_params():
    """
    提供默认的度量参数，对应停滞度公式栈和协同指数
    """
    return {
        # 置信度函数 f(x) = x / (x + k)
        'confidence_k': Fraction(1),

        # 近未来窗口：I_S 之后的单位区间个数
        'near_future_k': 5,

        # 适应度采样下限
        'epsilon': Fraction(1, 10 ** 6),

        # 功效判定的程度区间 I_P
        'efficacy_degree_interval': (Fraction(1, 2), Fraction(1)),

        # 功效结果区间：相对转移起点的偏移
        'efficacy_offset_interval': (1, 1),

        # 划分单元数与权重方式
        'partition_cells': 10,
        'weights': 'midpoint',

        # 蒙特卡洛估计的样本数
        'mc_samples': 4000,
    }


def get_default_agent_params():
    """
    提供默认的智能体参数
    """
    return {
        'memory_capacity': 256,  # 多重集记忆的总计数上限
        'activation_depth': 64,  # 激活链深度上限
    }


def merge_params(defaults, overrides=None):
    """用调用方给出的部分参数覆盖默认参数"""
    params = dict(defaults)
    if overrides:
        params.update(overrides)
    return params


def _check_required(params, required_keys):
    for key in required_keys:
        if key not in params:
            raise ValueError(f"缺少必要参数: {key}")


def validate_search_params(params):
    """
    验证搜索参数的有效性
    """
    required_keys = list(get_default_search_params().keys())
    _check_required(params, required_keys)

    errors = []
    for key in required_keys:
        if not isinstance(params[key], int) or params[key] <= 0:
            errors.append(f"{key} 必须为正整数")
    if errors:
        raise ValueError("; ".join(errors))
    return params


def validate_metric_params(params):
    """
    验证度量参数的有效性
    """
    required_keys = [
        'confidence_k', 'near_future_k', 'epsilon',
        'efficacy_degree_interval', 'efficacy_offset_interval',
        'partition_cells', 'weights', 'mc_samples'
    ]
    _check_required(params, required_keys)

    errors = []
    if Fraction(params['confidence_k']) <= 0:
        errors.append("置信度常数 k 必须为正")
    if params['near_future_k'] < 1:
        errors.append("近未来窗口至少包含一个区间")
    if not 0 < Fraction(params['epsilon']) < 1:
        errors.append("epsilon 必须在 (0,1) 之间")
    low, high = params['efficacy_degree_interval']
    if not 0 <= Fraction(low) <= Fraction(high) <= 1:
        errors.append("程度区间 I_P 设置不合理")
    start, end = params['efficacy_offset_interval']
    if not 1 <= start <= end:
        errors.append("功效结果区间必须位于转移之后")
    if params['partition_cells'] < 1:
        errors.append("划分单元数必须为正")
    if params['weights'] not in ('midpoint', 'uniform') and not isinstance(params['weights'], (list, tuple)):
        errors.append("weights 只能是 midpoint、uniform 或显式列表")
    if params['mc_samples'] < 1:
        errors.append("蒙特卡洛样本数必须为正")
    if errors:
        raise ValueError("; ".join(errors))
    return params


def validate_agent_params(params):
    """
    验证智能体参数的有效性
    """
    _check_required(params, ['memory_capacity', 'activation_depth'])
    if params['memory_capacity'] < 1:
        raise ValueError("记忆容量必须为正")
    if params['activation_depth'] < 1:
        raise ValueError("激活深度上限必须为正")
    return params


def search_params(overrides=None):
    return validate_search_params(merge_params(get_default_search_params(), overrides))


def metric_params(overrides=None):
    return validate_metric_params(merge_params(get_default_metric_params(), overrides))


def agent_params(overrides=None):
    return validate_agent_params(merge_params(get_default_agent_params(), overrides))
