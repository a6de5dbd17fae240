"""
认知协同模拟器的错误体系
每个错误类带一个稳定的 code 字符串，CLI 据此映射退出码，报告据此输出诊断
"""


class CogSynError(ValueError):
    """所有领域错误的基类"""

    code = 'cogsyn-error'

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        return f"[{self.code}] {self.message}"


class DanglingTargetError(CogSynError):
    code = 'dangling'

    def __init__(self, missing_id, message=None):
        super().__init__(message or f"目标原子不存在: {missing_id}", missing_id=missing_id)
        self.missing_id = missing_id


class InvalidLabelError(CogSynError):
    code = 'invalid-label'


class InvalidPatternError(CogSynError):
    code = 'invalid-pattern'


class MergeNonNodeError(CogSynError):
    code = 'merge-non-node'


class MergeTypeMismatchError(CogSynError):
    code = 'merge-type-mismatch'


class BadPartitionError(CogSynError):
    code = 'bad-partition'


class UnboundedNegationError(CogSynError):
    code = 'unbounded-negation'


class TooLargeError(CogSynError):
    code = 'too-large'


class ExponentTooLargeError(TooLargeError):
    code = 'exponent-too-large'


class UndecidedAtScaleError(CogSynError):
    code = 'undecided-at-scale'


class ActivationDepthError(CogSynError):
    """激活链超过深度上限；已经应用的效果保存在 partial_effects 中"""

    code = 'activation-depth'

    def __init__(self, message, partial_effects=()):
        super().__init__(message, depth_exceeded=True)
        self.partial_effects = list(partial_effects)


class NotActivatableError(CogSynError):
    code = 'not-activatable'


class CognitAbsentError(CogSynError):
    code = 'cognit-absent'


class InvalidDistributionError(CogSynError):
    code = 'invalid-distribution'


class InvalidTransitionError(CogSynError):
    code = 'invalid-transition'


class DuplicateSituationError(CogSynError):
    code = 'duplicate-situation'


class NoGoalsError(CogSynError):
    code = 'no-goals'


class ZeroWeightsError(CogSynError):
    code = 'zero-weights'


class UnknownProcessError(CogSynError):
    code = 'unknown-process'


class InsufficientBudgetError(CogSynError):
    code = 'insufficient-budget'


class InvalidPartitionError(CogSynError):
    code = 'invalid-partition'


class NoComponentError(CogSynError):
    code = 'no-component'


class ScenarioValidationError(CogSynError):
    """场景文件校验失败，diagnostics 为 (字段路径, 说明) 列表"""

    code = 'invalid-scenario'

    def __init__(self, diagnostics, source=None):
        self.diagnostics = list(diagnostics)
        lines = [f"{field}: {reason}" for field, reason in self.diagnostics]
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(lines), source=source)


class ManifestError(CogSynError):
    """清单缺失或损坏，missing 列出所有缺失的文件"""

    code = 'manifest'

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class HypergraphFormatError(CogSynError):
    code = 'bad-format'
