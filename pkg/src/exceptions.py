"""
异常体系
所有库代码只抛出这里定义的异常，由 main.py 统一映射为退出码。
"""

# 退出码约定
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class PPSFError(Exception):
    """基类"""
    exit_code = EXIT_NUMERICAL


class ArgumentError(PPSFError, ValueError):
    """参数不合法"""
    exit_code = EXIT_VALIDATION


class DimensionError(ArgumentError):
    """网格函数长度与网格不一致"""


class BudgetError(ArgumentError):
    """能量预算 (epsilon / sigma / gamma / m) 不合法"""


class ConfigError(ArgumentError):
    """
    配置校验失败
    一次性携带全部错误 (字段路径: 原因)，而不是遇到第一个就停
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class GeometryError(PPSFError, ValueError):
    """几何退化: rT 内没有网格点，或者 rT 外的点不够放 kernel 填充函数"""


class NumericalError(PPSFError, RuntimeError):
    """特征分解失败，附带矩阵状态报告"""

    def __init__(self, message, report=None):
        self.report = report or {}
        if self.report:
            details = ", ".join(f"{k}={v}" for k, v in self.report.items())
            message = f"{message} ({details})"
        super().__init__(message)


class EmptyFamilyError(PPSFError):
    """没有 λ_k > 1-σ 的特征函数，构造退化"""

    def __init__(self, message, hint="请增大 r 或 sigma"):
        self.hint = hint
        super().__init__(f"{message}；{hint}")


class VerificationError(PPSFError):
    """残差或不变量校验失败 (通常意味着离散化太粗)"""


class ExperimentError(PPSFError):
    """扫描结果中没有可用记录"""


class StorageError(PPSFError, OSError):
    """输出目录不可写"""
    exit_code = EXIT_IO

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)
