import math
import os
from dataclasses import asdict, dataclass, field

import yaml
from dotenv import load_dotenv

from src.exceptions import ConfigError

# 加载环境变量 (.env 可选)
load_dotenv()


class Config:
    """
    全局配置类
    """

    # ==========================
    # 1. 输出与日志
    # ==========================
    DEFAULT_OUT_DIR = 'results'
    LOG_DIR_NAME = 'logs'
    LOG_FILE = 'ppsf.log'
    LOG_LEVEL = os.getenv('PPSF_LOG_LEVEL', 'INFO').upper()

    # ==========================
    # 2. 数值容差
    # ==========================
    DISC_TOL = 1e-6          # 残差校验的离散化余量
    SPECTRUM_TOL = 1e-8      # 特征值落在 [-tol, 1+tol]
    LAMBDA_GUARD = 1e-12     # Slepian g_j 排除 λ 接近 0/1 的下标

    # ==========================
    # 3. 默认网格密度
    # ==========================
    POINTS_PER_UNIT = 32

    @classmethod
    def output_dir(cls, explicit=None):
        """
        输出目录优先级: 显式参数 > 环境变量 PPSF_OUT_DIR > 默认值
        每次调用时读取环境变量
        """
        return explicit or os.getenv('PPSF_OUT_DIR') or cls.DEFAULT_OUT_DIR


# ==========================================
# 运行配置 (YAML)
# ==========================================

@dataclass(frozen=True)
class GeometryConfig:
    t_half: float = 0.5
    omega_half: float = math.pi
    margin: float = None          # None = max(t_half, 1)
    points_per_unit: int = Config.POINTS_PER_UNIT
    quadrature: str = 'corrected'    # corrected (端点修正) 或 midpoint


@dataclass(frozen=True)
class BudgetConfig:
    epsilon: float = 0.2
    sigma: object = 'auto'        # 数值，或 'auto' (σ² = ε/10)


@dataclass(frozen=True)
class SweepConfig:
    r_list: tuple = (8.0, 16.0, 32.0, 64.0)
    max_workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = None         # None = Config.output_dir()
    emit_plots: bool = True
    emit_functions: bool = False
    csv_precision: int = 12


@dataclass(frozen=True)
class SlepianConfig:
    j_max: int = 8
    normalize: bool = False


@dataclass(frozen=True)
class VerifyConfig:
    tolerance_scale: float = 1.0


# --------------------------
# 字段校验器: 返回规范化后的值，不合法时抛 ValueError(原因)
# --------------------------

def _real(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"需要实数，收到 {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"需要有限实数，收到 {value!r}")
    return float(value)


def _positive_real(value):
    value = _real(value)
    if value <= 0:
        raise ValueError(f"需要正数，收到 {value!r}")
    return value


def _non_negative_real(value):
    value = _real(value)
    if value < 0:
        raise ValueError(f"需要非负数，收到 {value!r}")
    return value


def _optional_positive_real(value):
    return None if value is None else _positive_real(value)


def _int_at_least(lower):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"需要整数，收到 {value!r}")
        if value < lower:
            raise ValueError(f"需要 >= {lower}，收到 {value!r}")
        return value
    return check


def _bool(value):
    if not isinstance(value, bool):
        raise ValueError(f"需要 true/false，收到 {value!r}")
    return value


def _epsilon(value):
    value = _real(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"需要在 (0,1) 内，收到 {value!r}")
    return value


def _sigma(value):
    if value == 'auto':
        return value
    return _positive_real(value)


def _r_list(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple)) or not value:
        raise ValueError(f"需要非空的正数列表，收到 {value!r}")
    rs = tuple(_positive_real(r) for r in value)
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError(f"需要严格递增，收到 {list(rs)}")
    return rs


def _quadrature(value):
    from src.operators import QUADRATURES

    if value not in QUADRATURES:
        raise ValueError(f"需要 {' / '.join(QUADRATURES)} 之一，收到 {value!r}")
    return value


def _precision(value):
    value = _int_at_least(1)(value)
    if value > 17:
        raise ValueError(f"需要 <= 17，收到 {value}")
    return value


def _optional_str(value):
    if value is not None and not isinstance(value, str):
        raise ValueError(f"需要字符串，收到 {value!r}")
    return value


BLOCKS = {
    'geometry': (GeometryConfig, {
        't_half': _positive_real,
        'omega_half': _positive_real,
        'margin': _optional_positive_real,
        'points_per_unit': _int_at_least(1),
        'quadrature': _quadrature,
    }),
    'budget': (BudgetConfig, {
        'epsilon': _epsilon,
        'sigma': _sigma,
    }),
    'sweep': (SweepConfig, {
        'r_list': _r_list,
        'max_workers': _int_at_least(1),
    }),
    'output': (OutputConfig, {
        'directory': _optional_str,
        'emit_plots': _bool,
        'emit_functions': _bool,
        'csv_precision': _precision,
    }),
    'slepian': (SlepianConfig, {
        'j_max': _int_at_least(0),
        'normalize': _bool,
    }),
    'verify': (VerifyConfig, {
        'tolerance_scale': _non_negative_real,
    }),
}


@dataclass(frozen=True)
class RunConfig:
    """
    一次运行的完整配置，对应 YAML 文件里的各个配置块
    """
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    slepian: SlepianConfig = field(default_factory=SlepianConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    # --------------------------
    # 解析 / 序列化
    # --------------------------
    @classmethod
    def from_dict(cls, data):
        """
        校验并构造；所有错误一次性收集，以 '块.字段: 原因' 的形式抛出 ConfigError
        """
        data = {} if data is None else data
        errors = []
        if not isinstance(data, dict):
            raise ConfigError([f"<root>: 需要键值映射，收到 {type(data).__name__}"])

        for name in data:
            if name not in BLOCKS:
                errors.append(f"{name}: 未知配置块")

        blocks = {}
        for name, (block_cls, rules) in BLOCKS.items():
            raw = data.get(name) or {}
            if not isinstance(raw, dict):
                errors.append(f"{name}: 需要键值映射，收到 {type(raw).__name__}")
                continue
            for key in raw:
                if key not in rules:
                    errors.append(f"{name}.{key}: 未知字段")

            values = asdict(block_cls())
            for key, rule in rules.items():
                if key not in raw:
                    continue
                try:
                    values[key] = rule(raw[key])
                except ValueError as e:
                    errors.append(f"{name}.{key}: {e}")
            blocks[name] = values

        # 跨字段约束
        geo, bud = blocks.get('geometry'), blocks.get('budget')
        if geo and geo['margin'] is not None and isinstance(geo['t_half'], float):
            if geo['margin'] < geo['t_half']:
                errors.append(f"geometry.margin: 不能小于 t_half ({geo['t_half']})")
        if bud and isinstance(bud['sigma'], float) and isinstance(bud['epsilon'], float):
            if bud['sigma'] ** 2 > bud['epsilon']:
                errors.append(f"budget.sigma: 需要 sigma² <= epsilon ({bud['epsilon']})")

        if errors:
            raise ConfigError(errors)
        return cls(**{name: BLOCKS[name][0](**values) for name, values in blocks.items()})

    def to_dict(self):
        out = {}
        for name in BLOCKS:
            values = asdict(getattr(self, name))
            if name == 'sweep':
                values['r_list'] = list(values['r_list'])
            out[name] = values
        return out

    @classmethod
    def load(cls, path):
        """从 YAML 文件读取"""
        try:
            with open(path, 'r', encoding='utf-8') as fh:
                data = yaml.safe_load(fh)
        except OSError as e:
            raise ConfigError([f"{path}: 无法读取 ({e.strerror})"]) from e
        except yaml.YAMLError as e:
            raise ConfigError([f"{path}: YAML 解析失败 ({e})"]) from e
        return cls.from_dict(data)

    def dump(self, path):
        with open(path, 'w', encoding='utf-8') as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False, allow_unicode=True)

    def with_overrides(self, epsilon=None, sigma=None, r_list=None, out=None):
        """命令行参数逐项覆盖配置字段，然后重新校验"""
        data = self.to_dict()
        if epsilon is not None:
            data['budget']['epsilon'] = epsilon
        if sigma is not None:
            data['budget']['sigma'] = sigma if sigma == 'auto' else float(sigma)
        if r_list is not None:
            data['sweep']['r_list'] = list(r_list)
        if out is not None:
            data['output']['directory'] = out
        return RunConfig.from_dict(data)

    # --------------------------
    # 派生对象
    # --------------------------
    @property
    def sigma_is_auto(self):
        return self.budget.sigma == 'auto'

    def budget_split(self):
        """sigma='auto' 时 σ² = ε/10"""
        from src.pseudoprolate import BudgetSplit

        if self.sigma_is_auto:
            return BudgetSplit.auto(self.budget.epsilon)
        return BudgetSplit(epsilon=self.budget.epsilon, sigma=self.budget.sigma)

    def geometry_for(self, r):
        from src.operators import Geometry

        g = self.geometry
        return Geometry.for_dilation(g.t_half, g.omega_half, r, g.margin, g.points_per_unit, g.quadrature)

    def output_dir(self):
        return Config.output_dir(self.output.directory)
