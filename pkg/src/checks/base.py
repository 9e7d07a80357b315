from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
import logging
import time

from src.eigensolver import compute_spectrum
from src.exceptions import PPSFError


@dataclass(frozen=True)
class Measurement:
    """一项误差及其容差"""
    label: str
    value: float
    tolerance: float

    @property
    def passed(self):
        # NaN 一律视为失败
        return bool(self.value <= self.tolerance)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measurements: tuple = ()
    error: str = ''
    elapsed: float = 0.0

    @property
    def passed(self):
        return not self.error and all(m.passed for m in self.measurements)

    @property
    def first_failure(self):
        if self.error:
            return self.error
        for m in self.measurements:
            if not m.passed:
                return f"{m.label}={m.value:.3e} > {m.tolerance:.1e}"
        return ''


class VerifyContext:
    """
    各项检查共享的几何、预算和 (惰性计算的) 特征分解
    """

    def __init__(self, geom, budget, disc_tol):
        self.geom = geom
        self.budget = budget
        self.disc_tol = disc_tol

    @cached_property
    def spectrum(self):
        return compute_spectrum(self.geom)


class BaseCheck(ABC):
    """
    不变量检查的抽象基类
    子类只实现 measure()，容差统一乘以 tolerance_scale
    """
    name = 'base'

    def __init__(self, context, tolerance_scale=1.0):
        self.context = context
        self.scale = float(tolerance_scale)
        self.logger = logging.getLogger('Verify')

    def tol(self, value):
        return value * self.scale

    @abstractmethod
    def measure(self):
        """[必须实现] 返回 Measurement 列表"""
        pass

    def run(self):
        start_time = time.time()
        try:
            measurements = tuple(self.measure())
            result = CheckResult(self.name, measurements, elapsed=time.time() - start_time)
        except PPSFError as e:
            result = CheckResult(self.name, error=str(e), elapsed=time.time() - start_time)

        if result.passed:
            self.logger.info(f"✅ {self.name} 通过 ({result.elapsed:.2f}s)")
        else:
            self.logger.error(f"❌ {self.name} 失败: {result.first_failure}")
        return result
