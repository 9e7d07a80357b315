import logging

from config import Config

from .base import BaseCheck, CheckResult, Measurement, VerifyContext
from .mixing import LambdaRowNormsCheck, MixingOrthogonalityCheck
from .spectral import (
    BackendAgreementCheck,
    PseudoProlateGramCheck,
    SpectrumGramCheck,
    TraceIdentityCheck,
)

logger = logging.getLogger('Verify')

# 检查注册表 (按执行顺序)
# 新增检查时在这里导入并登记
CHECK_MAP = {
    'mixing_orthogonality': MixingOrthogonalityCheck,
    'lambda_row_norms': LambdaRowNormsCheck,
    'spectrum_gram': SpectrumGramCheck,
    'trace_identity': TraceIdentityCheck,
    'pseudoprolate_gram': PseudoProlateGramCheck,
    'backend_agreement': BackendAgreementCheck,
}


def load_checks(config, names=None):
    """
    根据运行配置实例化检查对象
    :param config: RunConfig (几何取 r_list 的第一个 r)
    :param names: 只运行其中一部分；None 表示全部
    :return: List[BaseCheck]
    """
    geom = config.geometry_for(config.sweep.r_list[0])
    context = VerifyContext(geom, config.budget_split(), Config.DISC_TOL)

    checks = []
    for name in names or CHECK_MAP:
        check_cls = CHECK_MAP.get(name)
        if check_cls is None:
            logger.warning(f"⚠️ 跳过未知检查: {name}")
            continue
        checks.append(check_cls(context, config.verify.tolerance_scale))
    return checks


def run_checks(checks):
    """依次运行，单项失败不影响后续检查"""
    return [check.run() for check in checks]


__all__ = [
    'BaseCheck', 'CheckResult', 'Measurement', 'VerifyContext',
    'CHECK_MAP', 'load_checks', 'run_checks',
]
