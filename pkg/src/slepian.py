"""
Slepian 比较序列 g_j 与近似维数的斜率代理

g_j(t) = sqrt(ε/(1-λ_j)) φ_j(t) + sqrt(ε/(λ_j(1-λ_j))) 1_[-1,1](2t/T) φ_j(t)
公式按原样实现 (两个系数都按 sqrt(ε) 缩放)，指示函数取 rT
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import Config
from src.exceptions import ArgumentError

logger = logging.getLogger('Slepian')

LAMBDA_GUARD = Config.LAMBDA_GUARD


@dataclass(frozen=True)
class SlepianSequence:
    """
    functions: 与 indices 一一对应的 g_j 网格采样
    excluded: [(j, λ_j)]，λ_j 距 0 或 1 不足 guard 的下标
    epsilon_prime: 仅作为实验元数据记录
    """
    functions: np.ndarray
    indices: tuple
    excluded: tuple
    epsilon: float
    source: object
    normalized: bool = False
    epsilon_prime: float = None
    prefactors: dict = field(default_factory=dict)


def slepian_g(spec, geom, epsilon, j_max, normalize=False, guard=LAMBDA_GUARD, epsilon_prime=None):
    """
    计算 g_0 .. g_{j_max}
    :param normalize: True 时每个 g_j 缩放到单位范数 (仅用于画图)
    :return: SlepianSequence
    """
    if not epsilon > 0.0:
        raise ArgumentError(f"epsilon 必须为正，收到 {epsilon}")
    if int(j_max) != j_max or not (0 <= j_max < spec.size):
        raise ArgumentError(f"j_max 必须在 [0, {spec.size}) 内，收到 {j_max}")
    if spec.geom != geom:
        raise ArgumentError("spectrum 与 geometry 不一致")

    indicator = geom.inside_mask.astype(float)
    rows, indices, excluded, prefactors = [], [], [], {}

    for j in range(int(j_max) + 1):
        lam = float(spec.lambdas[j])
        if lam <= guard or lam >= 1.0 - guard:
            excluded.append((j, lam))
            continue
        outer = math.sqrt(epsilon / (1.0 - lam))
        inner = math.sqrt(epsilon / (lam * (1.0 - lam)))
        g = outer * spec.phis[j] + inner * indicator * spec.phis[j]
        if normalize:
            g = g / math.sqrt(geom.spacing * np.dot(g, g))
        rows.append(g)
        indices.append(j)
        prefactors[j] = (outer, inner)

    if excluded:
        logger.info(f"🚫 排除 {len(excluded)} 个 λ_j 接近 0/1 的下标: {[j for j, _ in excluded]}")

    functions = np.vstack(rows) if rows else np.zeros((0, geom.grid_points))
    return SlepianSequence(
        functions=functions,
        indices=tuple(indices),
        excluded=tuple(excluded),
        epsilon=float(epsilon),
        source=spec,
        normalized=normalize,
        epsilon_prime=epsilon_prime,
        prefactors=prefactors,
    )


def slepian_counts(spec_family, epsilon):
    """每个 r 的维数代理 N(r) = #{λ_k > ε}"""
    return [int(np.count_nonzero(s.lambdas > epsilon)) for s in spec_family]


def slepian_dimension_slope(spec_family, epsilon):
    """
    N(r) 对 r 的最小二乘斜率 (特征值计数代理，不是精确的 minimax 维数)
    """
    if not (0.0 < epsilon < 1.0):
        raise ArgumentError(f"epsilon 必须在 (0,1) 内，收到 {epsilon}")
    if len(spec_family) < 3:
        raise ArgumentError(f"至少需要 3 个 r，收到 {len(spec_family)}")
    rs = np.array([s.geom.r for s in spec_family], dtype=float)
    if np.ptp(rs) == 0.0:
        raise ArgumentError("r 全部相同，无法回归")

    counts = slepian_counts(spec_family, epsilon)
    slope = float(np.polyfit(rs, counts, 1)[0])
    logger.info(f"📐 Slepian 斜率 (代理) | ε={epsilon:g} | counts={counts} | slope={slope:.4f}")
    return slope
