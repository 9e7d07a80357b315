"""
集中算子的特征分解 + DPSS 独立校验

- compute_spectrum: 稠密对称特征分解 (scipy.linalg.eigh)
- dpss_oracle: 离散长球序列，用对称三对角“交换矩阵”求特征向量，
  再对离散 sinc 矩阵取 Rayleigh 商得到集中度，作为独立后端
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal, toeplitz

from config import Config
from src.exceptions import ArgumentError, GeometryError, NumericalError
from src.operators import GridFunction, apply_concentration, build_concentration_matrix

logger = logging.getLogger('Eigensolver')

SPECTRUM_TOL = Config.SPECTRUM_TOL
DPSS_MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """
    特征对，按特征值非增排列
    phis 的每一行是一个特征函数 (离散 L2 单位范数，rT 外补零到整个窗口)
    存的是网格表示 √(w/h)·φ，逐点取值用 geom.to_samples()
    lambdas 保存原始值 (不截断到 [0,1])，阈值选择时才用 clamped()
    """
    lambdas: np.ndarray
    phis: np.ndarray
    geom: object
    truncated: bool = False

    @property
    def size(self):
        return len(self.lambdas)

    def phi(self, k):
        return GridFunction(values=self.phis[k], weight=self.geom.spacing)

    def clamped(self):
        return np.clip(self.lambdas, 0.0, 1.0)

    @property
    def eigen_sum(self):
        return float(np.sum(self.lambdas))

    @property
    def second_moment_defect(self):
        """Σλ - Σλ²，随 r 次线性增长"""
        lam = self.lambdas
        return float(np.sum(lam) - np.sum(lam * lam))

    @property
    def trace_error(self):
        """|Σλ - r|T||Ω|/2π| / (r|T||Ω|/2π)，只对完整分解有意义"""
        target = self.geom.dilated_density
        return abs(self.eigen_sum - target) / target


# ==========================================
# 1. Nyström 特征分解
# ==========================================

def _truncation_size(geom):
    m = geom.inside_count
    return min(m, int(math.ceil(4.0 * geom.dilated_density)) + 64)


def _fix_signs(rows):
    """符号约定: 每行第一个非零分量为正 (相对阈值 1e-12 判零)"""
    mags = np.abs(rows)
    thresh = 1e-12 * mags.max(axis=1, keepdims=True)
    first = np.argmax(mags > thresh, axis=1)
    signs = np.where(rows[np.arange(rows.shape[0]), first] < 0, -1.0, 1.0)
    return rows * signs[:, None]


def compute_spectrum(geom, truncate=False):
    """
    计算离散 P_{rT,Ω} 的特征对
    :param geom: Geometry
    :param truncate: True 时只算前 min(M, ceil(4*r*D)+64) 个
    :return: Spectrum
    """
    matrix = build_concentration_matrix(geom)
    m = geom.inside_count

    try:
        if truncate:
            count = _truncation_size(geom)
            w, v = eigh(matrix, subset_by_index=[m - count, m - 1])
        else:
            w, v = eigh(matrix)
    except LinAlgError as e:
        report = {
            'size': m,
            'frobenius': f"{np.linalg.norm(matrix):.6g}",
            'diag': f"{matrix[0, 0]:.6g}",
        }
        raise NumericalError(f"特征分解不收敛: {e}", report) from e

    # 降序，相同特征值按原下标稳定排序
    order = np.argsort(-w, kind='stable')
    lambdas = w[order]
    rows = _fix_signs(v[:, order].T)

    phis = np.zeros((len(lambdas), geom.grid_points))
    phis[:, geom.inside_slice] = rows / math.sqrt(geom.spacing)

    spec = Spectrum(lambdas=lambdas, phis=phis, geom=geom, truncated=truncate)
    logger.info(
        f"✅ 特征分解完成 | r={geom.r:g} | N={geom.grid_points} | M={m} | "
        f"pairs={spec.size} | Σλ={spec.eigen_sum:.9f}"
    )
    return spec


def spectrum_diagnostics(spec):
    """
    Spectrum 不变量的实际误差
    :return: {'gram': ..., 'rayleigh': ..., 'range': ..., 'order': ...}
    """
    geom = spec.geom
    gram = geom.spacing * (spec.phis @ spec.phis.T)
    gram_err = float(np.max(np.abs(gram - np.eye(spec.size))))

    p_phis = apply_concentration(geom, spec.phis)
    rayleigh = geom.spacing * np.einsum('ij,ij->i', spec.phis, p_phis)
    rayleigh_err = float(np.max(np.abs(rayleigh - spec.lambdas)))

    lam = spec.lambdas
    range_err = float(max(0.0, -lam.min(), lam.max() - 1.0))
    ordered = bool(np.all(np.diff(lam) <= 0.0))
    return {'gram': gram_err, 'rayleigh': rayleigh_err, 'range': range_err, 'ordered': ordered}


def count_above(spec, gamma):
    """M_r(γ) = #{k: λ_k >= γ}"""
    if not (0.0 < gamma < 1.0):
        raise ArgumentError(f"gamma 必须在 (0,1) 内，收到 {gamma}")
    count = int(np.count_nonzero(spec.lambdas >= gamma))
    if spec.truncated and count == spec.size:
        logger.warning(f"⚠️ 截断谱的计数达到上限 {count}，结果可能偏小")
    return count


def plunge_width(spec, delta):
    """落差区宽度: #{λ >= δ} - #{λ >= 1-δ}"""
    if not (0.0 < delta < 0.5):
        raise ArgumentError(f"delta 必须在 (0, 1/2) 内，收到 {delta}")
    return count_above(spec, delta) - count_above(spec, 1.0 - delta)


# ==========================================
# 2. DPSS 校验后端
# ==========================================

def _check_dpss_args(sequence_length, normalized_half_bandwidth):
    if int(sequence_length) != sequence_length or sequence_length < 1:
        raise ArgumentError(f"sequence_length 必须是正整数，收到 {sequence_length}")
    if not (0.0 < normalized_half_bandwidth < 0.5):
        raise ArgumentError(f"半带宽 W 必须在 (0, 1/2) 内，收到 {normalized_half_bandwidth}")


def dpss_sinc_matrix(sequence_length, normalized_half_bandwidth):
    """离散 sinc 矩阵: 对角 2W，非对角 sin(2πW(i-j))/(π(i-j))"""
    w = normalized_half_bandwidth
    k = np.arange(sequence_length, dtype=float)
    return toeplitz(2.0 * w * np.sinc(2.0 * w * k))


def dpss_family(sequence_length, normalized_half_bandwidth, count):
    """
    前 count 个 DPSS 及其集中度
    :return: (vectors [count x L]，欧氏单位范数；concentrations [count])
    """
    _check_dpss_args(sequence_length, normalized_half_bandwidth)
    L = int(sequence_length)
    if not (1 <= count <= L):
        raise ArgumentError(f"count 必须在 [1, {L}] 内，收到 {count}")

    i = np.arange(L, dtype=float)
    diagonal = ((L - 1 - 2.0 * i) / 2.0) ** 2 * math.cos(2.0 * math.pi * normalized_half_bandwidth)
    off = i[1:] * (L - i[1:]) / 2.0

    # 交换矩阵最大的特征值对应集中度最高的序列
    _, v = eigh_tridiagonal(diagonal, off, select='i', select_range=(L - count, L - 1))
    vectors = _fix_signs(v[:, ::-1].T)

    sinc = dpss_sinc_matrix(L, normalized_half_bandwidth)
    concentrations = np.einsum('ij,ij->i', vectors @ sinc, vectors)

    # 接近 1 的集中度之间只差舍入误差，Rayleigh 商可能出现 1e-16 级的回升
    rise = float(np.max(np.diff(concentrations), initial=0.0))
    if rise > DPSS_MONOTONE_TOL:
        raise NumericalError(
            f"DPSS 集中度不单调: 回升 {rise:.3e}",
            {'length': L, 'W': f"{normalized_half_bandwidth:.6g}", 'count': count},
        )
    return vectors, np.minimum.accumulate(concentrations)


def dpss_oracle(sequence_length, normalized_half_bandwidth, k):
    """
    第 k 个 DPSS 及其集中度 λ
    :return: (vector, λ)
    """
    _check_dpss_args(sequence_length, normalized_half_bandwidth)
    if not (0 <= k < sequence_length):
        raise ArgumentError(f"k 必须在 [0, {sequence_length}) 内，收到 {k}")
    vectors, concentrations = dpss_family(sequence_length, normalized_half_bandwidth, k + 1)
    return vectors[k], float(concentrations[k])


def matched_dpss_parameters(geom):
    """
    对应的 DPSS 问题: 长度 M，半带宽 W = Ω*h/(2π)
    quadrature='midpoint' 时与 Nyström 矩阵逐元素相同；
    'corrected' 只改动 rT 两端各几个权重，两者特征值相差 O(h²)
    """
    w = geom.omega_half * geom.spacing / (2.0 * math.pi)
    if not w < 0.5:
        raise GeometryError(f"网格太粗 (Ω*h >= π)，无法匹配 DPSS: W={w}")
    return geom.inside_count, w


def backend_agreement(spec, count=10):
    """Nyström 与 DPSS 前 count 个特征值的最大偏差"""
    length, w = matched_dpss_parameters(spec.geom)
    count = min(count, length, spec.size)
    _, concentrations = dpss_family(length, w, count)
    return float(np.max(np.abs(concentrations - spec.lambdas[:count])))
