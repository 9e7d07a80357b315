"""
伪长椭球函数 (pseudo prolate spheroidal functions) 的构造

流程: 阈值选族 F -> 预算拆分 γ -> 选 m -> Ker(P) 中的填充基 -> DFT 混合矩阵 Q
      -> Φ_j = Σ Q_jk φ_F(k) + Σ Q_jk h_(k-n) -> 残差校验
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from config import Config
from src.exceptions import (
    ArgumentError,
    BudgetError,
    EmptyFamilyError,
    GeometryError,
    VerificationError,
)
from src.operators import apply_concentration, build_concentration_matrix

logger = logging.getLogger('PseudoProlate')

DISC_TOL = Config.DISC_TOL
# m 超过这个量级就不是“实际可用”的预算了
MAX_PADDING = 10_000_000
# choose_m 判定 m/(m+n) <= γ 时容许的相对舍入误差
CHOOSE_M_RTOL = 1e-12


# ==========================================
# 1. 能量预算
# ==========================================

@dataclass(frozen=True)
class BudgetSplit:
    """
    ε = σ² + (1-σ²)γ
    σ² 给 F 中特征函数的残差，γ 给 Ker(P) 分量
    """
    epsilon: float
    sigma: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise BudgetError(f"epsilon 必须在 (0,1) 内，收到 {self.epsilon}")
        if not self.sigma > 0.0:
            raise BudgetError(f"sigma 必须为正，收到 {self.sigma}")
        if self.sigma ** 2 > self.epsilon:
            raise BudgetError(f"需要 sigma² <= epsilon，收到 sigma²={self.sigma ** 2:.6g} > {self.epsilon}")
        object.__setattr__(self, 'epsilon', float(self.epsilon))
        object.__setattr__(self, 'sigma', float(self.sigma))

    @classmethod
    def auto(cls, epsilon, ratio=10.0):
        """sigma 未指定时: σ² = ε/ratio"""
        return cls(epsilon=epsilon, sigma=math.sqrt(epsilon / ratio))

    @property
    def sigma_sq(self):
        return self.sigma * self.sigma

    @property
    def gamma(self):
        s2 = self.sigma_sq
        return (self.epsilon - s2) / (1.0 - s2)


# ==========================================
# 2. 选族与选 m
# ==========================================

def select_family(spec, sigma):
    """
    F = {k: λ_k > 1-σ} (严格不等式，直接比较存储值)
    :return: (indices, n)
    """
    if not sigma > 0.0:
        raise ArgumentError(f"sigma 必须为正，收到 {sigma}")
    threshold = max(1.0 - sigma, 0.0)
    indices = np.flatnonzero(spec.lambdas > threshold)
    n = len(indices)
    if n == 0:
        raise EmptyFamilyError(
            f"没有特征值大于 {threshold:.6g} (λ_0={spec.lambdas[0]:.6g}, r={spec.geom.r:g})"
        )
    if spec.truncated and n == spec.size:
        logger.warning(f"⚠️ 截断谱全部入选 ({n})，族可能不完整")
    return indices, n


def choose_m(n, budget):
    """
    满足 m/(m+n) <= γ 的最大 m，即 floor(nγ/(1-γ))
    恰好落在整数上的情形 (如 n=10, γ=1/11) 允许 1e-12 的相对舍入误差
    """
    if int(n) != n or n < 1:
        raise ArgumentError(f"n 必须是正整数，收到 {n}")
    gamma = budget.gamma if isinstance(budget, BudgetSplit) else float(budget)
    if not (0.0 <= gamma < 1.0):
        raise BudgetError(f"gamma 必须在 [0,1) 内，收到 {gamma}")

    bound = n * gamma / (1.0 - gamma)
    if not math.isfinite(bound) or bound > MAX_PADDING:
        raise BudgetError(f"gamma={gamma} 太接近 1，m 上限 {bound:.3g} 不可用")

    m = int(math.floor(bound)) + 1
    while m > 0 and m * (1.0 - gamma) > n * gamma * (1.0 + CHOOSE_M_RTOL):
        m -= 1
    return m


# ==========================================
# 3. Ker(P) 中的填充基
# ==========================================

def kernel_padding_basis(geom, m):
    """
    rT 外 m 个互不相交的网格块上的归一化指示函数
    :return: m x N 数组 (m=0 时为空)
    """
    if int(m) != m or m < 0:
        raise ArgumentError(f"m 必须是非负整数，收到 {m}")
    basis = np.zeros((int(m), geom.grid_points))
    if m == 0:
        return basis

    outside = geom.outside_indices
    if len(outside) < m:
        raise GeometryError(
            f"rT 外只有 {len(outside)} 个网格点，放不下 {m} 个填充函数；请增大 margin 或 grid_points"
        )
    for j, block in enumerate(np.array_split(outside, int(m))):
        basis[j, block] = 1.0 / math.sqrt(geom.spacing * len(block))
    return basis


# ==========================================
# 4. DFT 混合矩阵
# ==========================================

@dataclass(frozen=True)
class MixingMatrix:
    """Q = [Q^Γ Q^Λ]，后 m 列映射到填充基"""
    order: int
    q: np.ndarray
    lambda_columns: tuple

    @property
    def m(self):
        return len(self.lambda_columns)

    @property
    def n(self):
        return self.order - self.m

    def lambda_row_norms(self):
        return np.sum(self.q[:, self.n:] ** 2, axis=1)

    def orthogonality_error(self):
        return float(np.max(np.abs(self.q.T @ self.q - np.eye(self.order))))


def dft_mixing_matrix(order):
    """
    X'_ij = Re(X_ij) + Im(X_ij)，X_ij = ω^(ij)/√order，ω = exp(-2πi/order)
    即 (cos θ - sin θ)/√order，θ = 2π(ij mod order)/order
    """
    if int(order) != order or order < 1:
        raise ArgumentError(f"order 必须是正整数，收到 {order}")
    order = int(order)
    idx = np.arange(order)
    theta = 2.0 * math.pi * (np.outer(idx, idx) % order) / order
    return (np.cos(theta) - np.sin(theta)) / math.sqrt(order)


def select_lambda_columns(order, m):
    """
    m 偶: {1..m/2} ∪ {order-m/2..order-1}
    m 奇: {0} ∪ {1..(m-1)/2} ∪ {order-(m-1)/2..order-1}
    m = order 时所有列都属于 Λ
    """
    if int(order) != order or order < 1:
        raise ArgumentError(f"order 必须是正整数，收到 {order}")
    if int(m) != m or m < 0 or m > order:
        raise ArgumentError(f"m 必须在 [0, {order}] 内，收到 {m}")
    order, m = int(order), int(m)
    if m == order:
        return tuple(range(order))

    half = m // 2
    columns = list(range(1, half + 1)) + list(range(order - half, order))
    if m % 2 == 1:
        columns = [0] + columns
    return tuple(columns)


def mixing_matrix(order, m):
    """X' 的列置换: Γ 列保持原相对顺序放在前 n 列，Λ 列放在最后 m 列"""
    x = dft_mixing_matrix(order)
    lam = select_lambda_columns(order, m)
    chosen = set(lam)
    gamma_cols = [c for c in range(order) if c not in chosen]
    return MixingMatrix(order=int(order), q=x[:, gamma_cols + list(lam)], lambda_columns=lam)


# ==========================================
# 5. 组装
# ==========================================

@dataclass(frozen=True)
class PseudoProlateSet:
    """
    functions: (m+n) x N，第 j 行是 Φ_j = ψ_j + ρ_j
    """
    functions: np.ndarray
    psi_norms_sq: np.ndarray
    rho_norms_sq: np.ndarray
    residuals: np.ndarray
    budget: BudgetSplit
    n: int
    m: int
    family: np.ndarray
    mixing: MixingMatrix
    geom: object
    disc_tol: float = DISC_TOL

    @property
    def count(self):
        return self.m + self.n

    @property
    def kernel_fraction(self):
        return self.m / self.count

    @property
    def bound(self):
        """σ² + (1-σ²) m/(m+n)"""
        s2 = self.budget.sigma_sq
        return s2 + (1.0 - s2) * self.kernel_fraction

    @property
    def max_residual(self):
        return float(np.max(self.residuals))

    def exceeding(self):
        """残差超出 min(bound, ε) + disc_tol 的下标"""
        limit = min(self.bound, self.budget.epsilon) + self.disc_tol
        return np.flatnonzero(self.residuals > limit)


def construct(spec, geom, budget, disc_tol=DISC_TOL, strict=True):
    """
    构造伪长椭球函数族
    :param strict: True 时残差超限直接抛 VerificationError
    :return: PseudoProlateSet
    """
    if spec.geom != geom:
        raise ArgumentError("spectrum 与 geometry 不一致")

    family, n = select_family(spec, budget.sigma)
    m = choose_m(n, budget)
    pads = kernel_padding_basis(geom, m)
    mix = mixing_matrix(m + n, m)

    psi = mix.q[:, :n] @ spec.phis[family]
    rho = mix.q[:, n:] @ pads
    functions = psi + rho

    h = geom.spacing
    psi_sq = h * np.einsum('ij,ij->i', psi, psi)
    rho_sq = h * np.einsum('ij,ij->i', rho, rho)

    matrix = build_concentration_matrix(geom)
    diff = apply_concentration(geom, functions, matrix) - functions
    residuals = h * np.einsum('ij,ij->i', diff, diff)

    result = PseudoProlateSet(
        functions=functions,
        psi_norms_sq=psi_sq,
        rho_norms_sq=rho_sq,
        residuals=residuals,
        budget=budget,
        n=n,
        m=m,
        family=family,
        mixing=mix,
        geom=geom,
        disc_tol=disc_tol,
    )
    logger.info(
        f"🧩 构造完成 | r={geom.r:g} | n={n} | m={m} | count={result.count} | "
        f"bound={result.bound:.6f} | max_residual={result.max_residual:.6f}"
    )

    bad = result.exceeding()
    if len(bad):
        msg = (
            f"{len(bad)} 个函数残差超限 (max={result.max_residual:.3g}, "
            f"bound={result.bound:.3g}, disc_tol={disc_tol:g})，离散化可能太粗"
        )
        if strict:
            raise VerificationError(msg)
        logger.warning(f"⚠️ {msg}")
    return result


def pseudoprolate_diagnostics(pset):
    """
    构造结果的各项误差
    :return: {'gram', 'rho_split', 'energy', 'kernel', 'bound_excess'}
    """
    geom = pset.geom
    h = geom.spacing
    gram = h * (pset.functions @ pset.functions.T)
    gram_err = float(np.max(np.abs(gram - np.eye(pset.count))))
    rho_err = float(np.max(np.abs(pset.rho_norms_sq - pset.kernel_fraction)))
    energy_err = float(np.max(np.abs(pset.psi_norms_sq + pset.rho_norms_sq - 1.0)))

    # ρ_j = Φ_j - ψ_j 必须在 Ker(P) 内
    rho = pset.functions - pset.mixing.q[:, :pset.n] @ _family_rows(pset)
    kernel_err = float(np.max(np.abs(apply_concentration(geom, rho)))) if pset.m else 0.0
    return {
        'gram': gram_err,
        'rho_split': rho_err,
        'energy': energy_err,
        'kernel': kernel_err,
        'bound_excess': float(pset.max_residual - pset.bound),
    }


def _family_rows(pset):
    """由 Φ 反解出选中的特征函数: F 行 = (Q^Γ)^T Φ"""
    return pset.mixing.q[:, :pset.n].T @ pset.functions


# ==========================================
# 6. 一般函数的分解与伪特征判据
# ==========================================

@dataclass(frozen=True)
class Decomposition:
    """f = Σ a_k φ_k + h"""
    coefficients: np.ndarray
    remainder: np.ndarray
    in_kernel: bool
    residual: float
    bound: float


def decompose(f, spec, sigma, kernel_tol=1e-10):
    """
    在 F (λ_k > 1-σ) 上展开 f，剩余部分 h
    当 h ∈ Ker(P) 时 ||Pf - f||² <= σ²||f||² + (1-σ²)||h||²
    """
    geom = spec.geom
    h = geom.spacing
    family, _ = select_family(spec, sigma)
    values = np.asarray(f.values, dtype=float)
    phis = spec.phis[family]

    coeffs = h * (phis @ values)
    remainder = values - coeffs @ phis

    matrix = build_concentration_matrix(geom)
    p_rem = apply_concentration(geom, remainder, matrix)
    in_kernel = bool(math.sqrt(h * np.dot(p_rem, p_rem)) <= kernel_tol)

    diff = apply_concentration(geom, values, matrix) - values
    residual = float(h * np.dot(diff, diff))
    s2 = sigma * sigma
    bound = s2 * float(h * np.dot(values, values)) + (1.0 - s2) * float(h * np.dot(remainder, remainder))
    return Decomposition(coefficients=coeffs, remainder=remainder, in_kernel=in_kernel,
                         residual=residual, bound=bound)


def is_pseudo_eigenfunction(geom, f, epsilon, norm_tol=1e-9):
    """||f|| = 1 且 ||Pf - f||² <= ε"""
    norm_sq = f.norm_sq()
    if abs(norm_sq - 1.0) > norm_tol:
        return False
    diff = apply_concentration(geom, f.values) - f.values
    return bool(geom.spacing * np.dot(diff, diff) <= epsilon)
