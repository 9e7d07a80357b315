"""
时间/频带限制算子的离散化 (一维区间)

网格约定:
- 窗口对称于 0，共 N 个等距点，间距 h
- rT = [-r*t_half, r*t_half] 的两个端点恰好落在相邻网格点的正中间
  (cell-centered 中点规则)，因此 rT 内的点数 M 满足 M*h = 2*r*t_half，
  且 M 与 N 奇偶性相同
- margin 是下限: 为了对齐，窗口会被放宽不到一个网格步长

求积:
- 'midpoint': 权重统一为 h，集中矩阵与长度 M、W = Ω*h/2π 的 DPSS sinc 矩阵逐元相同
- 'corrected' (默认): rT 两端各加几个点的端点修正，抵消中点规则的 h²、h⁴ 误差项，
  六阶收敛；矩阵取对称形式 W^{1/2} K W^{1/2}

网格函数的值是 u_i = √(w_i/h)·f(x_i)，离散内积统一为 h*Σ u*v
(rT 外以及中点规则下 u 就是点值；写 CSV 时换回点值)
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import toeplitz

from config import Config
from src.exceptions import ArgumentError, DimensionError, GeometryError

logger = logging.getLogger('Operators')

# 每单位 r*t_half 的默认网格密度 (窗口两侧合计)
DEFAULT_POINTS_PER_UNIT = Config.POINTS_PER_UNIT

QUADRATURES = ('corrected', 'midpoint')


def _end_corrections(points):
    """
    中点规则的 Euler-Maclaurin 展开:
        ∫f - hΣf = (h²/24)[f'] - (7h⁴/5760)[f'''] + ...
    在端点 a 附近节点 a+(i+1/2)h (i < points) 上取修正系数 c_i，
    使 hΣ c_i f_i 抵消左端的 f'(a)、f'''(a) 项 (points=3 时只抵消 f')
    """
    s = np.arange(points, dtype=float) + 0.5
    moments = np.array([0.0, -1.0 / 24.0, 0.0, 7.0 / 960.0, 0.0])[:points]
    return np.linalg.solve(np.vander(s, points, increasing=True).T, moments)


# 修正点数 -> 相对权重修正 (从端点往里)；M 太小时退到 3 点，再退到纯中点
END_CORRECTIONS = {points: _end_corrections(points) for points in (5, 3)}


def default_margin(t_half):
    """默认留白: max(t_half, 1)"""
    return max(float(t_half), 1.0)


def default_grid_points(t_half, r, margin=None, points_per_unit=DEFAULT_POINTS_PER_UNIT):
    """
    默认网格点数: 整个窗口 [-(r*t_half+margin), r*t_half+margin] 上
    每单位长度 points_per_unit 个点，rT 内每单位 r*t_half 至少 2*points_per_unit 个点
    """
    if margin is None:
        margin = default_margin(t_half)
    return int(math.ceil(points_per_unit * 2.0 * (r * t_half + margin))) + 1


# ==========================================
# 1. 几何 (Geometry)
# ==========================================

@dataclass(frozen=True)
class Geometry:
    """
    T = [-t_half, t_half] (秒), Ω = [-omega_half, omega_half] (rad/s)，膨胀因子 r
    """
    t_half: float
    omega_half: float
    r: float = 1.0
    margin: float = None
    grid_points: int = None
    dimension: int = 1
    quadrature: str = 'corrected'

    # 对齐后派生的量 (不参与构造参数)
    inside_count: int = field(init=False, repr=False, compare=False)
    spacing: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension != 1:
            raise ArgumentError(f"只支持一维区间 (dimension=1)，收到 dimension={self.dimension}")
        if self.quadrature not in QUADRATURES:
            raise ArgumentError(f"quadrature 必须是 {QUADRATURES} 之一，收到 {self.quadrature!r}")

        for name in ('t_half', 'omega_half', 'r'):
            value = getattr(self, name)
            numeric = isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)
            if not (numeric and math.isfinite(value) and value > 0):
                raise ArgumentError(f"{name} 必须是有限正实数，收到 {value!r}")
            object.__setattr__(self, name, float(value))

        try:
            margin = default_margin(self.t_half) if self.margin is None else float(self.margin)
        except (TypeError, ValueError):
            raise ArgumentError(f"margin 必须是有限正实数，收到 {self.margin!r}") from None
        if not (math.isfinite(margin) and margin > 0):
            raise ArgumentError(f"margin 必须是有限正实数，收到 {self.margin!r}")
        if margin < self.t_half:
            raise GeometryError(f"margin ({margin}) 不能小于 t_half ({self.t_half})")
        object.__setattr__(self, 'margin', margin)

        n = self.grid_points
        if n is None:
            n = default_grid_points(self.t_half, self.r, margin)
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
            raise ArgumentError(f"grid_points 必须是 >= 2 的整数，收到 {self.grid_points!r}")
        object.__setattr__(self, 'grid_points', int(n))

        # 选 rT 内点数 M: 与 N 同奇偶，且放宽后的 margin 不小于要求值
        a = self.r * self.t_half
        m_max = int(math.floor((n - 1) * a / (a + margin) + 1e-9))
        m = m_max if (m_max - n) % 2 == 0 else m_max - 1
        if m < 1:
            raise GeometryError(
                f"rT 内没有网格点 (N={n}, r*t_half={a}, margin={margin})，请增大 grid_points"
            )
        object.__setattr__(self, 'inside_count', m)
        object.__setattr__(self, 'spacing', 2.0 * a / m)

    # --------------------------
    # 构造辅助
    # --------------------------
    @classmethod
    def for_dilation(cls, t_half, omega_half, r, margin=None, points_per_unit=DEFAULT_POINTS_PER_UNIT,
                     quadrature='corrected'):
        """按网格密度自动确定 N"""
        n = default_grid_points(t_half, r, margin, points_per_unit)
        return cls(t_half=t_half, omega_half=omega_half, r=r, margin=margin, grid_points=n,
                   quadrature=quadrature)

    def with_dilation(self, r, points_per_unit=DEFAULT_POINTS_PER_UNIT):
        """同一 T、Ω、margin，换一个 r，网格点数随 r 线性增长"""
        n = default_grid_points(self.t_half, r, self.margin, points_per_unit)
        return replace(self, r=r, grid_points=n)

    # --------------------------
    # 测度
    # --------------------------
    @property
    def t_measure(self):
        """|T|"""
        return 2.0 * self.t_half

    @property
    def omega_measure(self):
        """|Ω|"""
        return 2.0 * self.omega_half

    @property
    def nyquist_density(self):
        """|T||Ω|/2π"""
        return self.t_measure * self.omega_measure / (2.0 * math.pi)

    @property
    def dilated_density(self):
        """r|T||Ω|/2π: 迹恒等式的目标值"""
        return self.r * self.nyquist_density

    # --------------------------
    # 网格
    # --------------------------
    @property
    def dilated_half(self):
        return self.r * self.t_half

    @property
    def half_window(self):
        return 0.5 * (self.grid_points - 1) * self.spacing

    @property
    def effective_margin(self):
        return self.half_window - self.dilated_half

    @property
    def inside_start(self):
        return (self.grid_points - self.inside_count) // 2

    @property
    def inside_slice(self):
        return slice(self.inside_start, self.inside_start + self.inside_count)

    @property
    def grid(self):
        offsets = np.arange(self.grid_points, dtype=float) - 0.5 * (self.grid_points - 1)
        return offsets * self.spacing

    @property
    def inside_mask(self):
        mask = np.zeros(self.grid_points, dtype=bool)
        mask[self.inside_slice] = True
        return mask

    @property
    def outside_indices(self):
        return np.flatnonzero(~self.inside_mask)

    # --------------------------
    # 求积
    # --------------------------
    @property
    def correction_points(self):
        """rT 每端修正的点数 (0 = 纯中点)"""
        if self.quadrature == 'midpoint':
            return 0
        for points in END_CORRECTIONS:
            if 2 * points <= self.inside_count:
                return points
        return 0

    @property
    def sample_scale(self):
        """√(w_i/h): 网格值与点值之比，rT 外恒为 1"""
        scale = np.ones(self.grid_points)
        points = self.correction_points
        if points:
            edge = np.sqrt(1.0 + END_CORRECTIONS[points])
            start, stop = self.inside_start, self.inside_start + self.inside_count
            scale[start:start + points] = edge
            scale[stop - points:stop] = edge[::-1]
        return scale

    @property
    def quadrature_weights(self):
        """求积权重 w_i，Σ_{rT} w_i = M*h"""
        return self.spacing * self.sample_scale ** 2

    def to_samples(self, values):
        """网格值 -> 点值 f(x_i)"""
        return np.asarray(values, dtype=float) / self.sample_scale


# ==========================================
# 2. 网格函数 (GridFunction)
# ==========================================

@dataclass(frozen=True)
class GridFunction:
    """网格上的实函数 (按求积缩放后的值)，离散 L2 内积为 h*Σ u*v"""
    values: np.ndarray
    weight: float

    @classmethod
    def on(cls, geom, values):
        values = np.asarray(values, dtype=float)
        _check_length(geom, values)
        return cls(values=values, weight=geom.spacing)

    def inner(self, other):
        return float(self.weight * np.dot(self.values, other.values))

    def norm_sq(self):
        return float(self.weight * np.dot(self.values, self.values))


def _check_length(geom, values):
    if values.shape[-1] != geom.grid_points:
        raise DimensionError(
            f"网格函数长度 {values.shape[-1]} 与网格点数 {geom.grid_points} 不一致"
        )


def discrete_gram(geom, rows):
    """行向量组的离散 Gram 矩阵 h * F F^T"""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    _check_length(geom, rows)
    return geom.spacing * (rows @ rows.T)


# ==========================================
# 3. 算子 (Operators)
# ==========================================

def apply_time_limit(geom, f):
    """D_rT: 乘以 rT 的指示函数 (精确投影，幂等)"""
    values = np.asarray(f.values, dtype=float)
    _check_length(geom, values)
    return GridFunction(values=np.where(geom.inside_mask, values, 0.0), weight=geom.spacing)


def _sinc_column(geom, count):
    """h*sin(Ω d)/(π d)，d = k*h，k = 0..count-1；对角取解析极限 h*Ω/π"""
    h = geom.spacing
    k = np.arange(count, dtype=float)
    return (h * geom.omega_half / math.pi) * np.sinc(geom.omega_half * h * k / math.pi)


def _symmetrized(matrix, scale):
    """W^{1/2} K W^{1/2}: 行列分别乘以 √(w/h)"""
    return matrix * np.outer(scale, scale)


def build_band_kernel(geom):
    """
    B_Ω 的卷积核在整个窗口上的 Nyström 矩阵 (N x N)
    等距网格 => Toeplitz；rT 端点处按求积权重对称缩放
    """
    return _symmetrized(toeplitz(_sinc_column(geom, geom.grid_points)), geom.sample_scale)


def build_concentration_matrix(geom):
    """
    P_{rT,Ω} = D B D 在 rT 内网格点上的矩阵 (M x M)
    rT 外的行列全为零，因此只保留内部块
    """
    m = geom.inside_count
    if m == 0:
        raise GeometryError("rT 内没有网格点")
    matrix = _symmetrized(toeplitz(_sinc_column(geom, m)), geom.sample_scale[geom.inside_slice])
    logger.debug(f"集中算子矩阵: M={m}, h={geom.spacing:.6g}, trace={np.trace(matrix):.12g}")
    return matrix


def apply_band_limit(geom, f, kernel=None):
    """B_Ω 作用于网格函数 (窗口截断的卷积)"""
    values = np.asarray(f.values, dtype=float)
    _check_length(geom, values)
    if kernel is None:
        kernel = build_band_kernel(geom)
    return GridFunction(values=kernel @ values, weight=geom.spacing)


def apply_concentration(geom, values, matrix=None):
    """
    P 作用于整个窗口上的向量 (一维) 或按行堆叠的向量组 (二维)
    rT 外输出恒为零
    """
    values = np.asarray(values, dtype=float)
    _check_length(geom, values)
    if matrix is None:
        matrix = build_concentration_matrix(geom)
    out = np.zeros_like(values)
    inside = geom.inside_slice
    # P 对称: 行向量右乘即可
    out[..., inside] = values[..., inside] @ matrix
    return out


def time_concentration(geom, f):
    """rT 内能量占比 ∫_{rT}|f|^2 / ||f||^2"""
    total = f.norm_sq()
    if total == 0.0:
        raise ArgumentError("零函数没有集中度")
    return apply_time_limit(geom, f).norm_sq() / total


def concentration_trace(geom):
    """trace(P) = Σw*Ω/π = M*h*Ω/π (对齐后等于 r|T||Ω|/2π；端点修正的系数和为 0)"""
    return geom.inside_count * geom.spacing * geom.omega_half / math.pi
