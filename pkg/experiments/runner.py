import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from src.eigensolver import compute_spectrum, count_above
from src.exceptions import ArgumentError, ExperimentError, PPSFError
from src.operators import DEFAULT_POINTS_PER_UNIT
from src.pseudoprolate import DISC_TOL, BudgetSplit, construct
from src.slepian import slepian_dimension_slope

logger = logging.getLogger('Sweep')

# Landau-Pollak 计数阈值
LP_THRESHOLD = 0.5


@dataclass(frozen=True)
class SweepRecord:
    """
    一次 r 的计数结果
    count = m + n，slope = count / r
    target = (1-ε)^-1 D，lp_target = D，D = |T||Ω|/2π
    lower_bound / upper_bound 为非锐利夹逼界 (1+ε)D 与 (1-2ε)^-1 D
    """
    r: float
    epsilon: float
    sigma: float
    gamma: float
    n: int
    m: int
    count: int
    lp_count: int
    slope: float
    target: float
    lp_target: float
    grid_points: int
    max_residual: float
    valid: bool
    note: str = ''
    lower_bound: float = math.nan
    upper_bound: float = math.nan
    second_moment_defect: float = math.nan

    @property
    def lp_slope(self):
        return self.lp_count / self.r


def reference_lines(density, epsilon):
    """D、(1+ε)D、(1-2ε)^-1 D、(1-ε)^-1 D"""
    upper = density / (1.0 - 2.0 * epsilon) if epsilon < 0.5 else math.inf
    return {
        'density': density,
        'lower': (1.0 + epsilon) * density,
        'upper': upper,
        'sharp': density / (1.0 - epsilon),
    }


class SweepRunner:
    """
    计数实验引擎
    职责：
    1. 按 r 生成几何 (网格点数随 r 线性增长)
    2. 每个 r 跑完整流水线: 特征分解 -> 构造 -> 计数
    3. 单个 r 失败只标记该记录，扫描继续
    4. 结果按 r 排序，与执行顺序无关
    """

    def __init__(self, geom_template, r_list, budget, points_per_unit=DEFAULT_POINTS_PER_UNIT,
                 max_workers=1, disc_tol=DISC_TOL, keep_spectra=False):
        r_list = [float(r) for r in r_list]
        if len(r_list) < 2:
            raise ArgumentError(f"r_list 至少需要 2 个值，收到 {len(r_list)}")
        if any(b <= a for a, b in zip(r_list, r_list[1:])):
            raise ArgumentError(f"r_list 必须严格递增: {r_list}")

        self.template = geom_template
        self.r_list = r_list
        self.budget = budget
        self.points_per_unit = points_per_unit
        self.max_workers = max(1, int(max_workers))
        self.disc_tol = disc_tol
        self.keep_spectra = keep_spectra

        # r -> Spectrum (keep_spectra=True 时保留，供 Slepian 斜率复用)
        self.spectra = {}

    def _run_one(self, r):
        """单个 r 的流水线"""
        geom = self.template.with_dilation(r, self.points_per_unit)
        budget = self.budget
        lines = reference_lines(geom.nyquist_density, budget.epsilon)
        base = dict(
            r=r,
            epsilon=budget.epsilon,
            sigma=budget.sigma,
            gamma=budget.gamma,
            target=lines['sharp'],
            lp_target=lines['density'],
            grid_points=geom.grid_points,
            lower_bound=lines['lower'],
            upper_bound=lines['upper'],
        )
        try:
            spec = compute_spectrum(geom)
            if self.keep_spectra:
                self.spectra[r] = spec
            lp_count = count_above(spec, LP_THRESHOLD)
            pset = construct(spec, geom, budget, disc_tol=self.disc_tol, strict=False)
        except PPSFError as e:
            logger.error(f"❌ r={r:g} 构造失败: {e}")
            return SweepRecord(n=0, m=0, count=0, lp_count=0, slope=0.0, max_residual=math.nan,
                               valid=False, note=str(e), **base)
        except Exception as e:
            logger.error(f"❌ r={r:g} 运行异常: {e}", exc_info=True)
            return SweepRecord(n=0, m=0, count=0, lp_count=0, slope=0.0, max_residual=math.nan,
                               valid=False, note=f"{type(e).__name__}: {e}", **base)

        max_residual = pset.max_residual
        valid = max_residual <= budget.epsilon + self.disc_tol
        note = '' if valid else f"max_residual {max_residual:.3g} > epsilon + disc_tol"
        return SweepRecord(
            n=pset.n,
            m=pset.m,
            count=pset.count,
            lp_count=lp_count,
            slope=pset.count / r,
            max_residual=max_residual,
            valid=valid,
            note=note,
            second_moment_defect=spec.second_moment_defect,
            **base,
        )

    def run(self):
        """执行扫描"""
        logger.info(
            f"🚀 开始扫描: r={self.r_list} | ε={self.budget.epsilon:g} | σ={self.budget.sigma:.6g} | "
            f"γ={self.budget.gamma:.6g} | workers={self.max_workers}"
        )
        start_time = time.time()

        records = []
        if self.max_workers == 1:
            records = [self._run_one(r) for r in self.r_list]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = {executor.submit(self._run_one, r): r for r in self.r_list}
                for future in as_completed(futures):
                    records.append(future.result())
        records.sort(key=lambda rec: rec.r)

        for rec in records:
            flag = '✅' if rec.valid else '⚠️'
            logger.info(
                f"{flag} r={rec.r:g} | n={rec.n} | m={rec.m} | count={rec.count} | "
                f"slope={rec.slope:.4f} (target {rec.target:.4f}) | lp_slope={rec.lp_slope:.4f}"
            )
        logger.info(f"🏁 扫描结束，耗时 {time.time() - start_time:.2f} 秒")
        return records

    def slepian_slope(self):
        """
        保留下来的谱上 #{λ > ε} 对 r 的回归斜率
        需要 keep_spectra=True 且至少 3 个 r 的特征分解成功，否则返回 nan
        """
        if len(self.spectra) < 3:
            logger.info(f"ℹ️ 只有 {len(self.spectra)} 个 r 的谱，跳过 Slepian 斜率")
            return math.nan
        family = [self.spectra[r] for r in sorted(self.spectra)]
        return slepian_dimension_slope(family, self.budget.epsilon)


def run_sweep(geom_template, r_list, epsilon, sigma, points_per_unit=DEFAULT_POINTS_PER_UNIT,
              max_workers=1, disc_tol=DISC_TOL):
    """
    对每个 r 跑一遍完整流水线，返回按 r 排序的 SweepRecord 列表
    """
    budget = BudgetSplit(epsilon=epsilon, sigma=sigma)
    runner = SweepRunner(geom_template, r_list, budget, points_per_unit=points_per_unit,
                         max_workers=max_workers, disc_tol=disc_tol)
    return runner.run()


# ==========================================
# 夹逼界检查
# ==========================================

@dataclass(frozen=True)
class SandwichReport:
    r: float
    epsilon: float
    slope: float
    density: float
    lower: float
    upper: float
    tol_band: float
    sharp_target: float
    lower_pass: bool
    upper_pass: bool
    slepian_slope: float = math.nan

    @property
    def passed(self):
        return self.lower_pass and self.upper_pass

    @property
    def slepian_target(self):
        """Slepian 维数斜率换算成锐利目标: slepian_slope / (1-ε)"""
        return self.slepian_slope / (1.0 - self.epsilon)


def sandwich_check(records, band=0.1, slepian_slope=math.nan):
    """
    最大 r 的有效记录的斜率是否落在 [(1+ε)D - tol, (1-2ε)^-1 D + tol]，tol = band * D
    :param slepian_slope: 同一组 r 上 #{λ > ε} 的回归斜率，只记录不参与判定
    """
    valid = [rec for rec in records if rec.valid]
    if not valid:
        raise ExperimentError("没有有效的扫描记录，无法做夹逼检查")
    last = max(valid, key=lambda rec: rec.r)
    if last.r != max(rec.r for rec in records):
        logger.warning(f"⚠️ 最大 r 的记录无效，改用 r={last.r:g}")

    density = last.lp_target
    lines = reference_lines(density, last.epsilon)
    tol = band * density
    report = SandwichReport(
        r=last.r,
        epsilon=last.epsilon,
        slope=last.slope,
        density=density,
        lower=lines['lower'] - tol,
        upper=lines['upper'] + tol,
        tol_band=tol,
        sharp_target=lines['sharp'],
        lower_pass=bool(last.slope >= lines['lower'] - tol),
        upper_pass=bool(last.slope <= lines['upper'] + tol),
        slepian_slope=float(slepian_slope),
    )
    logger.info(
        f"📊 夹逼检查 r={report.r:g}: {report.lower:.4f} <= {report.slope:.4f} <= {report.upper:.4f} "
        f"-> {'PASS' if report.passed else 'FAIL'}"
    )
    if not math.isnan(report.slepian_slope):
        logger.info(
            f"📐 Slepian 斜率 {report.slepian_slope:.4f} -> (1-ε)^-1 换算 {report.slepian_target:.4f} "
            f"| 锐利目标 {report.sharp_target:.4f}"
        )
    return report


def slope_gaps(records):
    """|slope - target| 按 r 排列"""
    return np.array([abs(rec.slope - rec.target) for rec in records])
