import os
import logging

import numpy as np
import pandas as pd

from src.exceptions import StorageError

# 配置日志
logger = logging.getLogger('Storage')

# sweep.csv 的列顺序 (对外契约)
SWEEP_COLUMNS = [
    'r', 'epsilon', 'sigma', 'gamma', 'n', 'm', 'count', 'lp_count',
    'slope', 'target', 'lp_slope', 'lp_target', 'max_residual', 'valid',
]


def r_token(r):
    """文件名里的 r: 8.0 -> '8'，2.5 -> '2p5'"""
    r = float(r)
    if r.is_integer():
        return str(int(r))
    return repr(r).replace('.', 'p')


def sweep_frame(records):
    """SweepRecord 列表 -> DataFrame，列顺序见 SWEEP_COLUMNS"""
    rows = [
        {
            'r': rec.r,
            'epsilon': rec.epsilon,
            'sigma': rec.sigma,
            'gamma': rec.gamma,
            'n': int(rec.n),
            'm': int(rec.m),
            'count': int(rec.count),
            'lp_count': int(rec.lp_count),
            'slope': rec.slope,
            'target': rec.target,
            'lp_slope': rec.lp_slope,
            'lp_target': rec.lp_target,
            'max_residual': rec.max_residual,
            'valid': bool(rec.valid),
        }
        for rec in records
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


class ResultWriter:
    """
    结果输出 (CSV)
    - 一个输出目录对应一个 writer
    - 浮点数统一按 precision 位小数定点输出
    """

    def __init__(self, directory, precision=12):
        """
        :param directory: 输出目录 (不存在则创建)
        :param precision: CSV 小数位数
        """
        self.directory = str(directory)
        self.precision = int(precision)
        self._ensure_dir()

    def _ensure_dir(self):
        """确保输出目录存在"""
        if os.path.isdir(self.directory):
            return
        try:
            os.makedirs(self.directory)
            logger.info(f"📁 创建输出目录: {self.directory}")
        except OSError as e:
            raise StorageError(f"无法创建输出目录 ({e.strerror})", self.directory) from e

    def path(self, name):
        return os.path.join(self.directory, name)

    def _write(self, df, name):
        path = self.path(name)
        try:
            df.to_csv(
                path,
                index=False,
                float_format=f"%.{self.precision}f",
                lineterminator='\n',
                na_rep='nan',
            )
        except OSError as e:
            raise StorageError(f"写入失败 ({e.strerror})", path) from e
        logger.info(f"💾 写入 {path} ({len(df)} 行)")
        return path

    # ==========================================
    # 各命令的输出
    # ==========================================

    def write_run_config(self, config):
        """run_config.yaml: 本次运行的完整配置，使输出目录自描述"""
        path = self.path('run_config.yaml')
        try:
            config.dump(path)
        except OSError as e:
            raise StorageError(f"写入失败 ({e.strerror})", path) from e
        return path

    def write_spectrum(self, spec):
        """spectrum_r{r}.csv: k,lambda"""
        df = pd.DataFrame({'k': np.arange(spec.size), 'lambda': spec.lambdas})
        return self._write(df, f"spectrum_r{r_token(spec.geom.r)}.csv")

    def write_pseudoprolates(self, pset):
        """pseudoprolates_r{r}.csv: j,rho_norm_sq,residual_sq,bound"""
        df = pd.DataFrame({
            'j': np.arange(pset.count),
            'rho_norm_sq': pset.rho_norms_sq,
            'residual_sq': pset.residuals,
            'bound': np.full(pset.count, pset.bound),
        })
        return self._write(df, f"pseudoprolates_r{r_token(pset.geom.r)}.csv")

    def write_function(self, name, geom, values):
        """单个网格函数: t,value (逐点取值)"""
        df = pd.DataFrame({'t': geom.grid, 'value': geom.to_samples(np.asarray(values, dtype=float))})
        return self._write(df, f"{name}.csv")

    def write_sweep(self, records):
        """sweep.csv"""
        return self._write(sweep_frame(records), 'sweep.csv')

    def write_sandwich(self, report):
        """sandwich.csv: 夹逼检查的一行结果"""
        df = pd.DataFrame([{
            'r': report.r,
            'epsilon': report.epsilon,
            'slope': report.slope,
            'lower': report.lower,
            'upper': report.upper,
            'sharp_target': report.sharp_target,
            'lower_pass': report.lower_pass,
            'upper_pass': report.upper_pass,
            'slepian_slope': report.slepian_slope,
            'slepian_target': report.slepian_target,
        }])
        return self._write(df, 'sandwich.csv')

    def write_slepian(self, seq, geom):
        """
        slepian_g.csv: t, g_j ... (只含未排除的下标)
        slepian_excluded.csv: j,lambda
        """
        data = {'t': geom.grid}
        for j, row in zip(seq.indices, seq.functions):
            data[f"g_{j}"] = geom.to_samples(row)
        samples = self._write(pd.DataFrame(data), 'slepian_g.csv')

        excluded = pd.DataFrame(
            [{'j': j, 'lambda': lam} for j, lam in seq.excluded],
            columns=['j', 'lambda'],
        )
        self._write(excluded, 'slepian_excluded.csv')
        return samples
