import argparse
import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

import pandas as pd

# 引入核心组件
from config import Config, RunConfig
from experiments import SweepRunner, sandwich_check
from src.checks import load_checks, run_checks
from src.eigensolver import compute_spectrum, count_above, plunge_width
from src.exceptions import (
    EXIT_NUMERICAL,
    EXIT_OK,
    ArgumentError,
    NumericalError,
    PPSFError,
    StorageError,
    VerificationError,
)
from src.plotting import plot_sweep
from src.pseudoprolate import construct
from src.slepian import slepian_g
from src.storage import ResultWriter, r_token

logger = logging.getLogger('Main')


# ==========================================
# 1. 日志配置 (Logging Setup)
# ==========================================
def setup_logger(log_dir=None, level=None):
    """
    配置全局日志：
    - 输出到控制台 (stderr)
    - 给定 log_dir 时同时输出到文件 (<log_dir>/ppsf.log)，每天轮转
    重复调用时先移除上一次挂上的处理器
    """
    formatter = logging.Formatter(
        '%(asctime)s | %(levelname)-7s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        if getattr(handler, '_ppsf', False):
            root_logger.removeHandler(handler)
            handler.close()

    handlers = [logging.StreamHandler()]
    if log_dir:
        try:
            os.makedirs(log_dir, exist_ok=True)
        except OSError as e:
            raise StorageError(f"无法创建日志目录 ({e.strerror})", log_dir) from e
        # 文件处理器 (每天午夜切割，保留30天)
        handlers.append(TimedRotatingFileHandler(
            filename=os.path.join(log_dir, Config.LOG_FILE),
            when="midnight",
            interval=1,
            backupCount=30,
            encoding='utf-8'
        ))

    for handler in handlers:
        handler.setFormatter(formatter)
        handler._ppsf = True
        root_logger.addHandler(handler)
    root_logger.setLevel(level or Config.LOG_LEVEL)

    # 屏蔽第三方库的繁琐日志
    logging.getLogger("matplotlib").setLevel(logging.WARNING)


# ==========================================
# 2. 各子命令
# ==========================================
def _writer(config):
    return ResultWriter(config.output_dir(), precision=config.output.csv_precision)


def _log_budget(config, budget):
    policy = "auto (σ² = ε/10)" if config.sigma_is_auto else "fixed"
    logger.info(f"💰 预算: ε={budget.epsilon:g} | σ={budget.sigma:.6g} ({policy}) | γ={budget.gamma:.6g}")


def cmd_eig(config):
    """每个 r 写一份 spectrum_r{r}.csv"""
    writer = _writer(config)
    writer.write_run_config(config)
    for r in config.sweep.r_list:
        geom = config.geometry_for(r)
        spec = compute_spectrum(geom)
        writer.write_spectrum(spec)
        logger.info(
            f"📊 r={r:g} | Σλ={spec.eigen_sum:.9f} (目标 {geom.dilated_density:.9f}) | "
            f"Σλ-Σλ²={spec.second_moment_defect:.6f} | #λ>=1/2={count_above(spec, 0.5)} | "
            f"plunge(0.01)={plunge_width(spec, 0.01)}"
        )
    return EXIT_OK


def cmd_construct(config):
    """
    每个 r 写一份 pseudoprolates_r{r}.csv
    有残差超过 bound + disc_tol 时返回非零退出码
    """
    writer = _writer(config)
    writer.write_run_config(config)
    budget = config.budget_split()
    _log_budget(config, budget)

    failed = []
    for r in config.sweep.r_list:
        geom = config.geometry_for(r)
        spec = compute_spectrum(geom)
        pset = construct(spec, geom, budget, disc_tol=Config.DISC_TOL, strict=False)
        writer.write_pseudoprolates(pset)

        if config.output.emit_functions:
            sub = ResultWriter(writer.path(f"functions_r{r_token(r)}"), precision=writer.precision)
            for j in range(pset.count):
                sub.write_function(f"phi_{j}", geom, pset.functions[j])

        if len(pset.exceeding()):
            failed.append(r)

    if failed:
        logger.error(f"❌ 以下 r 的残差超限: {failed}")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep(config):
    """sweep.csv + sandwich.csv (+ sweep.svg)"""
    writer = _writer(config)
    writer.write_run_config(config)
    budget = config.budget_split()
    _log_budget(config, budget)

    r_list = config.sweep.r_list
    runner = SweepRunner(
        config.geometry_for(r_list[0]),
        r_list,
        budget,
        points_per_unit=config.geometry.points_per_unit,
        max_workers=config.sweep.max_workers,
        disc_tol=Config.DISC_TOL,
        keep_spectra=True,
    )
    records = runner.run()
    slepian_slope = runner.slepian_slope()
    runner.spectra.clear()

    # 先落盘，夹逼检查失败时部分结果仍然保留
    writer.write_sweep(records)
    if config.output.emit_plots:
        plot_sweep(records, writer.path('sweep.svg'))

    report = sandwich_check(records, slepian_slope=slepian_slope)
    writer.write_sandwich(report)
    if not report.passed:
        logger.warning("⚠️ 最大 r 的斜率不在夹逼区间内 (有限 r 效应)")
    return EXIT_OK


def cmd_verify(config):
    """运行整套不变量检查，打印表格；不写任何文件"""
    results = run_checks(load_checks(config))

    rows = []
    for res in results:
        if res.error:
            rows.append({'check': res.name, 'measurement': 'error', 'value': float('nan'),
                         'tolerance': float('nan'), 'status': 'FAIL'})
        for m in res.measurements:
            rows.append({'check': res.name, 'measurement': m.label, 'value': m.value,
                         'tolerance': m.tolerance, 'status': 'PASS' if m.passed else 'FAIL'})
    table = pd.DataFrame(rows, columns=['check', 'measurement', 'value', 'tolerance', 'status'])
    print(table.to_string(index=False, float_format=lambda v: f"{v:.3e}"))

    failures = [res for res in results if not res.passed]
    if failures:
        first = failures[0]
        raise VerificationError(f"检查失败: {first.name} ({first.first_failure})")
    print(f"ALL PASS ({len(results)} checks)")
    return EXIT_OK


def cmd_slepian(config):
    """r 取 r_list 的第一个值，写 slepian_g.csv + slepian_excluded.csv"""
    writer = _writer(config)
    writer.write_run_config(config)
    r = config.sweep.r_list[0]
    geom = config.geometry_for(r)
    spec = compute_spectrum(geom)

    seq = slepian_g(spec, geom, config.budget.epsilon, config.slepian.j_max,
                    normalize=config.slepian.normalize)
    if not seq.indices:
        raise NumericalError(
            f"g_0..g_{config.slepian.j_max} 全部被排除 (λ_j 太接近 0 或 1)，请减小 r 或增大 j_max",
            {'r': f"{r:g}", 'excluded': len(seq.excluded)},
        )
    writer.write_slepian(seq, geom)
    return EXIT_OK


COMMANDS = {
    'eig': cmd_eig,
    'construct': cmd_construct,
    'sweep': cmd_sweep,
    'verify': cmd_verify,
    'slepian': cmd_slepian,
}


# ==========================================
# 3. 命令行解析
# ==========================================
class CliParser(argparse.ArgumentParser):
    """参数错误统一抛 ArgumentError (退出码 1)，而不是 argparse 默认的 2"""

    def error(self, message):
        raise ArgumentError(f"命令行参数错误: {message}")


def _sigma_arg(text):
    if text == 'auto':
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma 需要数字或 'auto'，收到 {text!r}") from None


def build_parser():
    common = CliParser(add_help=False)
    common.add_argument('--config', help='YAML 运行配置文件')
    common.add_argument('--epsilon', type=float, help='能量预算 ε ∈ (0,1)')
    common.add_argument('--sigma', type=_sigma_arg, help="σ，或 'auto' (σ² = ε/10)")
    common.add_argument('--r', type=float, nargs='+', dest='r_list', help='膨胀因子 (可多个，严格递增)')
    common.add_argument('--out', help='输出目录 (默认取 PPSF_OUT_DIR 或 results)')

    parser = CliParser(prog='ppsf', description='伪长椭球函数的计算与实验')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('eig', parents=[common], help='特征分解，写 spectrum_r{r}.csv')
    sub.add_parser('construct', parents=[common], help='构造伪长椭球函数，写 pseudoprolates_r{r}.csv')
    sub.add_parser('sweep', parents=[common], help='按 r 扫描计数，写 sweep.csv')
    sub.add_parser('verify', parents=[common], help='运行不变量检查 (只读)')
    sub.add_parser('slepian', parents=[common], help='Slepian 比较序列，写 slepian_g.csv')
    return parser


def load_run_config(args):
    config = RunConfig.load(args.config) if args.config else RunConfig()
    return config.with_overrides(epsilon=args.epsilon, sigma=args.sigma, r_list=args.r_list, out=args.out)


# ==========================================
# 4. 主程序入口
# ==========================================
def main(argv=None):
    setup_logger()

    try:
        args = build_parser().parse_args(argv)
        config = load_run_config(args)

        # verify 只读，不挂文件日志
        if args.command != 'verify':
            setup_logger(os.path.join(config.output_dir(), Config.LOG_DIR_NAME))

        logger.info(f"🎬 ppsf {args.command} 开始")
        code = COMMANDS[args.command](config)

    except PPSFError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.critical(f"❌ 发生未预期的错误: {e}", exc_info=True)
        return EXIT_NUMERICAL

    logger.info(f"🏁 ppsf {args.command} 结束 (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
