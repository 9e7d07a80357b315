import logging
import math
import os

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from src.exceptions import StorageError  # noqa: E402

logger = logging.getLogger('Plot')

# SVG 里的随机 id 固定下来，重复运行得到相同文件
plt.rcParams['svg.hashsalt'] = 'ppsf'


def plot_sweep(records, path):
    """
    斜率随 r 的变化: count/r、LP count/r，以及参考线
    D、(1+ε)D、(1-2ε)^-1 D、锐利目标 (1-ε)^-1 D
    """
    if not records:
        logger.warning("⚠️ 没有扫描记录，跳过画图")
        return None

    rs = [rec.r for rec in records]
    first = records[0]
    density = first.lp_target

    fig, ax = plt.subplots(figsize=(10, 6))
    ax.plot(rs, [rec.slope for rec in records], marker='o', color='orange', label='pseudo prolate count / r')
    ax.plot(rs, [rec.lp_slope for rec in records], marker='s', color='skyblue', label='LP count / r')

    ax.axhline(density, color='gray', linestyle=':', label='D = |T||Ω|/2π')
    ax.axhline(first.lower_bound, color='green', linestyle='--', label='(1+ε)D')
    if math.isfinite(first.upper_bound):
        ax.axhline(first.upper_bound, color='red', linestyle='--', label='(1-2ε)⁻¹D')
    ax.axhline(first.target, color='purple', linestyle='-', linewidth=1, label='(1-ε)⁻¹D')

    invalid = [rec for rec in records if not rec.valid]
    if invalid:
        ax.scatter([rec.r for rec in invalid], [rec.slope for rec in invalid],
                   marker='x', color='black', zorder=3, label='invalid')

    ax.set_xscale('log', base=2)
    ax.set_xlabel('r')
    ax.set_ylabel('count / r')
    ax.set_title(f"ε = {first.epsilon:g}, σ = {first.sigma:.4g}")
    ax.legend(loc='best')
    fig.tight_layout()

    try:
        fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        raise StorageError(f"图片写入失败 ({e.strerror})", path) from e
    finally:
        plt.close(fig)

    logger.info(f"📈 图片已保存: {os.path.abspath(path)}")
    return path
