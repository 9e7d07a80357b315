import numpy as np

from src.pseudoprolate import dft_mixing_matrix, select_lambda_columns
from .base import BaseCheck, Measurement


class MixingOrthogonalityCheck(BaseCheck):
    """X' 对每个阶数 1..max_order 都是正交矩阵"""
    name = 'mixing_orthogonality'
    max_order = 512

    def measure(self):
        worst = 0.0
        for order in range(1, self.max_order + 1):
            x = dft_mixing_matrix(order)
            worst = max(worst, float(np.max(np.abs(x.T @ x - np.eye(order)))))
        return [Measurement('max|X\'ᵀX\' - I|', worst, self.tol(1e-12))]


class LambdaRowNormsCheck(BaseCheck):
    """
    穷举 order <= max_order、0 <= m <= order (奇偶都覆盖):
    Λ 块每一行的平方范数都等于 m/order
    """
    name = 'lambda_row_norms'
    max_order = 256

    def measure(self):
        worst = 0.0
        for order in range(1, self.max_order + 1):
            x = dft_mixing_matrix(order)
            sq = x * x
            for m in range(order + 1):
                cols = list(select_lambda_columns(order, m))
                norms = sq[:, cols].sum(axis=1)
                worst = max(worst, float(np.max(np.abs(norms - m / order))))
        return [Measurement('max|‖row‖² - m/order|', worst, self.tol(1e-12))]
