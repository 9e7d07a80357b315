import numpy as np

from src.eigensolver import SPECTRUM_TOL, backend_agreement, spectrum_diagnostics
from src.operators import build_concentration_matrix
from src.pseudoprolate import construct, pseudoprolate_diagnostics
from .base import BaseCheck, Measurement


class SpectrumGramCheck(BaseCheck):
    """特征函数正交归一、Rayleigh 商等于 λ、λ 落在 [0,1] 附近"""
    name = 'spectrum_gram'

    def measure(self):
        diag = spectrum_diagnostics(self.context.spectrum)
        return [
            Measurement('gram', diag['gram'], self.tol(1e-10)),
            Measurement('rayleigh', diag['rayleigh'], self.tol(1e-9)),
            Measurement('range', diag['range'], self.tol(SPECTRUM_TOL)),
            Measurement('ordered', 0.0 if diag['ordered'] else np.inf, 0.0),
        ]


class TraceIdentityCheck(BaseCheck):
    """Σλ 对 r|T||Ω|/2π 的相对误差，以及 Σλ 与矩阵迹的一致性"""
    name = 'trace_identity'

    def measure(self):
        spec = self.context.spectrum
        trace = float(np.trace(build_concentration_matrix(spec.geom)))
        return [
            Measurement('relative trace error', spec.trace_error, self.tol(1e-3)),
            Measurement('|Σλ - trace(P)|', abs(spec.eigen_sum - trace), self.tol(1e-9)),
        ]


class PseudoProlateGramCheck(BaseCheck):
    """构造结果正交归一、kernel 能量恰为 m/(m+n)、残差不超过上界"""
    name = 'pseudoprolate_gram'

    def measure(self):
        ctx = self.context
        pset = construct(ctx.spectrum, ctx.geom, ctx.budget, disc_tol=ctx.disc_tol, strict=False)
        diag = pseudoprolate_diagnostics(pset)
        return [
            Measurement('gram', diag['gram'], self.tol(1e-9)),
            Measurement('rho_split', diag['rho_split'], self.tol(1e-10)),
            Measurement('residual - bound', diag['bound_excess'], self.tol(ctx.disc_tol)),
        ]


class BackendAgreementCheck(BaseCheck):
    """DPSS 三对角后端与 Nyström 前 10 个特征值"""
    name = 'backend_agreement'
    count = 10

    def measure(self):
        diff = backend_agreement(self.context.spectrum, count=self.count)
        return [Measurement(f'top-{self.count} max|Δλ|', diff, self.tol(1e-3))]
