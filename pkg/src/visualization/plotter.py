from pathlib import Path
from typing import Optional, Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from src.dyson import DensityCurve, LawKind, LimitLaw
from src.spectral import SpectralKind, SpectralSample
from src.utils.errors import ExportError, SpecError
from src.utils.logger import setup_logger

logger = setup_logger('plotter')


class SpectrumPlotter:
    """特征值散点图、径向分布和 nu_z 密度的静态图（只输出 PNG）"""
    def __init__(self, sample: Optional[SpectralSample] = None, law: Optional[LimitLaw] = None):
        self.sample = sample
        self.law = law

    def _eigenvalues(self) -> np.ndarray:
        if self.sample is None or self.sample.kind is not SpectralKind.EIGENVALUES:
            raise SpecError("Plot needs an eigenvalue sample")
        return np.asarray(self.sample.values, dtype=np.complex128)

    def _add_support(self, ax):
        """叠加极限律支撑的边界：单位圆或椭圆"""
        theta = np.linspace(0.0, 2.0 * np.pi, 400)
        if self.law is None:
            return
        if self.law.kind is LawKind.ELLIPTIC:
            ax.plot((1 + self.law.rho) * np.cos(theta), (1 - self.law.rho) * np.sin(theta),
                    color='red', linewidth=1, label=f'ellipse rho={self.law.rho}')
        else:
            ax.plot(np.cos(theta), np.sin(theta), color='red', linewidth=1, label='unit circle')

    def plot_eigenvalues(self, out: Union[str, Path], title: Optional[str] = None) -> Path:
        values = self._eigenvalues()
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.scatter(values.real, values.imag, s=2, color='black', alpha=0.6)
        self._add_support(ax)
        ax.set_aspect('equal')
        ax.set_xlabel('Re')
        ax.set_ylabel('Im')
        ax.grid(True, alpha=0.3)
        if self.law is not None:
            ax.legend(loc='upper right')
        ax.set_title(title or f"Eigenvalues (N={self.sample.N})")
        return self._save(fig, out)

    def plot_radial(self, out: Union[str, Path]) -> Path:
        """|lambda| 的经验分布与极限律的径向 CDF"""
        radii = np.sort(np.abs(self._eigenvalues()))
        empirical = np.arange(1, radii.size + 1) / radii.size
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.step(radii, empirical, where='post', color='black', label='empirical')
        if self.law is not None and self.law.kind is not LawKind.ELLIPTIC:
            grid = np.linspace(0.0, max(1.0, radii[-1]), 400)
            ax.plot(grid, self.law.radial_cdf(grid), color='red', linestyle='--', label=f'r^(2/{self.law.m})')
        ax.set_xlabel('|lambda|')
        ax.set_ylabel('CDF')
        ax.grid(True, alpha=0.3)
        ax.legend(loc='lower right')
        return self._save(fig, out)

    @staticmethod
    def plot_density(curve: DensityCurve, out: Union[str, Path]) -> Path:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(curve.grid, curve.values, color='blue')
        ax.set_xlabel('x')
        ax.set_ylabel('rho_z(x)')
        ax.set_title(f"nu_z density, z={curve.z}, eps={curve.eps:g}")
        ax.grid(True, alpha=0.3)
        return SpectrumPlotter._save(fig, out)

    @staticmethod
    def _save(fig, out: Union[str, Path]) -> Path:
        path = Path(out)
        try:
            fig.savefig(path, dpi=120, bbox_inches='tight')
        except OSError as e:
            logger.error(f"Error saving figure {path}: {str(e)}")
            raise ExportError(f"Cannot write {path}: {e}") from e
        finally:
            plt.close(fig)
        logger.info(f"Figure saved to {path}")
        return path
