from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import integrate

from src.utils.errors import SpecError


class LawKind(Enum):
    PRODUCT = "product-Fm"
    CIRCULAR = "circular"
    ELLIPTIC = "elliptic"


def f_m_density(z, m: int):
    """F_m 的密度 (1/(m pi)) |z|^{2/m - 2}（单位圆盘内），圆盘外为 0"""
    if int(m) < 1:
        raise SpecError(f"m must be >= 1, got {m}")
    r = np.abs(np.asarray(z, dtype=np.complex128))
    with np.errstate(divide='ignore'):
        inside = r ** (2.0 / m - 2.0) / (m * np.pi)
    density = np.where(r <= 1.0, inside, 0.0)
    return float(density) if density.ndim == 0 else density


def radial_cdf(r, m: int):
    """P(|lambda| <= r) = r^{2/m}，裁剪到 [0, 1]"""
    if int(m) < 1:
        raise SpecError(f"m must be >= 1, got {m}")
    value = np.clip(np.asarray(r, dtype=np.float64), 0.0, 1.0) ** (2.0 / m)
    return float(value) if value.ndim == 0 else value


def _check_rho(rho: float):
    if not -1.0 < float(rho) < 1.0:
        raise SpecError(f"Elliptic law needs |rho| < 1 (the ellipse degenerates at ±1), got {rho}")


def elliptic_contains(z, rho: float, slack: float = 1.0):
    """z 是否落在半轴为 slack*(1+rho)、slack*(1-rho) 的椭圆内"""
    _check_rho(rho)
    z = np.asarray(z, dtype=np.complex128)
    inside = (z.real / (slack * (1.0 + rho))) ** 2 + (z.imag / (slack * (1.0 - rho))) ** 2 <= 1.0
    return bool(inside) if inside.ndim == 0 else inside


def elliptic_density(z, rho: float):
    """椭圆 E_rho 上的均匀密度 1 / (pi (1 - rho^2))"""
    inside = elliptic_contains(z, rho)
    density = np.where(inside, 1.0 / (np.pi * (1.0 - rho ** 2)), 0.0)
    return float(density) if density.ndim == 0 else density


def g_exact(s, t):
    """g(s, t) = 2s / (s^2 + t^2)（单位圆盘外），2s（圆盘内）"""
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    radius_sq = s ** 2 + t ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        outside = 2.0 * s / radius_sq
    value = np.where(radius_sq > 1.0, outside, 2.0 * s)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class LimitLaw:
    """极限谱分布：F_m（m 个因子的乘积）、圆律（m=1）或椭圆律"""
    kind: LawKind
    m: int = 1
    rho: Optional[float] = None

    def __post_init__(self):
        if self.kind is LawKind.ELLIPTIC:
            if self.rho is None:
                raise SpecError("Elliptic law needs rho")
            _check_rho(self.rho)
        elif int(self.m) < 1:
            raise SpecError(f"m must be >= 1, got {self.m}")
        if self.kind is LawKind.CIRCULAR and self.m != 1:
            raise SpecError("Circular law is F_m with m = 1")

    @classmethod
    def product(cls, m: int) -> 'LimitLaw':
        return cls(LawKind.CIRCULAR, 1) if int(m) == 1 else cls(LawKind.PRODUCT, int(m))

    @classmethod
    def elliptic(cls, rho: float) -> 'LimitLaw':
        return cls(LawKind.ELLIPTIC, 1, float(rho))

    def density(self, z):
        if self.kind is LawKind.ELLIPTIC:
            return elliptic_density(z, self.rho)
        return f_m_density(z, self.m)

    def radial_cdf(self, r):
        if self.kind is LawKind.ELLIPTIC:
            raise SpecError("Elliptic law is not radially symmetric")
        return radial_cdf(r, self.m)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """按极限律抽样：半径 U^{m/2}，角度均匀；椭圆律由单位圆盘拉伸得到"""
        angle = rng.uniform(0.0, 2.0 * np.pi, size)
        if self.kind is LawKind.ELLIPTIC:
            radius = np.sqrt(rng.uniform(0.0, 1.0, size))
            return radius * ((1.0 + self.rho) * np.cos(angle) + 1j * (1.0 - self.rho) * np.sin(angle))
        radius = rng.uniform(0.0, 1.0, size) ** (self.m / 2.0)
        return radius * np.exp(1j * angle)

    def total_mass(self) -> float:
        """自适应二维积分检查密度的总质量"""
        if self.kind is LawKind.ELLIPTIC:
            a, b = 1.0 + self.rho, 1.0 - self.rho
            value, _ = integrate.dblquad(
                lambda y, x: self.density(x + 1j * y),
                -a, a,
                lambda x: -b * np.sqrt(max(0.0, 1.0 - (x / a) ** 2)),
                lambda x: b * np.sqrt(max(0.0, 1.0 - (x / a) ** 2)),
                epsabs=1e-10, epsrel=1e-10,
            )
            return float(value)
        # 极坐标：f(r) r dtheta dr，在 r = 0 处的可积奇点交给 QUADPACK
        value, _ = integrate.dblquad(
            lambda theta, r: f_m_density(r, self.m) * r,
            0.0, 1.0, 0.0, 2.0 * np.pi,
            epsabs=1e-10, epsrel=1e-10,
        )
        return float(value)
