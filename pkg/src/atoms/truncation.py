from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, stats

from src.config.defaults import TRUNCATION_DEFAULTS
from src.utils.errors import AssumptionViolation, SpecError, TruncationError
from src.utils.logger import setup_logger
from .distributions import AtomFamily, AtomPairSpec, moment_surplus, sample_pairs

logger = setup_logger('truncation')


@dataclass(frozen=True)
class TruncationConstants:
    """
    截断-标准化变换 xi_hat = (xi * 1{|xi| <= N^delta} - center) / scale 的常数
    """
    threshold: float
    center_1: float
    center_2: float
    scale_1: float
    scale_2: float
    delta: float
    rho_hat: float
    N: int

    def __post_init__(self):
        for scale in (self.scale_1, self.scale_2):
            if not 0 < scale <= 1 + 1e-12:
                raise SpecError(f"Truncation scale must lie in (0, 1], got {scale}")

    @property
    def magnitude_bound(self) -> float:
        """截断后变量的幅度上界 4 N^delta"""
        return TRUNCATION_DEFAULTS['bound_factor'] * self.threshold


def _gaussian_truncated_second_moment(t: float) -> float:
    # E[g^2 1{|g| <= t}] = (2Phi(t) - 1) - 2 t phi(t)
    return float(2.0 * stats.norm.cdf(t) - 1.0 - 2.0 * t * stats.norm.pdf(t))


def _gaussian_truncated_cross_moment(rho: float, t: float) -> float:
    """E[xi_1 xi_2 1{|xi_1| <= t, |xi_2| <= t}]，对条件分布做一维积分"""
    if abs(rho) == 1.0:
        return float(np.sign(rho)) * _gaussian_truncated_second_moment(t)
    sigma = np.sqrt(1.0 - rho ** 2)

    def integrand(x: float) -> float:
        mu = rho * x
        a = (-t - mu) / sigma
        b = (t - mu) / sigma
        # Y | X=x ~ N(mu, sigma^2) 的截断一阶矩
        conditional = mu * (stats.norm.cdf(b) - stats.norm.cdf(a)) + sigma * (stats.norm.pdf(a) - stats.norm.pdf(b))
        return x * stats.norm.pdf(x) * conditional

    value, _ = integrate.quad(integrand, -t, t, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(value)


def truncate_spec(spec: AtomPairSpec, N: int, delta: Optional[float] = None) -> TruncationConstants:
    """
    计算截断常数

    Args:
        spec: 原子变量规格
        N: 矩阵维数，阈值为 N^delta
        delta: 截断指数，默认取配置值

    Returns:
        TruncationConstants，scale^2 < 1/2 时抛出 TruncationError
    """
    delta = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    if delta <= 0:
        raise SpecError(f"delta must be positive, got {delta}")
    if delta * spec.tau >= 1:
        raise AssumptionViolation(f"delta * tau must be < 1, got {delta} * {spec.tau}")
    if N < 1:
        raise SpecError(f"N must be >= 1, got {N}")

    threshold = float(N) ** delta

    # 三个分布族都关于 0 对称，截断后均值仍为 0
    if spec.family is AtomFamily.GAUSSIAN_PAIR:
        scale_sq = _gaussian_truncated_second_moment(threshold)
        cross = _gaussian_truncated_cross_moment(spec.rho, threshold)
        rho_hat = cross / scale_sq
    elif spec.family is AtomFamily.RADEMACHER_MIX:
        # |xi| = 1 <= N^delta，截断是恒等变换
        scale_sq = 1.0 if threshold >= 1.0 else 0.0
        rho_hat = spec.rho
    else:
        alpha = spec.pareto_alpha
        scaled_threshold = np.sqrt(alpha / (alpha - 2.0)) * threshold
        scale_sq = 1.0 - scaled_threshold ** (2.0 - alpha) if scaled_threshold > 1.0 else 0.0
        # 混合耦合下 xi_2 = ±xi_1 或独立，截断不改变相关系数
        rho_hat = spec.rho

    if scale_sq < TRUNCATION_DEFAULTS['min_scale_sq']:
        logger.error(f"Truncation at N={N}, delta={delta} leaves variance {scale_sq:.4f} < 1/2")
        raise TruncationError(
            f"Truncated variance {scale_sq:.4f} < 1/2 at N={N}, delta={delta}; "
            f"N is below the truncation threshold N0 for this law, raise N or delta"
        )

    scale = float(np.sqrt(min(scale_sq, 1.0)))
    return TruncationConstants(
        threshold=threshold,
        center_1=0.0,
        center_2=0.0,
        scale_1=scale,
        scale_2=scale,
        delta=delta,
        rho_hat=float(rho_hat),
        N=int(N),
    )


def apply_truncation(x: np.ndarray, constants: TruncationConstants, component: int = 1) -> np.ndarray:
    """xi_hat = (xi 1{|xi| <= N^delta} - center) / scale"""
    center = constants.center_1 if component == 1 else constants.center_2
    scale = constants.scale_1 if component == 1 else constants.scale_2
    x = np.asarray(x, dtype=np.float64)
    kept = np.where(np.abs(x) <= constants.threshold, x, 0.0)
    return (kept - center) / scale


def truncation_bounds(spec: AtomPairSpec, N: int, delta: Optional[float] = None,
                      surplus: Optional[float] = None) -> Tuple[float, float]:
    """
    截断引理给出的两个上界：
    |1 - var| <= 2 M / N^{delta tau}，|rho_hat - rho| <= 13 M / N^{delta tau / 2}
    """
    delta = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    surplus = moment_surplus(spec) if surplus is None else float(surplus)
    decay = float(N) ** (delta * spec.tau)
    return 2.0 * surplus / decay, 13.0 * surplus / np.sqrt(decay)


@lru_cache(maxsize=64)
def estimate_truncation_constants(spec: AtomPairSpec, N: int, delta: Optional[float] = None,
                                  samples: int = 1_000_000, seed: int = 0) -> TruncationConstants:
    """蒙特卡洛估计截断常数（结果缓存），用于交叉检验解析值"""
    delta = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    threshold = float(N) ** delta
    rng = np.random.default_rng(seed)
    x1, x2 = sample_pairs(spec, rng, samples)

    kept_1 = np.where(np.abs(x1) <= threshold, x1, 0.0)
    kept_2 = np.where(np.abs(x2) <= threshold, x2, 0.0)
    center_1, center_2 = float(kept_1.mean()), float(kept_2.mean())
    scale_1 = float(np.sqrt(kept_1.var()))
    scale_2 = float(np.sqrt(kept_2.var()))
    rho_hat = float(np.mean((kept_1 - center_1) * (kept_2 - center_2)) / (scale_1 * scale_2))

    logger.info(f"Estimated truncation constants for {spec.family.value} N={N}: "
                f"scale=({scale_1:.4f}, {scale_2:.4f}), rho_hat={rho_hat:.4f}")
    return TruncationConstants(
        threshold=threshold,
        center_1=center_1,
        center_2=center_2,
        scale_1=min(scale_1, 1.0),
        scale_2=min(scale_2, 1.0),
        delta=delta,
        rho_hat=rho_hat,
        N=int(N),
    )
