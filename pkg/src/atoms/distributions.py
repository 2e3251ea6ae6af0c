from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import gamma as gamma_fn

from src.utils.errors import AssumptionViolation, SpecError


class AtomFamily(Enum):
    GAUSSIAN_PAIR = "gaussian-pair"        # 二维相关高斯
    RADEMACHER_MIX = "rademacher-mix"      # Rademacher 混合耦合
    PARETO_SYMMETRIZED = "pareto-symmetrized"  # 对称化 Pareto，只有 2+tau+0.5 阶以下的矩

    @classmethod
    def parse(cls, value: Any) -> 'AtomFamily':
        if isinstance(value, cls):
            return value
        aliases = {
            'gaussian': cls.GAUSSIAN_PAIR,
            'rademacher': cls.RADEMACHER_MIX,
            'pareto': cls.PARETO_SYMMETRIZED,
        }
        text = str(value).strip().lower()
        if text in aliases:
            return aliases[text]
        for member in cls:
            if member.value == text:
                return member
        raise SpecError(f"Unknown atom family '{value}'")


class DiagFamily(Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    ZERO = "zero"

    @classmethod
    def parse(cls, value: Any) -> 'DiagFamily':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise SpecError(f"Unknown diagonal family '{value}'")


@dataclass(frozen=True)
class AtomPairSpec:
    """
    镜像元素对 (xi_1, xi_2) 的联合分布及对角分布 zeta

    每个边缘分布均值 0、方差 1，互相关为 rho。
    """
    family: AtomFamily
    rho: float
    tau: float = 1.0
    wigner_flag: bool = False
    diag_family: DiagFamily = DiagFamily.GAUSSIAN
    diag_variance: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.rho):
            raise SpecError(f"rho must be finite, got {self.rho}")
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise AssumptionViolation(f"tau must be positive (finite 2+tau moment), got {self.tau}")
        if abs(self.rho) > 1:
            raise AssumptionViolation(f"|rho| must not exceed 1, got {self.rho}")
        if abs(self.rho) == 1 and not self.wigner_flag:
            raise AssumptionViolation(
                f"Elliptic atoms require |rho| < 1, got rho={self.rho}; "
                f"pass the wigner flag for the symmetric product path"
            )
        if self.diag_variance < 0 or not np.isfinite(self.diag_variance):
            raise SpecError(f"diag_variance must be finite and nonnegative, got {self.diag_variance}")

    @property
    def pareto_alpha(self) -> float:
        """对称 Pareto 的尾指数"""
        return 2.0 + self.tau + 0.5

    def to_dict(self) -> Dict[str, Any]:
        return {
            'family': self.family.value,
            'rho': self.rho,
            'tau': self.tau,
            'wigner': self.wigner_flag,
            'diag': {'family': self.diag_family.value, 'variance': self.diag_variance},
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'AtomPairSpec':
        unknown = set(payload) - {'family', 'rho', 'tau', 'wigner', 'diag'}
        if unknown:
            raise SpecError(f"Unknown atom spec keys: {sorted(unknown)}")
        diag = payload.get('diag', {}) or {}
        return make_atom_pair_spec(
            payload['family'],
            payload.get('rho', 0.0),
            {
                'tau': payload.get('tau', 1.0),
                'wigner': payload.get('wigner', False),
                'diag_family': diag.get('family', 'gaussian'),
                'diag_variance': diag.get('variance', 1.0),
            },
        )


def make_atom_pair_spec(family: Any, rho: float, params: Optional[Dict[str, Any]] = None) -> AtomPairSpec:
    """
    构造并校验原子变量规格

    Args:
        family: 分布族（gaussian / rademacher / pareto 或完整名称）
        rho: 镜像元素相关系数
        params: tau、wigner、diag_family、diag_variance

    Returns:
        校验后的 AtomPairSpec
    """
    params = dict(params or {})
    allowed = {'tau', 'wigner', 'diag_family', 'diag_variance'}
    unknown = set(params) - allowed
    if unknown:
        raise SpecError(f"Unknown atom parameters: {sorted(unknown)}")
    try:
        rho = float(rho)
    except (TypeError, ValueError):
        raise SpecError(f"rho must be a number, got {rho!r}")
    return AtomPairSpec(
        family=AtomFamily.parse(family),
        rho=rho,
        tau=float(params.get('tau', 1.0)),
        wigner_flag=bool(params.get('wigner', False)),
        diag_family=DiagFamily.parse(params.get('diag_family', 'gaussian')),
        diag_variance=float(params.get('diag_variance', 1.0)),
    )


def _rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0


def _symmetric_pareto(rng: np.random.Generator, size: int, alpha: float) -> np.ndarray:
    """|X| 服从 P(|X| > x) = x^{-alpha} (x >= 1)，再归一化为单位方差"""
    magnitude = (1.0 - rng.random(size)) ** (-1.0 / alpha)
    sign = _rademacher(rng, size)
    return sign * magnitude / np.sqrt(alpha / (alpha - 2.0))


def _mixture_couple(rng: np.random.Generator, x1: np.ndarray, x2_indep: np.ndarray, rho: float) -> np.ndarray:
    # 以概率 |rho| 取 ±x1，否则取独立副本，互相关恰为 rho
    coupled = rng.random(x1.shape[0]) < abs(rho)
    return np.where(coupled, np.sign(rho) * x1, x2_indep)


def sample_pairs(spec: AtomPairSpec, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """批量抽取 size 个独立的 (xi_1, xi_2)"""
    size = int(size)
    if spec.family is AtomFamily.GAUSSIAN_PAIR:
        g = rng.standard_normal((2, size))
        x1 = g[0]
        x2 = spec.rho * g[0] + np.sqrt(1.0 - spec.rho ** 2) * g[1]
        return x1, x2

    if spec.family is AtomFamily.RADEMACHER_MIX:
        x1 = _rademacher(rng, size)
        x2 = _rademacher(rng, size)
    else:
        x1 = _symmetric_pareto(rng, size, spec.pareto_alpha)
        x2 = _symmetric_pareto(rng, size, spec.pareto_alpha)
    return x1, _mixture_couple(rng, x1, x2, spec.rho)


def sample_pair(spec: AtomPairSpec, rng: np.random.Generator) -> Tuple[float, float]:
    x1, x2 = sample_pairs(spec, rng, 1)
    return float(x1[0]), float(x2[0])


def sample_diagonal(spec: AtomPairSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """对角元素 zeta 的独立抽样"""
    std = np.sqrt(spec.diag_variance)
    if spec.diag_family is DiagFamily.GAUSSIAN:
        return std * rng.standard_normal(size)
    if spec.diag_family is DiagFamily.RADEMACHER:
        return std * _rademacher(rng, size)
    return np.zeros(size)


def moment_surplus(spec: AtomPairSpec) -> float:
    """精确的 M_{2+tau} = E|xi_1|^{2+tau} + E|xi_2|^{2+tau}"""
    p = 2.0 + spec.tau
    if spec.family is AtomFamily.GAUSSIAN_PAIR:
        single = 2.0 ** (p / 2.0) * gamma_fn((p + 1.0) / 2.0) / np.sqrt(np.pi)
    elif spec.family is AtomFamily.RADEMACHER_MIX:
        single = 1.0
    else:
        alpha = spec.pareto_alpha
        scale = np.sqrt(alpha / (alpha - 2.0))
        single = (alpha / (alpha - p)) / scale ** p
    return float(2.0 * single)


def empirical_moment_surplus(x1: np.ndarray, x2: np.ndarray, tau: float) -> float:
    p = 2.0 + tau
    return float(np.mean(np.abs(x1) ** p) + np.mean(np.abs(x2) ** p))
