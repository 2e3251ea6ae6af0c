from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.atoms import AtomPairSpec, apply_truncation, sample_diagonal, sample_pairs, truncate_spec
from src.utils.errors import AssumptionViolation, SpecError
from src.utils.helpers import spec_hash
from src.utils.logger import setup_logger
from .streams import derive_seed, row_generator

logger = setup_logger('ensembles')

Factor = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class EnsembleSpec:
    """单个实椭圆随机矩阵 Y_{N,k} 的配方"""
    N: int
    atom: AtomPairSpec
    seed: int
    truncated: bool = False
    delta: Optional[float] = None

    def __post_init__(self):
        if int(self.N) < 2:
            raise SpecError(f"Matrix dimension N must be >= 2, got {self.N}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise SpecError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'N': int(self.N),
            'atom': self.atom.to_dict(),
            'seed': int(self.seed),
            'truncated': self.truncated,
            'delta': self.delta,
        }

    @property
    def hash(self) -> str:
        return spec_hash(self.to_dict())


class PerturbationKind(Enum):
    ZERO = "zero"
    CONSTANT = "constant"    # 每个元素都是 mu，对应均值为 mu 的原子变量
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """
    确定性低秩扰动 A_{N,k}

    要求 rank <= rank_bound * N^{1-epsilon}，||A||_2^2 <= hs_norm_bound * N^2。
    """
    kind: PerturbationKind = PerturbationKind.ZERO
    mu: float = 0.0
    entries: Optional[np.ndarray] = None
    rank_bound: float = 1.0
    hs_norm_bound: float = 1.0
    epsilon: float = 0.5

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise SpecError(f"Rank exponent epsilon must lie in (0, 1], got {self.epsilon}")
        if self.kind is PerturbationKind.EXPLICIT and self.entries is None:
            raise SpecError("Explicit perturbation requires entries")

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            'kind': self.kind.value,
            'mu': self.mu,
            'rank_bound': self.rank_bound,
            'hs_norm_bound': self.hs_norm_bound,
            'epsilon': self.epsilon,
        }
        if self.entries is not None:
            payload['entries_hash'] = spec_hash(np.asarray(self.entries).tolist())
        return payload


@dataclass(frozen=True)
class ProductSpec:
    """m 个独立因子 (Y_{N,k} + A_{N,k}) 的乘积配方"""
    factors: Tuple[Tuple[EnsembleSpec, PerturbationSpec], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.factors) < 1:
            raise SpecError("ProductSpec needs at least one factor")
        sizes = {ensemble.N for ensemble, _ in self.factors}
        if len(sizes) != 1:
            raise SpecError(f"All factors must share one dimension N, got {sorted(sizes)}")
        seeds = [ensemble.seed for ensemble, _ in self.factors]
        if len(set(seeds)) != len(seeds):
            raise SpecError("Factor seeds must be pairwise distinct (independent factors)")
        symmetric = [ensemble for ensemble, _ in self.factors if abs(ensemble.atom.rho) == 1]
        if symmetric and self.m > 2:
            raise AssumptionViolation(
                f"Factors with rho = ±1 are only supported for m <= 2 (Wigner product), got m={self.m}"
            )

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def N(self) -> int:
        return self.factors[0][0].N

    @classmethod
    def from_atoms(
        cls,
        N: int,
        atoms: Sequence[AtomPairSpec],
        seed: int,
        perturbations: Optional[Sequence[PerturbationSpec]] = None,
        truncated: bool = False,
        delta: Optional[float] = None,
    ) -> 'ProductSpec':
        """
        由主种子构造乘积配方，第 k 个因子的种子为 derive_seed(seed, k)

        Args:
            N: 矩阵维数
            atoms: 每个因子的原子变量规格
            seed: 主种子
            perturbations: 每个因子的扰动，默认全零
        """
        if perturbations is None:
            perturbations = [PerturbationSpec() for _ in atoms]
        if len(perturbations) != len(atoms):
            raise SpecError(f"Got {len(atoms)} atom specs but {len(perturbations)} perturbations")
        factors = tuple(
            (EnsembleSpec(N=int(N), atom=atom, seed=derive_seed(seed, k), truncated=truncated, delta=delta), pert)
            for k, (atom, pert) in enumerate(zip(atoms, perturbations))
        )
        return cls(factors=factors)

    def with_N(self, N: int, seed: Optional[int] = None) -> 'ProductSpec':
        """换一个维数（可选换主种子），保留原子变量和扰动"""
        atoms = [ensemble.atom for ensemble, _ in self.factors]
        perturbations = [pert for _, pert in self.factors]
        first = self.factors[0][0]
        master = first.seed if seed is None else seed
        return ProductSpec.from_atoms(N, atoms, master, perturbations, first.truncated, first.delta)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'm': self.m,
            'factors': [
                {'ensemble': ensemble.to_dict(), 'perturbation': pert.to_dict()}
                for ensemble, pert in self.factors
            ],
        }

    @property
    def hash(self) -> str:
        return spec_hash(self.to_dict())


def _draw_raw(spec: EnsembleSpec) -> np.ndarray:
    # 每行一个独立子流：先抽对角元，再抽 j > i 的镜像对
    N = int(spec.N)
    matrix = np.empty((N, N), dtype=np.float64)
    for i in range(N):
        rng = row_generator(spec.seed, i)
        matrix[i, i] = sample_diagonal(spec.atom, rng, 1)[0]
        if i < N - 1:
            x1, x2 = sample_pairs(spec.atom, rng, N - 1 - i)
            matrix[i, i + 1:] = x1
            matrix[i + 1:, i] = x2
    return matrix


def _truncate_matrix(raw: np.ndarray, spec: EnsembleSpec) -> np.ndarray:
    """非对角元做截断标准化，对角元置零"""
    constants = truncate_spec(spec.atom, spec.N, spec.delta)
    upper = np.triu(np.ones_like(raw, dtype=bool), k=1)
    truncated = np.where(upper, apply_truncation(raw, constants, 1), apply_truncation(raw, constants, 2))
    np.fill_diagonal(truncated, 0.0)
    return truncated


def build_elliptic(spec: EnsembleSpec) -> np.ndarray:
    """
    生成 N x N 实椭圆随机矩阵

    (y_ij, y_ji) (i < j) 为原子对的独立副本，对角元为 zeta 的独立副本；
    同一 spec 总是得到逐位相同的矩阵。
    """
    raw = _draw_raw(spec)
    if spec.truncated:
        return _truncate_matrix(raw, spec)
    return raw


def build_truncated_pair(spec: EnsembleSpec) -> Tuple[np.ndarray, np.ndarray]:
    """同一随机流下的原矩阵 Y 和截断矩阵 Y_hat"""
    raw = _draw_raw(spec)
    return raw, _truncate_matrix(raw, spec)


def build_perturbation(spec: PerturbationSpec, N: int) -> np.ndarray:
    """生成并校验确定性扰动矩阵"""
    if spec.kind is PerturbationKind.ZERO:
        matrix = np.zeros((N, N))
        rank = 0
    elif spec.kind is PerturbationKind.CONSTANT:
        matrix = np.full((N, N), float(spec.mu))
        rank = 1 if spec.mu != 0 else 0
    else:
        matrix = np.array(spec.entries, dtype=np.float64)
        if matrix.shape != (N, N):
            raise SpecError(f"Perturbation entries have shape {matrix.shape}, expected {(N, N)}")
        rank = int(np.linalg.matrix_rank(matrix))

    max_rank = spec.rank_bound * float(N) ** (1.0 - spec.epsilon)
    if rank > max_rank:
        raise AssumptionViolation(
            f"Perturbation rank {rank} exceeds {spec.rank_bound} * N^(1-{spec.epsilon}) = {max_rank:.2f}"
        )
    hs_sq = float(np.sum(matrix ** 2))
    if hs_sq > spec.hs_norm_bound * float(N) ** 2:
        raise AssumptionViolation(
            f"Perturbation ||A||_2^2 = {hs_sq:.4g} exceeds {spec.hs_norm_bound} * N^2"
        )
    return matrix


def sample_factors(prod: ProductSpec) -> List[Factor]:
    """按因子顺序抽取 (Y_{N,k}, A_{N,k})"""
    return [(build_elliptic(ensemble), build_perturbation(pert, ensemble.N)) for ensemble, pert in prod.factors]


def _check_factors(factors: Sequence[Factor]) -> int:
    if not factors:
        raise SpecError("At least one factor is required")
    N = factors[0][0].shape[0]
    for k, (Y, A) in enumerate(factors):
        if Y.shape != (N, N) or A.shape != (N, N):
            raise SpecError(f"Factor {k} has shapes {Y.shape}/{A.shape}, expected {(N, N)}")
    return N


def build_block_linearization(prod: Optional[ProductSpec] = None,
                              factors: Optional[Sequence[Factor]] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    构造 mN x mN 的循环块矩阵 Y_N、A_N 以及 Z_N = (Y_N + A_N) / sqrt(N)

    第 k 个块行只在第 k+1 个块列（最后一行回到第 1 列）非零。
    """
    if factors is None:
        if prod is None:
            raise SpecError("Either a ProductSpec or sampled factors is required")
        factors = sample_factors(prod)
    m = len(factors)
    if m < 2:
        raise SpecError(f"Block linearization requires m > 1 factors, got m={m}")
    N = _check_factors(factors)

    Y_N = np.zeros((m * N, m * N))
    A_N = np.zeros((m * N, m * N))
    for k, (Y, A) in enumerate(factors):
        col = (k + 1) % m
        Y_N[k * N:(k + 1) * N, col * N:(col + 1) * N] = Y
        A_N[k * N:(k + 1) * N, col * N:(col + 1) * N] = A
    Z_N = (Y_N + A_N) / np.sqrt(N)
    return Y_N, A_N, Z_N


def build_product(prod: Optional[ProductSpec] = None, factors: Optional[Sequence[Factor]] = None) -> np.ndarray:
    """P_N = N^{-m/2} (Y_1 + A_1) ... (Y_m + A_m)"""
    if factors is None:
        if prod is None:
            raise SpecError("Either a ProductSpec or sampled factors is required")
        factors = sample_factors(prod)
    N = _check_factors(factors)

    scale = np.sqrt(N)
    product = (factors[0][0] + factors[0][1]) / scale
    for Y, A in factors[1:]:
        product = product @ ((Y + A) / scale)
    return product


def cyclic_products(prod: Optional[ProductSpec] = None, factors: Optional[Sequence[Factor]] = None) -> List[np.ndarray]:
    """Z_N^m 的 m 个对角块，第 k 个为从因子 k 开始的循环乘积，第一个即 P_N"""
    if factors is None:
        factors = sample_factors(prod)
    m = len(factors)
    blocks = []
    for k in range(m):
        rotated = list(factors[k:]) + list(factors[:k])
        blocks.append(build_product(factors=rotated))
    return blocks
