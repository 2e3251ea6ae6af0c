from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from src.utils.errors import SpecError


def a_prime(a: int, m: int) -> int:
    """
    循环 Hermitization 中第 a 个块行唯一非零块所在的列（下标从 1 开始）

    a <= m 时落在 X 部分的第 (a mod m) + 1 列，a > m 时落在 X* 部分。
    """
    m = int(m)
    a = int(a)
    if m < 2:
        raise SpecError(f"Index map a' needs m >= 2 (otherwise a' = a ± m), got m={m}")
    if not 1 <= a <= 2 * m:
        raise SpecError(f"Block index must lie in [1, {2 * m}], got {a}")
    if a <= m:
        return m + (a % m) + 1
    return ((a - m - 2) % m) + 1


@dataclass(frozen=True)
class SigmaSpec:
    """Sigma 算子的参数：块数 m、每个因子的 rho_k 和下标映射 a'"""
    m: int
    rhos: Tuple[float, ...]
    aprime: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if int(self.m) < 2:
            raise SpecError(f"SigmaSpec needs m >= 2, got m={self.m}")
        if len(self.rhos) != self.m:
            raise SpecError(f"Expected {self.m} correlations, got {len(self.rhos)}")
        if any(not -1.0 <= float(rho) <= 1.0 for rho in self.rhos):
            raise SpecError(f"Correlations must lie in [-1, 1], got {list(self.rhos)}")
        if not self.aprime:
            object.__setattr__(self, 'aprime', tuple(a_prime(a, self.m) for a in range(1, 2 * self.m + 1)))
        self._validate_aprime()

    def _validate_aprime(self):
        m = self.m
        if len(self.aprime) != 2 * m:
            raise SpecError(f"a' must have length {2 * m}, got {len(self.aprime)}")
        for a in range(1, 2 * m + 1):
            image = self.aprime[a - 1]
            if self.aprime[image - 1] != a:
                raise SpecError(f"a' is not an involution at a={a}")
            if image in (a, a - m, a + m):
                raise SpecError(f"a'({a}) = {image} violates a' != a, a ± m")

    @classmethod
    def from_rhos(cls, rhos: Sequence[float]) -> 'SigmaSpec':
        rhos = tuple(float(rho) for rho in rhos)
        return cls(m=len(rhos), rhos=rhos)

    @property
    def index(self) -> np.ndarray:
        """a' 的 0 起始数组形式"""
        return np.array(self.aprime, dtype=int) - 1

    @property
    def rho_a(self) -> np.ndarray:
        """
        长度 2m 的 rho_a：a <= m 时为第 a 个因子的 rho，a > m 时取 rho_{a'}
        """
        rhos = np.asarray(self.rhos, dtype=np.float64)
        result = np.empty(2 * self.m)
        result[:self.m] = rhos
        result[self.m:] = rhos[self.index[self.m:]]
        return result


def sigma_op(A: np.ndarray, spec: SigmaSpec) -> np.ndarray:
    """Sigma(A)_ab = A_{a'a'} delta_ab + rho_a A_{a'a} delta_{a'b}"""
    A = np.asarray(A)
    size = 2 * spec.m
    if A.shape != (size, size):
        raise SpecError(f"Sigma expects a {size}x{size} matrix, got {A.shape}")
    ap = spec.index
    rows = np.arange(size)
    result = np.zeros((size, size), dtype=np.result_type(A, np.complex128))
    result[rows, rows] = A[ap, ap]
    result[rows, ap] += spec.rho_a * A[ap, rows]
    return result


def sigma_kernel(spec: SigmaSpec) -> np.ndarray:
    """
    四指标核 sigma(a, c; d, b)，下标从 0 开始，Sigma(A)_ab = sum_cd sigma(a,c;d,b) A_cd

    sigma(a,c;d,b) = delta_ab delta_{ca'} delta_{da'} + rho_a delta_{ca'} delta_{da} delta_{ba'}
    """
    size = 2 * spec.m
    ap = spec.index
    rho = spec.rho_a
    kernel = np.zeros((size, size, size, size))
    for a in range(size):
        kernel[a, ap[a], ap[a], a] += 1.0
        kernel[a, ap[a], a, ap[a]] += rho[a]
    return kernel
