from typing import Callable, Tuple, Union

import numpy as np

from src.utils.errors import SpecError

CDF = Union['EmpiricalCDF', Callable[[np.ndarray], np.ndarray]]


class EmpiricalCDF:
    """
    经验分布函数 F(x) = #{i: x_i <= x} / n（右连续阶梯函数）
    """
    def __init__(self, samples):
        values = np.sort(np.asarray(samples, dtype=np.float64).ravel())
        if values.size == 0:
            raise SpecError("Empirical CDF needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise SpecError("Empirical CDF samples must be finite")
        self.values = values
        self.n = values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side='right') / self.n

    def left(self, x):
        """左极限 F(x-)"""
        return np.searchsorted(self.values, x, side='left') / self.n

    @property
    def jumps(self) -> np.ndarray:
        return np.unique(self.values)


def _left_limit(G: CDF, x: np.ndarray) -> np.ndarray:
    return G.left(x) if isinstance(G, EmpiricalCDF) else np.asarray(G(x), dtype=np.float64)


def ks_distance(F: EmpiricalCDF, G: CDF) -> float:
    """
    sup_x |F(x) - G(x)|

    G 为经验分布时在两者跳点的并集上取值；G 为连续分布函数时比较每个跳点两侧的取值。
    """
    if isinstance(G, EmpiricalCDF):
        points = np.union1d(F.jumps, G.jumps)
        return float(np.max(np.abs(F(points) - G(points))))
    points = F.jumps
    target = np.asarray(G(points), dtype=np.float64)
    right = np.abs(F(points) - target)
    left = np.abs(F.left(points) - target)
    return float(max(right.max(), left.max()))


def _levy_holds(F: EmpiricalCDF, G: CDF, eps: float) -> bool:
    # F 为阶梯函数时，G(x) <= F(x+eps)+eps 只需在 x -> (x_i - eps)- 处检查，
    # F(x-eps)-eps <= G(x) 只需在 x = x_i + eps 处检查
    jumps = F.jumps
    upper = _left_limit(G, jumps - eps) <= F.left(jumps) + eps + 1e-15
    lower = F(jumps) - eps <= np.asarray(G(jumps + eps), dtype=np.float64) + 1e-15
    return bool(np.all(upper) and np.all(lower))


def levy_distance(F: EmpiricalCDF, G: CDF, tol: float = 1e-10) -> float:
    """
    Levy 距离 inf{eps > 0: F(x-eps) - eps <= G(x) <= F(x+eps) + eps 对所有 x 成立}

    条件在 F 的跳点角上精确检查，再对 eps 二分；上界取 KS 距离，因此结果总不超过 KS。
    """
    if _levy_holds(F, G, 0.0):
        return 0.0
    lo, hi = 0.0, min(1.0, ks_distance(F, G))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _levy_holds(F, G, mid):
            hi = mid
        else:
            lo = mid
    return hi


def rank_inequality_gap(A: np.ndarray, B: np.ndarray) -> Tuple[float, float]:
    """
    Hermitian 矩阵的秩不等式 ||F^A - F^B|| <= rank(A - B) / n

    Returns:
        (sup 距离, 秩上界)
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpecError(f"Rank inequality needs two square matrices of equal size, got {A.shape} and {B.shape}")
    n = A.shape[0]
    distance = ks_distance(EmpiricalCDF(np.linalg.eigvalsh(A)), EmpiricalCDF(np.linalg.eigvalsh(B)))
    bound = np.linalg.matrix_rank(A - B) / n
    return distance, float(bound)
