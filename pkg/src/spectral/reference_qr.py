import numpy as np

from src.config.defaults import EIGEN_DEFAULTS
from src.utils.errors import ConvergenceError, SpecError
from src.utils.logger import setup_logger

logger = setup_logger('reference_qr')


def householder_hessenberg(matrix: np.ndarray) -> np.ndarray:
    """
    Householder 变换化为上 Hessenberg 形（复数运算）

    Args:
        matrix: n x n 方阵

    Returns:
        与输入相似的上 Hessenberg 矩阵
    """
    H = np.array(matrix, dtype=np.complex128)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        x_norm = np.linalg.norm(x)
        # 已经是零列，跳过
        if x_norm < 1e-300:
            continue
        phase = x[0] / abs(x[0]) if abs(x[0]) > 0 else 1.0
        v = x
        v[0] += phase * x_norm
        v_norm = np.linalg.norm(v)
        if v_norm < 1e-300:
            continue
        v /= v_norm
        # 左乘 (I - 2vv*)，再右乘
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H


def _wilkinson_shift(block: np.ndarray) -> complex:
    a, b = block[-2, -2], block[-2, -1]
    c, d = block[-1, -2], block[-1, -1]
    half_gap = (a - d) / 2.0
    disc = np.sqrt(half_gap * half_gap + b * c)
    mu_1 = (a + d) / 2.0 + disc
    mu_2 = (a + d) / 2.0 - disc
    return mu_1 if abs(mu_1 - d) <= abs(mu_2 - d) else mu_2


def _qr_step(block: np.ndarray, shift: complex) -> np.ndarray:
    """一次带位移的 QR 步：B - mu I = QR，返回 RQ + mu I（Givens 旋转）"""
    size = block.shape[0]
    B = block - shift * np.eye(size)
    rotations = []
    for k in range(size - 1):
        x, y = B[k, k], B[k + 1, k]
        r = np.hypot(abs(x), abs(y))
        if r == 0:
            c, s = 1.0 + 0j, 0j
        else:
            c, s = x / r, y / r
        G = np.array([[np.conj(c), np.conj(s)], [-s, c]])
        B[k:k + 2, k:] = G @ B[k:k + 2, k:]
        rotations.append(G)
    for k, G in enumerate(rotations):
        B[:k + 2, k:k + 2] = B[:k + 2, k:k + 2] @ G.conj().T
    return B + shift * np.eye(size)


def hessenberg_qr_eigenvalues(matrix: np.ndarray, max_iter: int = None) -> np.ndarray:
    """
    参考特征值求解器：Hessenberg 约化 + Wilkinson 位移 QR 迭代 + 收缩

    仅用于 N <= 64 的独立校验，与 LAPACK 结果互为对照。
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise SpecError(f"Eigenvalues need a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > EIGEN_DEFAULTS['reference_max_n']:
        raise SpecError(f"Reference QR solver is limited to N <= {EIGEN_DEFAULTS['reference_max_n']}")
    max_iter = EIGEN_DEFAULTS['qr_max_iter'] if max_iter is None else int(max_iter)

    H = householder_hessenberg(matrix)
    n = H.shape[0]
    eigenvalues = np.zeros(n, dtype=np.complex128)
    unit = np.finfo(np.float64).eps
    hi = n - 1
    total_iter = 0
    stalled = 0

    while hi >= 0:
        if hi == 0:
            eigenvalues[0] = H[0, 0]
            break
        # 寻找可以收缩的次对角元
        low = hi
        while low > 0:
            scale = abs(H[low, low]) + abs(H[low - 1, low - 1])
            if abs(H[low, low - 1]) <= unit * (scale if scale > 0 else 1.0):
                H[low, low - 1] = 0.0
                break
            low -= 1
        if low == hi:
            eigenvalues[hi] = H[hi, hi]
            hi -= 1
            stalled = 0
            continue

        total_iter += 1
        stalled += 1
        if total_iter > max_iter:
            logger.error(f"Reference QR did not converge after {max_iter} iterations")
            raise ConvergenceError(
                f"Reference QR did not converge after {max_iter} iterations",
                {'iterations': total_iter, 'unconverged': hi + 1},
            )

        block = H[low:hi + 1, low:hi + 1]
        if stalled % 11 == 10:
            # 特殊位移，打破循环
            shift = block[-1, -1] + 0.75 * abs(block[-1, -2]) * (1.0 + 0.5j)
        else:
            shift = _wilkinson_shift(block)
        H[low:hi + 1, low:hi + 1] = _qr_step(block, shift)

    return eigenvalues
