from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from src.config.defaults import EIGEN_DEFAULTS
from src.utils.errors import NumericalError, SpecError
from src.utils.logger import setup_logger

logger = setup_logger('resolvent')


@dataclass(frozen=True)
class QPoint:
    """
    谱参数 q = [[eta I_m, z I_m], [conj(z) I_m, eta I_m]]

    Attributes:
        eta: 上半平面中的复数
        z: 复平面上的点
        m: 块数
    """
    eta: complex
    z: complex
    m: int

    def __post_init__(self):
        if not np.imag(self.eta) > 0:
            raise SpecError(f"QPoint requires Im(eta) > 0, got eta={self.eta}")
        if int(self.m) < 1:
            raise SpecError(f"QPoint requires m >= 1, got m={self.m}")

    def matrix(self) -> np.ndarray:
        eye = np.eye(int(self.m), dtype=np.complex128)
        eta, z = complex(self.eta), complex(self.z)
        return np.block([[eta * eye, z * eye], [np.conj(z) * eye, eta * eye]])

    def inverse(self) -> np.ndarray:
        """q^{-1}，每个 2x2 块 [[eta, z], [conj(z), eta]] 单独求逆"""
        eta, z = complex(self.eta), complex(self.z)
        det = eta * eta - abs(z) ** 2
        eye = np.eye(int(self.m), dtype=np.complex128)
        return np.block([[eta * eye, -z * eye], [-np.conj(z) * eye, eta * eye]]) / det


@dataclass(frozen=True, eq=False)
class MatrixStieltjes:
    """2m x 2m 矩阵值 Stieltjes 变换，如 Gamma_N 或极限 Gamma"""
    entries: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.entries)
        if len(shape) != 2 or shape[0] != shape[1] or shape[0] % 2:
            raise SpecError(f"MatrixStieltjes needs an even square matrix, got shape {shape}")

    @property
    def m(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def imag_part(self) -> np.ndarray:
        """(M - M*) / 2i，Hermitian"""
        return (self.entries - self.entries.conj().T) / 2j

    def is_positive(self, tol: float = 1e-12) -> bool:
        return bool(np.linalg.eigvalsh(self.imag_part).min() >= -tol)

    @property
    def scalar(self) -> complex:
        """a = tr / 2m"""
        return complex(np.trace(self.entries) / self.entries.shape[0])


def hermitize(X: np.ndarray) -> np.ndarray:
    """H = [[0, X], [X*, 0]]"""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise SpecError(f"Hermitization needs a square matrix, got shape {X.shape}")
    zeros = np.zeros_like(X)
    return np.block([[zeros, X], [X.conj().T, zeros]])


def _shifted(H: np.ndarray, q: QPoint) -> Tuple[np.ndarray, int]:
    H = np.asarray(H)
    size = 2 * int(q.m)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % size:
        raise SpecError(f"H has shape {H.shape}, expected 2mN x 2mN with m={q.m}")
    N = H.shape[0] // size
    return H - np.kron(q.matrix(), np.eye(N)), N


def resolvent(H: np.ndarray, q: QPoint) -> np.ndarray:
    """完整的 R_N = (H - q ⊗ I_N)^{-1}，只用于小 N 的校验"""
    K, _ = _shifted(H, q)
    try:
        lu = scipy.linalg.lu_factor(K, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericalError(f"Resolvent factorization failed: {e}") from e
    return scipy.linalg.lu_solve(lu, np.eye(K.shape[0], dtype=np.complex128), check_finite=False)


def gamma_N(H: np.ndarray, q: QPoint, method: str = 'lu') -> Tuple[MatrixStieltjes, complex]:
    """
    偏迹 Stieltjes 变换 Gamma_N^{ab} = tr R_N^{ab} / N 以及 a_N = tr Gamma_N / 2m

    Args:
        H: 2mN x 2mN Hermitization
        q: 谱参数
        method: 'lu' 做一次 LU 分解后逐块回代；'inverse' 显式求逆（仅 N <= 64）

    Returns:
        (Gamma_N, a_N)
    """
    K, N = _shifted(H, q)
    blocks = 2 * int(q.m)
    gamma = np.zeros((blocks, blocks), dtype=np.complex128)

    if method == 'inverse':
        if N > EIGEN_DEFAULTS['reference_max_n']:
            raise SpecError(f"Explicit inverse is limited to N <= {EIGEN_DEFAULTS['reference_max_n']}, got N={N}")
        R = np.linalg.inv(K)
        for a in range(blocks):
            for b in range(blocks):
                gamma[a, b] = np.trace(R[a * N:(a + 1) * N, b * N:(b + 1) * N]) / N
    elif method == 'lu':
        try:
            lu = scipy.linalg.lu_factor(K, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            logger.error(f"LU factorization of H - q⊗I failed (N={N}): {str(e)}")
            raise NumericalError(f"Resolvent factorization failed: {e}") from e
        eye = np.eye(K.shape[0], dtype=np.complex128)
        for b in range(blocks):
            columns = scipy.linalg.lu_solve(lu, eye[:, b * N:(b + 1) * N], check_finite=False)
            for a in range(blocks):
                gamma[a, b] = np.trace(columns[a * N:(a + 1) * N, :]) / N
    else:
        raise SpecError(f"Unknown resolvent method '{method}'")

    if not np.all(np.isfinite(gamma)):
        raise NumericalError(f"Gamma_N is not finite at eta={q.eta}, z={q.z}")
    result = MatrixStieltjes(gamma)
    return result, result.scalar
