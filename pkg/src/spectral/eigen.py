from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from src.config.defaults import EIGEN_DEFAULTS, EXPORT_DEFAULTS
from src.utils.errors import ExportError, NumericalError, SpecError
from src.utils.logger import setup_logger
from .reference_qr import hessenberg_qr_eigenvalues

logger = setup_logger('spectral')


class SpectralKind(Enum):
    EIGENVALUES = "eigenvalues"
    SYMMETRIZED_SINGULAR = "symmetrized-singular"


@dataclass(frozen=True, eq=False)
class SpectralSample:
    """
    特征值或对称化奇异值的多重集合，附带溯源信息

    特征值样本有 N 个点；对称化奇异值样本有 2N 个实数点且关于 0 对称。
    """
    values: np.ndarray
    kind: SpectralKind
    N: int
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        count = self.values.shape[0]
        if self.kind is SpectralKind.EIGENVALUES and count != self.N:
            raise SpecError(f"Eigenvalue sample must have N={self.N} values, got {count}")
        if self.kind is SpectralKind.SYMMETRIZED_SINGULAR:
            if count != 2 * self.N:
                raise SpecError(f"Symmetrized singular sample must have 2N={2 * self.N} values, got {count}")
            if np.iscomplexobj(self.values) and np.any(self.values.imag != 0):
                raise SpecError("Singular values must be real")

    @property
    def singular(self) -> np.ndarray:
        """非负奇异值，降序"""
        if self.kind is not SpectralKind.SYMMETRIZED_SINGULAR:
            raise SpecError("Sample does not hold singular values")
        return np.sort(self.values[self.values >= 0])[::-1][:self.N]

    def to_csv(self, path: Union[str, Path]) -> Path:
        """特征值写 "re,im" 两列，奇异值写 "sigma" 一列"""
        if self.kind is SpectralKind.EIGENVALUES:
            values = np.asarray(self.values, dtype=np.complex128)
            df = pd.DataFrame({'re': values.real, 'im': values.imag})
        else:
            df = pd.DataFrame({'sigma': self.singular})
        path = Path(path)
        try:
            df.to_csv(path, index=False, float_format=EXPORT_DEFAULTS['float_format'], lineterminator='\n')
        except OSError as e:
            logger.error(f"Error writing spectrum {path}: {str(e)}")
            raise ExportError(f"Cannot write {path}: {e}") from e
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'SpectralSample':
        try:
            df = pd.read_csv(path, float_precision='round_trip')
        except OSError as e:
            raise ExportError(f"Cannot read {path}: {e}") from e
        if 'sigma' in df.columns:
            sigma = df['sigma'].to_numpy(dtype=np.float64)
            return cls(np.concatenate([sigma, -sigma]), SpectralKind.SYMMETRIZED_SINGULAR, len(sigma),
                       {'source': str(path)})
        values = df['re'].to_numpy(dtype=np.float64) + 1j * df['im'].to_numpy(dtype=np.float64)
        return cls(values, SpectralKind.EIGENVALUES, len(values), {'source': str(path)})


def _check_square(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise SpecError(f"Expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise SpecError("Matrix has non-finite entries")
    return matrix


def eigenvalues(matrix: np.ndarray, provenance: Optional[Dict[str, Any]] = None,
                method: str = 'lapack') -> SpectralSample:
    """
    稠密一般矩阵的全部特征值（含重数）

    Args:
        matrix: N x N 方阵
        provenance: 溯源信息（spec hash、seed）
        method: 'lapack' 调用 scipy，'reference' 使用自带的 Hessenberg-QR

    Returns:
        SpectralSample
    """
    matrix = _check_square(matrix)
    if method == 'reference':
        values = hessenberg_qr_eigenvalues(matrix)
    elif method == 'lapack':
        try:
            values = scipy.linalg.eigvals(matrix, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            logger.error(f"Eigensolver failed on {matrix.shape[0]}x{matrix.shape[0]} matrix: {str(e)}")
            raise NumericalError(f"Eigensolver did not converge: {e}") from e
    else:
        raise SpecError(f"Unknown eigensolver method '{method}'")
    return SpectralSample(np.asarray(values, dtype=np.complex128), SpectralKind.EIGENVALUES,
                          matrix.shape[0], dict(provenance or {}))


def singular_values(matrix: np.ndarray, provenance: Optional[Dict[str, Any]] = None) -> SpectralSample:
    """对称化奇异值测度 nu_M 的 2N 个原子 ±sigma_i"""
    matrix = _check_square(matrix)
    try:
        sigma = scipy.linalg.svdvals(matrix, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        logger.error(f"SVD failed on {matrix.shape[0]}x{matrix.shape[0]} matrix: {str(e)}")
        raise NumericalError(f"SVD did not converge: {e}") from e
    sigma = np.sort(np.abs(sigma))[::-1]
    return SpectralSample(np.concatenate([sigma, -sigma]), SpectralKind.SYMMETRIZED_SINGULAR,
                          matrix.shape[0], dict(provenance or {}))


def nu_measure(matrix: np.ndarray, z: complex, provenance: Optional[Dict[str, Any]] = None) -> SpectralSample:
    """nu_{M - zI}，也是平移 Hermitization 的经验谱分布 F_z"""
    matrix = _check_square(matrix)
    shifted = matrix - complex(z) * np.eye(matrix.shape[0])
    info = dict(provenance or {})
    info['z'] = str(complex(z))
    return singular_values(shifted, info)


def match_spectra(a: np.ndarray, b: np.ndarray) -> float:
    """
    两个复数多重集合的最优匹配距离（最大配对误差）

    用指派问题代替按 (Re, Im) 排序，避免共轭对实部并列时排序错位。
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise SpecError(f"Spectra have different sizes {a.shape[0]} and {b.shape[0]}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if a.size else 0.0


def spectra_agree(a: np.ndarray, b: np.ndarray, rel_tol: Optional[float] = None) -> bool:
    """容差为 rel_tol * max(1, 谱半径)"""
    rel_tol = EIGEN_DEFAULTS['spectrum_rel_tol'] if rel_tol is None else rel_tol
    radius = max(1.0, float(np.max(np.abs(a))) if np.size(a) else 0.0)
    return match_spectra(a, b) <= rel_tol * radius
