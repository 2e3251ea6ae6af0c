from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate

from src.config.defaults import DYSON_DEFAULTS, EXPORT_DEFAULTS
from src.spectral.resolvent import MatrixStieltjes, QPoint
from src.utils.errors import ConvergenceError, ExportError, NumericalError, SpecError
from src.utils.logger import setup_logger
from .sigma import SigmaSpec, sigma_op

logger = setup_logger('dyson')

ComplexLike = Union[complex, np.ndarray]


def _cubic(a: np.ndarray, eta: np.ndarray, z_sq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """p(a) = a^3 + 2 eta a^2 + (1 + eta^2 - |z|^2) a + eta 及其导数"""
    linear = 1.0 + eta * eta - z_sq
    value = ((a + 2.0 * eta) * a + linear) * a + eta
    slope = (3.0 * a + 4.0 * eta) * a + linear
    return value, slope


def _cubic_roots(eta: np.ndarray, z_sq: np.ndarray) -> np.ndarray:
    """批量求三次方程的三个根（伴随矩阵特征值），返回形状 (..., 3)"""
    companion = np.zeros(eta.shape + (3, 3), dtype=np.complex128)
    companion[..., 0, 0] = -2.0 * eta
    companion[..., 0, 1] = -(1.0 + eta * eta - z_sq)
    companion[..., 0, 2] = -eta
    companion[..., 1, 0] = 1.0
    companion[..., 2, 1] = 1.0
    return np.linalg.eigvals(companion)


def scalar_a(z: ComplexLike, eta: ComplexLike, steps: Optional[int] = None,
             scale: Optional[float] = None) -> ComplexLike:
    """
    标量 Stieltjes 变换 a(q)：a = (a + eta) / (|z|^2 - (a + eta)^2) 中 Im(a) > 0 的根

    从 eta0 = scale * i * (1 + |z|) 处 a ≈ -1/eta0 的分支出发，沿几何路径连续跟踪到目标 eta，
    每一步取离上一步最近且虚部为正的根，最后做 Newton 修正。支持数组广播。

    Args:
        z: 复数或数组
        eta: 上半平面中的复数或数组
        steps: 同伦步数
        scale: 起点 eta0 的尺度

    Returns:
        与广播后输入同形状的 a
    """
    steps = DYSON_DEFAULTS['homotopy_steps'] if steps is None else int(steps)
    scale = DYSON_DEFAULTS['homotopy_scale'] if scale is None else float(scale)
    scalar_input = np.ndim(z) == 0 and np.ndim(eta) == 0
    z_arr, eta_arr = np.broadcast_arrays(np.asarray(z, dtype=np.complex128), np.asarray(eta, dtype=np.complex128))
    if np.any(eta_arr.imag <= 0):
        raise SpecError("scalar_a requires Im(eta) > 0")

    z_sq = np.abs(z_arr) ** 2
    start_im = scale * (1.0 + np.abs(z_arr))
    # 实部线性、虚部几何地从起点移到目标
    current = np.asarray(-1.0 / (1j * start_im), dtype=np.complex128)
    for k in range(steps + 1):
        t = k / steps
        eta_k = eta_arr.real * t + 1j * start_im ** (1.0 - t) * eta_arr.imag ** t
        roots = _cubic_roots(eta_k, z_sq)
        distance = np.abs(roots - current[..., None])
        upper = np.where(roots.imag > 0, distance, np.inf)
        # 没有虚部为正的根时退回到最近的根，后面统一检查
        choose = np.where(np.isfinite(upper).any(axis=-1), upper.argmin(axis=-1), distance.argmin(axis=-1))
        current = np.take_along_axis(roots, choose[..., None], axis=-1)[..., 0]

    for _ in range(3):
        value, slope = _cubic(current, eta_arr, z_sq)
        safe = np.abs(slope) > 0
        proposal = np.where(safe, current - value / np.where(safe, slope, 1.0), current)
        better = np.abs(_cubic(proposal, eta_arr, z_sq)[0]) < np.abs(value)
        current = np.where(better, proposal, current)

    if np.any(current.imag < 0):
        bad = int(np.sum(current.imag < 0))
        logger.error(f"Branch tracking lost Im(a) > 0 at {bad} points")
        raise NumericalError(f"Branch tracking lost Im(a) > 0 at {bad} points")
    return complex(current) if scalar_input else current


def gamma_closed(q: QPoint) -> MatrixStieltjes:
    """
    不动点方程的显式解：对角为 a(q)，(k, k+m) 处为 z / ((a+eta)^2 - |z|^2)，(k+m, k) 处为其共轭版本
    """
    m = int(q.m)
    if m < 2:
        raise SpecError(f"gamma_closed needs m >= 2, got m={m}")
    a = scalar_a(q.z, q.eta)
    denom = (a + q.eta) ** 2 - abs(q.z) ** 2
    gamma = a * np.eye(2 * m, dtype=np.complex128)
    idx = np.arange(m)
    gamma[idx, idx + m] = q.z / denom
    gamma[idx + m, idx] = np.conj(q.z) / denom
    return MatrixStieltjes(gamma)


def _inverse(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"q + Sigma(Gamma) is singular: {str(e)}")


def fixed_point_residual(gamma: np.ndarray, q: QPoint, spec: SigmaSpec) -> float:
    """||Gamma + (q + Sigma(Gamma))^{-1}||_max"""
    target = _inverse(q.matrix() + sigma_op(gamma, spec))
    return float(np.max(np.abs(gamma + target)))


def solve_fixed_point(q: QPoint, spec: SigmaSpec, omega: Optional[float] = None, tol: Optional[float] = None,
                      max_iter: Optional[int] = None) -> Tuple[MatrixStieltjes, Dict[str, Any]]:
    """
    阻尼迭代求解 Gamma = -(q + Sigma(Gamma))^{-1}

    从 Gamma_0 = -q^{-1} 出发，Gamma_{k+1} = (1-omega) Gamma_k + omega * (-(q + Sigma(Gamma_k))^{-1})。
    若新迭代的虚部失去半正定性则拒绝该步并把 omega 减半。
    步长、残差和按压缩率外推的剩余误差都小于 tol 时返回。

    Returns:
        (Gamma, 报告 {residual, iterations, damping_final})
    """
    if q.m != spec.m:
        raise SpecError(f"QPoint has m={q.m} but SigmaSpec has m={spec.m}")
    omega = DYSON_DEFAULTS['omega'] if omega is None else float(omega)
    tol = DYSON_DEFAULTS['tol'] if tol is None else float(tol)
    max_iter = DYSON_DEFAULTS['max_iter'] if max_iter is None else int(max_iter)
    if not 0 < omega <= 1:
        raise SpecError(f"Damping omega must lie in (0, 1], got {omega}")
    if max_iter < 1:
        raise SpecError(f"max_iter must be >= 1, got {max_iter}")

    Q = q.matrix()
    gamma = -q.inverse()
    residual = np.inf
    previous_step = np.inf
    iteration = 0
    for iteration in range(1, max_iter + 1):
        target = -_inverse(Q + sigma_op(gamma, spec))
        candidate = (1.0 - omega) * gamma + omega * target
        if not MatrixStieltjes(candidate).is_positive(tol=1e-12):
            omega /= 2.0
            previous_step = np.inf
            logger.warning(f"Iterate {iteration} lost positive imaginary part, damping halved to {omega:.3g}")
            if omega < 1e-12:
                break
            continue
        step = float(np.max(np.abs(candidate - gamma)))
        gamma = candidate
        residual = fixed_point_residual(gamma, q, spec)
        # 压缩率估计 r，剩余误差约为 step * r / (1 - r)
        rate = min(step / previous_step, 0.999) if previous_step > 0 else 0.0
        previous_step = step
        if step < tol and residual < tol and step * rate / (1.0 - rate) < tol:
            report = {'residual': residual, 'iterations': iteration, 'damping_final': omega}
            logger.debug(f"Fixed point converged: {report}")
            return MatrixStieltjes(gamma), report

    diagnostics = {'residual': float(residual), 'iterations': iteration, 'damping_final': omega}
    logger.error(f"Fixed-point solver did not converge at eta={q.eta}, z={q.z}: {diagnostics}")
    raise ConvergenceError(f"Fixed-point solver did not converge after {max_iter} iterations "
                           f"(last residual {residual:.3e})", diagnostics)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """nu_z 在网格上的密度 rho_z(x)"""
    grid: np.ndarray
    values: np.ndarray
    z: complex
    eps: float

    def __post_init__(self):
        if self.grid.shape != self.values.shape:
            raise SpecError("Density grid and values must have the same shape")

    @property
    def mass(self) -> float:
        return float(integrate.trapezoid(self.values, self.grid))

    def cdf(self) -> np.ndarray:
        """网格上的累积分布 F_z，裁剪到 [0, 1]"""
        cumulative = integrate.cumulative_trapezoid(self.values, self.grid, initial=0.0)
        # 网格外的尾部质量按对称性各占一半
        tail = max(0.0, 1.0 - cumulative[-1]) / 2.0
        return np.clip(cumulative + tail, 0.0, 1.0)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        df = pd.DataFrame({'x': self.grid, 'rho': self.values})
        try:
            df.to_csv(path, index=False, float_format=EXPORT_DEFAULTS['float_format'], lineterminator='\n')
        except OSError as e:
            logger.error(f"Error writing density curve {path}: {str(e)}")
            raise ExportError(f"Cannot write {path}: {e}") from e
        return path


def support_radius(z: complex) -> float:
    """nu_z 支撑的启发式半径 beta = 2 + 2|z|"""
    return 2.0 + 2.0 * abs(complex(z))


def invert_stieltjes(z: complex, grid: Optional[np.ndarray] = None, eps: Optional[float] = None,
                     points: Optional[int] = None) -> DensityCurve:
    """
    rho_z(x) ≈ Im a(x + i eps) / pi

    Args:
        z: 平移参数
        grid: 横坐标，默认 [-beta, beta] 上的等距网格
        eps: 平滑参数，偏差为 O(eps)
        points: 默认网格点数
    """
    eps = DYSON_DEFAULTS['eps'] if eps is None else float(eps)
    if eps <= 0:
        raise SpecError(f"Smoothing eps must be positive, got {eps}")
    if grid is None:
        beta = support_radius(z)
        points = DYSON_DEFAULTS['grid_points'] if points is None else int(points)
        grid = np.linspace(-beta, beta, points)
    grid = np.asarray(grid, dtype=np.float64)
    a = scalar_a(complex(z), grid + 1j * eps)
    values = np.maximum(np.asarray(a).imag / np.pi, 0.0)
    return DensityCurve(grid=grid, values=values, z=complex(z), eps=eps)


def nu_z_cdf(z: complex, x: ComplexLike, eps: Optional[float] = None) -> np.ndarray:
    """
    极限测度 nu_z 的分布函数 F_z(x)，由密度曲线累积后插值
    """
    curve = invert_stieltjes(z, eps=eps)
    x = np.asarray(x, dtype=np.float64)
    return np.interp(x, curve.grid, curve.cdf(), left=0.0, right=1.0)
