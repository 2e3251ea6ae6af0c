"""异常类型，CLI 根据类型映射退出码"""
from typing import Any, Dict, Optional


class EspectraError(Exception):
    """基类"""
    exit_code = 1


class SpecError(EspectraError, ValueError):
    """参数或配置不合法"""
    exit_code = 2


class AssumptionViolation(SpecError):
    """违反原子变量假设（|rho| < 1、delta*tau < 1、低秩扰动条件等）"""


class TruncationError(SpecError):
    """截断后方差过小：N 小于截断引理要求的 N0"""


class ExportError(EspectraError, OSError):
    """文件读写失败"""
    exit_code = 3


class NumericalError(EspectraError, RuntimeError):
    """特征值求解器或不动点迭代失败"""
    exit_code = 4


class ConvergenceError(NumericalError):
    """迭代达到上限仍未收敛"""
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
