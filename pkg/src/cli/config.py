import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.atoms import make_atom_pair_spec
from src.ensembles import PerturbationKind, PerturbationSpec, ProductSpec
from src.spectral import QPoint
from src.utils.errors import ExportError, SpecError
from src.utils.helpers import parse_complex, parse_float_list, parse_int_list


class RunConfig(BaseModel):
    """一次命令行运行的完整配置，计算前全部校验完毕，未知键直接拒绝"""
    model_config = ConfigDict(extra='forbid')

    command: Literal['generate', 'spectrum', 'verify', 'dyson', 'density', 'lsv', 'plot']
    experiment: Optional[Literal['product-law', 'circular-law', 'elliptic-law', 'concentration', 'gap',
                                 'lln', 'truncation', 'rate', 'sigma']] = None
    action: Optional[Literal['solve']] = None

    ensemble: Literal['elliptic', 'product', 'linearization'] = 'elliptic'
    m: int = 1
    n: int = 256
    n_list: Optional[List[int]] = None
    rho: List[float] = [0.0]
    atoms: List[str] = ['gaussian']
    tau: float = 1.0
    wigner: bool = False
    mu: float = 0.0
    truncated: bool = False
    delta: Optional[float] = None
    seed: int = 0

    trials: Optional[int] = None
    reps: int = 50
    samples: int = 1000
    z: str = '0'
    eta: str = '1i'
    eps: Optional[float] = None
    exponent: Optional[float] = None
    omega: Optional[float] = None

    input: Optional[str] = None
    singular: bool = False
    method: Literal['lapack', 'reference'] = 'lapack'
    spectrum: Optional[str] = None
    out: Optional[str] = None
    report: Optional[str] = None
    format: Literal['csv', 'binary', 'json'] = 'csv'
    threads: int = 1

    @field_validator('rho', mode='before')
    @classmethod
    def _parse_rho(cls, value: Any) -> List[float]:
        if isinstance(value, (int, float)):
            return [float(value)]
        return parse_float_list(value)

    @field_validator('atoms', mode='before')
    @classmethod
    def _parse_atoms(cls, value: Any) -> List[str]:
        if isinstance(value, str):
            return [item.strip() for item in value.split(',') if item.strip()]
        return list(value)

    @field_validator('n_list', mode='before')
    @classmethod
    def _parse_n_list(cls, value: Any) -> Optional[List[int]]:
        return None if value is None else parse_int_list(value)

    @field_validator('z', 'eta', mode='before')
    @classmethod
    def _parse_complex(cls, value: Any) -> str:
        parse_complex(value)
        return str(value)

    @field_validator('m', 'n', 'reps', 'samples', 'threads')
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator('seed')
    @classmethod
    def _seed_range(cls, value: int) -> int:
        if not 0 <= value < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {value}")
        return value

    @property
    def z_value(self) -> complex:
        return parse_complex(self.z)

    @property
    def eta_value(self) -> complex:
        return parse_complex(self.eta)

    def _broadcast(self, values: List[Any], name: str) -> List[Any]:
        if len(values) == 1:
            return values * self.m
        if len(values) != self.m:
            raise SpecError(f"--{name} has {len(values)} entries but m={self.m}")
        return values

    def product_spec(self) -> ProductSpec:
        """由配置构造乘积配方；原子变量假设在这里校验"""
        rhos = self._broadcast(self.rho, 'rho')
        families = self._broadcast(self.atoms, 'atoms')
        atoms = [
            make_atom_pair_spec(family, rho, {'tau': self.tau, 'wigner': self.wigner})
            for family, rho in zip(families, rhos)
        ]
        kind = PerturbationKind.CONSTANT if self.mu != 0 else PerturbationKind.ZERO
        perturbations = [PerturbationSpec(kind=kind, mu=self.mu) for _ in atoms]
        return ProductSpec.from_atoms(self.n, atoms, self.seed, perturbations, self.truncated, self.delta)

    def q_point(self) -> QPoint:
        return QPoint(eta=self.eta_value, z=self.z_value, m=self.m)


def load_config(flags: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """
    合并 JSON 配置文件与命令行参数（命令行优先），再做校验

    线程数未显式给出时回退到环境变量 ESPECTRA_THREADS。
    """
    merged: Dict[str, Any] = {}
    if config_path:
        try:
            payload = json.loads(Path(config_path).read_text(encoding='utf-8'))
        except OSError as e:
            raise ExportError(f"Cannot read config {config_path}: {e}") from e
        except json.JSONDecodeError as e:
            raise SpecError(f"Config {config_path} is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise SpecError(f"Config {config_path} must hold a JSON object")
        merged.update(payload)
    merged.update({key: value for key, value in flags.items() if value is not None})
    if 'threads' not in merged and os.getenv('ESPECTRA_THREADS'):
        merged['threads'] = os.getenv('ESPECTRA_THREADS')
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise SpecError(f"Invalid configuration: {e}") from e
