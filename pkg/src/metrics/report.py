import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.utils.errors import ExportError
from src.utils.logger import setup_logger

logger = setup_logger('report')


@dataclass
class ExperimentReport:
    """
    一次验证实验的结果

    per_N 中每一行为 {N, label, stat, threshold, pass}，threshold 为 None 的行只做记录。
    """
    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    per_N: List[Dict[str, Any]] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    wall_time_ms: float = 0.0

    def add(self, N: int, label: str, stat: float, threshold: Optional[float] = None, upper: bool = True):
        """记录一个统计量；upper=True 时要求 stat <= threshold，否则要求 stat >= threshold"""
        if threshold is None:
            passed = True
        else:
            passed = bool(stat <= threshold) if upper else bool(stat >= threshold)
        self.per_N.append({
            'N': int(N),
            'label': label,
            'stat': float(stat),
            'threshold': None if threshold is None else float(threshold),
            'pass': passed,
        })
        return passed

    def extend(self, other: 'ExperimentReport'):
        self.per_N.extend(other.per_N)
        self.seeds.extend(other.seeds)
        self.params.update({f"{other.name}.{key}": value for key, value in other.params.items()})
        self.wall_time_ms += other.wall_time_ms

    @property
    def passed(self) -> bool:
        return all(row['pass'] for row in self.per_N)

    def stat(self, label: str, N: Optional[int] = None) -> float:
        """按标签（和 N）取统计量，多行匹配时取最后一行"""
        rows = [row for row in self.per_N if row['label'] == label and (N is None or row['N'] == N)]
        if not rows:
            raise KeyError(f"No statistic '{label}' for N={N} in report {self.name}")
        return rows[-1]['stat']

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'params': self.params,
            'per_N': self.per_N,
            'seeds': [int(seed) for seed in self.seeds],
            'wall_time_ms': float(self.wall_time_ms),
        }

    def to_json(self, path: Optional[Union[str, Path]] = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, default=str)
        if path is not None:
            try:
                Path(path).write_text(text + '\n', encoding='utf-8')
            except OSError as e:
                logger.error(f"Error writing report {path}: {str(e)}")
                raise ExportError(f"Cannot write {path}: {e}") from e
        return text

    @classmethod
    def from_json(cls, text: str) -> 'ExperimentReport':
        payload = json.loads(text)
        return cls(
            name=payload['name'],
            params=payload.get('params', {}),
            per_N=payload.get('per_N', []),
            seeds=payload.get('seeds', []),
            wall_time_ms=payload.get('wall_time_ms', 0.0),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.per_N, columns=['N', 'label', 'stat', 'threshold', 'pass'])

    def print_report(self):
        """按固定宽度分节打印到日志"""
        separator = "═" * 60
        subseparator = "─" * 40

        logger.info(f"\n{separator}")
        logger.info(f"{'EXPERIMENT REPORT':^60}")
        logger.info(separator)

        logger.info("\nPARAMETERS")
        logger.info(subseparator)
        logger.info(f"{'Experiment:':<20} {self.name}")
        for key, value in self.params.items():
            logger.info(f"{key + ':':<20} {value}")
        logger.info(f"{'Seeds:':<20} {len(self.seeds)}")
        logger.info(f"{'Wall Time:':<20} {self.wall_time_ms / 1000:.2f} s")

        logger.info("\nSTATISTICS")
        logger.info(subseparator)
        for row in self.per_N:
            threshold = '-' if row['threshold'] is None else f"{row['threshold']:.4g}"
            verdict = 'PASS' if row['pass'] else 'FAIL'
            logger.info(f"{'N=' + str(row['N']):<8} {row['label']:<20} {row['stat']:>12.6g}  "
                        f"(threshold {threshold}) {verdict}")

        logger.info(f"\n{'Result:':<20} {'PASS' if self.passed else 'FAIL'}")
        logger.info(f"\n{separator}\n")
