import hashlib
import json
from typing import Any, List

from src.utils.errors import SpecError


def parse_complex(text: Any) -> complex:
    """解析命令行复数，格式 "a+bi"、"0.2i"、"-1.5"、"i" """
    if isinstance(text, (int, float, complex)):
        return complex(text)
    cleaned = str(text).strip().replace(' ', '').replace('i', 'j')
    # "j"、"+j"、"0.3-j" 这类省略系数的写法
    if cleaned.endswith('j') and (len(cleaned) == 1 or cleaned[-2] in '+-'):
        cleaned = cleaned[:-1] + '1j'
    try:
        return complex(cleaned)
    except ValueError:
        raise SpecError(f"Cannot parse complex number '{text}' (expected form a+bi)")


def parse_float_list(text: Any) -> List[float]:
    """解析逗号分隔的实数列表，例如 "0.5,0.7" """
    if isinstance(text, (list, tuple)):
        return [float(item) for item in text]
    try:
        return [float(item) for item in str(text).split(',') if item.strip()]
    except ValueError:
        raise SpecError(f"Cannot parse number list '{text}'")


def parse_int_list(text: Any) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [int(item) for item in text]
    try:
        return [int(item) for item in str(text).split(',') if item.strip()]
    except ValueError:
        raise SpecError(f"Cannot parse integer list '{text}'")


def spec_hash(payload: Any) -> str:
    """规范化 JSON 的 sha256 前 16 位，用作溯源标识"""
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def format_complex(value: complex) -> str:
    sign = '+' if value.imag >= 0 else '-'
    return f"{value.real:.12g}{sign}{abs(value.imag):.12g}i"
