from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from src.config.defaults import EXPORT_DEFAULTS
from src.utils.errors import ExportError
from src.utils.logger import setup_logger

logger = setup_logger('export')

PathLike = Union[str, Path]
_HEADER_DTYPE = np.dtype('<u8')
_DATA_DTYPE = np.dtype('<f8')


def write_matrix_csv(matrix: np.ndarray, path: PathLike) -> Path:
    """
    按 "i,j,value" 格式（从 0 开始的下标）保存矩阵

    Args:
        matrix: 实矩阵
        path: 输出文件

    Returns:
        写入的路径
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    rows, cols = np.indices(matrix.shape)
    df = pd.DataFrame({'i': rows.ravel(), 'j': cols.ravel(), 'value': matrix.ravel()})
    path = Path(path)
    try:
        df.to_csv(path, index=False, float_format=EXPORT_DEFAULTS['float_format'], lineterminator='\n')
    except OSError as e:
        logger.error(f"Error writing matrix CSV {path}: {str(e)}")
        raise ExportError(f"Cannot write {path}: {e}") from e
    logger.info(f"Matrix {matrix.shape[0]}x{matrix.shape[1]} saved to {path}")
    return path


def read_matrix_csv(path: PathLike) -> np.ndarray:
    try:
        df = pd.read_csv(path, float_precision='round_trip')
    except OSError as e:
        raise ExportError(f"Cannot read {path}: {e}") from e
    except (ValueError, pd.errors.ParserError) as e:
        raise ExportError(f"{path} is not a matrix CSV: {e}") from e
    missing = {'i', 'j', 'value'} - set(df.columns)
    if missing:
        raise ExportError(f"{path} is missing columns {sorted(missing)}, expected i,j,value")
    if df.empty:
        raise ExportError(f"{path} has no entries")
    rows = int(df['i'].max()) + 1
    cols = int(df['j'].max()) + 1
    matrix = np.zeros((rows, cols))
    matrix[df['i'].to_numpy(), df['j'].to_numpy()] = df['value'].to_numpy(dtype=np.float64)
    return matrix


def write_matrix_binary(matrix: np.ndarray, path: PathLike) -> Path:
    """小端二进制：magic "ESPM"、u64 行数、u64 列数、按行存储的 f64 数据"""
    matrix = np.ascontiguousarray(matrix, dtype=_DATA_DTYPE)
    header = np.array(matrix.shape, dtype=_HEADER_DTYPE).tobytes()
    path = Path(path)
    try:
        with open(path, 'wb') as handle:
            handle.write(EXPORT_DEFAULTS['binary_magic'])
            handle.write(header)
            handle.write(matrix.tobytes(order='C'))
    except OSError as e:
        logger.error(f"Error writing matrix binary {path}: {str(e)}")
        raise ExportError(f"Cannot write {path}: {e}") from e
    logger.info(f"Matrix {matrix.shape[0]}x{matrix.shape[1]} saved to {path}")
    return path


def read_matrix_binary(path: PathLike) -> np.ndarray:
    magic = EXPORT_DEFAULTS['binary_magic']
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise ExportError(f"Cannot read {path}: {e}") from e
    if payload[:len(magic)] != magic:
        raise ExportError(f"{path} is not an ESPM matrix file")
    offset = len(magic)
    if len(payload) < offset + 16:
        raise ExportError(f"{path} is truncated: missing the ESPM header")
    rows, cols = np.frombuffer(payload, dtype=_HEADER_DTYPE, count=2, offset=offset)
    # 头部给出的尺寸必须与数据长度一致
    expected = offset + 16 + int(rows) * int(cols) * _DATA_DTYPE.itemsize
    if len(payload) != expected:
        raise ExportError(f"{path} holds {len(payload)} bytes, header {int(rows)}x{int(cols)} needs {expected}")
    data = np.frombuffer(payload, dtype=_DATA_DTYPE, count=int(rows) * int(cols), offset=offset + 16)
    return data.reshape(int(rows), int(cols)).astype(np.float64)
