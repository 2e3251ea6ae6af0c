import os
import sys
from pathlib import Path

# 测试时不写日志文件
os.environ['ESPECTRA_LOG_DIR'] = ''

root_path = str(Path(__file__).parent.parent)
if root_path not in sys.path:
    sys.path.insert(0, root_path)

import numpy as np
import pytest

from src.atoms import make_atom_pair_spec
from src.ensembles import ProductSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian_half():
    return make_atom_pair_spec('gaussian', 0.5)


@pytest.fixture
def small_product(gaussian_half):
    """m=2, N=8 的高斯乘积"""
    return ProductSpec.from_atoms(8, [gaussian_half, make_atom_pair_spec('gaussian', 0.7)], seed=11)
