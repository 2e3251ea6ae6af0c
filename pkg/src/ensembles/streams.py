import numpy as np

_UINT64_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, *keys: int) -> int:
    """
    由主种子和索引派生独立的 64 位子种子

    子流只依赖 (master_seed, keys)，与填充顺序和线程数无关。
    """
    sequence = np.random.SeedSequence(int(master_seed) & _UINT64_MASK, spawn_key=tuple(int(k) for k in keys))
    low, high = sequence.generate_state(2, dtype=np.uint32)
    return (int(high) << 32) | int(low)


def row_generator(seed: int, row: int) -> np.random.Generator:
    """第 row 行的随机数发生器"""
    return np.random.default_rng(np.random.SeedSequence(int(seed) & _UINT64_MASK, spawn_key=(int(row),)))
