from .builders import (
    EnsembleSpec,
    PerturbationKind,
    PerturbationSpec,
    ProductSpec,
    build_elliptic,
    build_truncated_pair,
    build_perturbation,
    sample_factors,
    build_block_linearization,
    build_product,
    cyclic_products,
)
from .streams import derive_seed, row_generator
from .export import write_matrix_csv, read_matrix_csv, write_matrix_binary, read_matrix_binary

__all__ = [
    'EnsembleSpec', 'PerturbationKind', 'PerturbationSpec', 'ProductSpec',
    'build_elliptic', 'build_truncated_pair', 'build_perturbation', 'sample_factors',
    'build_block_linearization', 'build_product', 'cyclic_products',
    'derive_seed', 'row_generator',
    'write_matrix_csv', 'read_matrix_csv', 'write_matrix_binary', 'read_matrix_binary',
]
