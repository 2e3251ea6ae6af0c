from .distributions import (
    AtomFamily,
    DiagFamily,
    AtomPairSpec,
    make_atom_pair_spec,
    sample_pair,
    sample_pairs,
    sample_diagonal,
    moment_surplus,
    empirical_moment_surplus,
)
from .truncation import (
    TruncationConstants,
    truncate_spec,
    apply_truncation,
    truncation_bounds,
    estimate_truncation_constants,
)

__all__ = [
    'AtomFamily', 'DiagFamily', 'AtomPairSpec', 'make_atom_pair_spec',
    'sample_pair', 'sample_pairs', 'sample_diagonal', 'moment_surplus',
    'empirical_moment_surplus', 'TruncationConstants', 'truncate_spec',
    'apply_truncation', 'truncation_bounds', 'estimate_truncation_constants',
]
