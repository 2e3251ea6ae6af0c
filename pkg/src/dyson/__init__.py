from .sigma import a_prime, SigmaSpec, sigma_op, sigma_kernel
from .stieltjes import (
    scalar_a,
    gamma_closed,
    fixed_point_residual,
    solve_fixed_point,
    DensityCurve,
    support_radius,
    invert_stieltjes,
    nu_z_cdf,
)
from .laws import LawKind, LimitLaw, f_m_density, radial_cdf, elliptic_density, elliptic_contains, g_exact

__all__ = [
    'a_prime', 'SigmaSpec', 'sigma_op', 'sigma_kernel',
    'scalar_a', 'gamma_closed', 'fixed_point_residual', 'solve_fixed_point',
    'DensityCurve', 'support_radius', 'invert_stieltjes', 'nu_z_cdf',
    'LawKind', 'LimitLaw', 'f_m_density', 'radial_cdf', 'elliptic_density', 'elliptic_contains', 'g_exact',
]
