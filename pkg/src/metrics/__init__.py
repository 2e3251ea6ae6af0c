from .distances import EmpiricalCDF, ks_distance, levy_distance, rank_inequality_gap
from .report import ExperimentReport
from .experiments import (
    linearized_matrix,
    radial_ks,
    angular_chi2,
    angular_threshold,
    product_law_report,
    circular_law_report,
    elliptic_law_report,
    lsv_experiment,
    concentration_experiment,
    expectation_gap_experiment,
    sigma_kernel_monte_carlo,
    lln_experiment,
    truncation_constants_experiment,
    truncation_levy_experiment,
    nu_rate_experiment,
    g_empirical,
)

__all__ = [
    'EmpiricalCDF', 'ks_distance', 'levy_distance', 'rank_inequality_gap', 'ExperimentReport',
    'linearized_matrix', 'radial_ks', 'angular_chi2', 'angular_threshold',
    'product_law_report', 'circular_law_report', 'elliptic_law_report', 'lsv_experiment',
    'concentration_experiment', 'expectation_gap_experiment', 'sigma_kernel_monte_carlo',
    'lln_experiment', 'truncation_constants_experiment', 'truncation_levy_experiment',
    'nu_rate_experiment', 'g_empirical',
]
