from typing import Any, Dict

# 截断引理：默认 delta，要求 delta * tau < 1
TRUNCATION_DEFAULTS: Dict[str, Any] = {
    'delta': 0.1,
    'min_scale_sq': 0.5,
    'bound_factor': 4.0,
}

# 不动点求解与 Stieltjes 反演
DYSON_DEFAULTS: Dict[str, Any] = {
    'omega': 0.5,
    'tol': 1e-12,
    'max_iter': 10_000,
    'homotopy_steps': 50,
    'homotopy_scale': 10.0,
    'eps': 1e-4,
    'grid_points': 4001,
}

# 实验判定阈值（在给定 N / trials 下标定的验收设置）
EXPERIMENT_THRESHOLDS: Dict[str, Any] = {
    'radial_ks': 0.05,
    'perturbed_radial_ks': 0.06,
    'angular_quantile': 0.999,
    'angular_bins': 16,
    'ellipse_inside': 0.98,
    'ellipse_dilation': 1.05,
    'moment_tol': 0.03,
    'std_ratio': 0.7,
    'lsv_exponent': 10.0,
    'sigma_z_score': 5.0,
    'lln_tol': 0.1,
    'lln_difference_factor': 2.0,
}

EXPORT_DEFAULTS: Dict[str, Any] = {
    'binary_magic': b'ESPM',
    'float_format': '%.17g',
}

EIGEN_DEFAULTS: Dict[str, Any] = {
    'qr_max_iter': 10_000,
    'reference_max_n': 64,
    'spectrum_rel_tol': 1e-8,
}
