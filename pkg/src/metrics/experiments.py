import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import stats

from src.atoms import AtomPairSpec, estimate_truncation_constants, moment_surplus, truncation_bounds
from src.config.defaults import EXPERIMENT_THRESHOLDS, TRUNCATION_DEFAULTS
from src.dyson import SigmaSpec, elliptic_contains, gamma_closed, invert_stieltjes, radial_cdf, sigma_kernel
from src.ensembles import (
    PerturbationKind,
    ProductSpec,
    build_block_linearization,
    build_perturbation,
    build_product,
    build_truncated_pair,
    derive_seed,
    sample_factors,
)
from src.spectral import QPoint, eigenvalues, gamma_N, hermitize, nu_measure, singular_values
from src.utils.errors import NumericalError, SpecError
from src.utils.logger import setup_logger
from .distances import EmpiricalCDF, ks_distance, levy_distance
from .report import ExperimentReport

logger = setup_logger('experiments')


def _map_trials(fn: Callable[[int], object], seeds: Sequence[int], threads: int = 1) -> List[object]:
    """按种子顺序返回结果；线程数只影响耗时"""
    if threads <= 1 or len(seeds) <= 1:
        return [fn(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def _trial_seeds(prod: ProductSpec, N: int, trials: int) -> List[int]:
    base = prod.factors[0][0].seed
    return [derive_seed(base, int(N), t) for t in range(int(trials))]


def _is_perturbed(prod: ProductSpec) -> bool:
    for _, pert in prod.factors:
        if pert.kind is PerturbationKind.EXPLICIT:
            return True
        if pert.kind is PerturbationKind.CONSTANT and pert.mu != 0:
            return True
    return False


def _describe(prod: ProductSpec) -> List[str]:
    return [f"{ensemble.atom.family.value}(rho={ensemble.atom.rho})" for ensemble, _ in prod.factors]


def linearized_matrix(prod: ProductSpec) -> np.ndarray:
    """Z_N（m >= 2）或 (Y + A) / sqrt(N)（m = 1）"""
    if prod.m == 1:
        Y, A = sample_factors(prod)[0]
        return (Y + A) / np.sqrt(prod.N)
    return build_block_linearization(prod)[2]


def radial_ks(values: np.ndarray, m: int) -> float:
    """|lambda| 的经验分布与 r^{2/m} 的 KS 距离"""
    return ks_distance(EmpiricalCDF(np.abs(values)), lambda r: radial_cdf(r, m))


def angular_chi2(values: np.ndarray, bins: Optional[int] = None) -> float:
    """
    折叠角 |arg lambda| 在 [0, pi] 上的卡方均匀性统计量

    实矩阵的特征值成共轭对出现，每个特征值计 1/2，使每个共轭对只计一次，实特征值计半个。
    """
    bins = EXPERIMENT_THRESHOLDS['angular_bins'] if bins is None else int(bins)
    angles = np.abs(np.angle(np.asarray(values, dtype=np.complex128)))
    counts = 0.5 * np.histogram(angles, bins=bins, range=(0.0, np.pi))[0]
    expected = counts.sum() / bins
    return float(np.sum((counts - expected) ** 2 / expected))


def angular_threshold(bins: Optional[int] = None, quantile: Optional[float] = None) -> float:
    bins = EXPERIMENT_THRESHOLDS['angular_bins'] if bins is None else int(bins)
    quantile = EXPERIMENT_THRESHOLDS['angular_quantile'] if quantile is None else float(quantile)
    return float(stats.chi2.ppf(quantile, bins - 1))


def _law_report(name: str, prod: ProductSpec, trials: int, N_list: Optional[Sequence[int]], threads: int,
                build: Callable[[ProductSpec], np.ndarray], radial_m: int) -> ExperimentReport:
    N_list = [prod.N] if N_list is None else [int(N) for N in N_list]
    perturbed = _is_perturbed(prod)
    ks_threshold = EXPERIMENT_THRESHOLDS['perturbed_radial_ks' if perturbed else 'radial_ks']
    chi2_threshold = angular_threshold()
    logger.info(f"Starting {name} experiment m={prod.m} N={N_list} trials={trials}...")

    start = time.perf_counter()
    report = ExperimentReport(name, params={
        'm': prod.m,
        'N': N_list,
        'trials': int(trials),
        'factors': _describe(prod),
        'perturbed': perturbed,
        'spec_hash': prod.hash,
    })
    for N in N_list:
        seeds = _trial_seeds(prod, N, trials)

        def trial(seed: int) -> np.ndarray:
            return eigenvalues(build(prod.with_N(N, seed))).values

        pooled = np.concatenate(_map_trials(trial, seeds, threads))
        report.seeds.extend(seeds)
        report.add(N, 'radial_ks', radial_ks(pooled, radial_m), ks_threshold)
        report.add(N, 'angular_chi2', angular_chi2(pooled), chi2_threshold)
        logger.info(f"N={N}: pooled {pooled.size} eigenvalues, radial KS={report.stat('radial_ks', N):.4f}")

    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def product_law_report(prod: ProductSpec, trials: int = 20, N_list: Optional[Sequence[int]] = None,
                       threads: int = 1) -> ExperimentReport:
    """
    P_N 的特征值与 F_m 比较：径向 KS（对 r^{2/m}）和角度卡方

    Args:
        prod: 乘积配方（m >= 2）
        trials: 每个 N 的独立试验次数，特征值合并统计
        N_list: 维数列表，默认为 prod.N
        threads: 并行线程数
    """
    if prod.m < 2:
        raise SpecError(f"Product law needs m >= 2 factors, got m={prod.m}")
    return _law_report('product-law', prod, trials, N_list, threads, build_product, prod.m)


def circular_law_report(prod: ProductSpec, trials: int = 10, N_list: Optional[Sequence[int]] = None,
                        threads: int = 1) -> ExperimentReport:
    """Z_N 的特征值与圆律比较（径向 CDF r^2，角度均匀）"""
    if prod.m < 2:
        raise SpecError(f"Circular law for the linearization needs m >= 2, got m={prod.m}")

    def build(spec: ProductSpec) -> np.ndarray:
        return build_block_linearization(spec)[2]

    return _law_report('circular-law', prod, trials, N_list, threads, build, 1)


def elliptic_law_report(prod: ProductSpec, trials: int = 5, N_list: Optional[Sequence[int]] = None,
                        threads: int = 1) -> ExperimentReport:
    """单个椭圆矩阵：落在放大椭圆内的比例以及 Re^2、Im^2 的均值"""
    if prod.m != 1:
        raise SpecError(f"Elliptic law report takes a single factor, got m={prod.m}")
    rho = prod.factors[0][0].atom.rho
    if abs(rho) >= 1:
        raise SpecError("Elliptic law needs |rho| < 1")
    N_list = [prod.N] if N_list is None else [int(N) for N in N_list]
    dilation = EXPERIMENT_THRESHOLDS['ellipse_dilation']
    moment_tol = EXPERIMENT_THRESHOLDS['moment_tol']
    logger.info(f"Starting elliptic-law experiment rho={rho} N={N_list} trials={trials}...")

    start = time.perf_counter()
    report = ExperimentReport('elliptic-law', params={
        'rho': rho,
        'N': N_list,
        'trials': int(trials),
        'factors': _describe(prod),
        'spec_hash': prod.hash,
    })
    for N in N_list:
        seeds = _trial_seeds(prod, N, trials)

        def trial(seed: int) -> np.ndarray:
            return eigenvalues(linearized_matrix(prod.with_N(N, seed))).values

        pooled = np.concatenate(_map_trials(trial, seeds, threads))
        report.seeds.extend(seeds)
        inside = float(np.mean(elliptic_contains(pooled, rho, slack=dilation)))
        report.add(N, 'inside_fraction', inside, EXPERIMENT_THRESHOLDS['ellipse_inside'], upper=False)
        report.add(N, 're2_error', abs(np.mean(pooled.real ** 2) - (1 + rho) ** 2 / 4), moment_tol)
        report.add(N, 'im2_error', abs(np.mean(pooled.imag ** 2) - (1 - rho) ** 2 / 4), moment_tol)

    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def lsv_experiment(prod: ProductSpec, z: complex = 0.0, A_exponent: Optional[float] = None, trials: int = 100,
                   threads: int = 1, sampler: Optional[Callable[[int], np.ndarray]] = None) -> ExperimentReport:
    """
    最小奇异值实验：sigma_min(Z_N - zI) <= N^{-A} 的试验比例

    sampler 给定时用 sampler(seed) 代替随机线性化矩阵（用于注入确定性矩阵）。
    """
    A_exponent = EXPERIMENT_THRESHOLDS['lsv_exponent'] if A_exponent is None else float(A_exponent)
    if trials < 1:
        raise SpecError(f"trials must be >= 1, got {trials}")
    N = prod.N
    bound = float(N) ** (-A_exponent)
    seeds = _trial_seeds(prod, N, trials)
    logger.info(f"Starting least-singular-value experiment N={N} z={z} A={A_exponent} trials={trials}...")

    def trial(seed: int) -> float:
        X = sampler(seed) if sampler is not None else linearized_matrix(prod.with_N(N, seed))
        shifted = X - complex(z) * np.eye(X.shape[0])
        return float(singular_values(shifted).singular[-1])

    start = time.perf_counter()
    sigmas = np.array(_map_trials(trial, seeds, threads))
    report = ExperimentReport('lsv', params={
        'm': prod.m,
        'N': N,
        'z': str(complex(z)),
        'A': A_exponent,
        'trials': int(trials),
        'injected': sampler is not None,
        'spec_hash': prod.hash,
    }, seeds=list(seeds))
    report.add(N, 'fraction_below', float(np.mean(sigmas <= bound)), 0.0)
    report.add(N, 'min_sigma', float(sigmas.min()), bound, upper=False)
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def _gamma_samples(prod: ProductSpec, q: QPoint, N: int, reps: int, threads: int,
                   hermitian_sampler: Optional[Callable[[int, int], np.ndarray]]):
    seeds = _trial_seeds(prod, N, reps)

    def trial(seed: int) -> np.ndarray:
        if hermitian_sampler is not None:
            H = hermitian_sampler(N, seed)
        else:
            H = hermitize(linearized_matrix(prod.with_N(N, seed)))
        return gamma_N(H, q)[0].entries

    return np.stack(_map_trials(trial, seeds, threads)), seeds


def _check_q(prod: ProductSpec, q: QPoint):
    if q.m != prod.m:
        raise SpecError(f"QPoint has m={q.m} but the product has m={prod.m}")
    if np.imag(q.eta) < 0.1:
        raise SpecError(f"Concentration experiments need Im(eta) >= 0.1, got eta={q.eta}")


def concentration_experiment(prod: ProductSpec, q: QPoint, N_list: Sequence[int], reps: int = 50,
                             threads: int = 1,
                             hermitian_sampler: Optional[Callable[[int, int], np.ndarray]] = None) -> ExperimentReport:
    """
    Gamma_N 的逐元素标准差随 N 的衰减

    每个 N 记录最大标准差；相邻 N 之间记录逐元素标准差比的最大值，阈值为 std_ratio。
    """
    _check_q(prod, q)
    logger.info(f"Starting concentration experiment N={list(N_list)} reps={reps} eta={q.eta} z={q.z}...")
    start = time.perf_counter()
    report = ExperimentReport('concentration', params={
        'm': prod.m, 'N': [int(N) for N in N_list], 'reps': int(reps),
        'eta': str(q.eta), 'z': str(q.z), 'spec_hash': prod.hash,
    })
    previous = None
    for N in N_list:
        samples, seeds = _gamma_samples(prod, q, int(N), reps, threads, hermitian_sampler)
        report.seeds.extend(seeds)
        ddof = 1 if samples.shape[0] > 1 else 0
        # 相对第一个样本取偏差，样本全部相同时方差严格为 0
        centered = samples - samples[0]
        std = np.sqrt(centered.real.var(axis=0, ddof=ddof) + centered.imag.var(axis=0, ddof=ddof))
        report.add(N, 'max_std', float(std.max()))
        if previous is not None:
            scale = previous.max()
            if scale == 0:
                ratio = 0.0
            else:
                mask = previous > 1e-12 * scale
                ratio = float(np.max(std[mask] / previous[mask]))
            report.add(N, 'std_ratio', ratio, EXPERIMENT_THRESHOLDS['std_ratio'])
        previous = std
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def expectation_gap_experiment(prod: ProductSpec, q: QPoint, N_list: Sequence[int], reps: int = 50,
                               threads: int = 1,
                               hermitian_sampler: Optional[Callable[[int, int], np.ndarray]] = None) -> ExperimentReport:
    """||mean(Gamma_N) - Gamma(q)||_max，要求随 N 不增"""
    _check_q(prod, q)
    limit = gamma_closed(q).entries
    logger.info(f"Starting expectation-gap experiment N={list(N_list)} reps={reps} eta={q.eta} z={q.z}...")
    start = time.perf_counter()
    report = ExperimentReport('gap', params={
        'm': prod.m, 'N': [int(N) for N in N_list], 'reps': int(reps),
        'eta': str(q.eta), 'z': str(q.z), 'spec_hash': prod.hash,
    })
    previous = None
    for N in N_list:
        samples, seeds = _gamma_samples(prod, q, int(N), reps, threads, hermitian_sampler)
        report.seeds.extend(seeds)
        gap = float(np.max(np.abs(samples.mean(axis=0) - limit)))
        report.add(N, 'gap', gap, previous)
        previous = gap
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def sigma_kernel_monte_carlo(prod: ProductSpec, samples: int = 1000, threads: int = 1) -> ExperimentReport:
    """
    用蒙特卡洛检验 N E[H_12^{ac} H_21^{db}] = sigma(a,c;d,b)

    H 为 Y_N / sqrt(N) 的 Hermitization（不含扰动）；统计量为所有指标组合上的最大 z 分数。
    """
    if prod.m < 2:
        raise SpecError(f"Sigma kernel needs m >= 2, got m={prod.m}")
    N = prod.N
    spec = SigmaSpec.from_rhos([ensemble.atom.rho for ensemble, _ in prod.factors])
    seeds = _trial_seeds(prod, N, samples)
    logger.info(f"Starting sigma-kernel Monte Carlo m={prod.m} N={N} samples={samples}...")

    def trial(seed: int) -> np.ndarray:
        Y_N = build_block_linearization(prod.with_N(N, seed))[0]
        H = hermitize(Y_N / np.sqrt(N))
        h12 = H[0::N, 1::N]
        h21 = H[1::N, 0::N]
        return N * np.einsum('ac,db->acdb', h12, h21)

    start = time.perf_counter()
    products = np.stack(_map_trials(trial, seeds, threads)).real
    mean = products.mean(axis=0)
    se = products.std(axis=0, ddof=1) / np.sqrt(products.shape[0])
    deviation = np.abs(mean - sigma_kernel(spec))
    with np.errstate(divide='ignore', invalid='ignore'):
        scores = np.where(se > 0, deviation / np.where(se > 0, se, 1.0), np.where(deviation > 1e-12, np.inf, 0.0))

    report = ExperimentReport('sigma-kernel', params={
        'm': prod.m, 'N': N, 'samples': int(samples), 'rhos': list(spec.rhos), 'spec_hash': prod.hash,
    }, seeds=list(seeds))
    report.add(N, 'max_z_score', float(scores.max()), EXPERIMENT_THRESHOLDS['sigma_z_score'])
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def _with_delta(prod: ProductSpec, delta: Optional[float]) -> ProductSpec:
    if delta is None:
        return prod
    factors = tuple((dataclasses.replace(ensemble, delta=float(delta)), pert) for ensemble, pert in prod.factors)
    return ProductSpec(factors=factors)


def lln_experiment(prod: ProductSpec, N_list: Sequence[int], delta: Optional[float] = None) -> ExperimentReport:
    """
    大数定律：(1/N^2)||Y||^2 -> 1，(1/N^2)||Y_hat||^2 -> 1，N^{delta tau} / N^2 ||Y - Y_hat||^2 有界

    多个因子时取各因子中最差的一个。
    """
    delta_value = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    logger.info(f"Starting law-of-large-numbers experiment N={list(N_list)} delta={delta_value}...")
    start = time.perf_counter()
    report = ExperimentReport('lln', params={
        'm': prod.m, 'N': [int(N) for N in N_list], 'delta': delta_value, 'spec_hash': prod.hash,
    })
    base = prod.factors[0][0].seed
    for N in N_list:
        N = int(N)
        spec_N = _with_delta(prod.with_N(N, derive_seed(base, N)), delta_value)
        norm_err, norm_hat_err, difference, bound = 0.0, 0.0, 0.0, np.inf
        for ensemble, _ in spec_N.factors:
            Y, Y_hat = build_truncated_pair(ensemble)
            report.seeds.append(ensemble.seed)
            norm_err = max(norm_err, abs(np.sum(Y ** 2) / N ** 2 - 1.0))
            norm_hat_err = max(norm_hat_err, abs(np.sum(Y_hat ** 2) / N ** 2 - 1.0))
            scaled = float(N) ** (delta_value * ensemble.atom.tau) / N ** 2 * np.sum((Y - Y_hat) ** 2)
            difference = max(difference, scaled)
            bound = min(bound, EXPERIMENT_THRESHOLDS['lln_difference_factor'] * moment_surplus(ensemble.atom))
        report.add(N, 'hs_norm_error', norm_err, EXPERIMENT_THRESHOLDS['lln_tol'])
        report.add(N, 'hs_norm_truncated_error', norm_hat_err, EXPERIMENT_THRESHOLDS['lln_tol'])
        report.add(N, 'scaled_difference', difference, bound)
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def truncation_constants_experiment(atom: AtomPairSpec, N_list: Sequence[int], delta: Optional[float] = None,
                                    samples: int = 1_000_000, seed: int = 0) -> ExperimentReport:
    """经验截断常数 |1 - var| 和 |rho_hat - rho| 与常数 2、13 的上界比较"""
    delta_value = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    start = time.perf_counter()
    report = ExperimentReport('truncation-constants', params={
        'atom': atom.to_dict(), 'N': [int(N) for N in N_list], 'delta': delta_value, 'samples': int(samples),
    }, seeds=[int(seed)])
    for N in N_list:
        constants = estimate_truncation_constants(atom, int(N), delta_value, int(samples), int(seed))
        variance_bound, rho_bound = truncation_bounds(atom, int(N), delta_value)
        report.add(N, 'variance_gap', abs(1.0 - constants.scale_1 ** 2), variance_bound)
        report.add(N, 'rho_gap', abs(constants.rho_hat - atom.rho), rho_bound)
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def truncation_levy_experiment(prod: ProductSpec, z: complex, N_list: Sequence[int],
                               delta: Optional[float] = None) -> ExperimentReport:
    """
    由 Y_N 和截断后的 Y_hat_N 构造的平移 Hermitization 的谱分布之间的 Levy 距离，要求随 N 不增
    """
    delta_value = TRUNCATION_DEFAULTS['delta'] if delta is None else float(delta)
    logger.info(f"Starting truncation experiment z={z} N={list(N_list)} delta={delta_value}...")
    start = time.perf_counter()
    report = ExperimentReport('truncation', params={
        'm': prod.m, 'N': [int(N) for N in N_list], 'z': str(complex(z)), 'delta': delta_value,
        'spec_hash': prod.hash,
    })
    base = prod.factors[0][0].seed
    previous = None
    for N in N_list:
        N = int(N)
        spec_N = _with_delta(prod.with_N(N, derive_seed(base, N)), delta_value)
        raw, truncated = [], []
        for ensemble, pert in spec_N.factors:
            Y, Y_hat = build_truncated_pair(ensemble)
            A = build_perturbation(pert, N)
            raw.append((Y, A))
            truncated.append((Y_hat, A))
            report.seeds.append(ensemble.seed)
        if spec_N.m == 1:
            X = (raw[0][0] + raw[0][1]) / np.sqrt(N)
            X_hat = (truncated[0][0] + truncated[0][1]) / np.sqrt(N)
        else:
            X = build_block_linearization(factors=raw)[2]
            X_hat = build_block_linearization(factors=truncated)[2]
        distance = levy_distance(EmpiricalCDF(nu_measure(X, z).values), EmpiricalCDF(nu_measure(X_hat, z).values))
        report.add(N, 'levy', distance, previous)
        previous = distance
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def nu_rate_experiment(prod: ProductSpec, z: complex, N_list: Sequence[int],
                       eps: Optional[float] = None) -> ExperimentReport:
    """nu_{X_N - zI} 与极限 nu_z 的 KS 距离，只检查随 N 单调下降，不拟合速率"""
    if prod.m < 2:
        raise SpecError(f"nu_z is the limit for the linearization, needs m >= 2, got m={prod.m}")
    curve = invert_stieltjes(z, eps=eps)
    cdf_values = curve.cdf()

    def limit_cdf(x):
        return np.interp(x, curve.grid, cdf_values, left=0.0, right=1.0)

    logger.info(f"Starting nu_z rate experiment z={z} N={list(N_list)}...")
    start = time.perf_counter()
    report = ExperimentReport('rate', params={
        'm': prod.m, 'N': [int(N) for N in N_list], 'z': str(complex(z)), 'eps': curve.eps,
        'spec_hash': prod.hash,
    })
    base = prod.factors[0][0].seed
    previous = None
    for N in N_list:
        seed = derive_seed(base, int(N))
        X = linearized_matrix(prod.with_N(int(N), seed))
        distance = ks_distance(EmpiricalCDF(nu_measure(X, z).values), limit_cdf)
        report.seeds.append(seed)
        report.add(N, 'ks', distance, previous)
        previous = distance
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def g_empirical(matrix: np.ndarray, s: float, t: float, h: float = 1e-4) -> float:
    """
    g_M(s, t)：对数势 int log|x|^2 d nu_{M - zI} 关于 s 的中心差分，z = s + it
    """
    if not h > 0 or not np.isfinite(h):
        raise SpecError(f"Finite-difference step must be positive, got {h}")
    matrix = np.asarray(matrix)
    eye = np.eye(matrix.shape[0])

    def potential(shift: complex) -> float:
        sigma = singular_values(matrix - shift * eye).singular
        if np.any(sigma <= np.finfo(np.float64).tiny):
            logger.warning(f"Singular value vanished at z={shift}")
            raise NumericalError(f"Zero singular value at z={shift}; perturb z")
        return float(np.mean(np.log(sigma ** 2)))

    return (potential(complex(s + h, t)) - potential(complex(s - h, t))) / (2.0 * h)
