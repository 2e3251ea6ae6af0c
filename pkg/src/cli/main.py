import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from src.dyson import LimitLaw, SigmaSpec, gamma_closed, invert_stieltjes, solve_fixed_point
from src.ensembles import (
    ProductSpec,
    build_block_linearization,
    build_elliptic,
    build_perturbation,
    build_product,
    read_matrix_binary,
    read_matrix_csv,
    write_matrix_binary,
    write_matrix_csv,
)
from src.metrics import (
    ExperimentReport,
    circular_law_report,
    concentration_experiment,
    elliptic_law_report,
    expectation_gap_experiment,
    lln_experiment,
    lsv_experiment,
    nu_rate_experiment,
    product_law_report,
    sigma_kernel_monte_carlo,
    truncation_constants_experiment,
    truncation_levy_experiment,
)
from src.spectral import SpectralSample, eigenvalues, singular_values
from src.utils.errors import EspectraError, ExportError, NumericalError, SpecError
from src.utils.helpers import format_complex
from src.utils.logger import setup_logger
from src.visualization.plotter import SpectrumPlotter
from .config import RunConfig, load_config

logger = setup_logger('cli')

VERIFY_EXPERIMENTS = ['product-law', 'circular-law', 'elliptic-law', 'concentration', 'gap',
                      'lln', 'truncation', 'rate', 'sigma']


def _require(value: Optional[str], flag: str) -> str:
    if not value:
        raise SpecError(f"{flag} is required for this command")
    return value


def _raw_matrix(cfg: RunConfig, prod: ProductSpec) -> np.ndarray:
    """generate 写出的矩阵：单个椭圆矩阵为未归一化的 Y + A，乘积和线性化已归一化"""
    if cfg.ensemble == 'elliptic':
        if prod.m != 1:
            raise SpecError(f"--ensemble elliptic builds one matrix, got m={prod.m}")
        ensemble, pert = prod.factors[0]
        return build_elliptic(ensemble) + build_perturbation(pert, ensemble.N)
    if cfg.ensemble == 'product':
        return build_product(prod)
    return build_block_linearization(prod)[2]


def _provenance(cfg: RunConfig, prod: ProductSpec) -> Dict[str, object]:
    return {'spec_hash': prod.hash, 'seed': cfg.seed}


def _finish(report: ExperimentReport, cfg: RunConfig) -> int:
    report.print_report()
    if cfg.report:
        report.to_json(cfg.report)
        logger.info(f"Report saved to {cfg.report}")
    return 0 if report.passed else 1


def cmd_generate(cfg: RunConfig) -> int:
    prod = cfg.product_spec()
    out = _require(cfg.out, '--out')
    matrix = _raw_matrix(cfg, prod)
    if cfg.format == 'binary':
        write_matrix_binary(matrix, out)
    elif cfg.format == 'csv':
        write_matrix_csv(matrix, out)
    else:
        raise SpecError("generate writes csv or binary matrices")
    print(f"spec_hash={prod.hash} seed={cfg.seed} shape={matrix.shape[0]}x{matrix.shape[1]} out={out}")
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    out = _require(cfg.out, '--out')
    if cfg.input:
        binary = cfg.format == 'binary' or Path(cfg.input).suffix == '.bin'
        matrix = read_matrix_binary(cfg.input) if binary else read_matrix_csv(cfg.input)
        provenance = {'source': cfg.input}
    else:
        prod = cfg.product_spec()
        matrix = _raw_matrix(cfg, prod)
        if cfg.ensemble == 'elliptic':
            matrix = matrix / np.sqrt(prod.N)
        provenance = _provenance(cfg, prod)
    if cfg.singular:
        sample = singular_values(matrix, provenance)
    else:
        sample = eigenvalues(matrix, provenance, method=cfg.method)
    sample.to_csv(out)
    print(f"{sample.kind.value} N={sample.N} out={out} provenance={json.dumps(provenance)}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    experiment = _require(cfg.experiment, 'verify experiment')
    prod = cfg.product_spec()
    n_list = cfg.n_list

    if experiment == 'product-law':
        report = product_law_report(prod, cfg.trials or 20, n_list, cfg.threads)
    elif experiment == 'circular-law':
        report = circular_law_report(prod, cfg.trials or 10, n_list, cfg.threads)
    elif experiment == 'elliptic-law':
        report = elliptic_law_report(prod, cfg.trials or 5, n_list, cfg.threads)
    elif experiment == 'concentration':
        report = concentration_experiment(prod, cfg.q_point(), n_list or [128, 512], cfg.reps, cfg.threads)
    elif experiment == 'gap':
        report = expectation_gap_experiment(prod, cfg.q_point(), n_list or [128, 512], cfg.reps, cfg.threads)
    elif experiment == 'lln':
        report = lln_experiment(prod, n_list or [128, 512, 2048], cfg.delta)
    elif experiment == 'truncation':
        n_list = n_list or [128, 512]
        report = truncation_levy_experiment(prod, cfg.z_value, n_list, cfg.delta)
        atoms = []
        for ensemble, _ in prod.factors:
            if ensemble.atom not in atoms:
                atoms.append(ensemble.atom)
        for atom in atoms:
            report.extend(truncation_constants_experiment(atom, n_list, cfg.delta, seed=cfg.seed))
    elif experiment == 'rate':
        report = nu_rate_experiment(prod, cfg.z_value, n_list or [128, 512], cfg.eps)
    else:
        report = sigma_kernel_monte_carlo(prod, cfg.samples, cfg.threads)
    return _finish(report, cfg)


def cmd_dyson(cfg: RunConfig) -> int:
    if cfg.action != 'solve':
        raise SpecError("dyson supports the 'solve' action")
    if cfg.m < 2:
        raise SpecError(f"dyson solve needs m >= 2, got m={cfg.m}")
    rhos = cfg.rho * cfg.m if len(cfg.rho) == 1 else cfg.rho
    spec = SigmaSpec.from_rhos(rhos)
    q = cfg.q_point()
    gamma, info = solve_fixed_point(q, spec, omega=cfg.omega)
    closed = gamma_closed(q)

    for row in gamma.entries:
        print("  ".join(format_complex(value) for value in row))
    deviation = float(np.max(np.abs(gamma.entries - closed.entries)))
    print(f"a={format_complex(gamma.scalar)} residual={info['residual']:.3e} iterations={info['iterations']} "
          f"damping_final={info['damping_final']:g} closed_form_deviation={deviation:.3e}")

    payload = dict(info)
    payload['closed_form_deviation'] = deviation
    payload['gamma'] = [[[value.real, value.imag] for value in row] for row in gamma.entries]
    # --out 和 --report 都写同一份 JSON
    for path in dict.fromkeys(p for p in (cfg.out, cfg.report) if p):
        try:
            Path(path).write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')
        except OSError as e:
            raise ExportError(f"Cannot write {path}: {e}") from e
        logger.info(f"Fixed point saved to {path}")
    return 0


def cmd_density(cfg: RunConfig) -> int:
    out = _require(cfg.out, '--out')
    curve = invert_stieltjes(cfg.z_value, eps=cfg.eps)
    curve.to_csv(out)
    at_zero = float(np.interp(0.0, curve.grid, curve.values))
    print(f"z={cfg.z} eps={curve.eps:g} rho(0)={at_zero:.6f} mass={curve.mass:.6f} out={out}")
    return 0


def cmd_lsv(cfg: RunConfig) -> int:
    prod = cfg.product_spec()
    report = lsv_experiment(prod, cfg.z_value, cfg.exponent, cfg.trials or 100, cfg.threads)
    return _finish(report, cfg)


def cmd_plot(cfg: RunConfig) -> int:
    sample = SpectralSample.from_csv(_require(cfg.spectrum, '--spectrum'))
    out = _require(cfg.out, '--out')
    rho = cfg.rho[0]
    if cfg.ensemble == 'elliptic' and cfg.m == 1 and 0 < abs(rho) < 1:
        law = LimitLaw.elliptic(rho)
    elif cfg.ensemble == 'linearization':
        law = LimitLaw.product(1)
    else:
        law = LimitLaw.product(cfg.m)
    SpectrumPlotter(sample, law).plot_eigenvalues(out)
    print(f"figure={out}")
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    'generate': cmd_generate,
    'spectrum': cmd_spectrum,
    'verify': cmd_verify,
    'dyson': cmd_dyson,
    'density': cmd_density,
    'lsv': cmd_lsv,
    'plot': cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    # 未给出的参数不进入命名空间，由配置文件或默认值补齐
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help='JSON config file; flags win on conflict')
    common.add_argument('--ensemble', choices=['elliptic', 'product', 'linearization'])
    common.add_argument('--m', type=int, help='number of factors')
    common.add_argument('--n', type=int, help='matrix dimension N')
    common.add_argument('--n-list', dest='n_list', help='comma separated N values')
    common.add_argument('--rho', help='correlation(s), e.g. 0.5 or 0.5,0.7')
    common.add_argument('--atoms', help='atom family per factor: gaussian, rademacher, pareto')
    common.add_argument('--tau', type=float)
    common.add_argument('--wigner', action='store_true', help='allow rho = ±1')
    common.add_argument('--mu', type=float, help='constant-mean perturbation')
    common.add_argument('--truncated', action='store_true')
    common.add_argument('--delta', type=float)
    common.add_argument('--seed', type=int)
    common.add_argument('--trials', type=int)
    common.add_argument('--reps', type=int)
    common.add_argument('--samples', type=int)
    common.add_argument('--z', help='complex number a+bi')
    common.add_argument('--eta', help='complex number with positive imaginary part')
    common.add_argument('--eps', type=float)
    common.add_argument('--exponent', type=float, help='least singular value exponent A')
    common.add_argument('--omega', type=float, help='fixed-point damping')
    common.add_argument('--input')
    common.add_argument('--singular', action='store_true')
    common.add_argument('--method', choices=['lapack', 'reference'])
    common.add_argument('--spectrum')
    common.add_argument('--out')
    common.add_argument('--report')
    common.add_argument('--format', choices=['csv', 'binary', 'json'])
    common.add_argument('--threads', type=int)

    parser = argparse.ArgumentParser(prog='espectra', description='Elliptic random matrix products')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('generate', parents=[common], help='write a sampled matrix')
    commands.add_parser('spectrum', parents=[common], help='eigenvalues or singular values to CSV')
    verify = commands.add_parser('verify', parents=[common], help='run a verification experiment')
    verify.add_argument('experiment', choices=VERIFY_EXPERIMENTS)
    dyson = commands.add_parser('dyson', parents=[common], help='solve the matrix fixed-point equation')
    dyson.add_argument('action', choices=['solve'])
    commands.add_parser('density', parents=[common], help='nu_z density by Stieltjes inversion')
    commands.add_parser('lsv', parents=[common], help='least singular value experiment')
    commands.add_parser('plot', parents=[common], help='static eigenvalue scatter (PNG)')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    flags = vars(args)
    config_path = flags.pop('config', None)
    try:
        cfg = load_config(flags, config_path)
        return COMMANDS[cfg.command](cfg)
    except EspectraError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return e.exit_code
    except np.linalg.LinAlgError as e:
        logger.error(f"LinAlgError: {str(e)}")
        return NumericalError.exit_code


if __name__ == '__main__':
    sys.exit(main())
