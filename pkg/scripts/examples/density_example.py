import sys
from pathlib import Path

# 添加项目根目录到系统路径
root_path = str(Path(__file__).parent.parent.parent)
sys.path.append(root_path)

import numpy as np

from src.atoms import make_atom_pair_spec
from src.dyson import SigmaSpec, gamma_closed, invert_stieltjes, solve_fixed_point
from src.ensembles import ProductSpec, build_block_linearization
from src.metrics import EmpiricalCDF, ks_distance
from src.spectral import QPoint, gamma_N, hermitize, nu_measure
from src.utils.logger import setup_logger
from src.visualization.plotter import SpectrumPlotter


def main():
    logger = setup_logger('density_example')
    try:
        out_dir = Path('figures')
        out_dir.mkdir(exist_ok=True)

        rhos = [0.4, -0.7]
        spec = SigmaSpec.from_rhos(rhos)
        prod = ProductSpec.from_atoms(N=256, atoms=[make_atom_pair_spec('gaussian', rho) for rho in rhos], seed=7)
        Z_N = build_block_linearization(prod)[2]

        for z in [0.0, 0.5, 1.0, 1.5]:
            curve = invert_stieltjes(z)
            SpectrumPlotter.plot_density(curve, out_dir / f"nu_density_z{z:g}.png")

            # 有限 N 的经验分布与极限分布比较
            limit_cdf = curve.cdf()
            distance = ks_distance(EmpiricalCDF(nu_measure(Z_N, z).values),
                                   lambda x: np.interp(x, curve.grid, limit_cdf, left=0.0, right=1.0))
            logger.info(f"z={z}: mass={curve.mass:.4f}, KS(nu_N, nu_z)={distance:.4f}")

            # 不动点解、显式解与有限 N 的 Gamma_N
            q = QPoint(eta=0.5j, z=z, m=prod.m)
            gamma, info = solve_fixed_point(q, spec)
            closed = gamma_closed(q)
            finite, a_N = gamma_N(hermitize(Z_N), q)
            logger.info(f"  a(q)={gamma.scalar:.6f} after {info['iterations']} iterations, "
                        f"|Gamma - closed|={np.max(np.abs(gamma.entries - closed.entries)):.2e}, "
                        f"|Gamma_N - Gamma|={np.max(np.abs(finite.entries - gamma.entries)):.4f}")

    except Exception as e:
        logger.error(f"Error running density example: {str(e)}")
        raise


if __name__ == "__main__":
    main()
