from src.atoms import make_atom_pair_spec
from src.dyson import SigmaSpec, solve_fixed_point
from src.ensembles import ProductSpec, build_product
from src.metrics import product_law_report
from src.spectral import QPoint, eigenvalues

# 两个椭圆因子的乘积
atoms = [make_atom_pair_spec('gaussian', 0.5), make_atom_pair_spec('gaussian', -0.2)]
prod = ProductSpec.from_atoms(N=256, atoms=atoms, seed=42)

# 特征值
spectrum = eigenvalues(build_product(prod), {'spec_hash': prod.hash})

# 与极限律 F_2 比较
report = product_law_report(prod, trials=5)
report.print_report()

# 矩阵 Dyson 方程
gamma, info = solve_fixed_point(QPoint(eta=0.5j, z=0.3, m=2), SigmaSpec.from_rhos([0.5, -0.2]))

# 保存结果
spectrum.to_csv('product_spectrum.csv')
report.to_json('product_law.json')
