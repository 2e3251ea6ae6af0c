import time

import numpy as np
import pytest

from src.dyson import (
    LawKind,
    LimitLaw,
    SigmaSpec,
    a_prime,
    elliptic_contains,
    f_m_density,
    fixed_point_residual,
    g_exact,
    gamma_closed,
    invert_stieltjes,
    nu_z_cdf,
    radial_cdf,
    scalar_a,
    sigma_kernel,
    sigma_op,
    solve_fixed_point,
    support_radius,
)
from src.spectral import QPoint
from src.utils.errors import ConvergenceError, SpecError


def _semicircle_stieltjes(eta: complex) -> complex:
    roots = np.roots([1.0, eta, 1.0])
    return complex(roots[np.argmax(roots.imag)])


class TestIndexMap:
    def test_two_factor_map(self):
        assert [a_prime(a, 2) for a in range(1, 5)] == [4, 3, 2, 1]

    @pytest.mark.parametrize('m', [2, 3, 4, 5])
    def test_involution_avoiding_partner_blocks(self, m):
        for a in range(1, 2 * m + 1):
            image = a_prime(a, m)
            assert a_prime(image, m) == a
            assert image not in (a, a - m, a + m)

    def test_single_factor_rejected(self):
        with pytest.raises(SpecError):
            a_prime(1, 1)
        with pytest.raises(SpecError):
            SigmaSpec.from_rhos([0.5])

    def test_custom_map_must_be_involution(self):
        with pytest.raises(SpecError):
            SigmaSpec(m=2, rhos=(0.1, 0.2), aprime=(4, 3, 1, 2))

    def test_rho_of_conjugate_blocks(self):
        spec = SigmaSpec.from_rhos([0.1, 0.2, 0.3])
        # a = m+1..2m 取 rho_{a'}
        rhos = [0.1, 0.2, 0.3]
        expected = rhos + [rhos[a_prime(a, 3) - 1] for a in range(4, 7)]
        np.testing.assert_allclose(spec.rho_a, expected)


class TestSigmaOperator:
    @pytest.fixture
    def spec(self):
        return SigmaSpec.from_rhos([0.4, -0.3, 0.8])

    def test_identity(self, spec):
        np.testing.assert_array_equal(sigma_op(np.eye(6), spec), np.eye(6))

    def test_diagonal_stays_diagonal(self, spec, rng):
        D = np.diag(rng.standard_normal(6) + 1j * rng.standard_normal(6))
        result = sigma_op(D, spec)
        np.testing.assert_array_equal(result, np.diag(np.diag(result)))

    def test_linear(self, spec, rng):
        A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        B = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        np.testing.assert_allclose(sigma_op(2.0 * A - 3j * B, spec),
                                   2.0 * sigma_op(A, spec) - 3j * sigma_op(B, spec), atol=1e-14)

    def test_kernel_contraction(self, spec, rng):
        A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        contracted = np.einsum('acdb,cd->ab', sigma_kernel(spec), A)
        np.testing.assert_allclose(contracted, sigma_op(A, spec), atol=1e-14)

    def test_shape_checked(self, spec):
        with pytest.raises(SpecError):
            sigma_op(np.eye(4), spec)


class TestScalarTransform:
    def test_scalar_input_matches_array_input(self):
        value = scalar_a(0.3, 0.5j)
        assert isinstance(value, complex)
        batch = scalar_a(np.array([0.3]), np.array([0.5j]))
        assert value == pytest.approx(complex(batch[0]), abs=1e-14)
        assert isinstance(scalar_a(0.0, np.complex128(2j)), complex)

    def test_semicircle_at_i(self):
        assert scalar_a(0.0, 1j) == pytest.approx(1j * (np.sqrt(5.0) - 1.0) / 2.0, abs=1e-12)

    @pytest.mark.parametrize('eta', [0.5j, 0.3 + 0.1j, -1.0 + 0.02j, 2.5 + 1j])
    def test_semicircle_branch(self, eta):
        assert scalar_a(0.0, eta) == pytest.approx(_semicircle_stieltjes(eta), abs=1e-12)

    def test_large_eta(self):
        eta = 100j
        assert abs(scalar_a(0.7 + 0.2j, eta) + 1.0 / eta) <= 1e-3

    def test_cubic_residual_on_grid(self):
        z_grid, im_grid = np.meshgrid(np.linspace(0.0, 2.0, 20), np.logspace(-3, 1, 20))
        eta = 1j * im_grid
        a = scalar_a(z_grid, eta)
        assert a.shape == (20, 20)
        assert np.all(a.imag > 0)
        residual = a ** 3 + 2 * eta * a ** 2 + (1 + eta ** 2 - z_grid ** 2) * a + eta
        assert np.all(np.abs(residual) <= 1e-12 * np.maximum(1.0, np.abs(a) ** 3))

    def test_rejects_lower_half_plane(self):
        with pytest.raises(SpecError):
            scalar_a(0.0, -0.1j)


class TestFixedPoint:
    def test_closed_form_residual(self):
        q = QPoint(eta=0.2j, z=0.3 + 0.1j, m=2)
        gamma = gamma_closed(q)
        assert fixed_point_residual(gamma.entries, q, SigmaSpec.from_rhos([0.5, -0.2])) <= 1e-12
        assert gamma.is_positive()

    def test_closed_form_at_origin_is_scalar(self):
        q = QPoint(eta=0.4j, z=0.0, m=3)
        gamma = gamma_closed(q)
        np.testing.assert_allclose(gamma.entries, gamma.scalar * np.eye(6), atol=1e-15)

    def test_sigma_of_closed_form(self):
        q = QPoint(eta=0.5j, z=0.4, m=3)
        gamma = gamma_closed(q)
        spec = SigmaSpec.from_rhos([0.3, 0.6, -0.9])
        np.testing.assert_allclose(sigma_op(gamma.entries, spec), gamma.scalar * np.eye(6), atol=1e-15)

    def test_solver_matches_closed_form(self):
        q = QPoint(eta=0.3j, z=0.8 - 0.4j, m=3)
        gamma, info = solve_fixed_point(q, SigmaSpec.from_rhos([0.2, -0.5, 0.7]))
        assert np.max(np.abs(gamma.entries - gamma_closed(q).entries)) <= 1e-10
        assert info['residual'] < 1e-12
        assert set(info) == {'residual', 'iterations', 'damping_final'}

    def test_solution_does_not_depend_on_rho(self):
        q = QPoint(eta=0.5j, z=0.6, m=2)
        first, _ = solve_fixed_point(q, SigmaSpec.from_rhos([0.0, 0.0]))
        second, _ = solve_fixed_point(q, SigmaSpec.from_rhos([0.9, -0.9]))
        np.testing.assert_allclose(first.entries, second.entries, atol=1e-10)

    def test_fast_convergence_far_from_axis(self):
        _, info = solve_fixed_point(QPoint(eta=2j, z=0.0, m=2), SigmaSpec.from_rhos([0.5, 0.5]))
        assert info['iterations'] <= 50

    def test_iteration_cap(self):
        q = QPoint(eta=0.1j, z=0.9, m=2)
        with pytest.raises(ConvergenceError) as excinfo:
            solve_fixed_point(q, SigmaSpec.from_rhos([0.5, 0.5]), max_iter=1)
        assert excinfo.value.diagnostics['iterations'] == 1

    def test_mismatched_block_count(self):
        with pytest.raises(SpecError):
            solve_fixed_point(QPoint(eta=1j, z=0.0, m=3), SigmaSpec.from_rhos([0.5, 0.5]))

    def test_bad_damping(self):
        with pytest.raises(SpecError):
            solve_fixed_point(QPoint(eta=1j, z=0.0, m=2), SigmaSpec.from_rhos([0.5, 0.5]), omega=1.5)

    @pytest.mark.slow
    def test_random_points_match_closed_form(self):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        for _ in range(50):
            m = int(rng.integers(2, 5))
            z = rng.uniform(0.0, 2.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            eta = 1j * rng.uniform(0.05, 5.0)
            q = QPoint(eta=eta, z=z, m=m)
            gamma, _ = solve_fixed_point(q, SigmaSpec.from_rhos(rng.uniform(-0.95, 0.95, m)))
            assert np.max(np.abs(gamma.entries - gamma_closed(q).entries)) <= 1e-10
        assert time.perf_counter() - start < 10.0


class TestDensity:
    def test_semicircle_at_origin(self):
        curve = invert_stieltjes(0.0)
        assert np.interp(0.0, curve.grid, curve.values) == pytest.approx(1.0 / np.pi, abs=1e-3)
        assert curve.mass == pytest.approx(1.0, abs=1e-2)

    def test_semicircle_profile(self):
        curve = invert_stieltjes(0.0)
        exact = np.sqrt(np.clip(4.0 - curve.grid ** 2, 0.0, None)) / (2.0 * np.pi)
        assert np.max(np.abs(curve.values - exact)) <= 5e-3

    def test_default_grid(self):
        curve = invert_stieltjes(0.5)
        assert curve.grid.shape == (4001,)
        assert support_radius(0.5) == pytest.approx(3.0)
        assert curve.grid[-1] == pytest.approx(3.0)
        assert np.all(curve.values >= 0)

    def test_symmetric_density(self):
        curve = invert_stieltjes(0.7 + 0.3j, points=801)
        np.testing.assert_allclose(curve.values, curve.values[::-1], rtol=0, atol=1e-10)

    @pytest.mark.parametrize('z', [0.0, 0.5, 1.2])
    def test_unit_mass(self, z):
        assert invert_stieltjes(z).mass == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize('z', [0.0, 0.5, 1.0, 1.2, 0.3 + 0.9j])
    def test_density_bounded_by_one(self, z):
        curve = invert_stieltjes(z)
        assert curve.values.max() <= 1.0 + 5.0 * curve.eps

    def test_cdf(self):
        x = np.array([-10.0, 0.0, 10.0])
        values = nu_z_cdf(0.3, x)
        assert values[0] == 0.0 and values[2] == 1.0
        assert values[1] == pytest.approx(0.5, abs=1e-3)

    def test_csv(self, tmp_path):
        path = invert_stieltjes(0.0, points=11).to_csv(tmp_path / 'rho.csv')
        lines = path.read_text().splitlines()
        assert lines[0] == 'x,rho' and len(lines) == 12

    def test_bad_eps(self):
        with pytest.raises(SpecError):
            invert_stieltjes(0.0, eps=0.0)


class TestLimitLaws:
    def test_radial_cdf(self):
        assert radial_cdf(0.25, 2) == pytest.approx(0.25)
        assert radial_cdf(0.25, 1) == pytest.approx(0.0625)
        assert radial_cdf(0.25, 4) == pytest.approx(0.5)
        assert radial_cdf(2.0, 3) == 1.0

    def test_f_m_density_outside_disc(self):
        assert f_m_density(1.5, 2) == 0.0
        assert f_m_density(0.5, 1) == pytest.approx(1.0 / np.pi)

    @pytest.mark.parametrize('law', [LimitLaw.product(1), LimitLaw.product(2), LimitLaw.product(3),
                                     LimitLaw.elliptic(0.5)])
    def test_total_mass(self, law):
        assert law.total_mass() == pytest.approx(1.0, abs=1e-6)

    def test_product_of_one_is_circular(self):
        assert LimitLaw.product(1).kind is LawKind.CIRCULAR

    def test_elliptic_semi_axes(self):
        assert elliptic_contains(1.49, 0.5)
        assert not elliptic_contains(1.51, 0.5)
        assert elliptic_contains(0.49j, 0.5)
        assert not elliptic_contains(0.51j, 0.5)

    def test_elliptic_rho_range(self):
        with pytest.raises(SpecError):
            LimitLaw.elliptic(1.0)

    def test_g_exact(self):
        assert g_exact(2.0, 0.0) == pytest.approx(1.0)
        assert g_exact(0.5, 0.0) == pytest.approx(1.0)

    def test_g_exact_continuous_on_unit_circle(self):
        theta = np.linspace(0.0, 2.0 * np.pi, 37)
        s, t = np.cos(theta), np.sin(theta)
        inner = g_exact((1.0 - 1e-9) * s, (1.0 - 1e-9) * t)
        outer = g_exact((1.0 + 1e-9) * s, (1.0 + 1e-9) * t)
        np.testing.assert_allclose(inner, outer, rtol=0, atol=1e-8)
        np.testing.assert_allclose(g_exact(s, t), 2.0 * s, rtol=0, atol=1e-12)

    def test_sampler_follows_radial_law(self):
        rng = np.random.default_rng(7)
        radii = np.abs(LimitLaw.product(3).sample(rng, 50_000))
        assert np.mean(radii <= 0.3) == pytest.approx(radial_cdf(0.3, 3), abs=0.01)

    def test_elliptic_sampler_stays_inside(self):
        rng = np.random.default_rng(8)
        points = LimitLaw.elliptic(-0.4).sample(rng, 5000)
        assert np.all(elliptic_contains(points, -0.4, slack=1.0 + 1e-12))
