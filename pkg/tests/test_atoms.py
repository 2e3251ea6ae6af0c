import numpy as np
import pytest

from src.atoms import (
    AtomFamily,
    AtomPairSpec,
    DiagFamily,
    apply_truncation,
    empirical_moment_surplus,
    estimate_truncation_constants,
    make_atom_pair_spec,
    moment_surplus,
    sample_diagonal,
    sample_pair,
    sample_pairs,
    truncate_spec,
    truncation_bounds,
)
from src.utils.errors import AssumptionViolation, SpecError, TruncationError

SAMPLES = 200_000


class TestAtomPairSpec:
    def test_family_aliases(self):
        assert make_atom_pair_spec('gaussian', 0.2).family is AtomFamily.GAUSSIAN_PAIR
        assert make_atom_pair_spec('Rademacher', 0.2).family is AtomFamily.RADEMACHER_MIX
        assert make_atom_pair_spec('pareto-symmetrized', 0.2).family is AtomFamily.PARETO_SYMMETRIZED

    def test_unknown_family(self):
        with pytest.raises(SpecError):
            make_atom_pair_spec('cauchy', 0.2)

    def test_unknown_parameter(self):
        with pytest.raises(SpecError):
            make_atom_pair_spec('gaussian', 0.2, {'kappa': 3})

    def test_rho_one_needs_wigner_flag(self):
        with pytest.raises(AssumptionViolation):
            make_atom_pair_spec('gaussian', 1.0)
        spec = make_atom_pair_spec('gaussian', 1.0, {'wigner': True})
        assert spec.wigner_flag

    def test_rho_out_of_range(self):
        with pytest.raises(AssumptionViolation):
            make_atom_pair_spec('gaussian', 1.5, {'wigner': True})

    def test_tau_must_be_positive(self):
        with pytest.raises(AssumptionViolation):
            make_atom_pair_spec('pareto', 0.0, {'tau': 0.0})

    def test_pareto_alpha(self):
        assert make_atom_pair_spec('pareto', 0.0, {'tau': 1.0}).pareto_alpha == pytest.approx(3.5)

    def test_dict_payload(self):
        spec = make_atom_pair_spec('rademacher', -0.3, {'diag_family': 'zero'})
        assert AtomPairSpec.from_dict(spec.to_dict()) == spec
        with pytest.raises(SpecError):
            AtomPairSpec.from_dict({'family': 'gaussian', 'rho': 0.1, 'sigma': 2})


class TestSampling:
    @pytest.mark.parametrize('family, rho, band', [
        ('gaussian', 0.5, 0.01),
        ('gaussian', -0.8, 0.01),
        ('rademacher', -0.4, 0.01),
        ('pareto', 0.6, 0.03),
    ])
    def test_moments_and_correlation(self, rng, family, rho, band):
        # tau = 2 使 Pareto 的四阶矩有限
        spec = make_atom_pair_spec(family, rho, {'tau': 2.0})
        x1, x2 = sample_pairs(spec, rng, SAMPLES)
        assert abs(x1.mean()) < 0.02
        assert abs(x2.mean()) < 0.02
        assert np.mean(x1 * x2) == pytest.approx(rho, abs=band)

    @pytest.mark.parametrize('rho', [0.5, 0.0])
    def test_gaussian_sample_correlation(self, rho):
        rng = np.random.default_rng(2024)
        x1, x2 = sample_pairs(make_atom_pair_spec('gaussian', rho), rng, 100_000)
        assert np.corrcoef(x1, x2)[0, 1] == pytest.approx(rho, abs=0.01)

    def test_gaussian_variance(self, rng):
        x1, x2 = sample_pairs(make_atom_pair_spec('gaussian', 0.3), rng, SAMPLES)
        assert x1.var() == pytest.approx(1.0, abs=0.02)
        assert x2.var() == pytest.approx(1.0, abs=0.02)

    def test_rademacher_values(self, rng):
        x1, x2 = sample_pairs(make_atom_pair_spec('rademacher', 0.5), rng, 1000)
        assert set(np.unique(x1)) <= {-1.0, 1.0}
        assert set(np.unique(x2)) <= {-1.0, 1.0}

    def test_pareto_first_absolute_moment(self, rng):
        spec = make_atom_pair_spec('pareto', 0.0, {'tau': 1.0})
        x1, _ = sample_pairs(spec, rng, SAMPLES)
        alpha = spec.pareto_alpha
        expected = alpha / (alpha - 1.0) / np.sqrt(alpha / (alpha - 2.0))
        assert np.abs(x1).mean() == pytest.approx(expected, abs=0.01)

    def test_wigner_pair_is_symmetric(self, rng):
        x1, x2 = sample_pairs(make_atom_pair_spec('gaussian', 1.0, {'wigner': True}), rng, 100)
        np.testing.assert_array_equal(x1, x2)

    def test_sample_pair_is_scalar(self, rng):
        x1, x2 = sample_pair(make_atom_pair_spec('gaussian', 0.1), rng)
        assert isinstance(x1, float) and isinstance(x2, float)

    def test_diagonal(self, rng):
        spec = make_atom_pair_spec('gaussian', 0.0, {'diag_variance': 4.0})
        assert sample_diagonal(spec, rng, SAMPLES).var() == pytest.approx(4.0, rel=0.03)
        zero = make_atom_pair_spec('gaussian', 0.0, {'diag_family': 'zero'})
        assert zero.diag_family is DiagFamily.ZERO
        np.testing.assert_array_equal(sample_diagonal(zero, rng, 5), np.zeros(5))


class TestMomentSurplus:
    def test_gaussian_closed_form(self):
        # E|g|^3 = 2 sqrt(2/pi)
        spec = make_atom_pair_spec('gaussian', 0.5, {'tau': 1.0})
        assert moment_surplus(spec) == pytest.approx(4.0 * np.sqrt(2.0 / np.pi))

    def test_rademacher(self):
        assert moment_surplus(make_atom_pair_spec('rademacher', 0.5)) == pytest.approx(2.0)

    def test_empirical_matches_closed_form(self, rng):
        spec = make_atom_pair_spec('gaussian', 0.5)
        x1, x2 = sample_pairs(spec, rng, SAMPLES)
        assert empirical_moment_surplus(x1, x2, spec.tau) == pytest.approx(moment_surplus(spec), abs=0.1)


class TestTruncation:
    def test_rademacher_is_untouched(self):
        spec = make_atom_pair_spec('rademacher', 0.4)
        constants = truncate_spec(spec, 100)
        assert constants.scale_1 == 1.0
        assert constants.rho_hat == pytest.approx(0.4)
        np.testing.assert_array_equal(apply_truncation(np.array([-1.0, 1.0]), constants), [-1.0, 1.0])

    def test_gaussian_far_threshold_is_identity(self, gaussian_half):
        constants = truncate_spec(gaussian_half, 10 ** 6, delta=0.2)
        assert constants.scale_1 == pytest.approx(1.0, abs=1e-8)
        assert constants.rho_hat == pytest.approx(0.5, abs=1e-8)

    def test_gaussian_matches_monte_carlo(self, gaussian_half):
        exact = truncate_spec(gaussian_half, 1000)
        estimate = estimate_truncation_constants(gaussian_half, 1000, None, 1_000_000, 3)
        assert exact.scale_1 == pytest.approx(estimate.scale_1, abs=0.01)
        assert exact.rho_hat == pytest.approx(estimate.rho_hat, abs=0.01)

    def test_pareto_closed_form(self):
        spec = make_atom_pair_spec('pareto', 0.3, {'tau': 1.0})
        constants = truncate_spec(spec, 1000)
        alpha = spec.pareto_alpha
        scaled = np.sqrt(alpha / (alpha - 2.0)) * 1000 ** 0.1
        assert constants.scale_1 ** 2 == pytest.approx(1.0 - scaled ** (2.0 - alpha))
        assert constants.rho_hat == pytest.approx(0.3)
        estimate = estimate_truncation_constants(spec, 1000, None, 1_000_000, 5)
        assert constants.scale_1 == pytest.approx(estimate.scale_1, abs=0.01)

    def test_within_truncation_bounds(self, gaussian_half):
        constants = truncate_spec(gaussian_half, 1000)
        variance_bound, rho_bound = truncation_bounds(gaussian_half, 1000)
        assert abs(1.0 - constants.scale_1 ** 2) <= variance_bound
        assert abs(constants.rho_hat - gaussian_half.rho) <= rho_bound

    def test_small_n_raises(self, gaussian_half):
        # N^0.1 = 1.26，截断后方差约 0.34
        with pytest.raises(TruncationError):
            truncate_spec(gaussian_half, 10)

    def test_delta_tau_constraint(self, gaussian_half):
        with pytest.raises(AssumptionViolation):
            truncate_spec(gaussian_half, 1000, delta=1.0)

    def test_values_beyond_threshold_vanish(self, rng, gaussian_half):
        constants = truncate_spec(gaussian_half, 1000)
        x = rng.standard_normal(10_000) * 3.0
        out = apply_truncation(x, constants)
        beyond = np.abs(x) > constants.threshold
        assert np.all(out[beyond] == 0.0)
        np.testing.assert_allclose(out[~beyond], x[~beyond] / constants.scale_1)
        assert np.max(np.abs(out)) <= constants.magnitude_bound
