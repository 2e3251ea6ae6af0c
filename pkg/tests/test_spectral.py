import numpy as np
import pytest

from src.spectral import (
    MatrixStieltjes,
    QPoint,
    SpectralKind,
    SpectralSample,
    eigenvalues,
    gamma_N,
    hermitize,
    householder_hessenberg,
    match_spectra,
    nu_measure,
    resolvent,
    singular_values,
    spectra_agree,
)
from src.utils.errors import SpecError

CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)


class TestEigenvalues:
    def test_diagonal(self):
        sample = eigenvalues(np.diag([1.0, 2.0, 3.0]))
        assert sample.kind is SpectralKind.EIGENVALUES
        assert match_spectra(sample.values, [1, 2, 3]) < 1e-14

    def test_rotation(self):
        sample = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert match_spectra(sample.values, [1j, -1j]) < 1e-14

    def test_companion_of_cube_roots(self):
        companion = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert match_spectra(eigenvalues(companion).values, CUBE_ROOTS) < 1e-12

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def test_reference_solver_agrees_with_lapack(self, seed):
        matrix = np.random.default_rng(seed).standard_normal((20, 20))
        lapack = eigenvalues(matrix)
        reference = eigenvalues(matrix, method='reference')
        assert spectra_agree(lapack.values, reference.values)

    def test_reference_solver_size_limit(self):
        with pytest.raises(SpecError):
            eigenvalues(np.eye(65), method='reference')

    def test_hessenberg_form(self, rng):
        matrix = rng.standard_normal((8, 8))
        H = householder_hessenberg(matrix)
        assert np.max(np.abs(np.tril(H, k=-2))) == 0.0
        assert spectra_agree(eigenvalues(matrix).values, np.linalg.eigvals(H))

    def test_rejects_bad_input(self):
        with pytest.raises(SpecError):
            eigenvalues(np.ones((2, 3)))
        with pytest.raises(SpecError):
            eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))
        with pytest.raises(SpecError):
            eigenvalues(np.eye(2), method='power')

    def test_provenance_is_kept(self):
        sample = eigenvalues(np.eye(2), {'spec_hash': 'abc', 'seed': 1})
        assert sample.provenance == {'spec_hash': 'abc', 'seed': 1}


class TestSingularValues:
    def test_diagonal(self):
        sample = singular_values(np.diag([3.0, -4.0]))
        np.testing.assert_allclose(sample.singular, [4.0, 3.0])
        assert sample.values.shape == (4,)

    def test_symmetric_atoms(self, rng):
        sample = singular_values(rng.standard_normal((6, 6)))
        np.testing.assert_array_equal(np.sort(sample.values), -np.sort(sample.values)[::-1])

    def test_matches_gram_eigenvalues(self, rng):
        matrix = rng.standard_normal((5, 5))
        gram = np.sort(np.linalg.eigvalsh(matrix.T @ matrix))[::-1]
        np.testing.assert_allclose(singular_values(matrix).singular ** 2, gram, atol=1e-10)

    def test_shifted_norm_bound(self, rng):
        N = 10
        matrix = rng.standard_normal((N, N))
        z = 0.7 - 0.2j
        sigma = nu_measure(matrix, z).singular
        assert sigma.max() <= np.linalg.norm(matrix, 2) + abs(z) * np.sqrt(N) + 1e-12

    def test_nu_measure_equals_hermitization_spectrum(self, rng):
        matrix = rng.standard_normal((6, 6))
        z = 0.5 + 0.5j
        H = hermitize(matrix - z * np.eye(6))
        spectrum = np.linalg.eigvalsh(H)
        np.testing.assert_allclose(np.sort(nu_measure(matrix, z).values), spectrum, atol=1e-10)

    def test_sample_count_enforced(self):
        with pytest.raises(SpecError):
            SpectralSample(np.zeros(3), SpectralKind.SYMMETRIZED_SINGULAR, 2)
        with pytest.raises(SpecError):
            SpectralSample(np.zeros(3, dtype=complex), SpectralKind.EIGENVALUES, 2)

    def test_csv(self, tmp_path, rng):
        matrix = rng.standard_normal((4, 4))
        singular = singular_values(matrix)
        path = singular.to_csv(tmp_path / 'sigma.csv')
        assert path.read_text().splitlines()[0] == 'sigma'
        np.testing.assert_array_equal(SpectralSample.from_csv(path).singular, singular.singular)

        spectrum = eigenvalues(matrix)
        path = spectrum.to_csv(tmp_path / 'eig.csv')
        assert path.read_text().splitlines()[0] == 're,im'
        assert match_spectra(SpectralSample.from_csv(path).values, spectrum.values) == 0.0


class TestMatching:
    def test_permutation_invariant(self, rng):
        values = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        assert match_spectra(values, values[::-1]) == 0.0

    def test_conjugate_pairs_with_tied_real_parts(self):
        a = np.array([1 + 1e-9 + 2j, 1 - 2j, 1 + 2e-9 - 2j, 1 + 2j])
        b = np.array([1 + 2j, 1 - 2j, 1 + 2j, 1 - 2j])
        assert match_spectra(a, b) < 1e-8

    def test_size_mismatch(self):
        with pytest.raises(SpecError):
            match_spectra([1.0], [1.0, 2.0])


class TestHermitization:
    def test_structure(self, rng):
        X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H = hermitize(X)
        np.testing.assert_array_equal(H, H.conj().T)
        np.testing.assert_array_equal(H[:4, :4], np.zeros((4, 4)))

    def test_spectrum_is_symmetrized_singular_values(self, rng):
        X = rng.standard_normal((5, 5))
        spectrum = np.linalg.eigvalsh(hermitize(X))
        np.testing.assert_allclose(spectrum, np.sort(singular_values(X).values), atol=1e-10)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(hermitize(np.zeros((3, 3))), np.zeros((6, 6)))


class TestResolvent:
    def test_qpoint_validation(self):
        with pytest.raises(SpecError):
            QPoint(eta=0.0, z=0.5, m=2)
        with pytest.raises(SpecError):
            QPoint(eta=-1j, z=0.5, m=2)

    def test_qpoint_inverse(self):
        q = QPoint(eta=0.3 + 0.7j, z=0.4 - 0.1j, m=3)
        np.testing.assert_allclose(q.matrix() @ q.inverse(), np.eye(6), atol=1e-14)

    def test_zero_hermitization(self):
        q = QPoint(eta=0.5j, z=0.3 + 0.2j, m=2)
        gamma, a = gamma_N(np.zeros((4 * 5, 4 * 5)), q)
        np.testing.assert_allclose(gamma.entries, -q.inverse(), atol=1e-13)
        assert a == pytest.approx(gamma.scalar)

    def test_lu_agrees_with_inverse(self, rng):
        m, N = 2, 4
        X = rng.standard_normal((m * N, m * N)) / np.sqrt(N)
        H = hermitize(X)
        q = QPoint(eta=0.2 + 0.4j, z=0.6 - 0.3j, m=m)
        lu, _ = gamma_N(H, q, method='lu')
        dense, _ = gamma_N(H, q, method='inverse')
        np.testing.assert_allclose(lu.entries, dense.entries, atol=1e-12)

    def test_inverse_method_size_limit(self):
        q = QPoint(eta=1j, z=0.0, m=1)
        with pytest.raises(SpecError):
            gamma_N(np.zeros((130, 130)), q, method='inverse')

    def test_imaginary_part_is_positive(self, rng):
        m, N = 3, 6
        H = hermitize(rng.standard_normal((m * N, m * N)) / np.sqrt(N))
        gamma, _ = gamma_N(H, QPoint(eta=0.1j, z=1.2, m=m))
        assert gamma.is_positive()
        np.testing.assert_allclose(gamma.imag_part, gamma.imag_part.conj().T, atol=1e-14)

    def test_resolvent_identity_and_norm(self, rng):
        m, N = 2, 5
        H = hermitize(rng.standard_normal((m * N, m * N)) / np.sqrt(N))
        q = QPoint(eta=0.25j, z=0.0, m=m)
        R = resolvent(H, q)
        K = H - np.kron(q.matrix(), np.eye(N))
        assert np.max(np.abs(K @ R - np.eye(2 * m * N))) <= 1e-10
        assert np.linalg.norm(R, 2) <= 1.0 / 0.25 + 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(SpecError):
            gamma_N(np.zeros((10, 10)), QPoint(eta=1j, z=0.0, m=2))

    def test_matrix_stieltjes_shape(self):
        with pytest.raises(SpecError):
            MatrixStieltjes(np.zeros((3, 3)))
