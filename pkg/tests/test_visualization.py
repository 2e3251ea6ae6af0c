import numpy as np
import pytest

from src.dyson import LimitLaw, invert_stieltjes
from src.spectral import eigenvalues, singular_values
from src.utils.errors import ExportError, SpecError
from src.visualization.plotter import SpectrumPlotter


@pytest.fixture
def sample(rng):
    return eigenvalues(rng.standard_normal((30, 30)) / np.sqrt(30))


def test_eigenvalue_scatter(tmp_path, sample):
    path = SpectrumPlotter(sample, LimitLaw.elliptic(0.3)).plot_eigenvalues(tmp_path / 'eig.png')
    assert path.read_bytes()[:4] == b'\x89PNG'


def test_radial_plot(tmp_path, sample):
    path = SpectrumPlotter(sample, LimitLaw.product(1)).plot_radial(tmp_path / 'radial.png')
    assert path.stat().st_size > 0


def test_density_plot(tmp_path):
    path = SpectrumPlotter.plot_density(invert_stieltjes(0.5, points=201), tmp_path / 'rho.png')
    assert path.exists()


def test_singular_sample_rejected(tmp_path, rng):
    plotter = SpectrumPlotter(singular_values(rng.standard_normal((4, 4))))
    with pytest.raises(SpecError):
        plotter.plot_eigenvalues(tmp_path / 'eig.png')


def test_unwritable_figure(tmp_path, sample):
    with pytest.raises(ExportError):
        SpectrumPlotter(sample).plot_eigenvalues(tmp_path / 'missing' / 'eig.png')
