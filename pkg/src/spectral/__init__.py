from .eigen import (
    SpectralKind,
    SpectralSample,
    eigenvalues,
    singular_values,
    nu_measure,
    match_spectra,
    spectra_agree,
)
from .reference_qr import householder_hessenberg, hessenberg_qr_eigenvalues
from .resolvent import QPoint, MatrixStieltjes, hermitize, resolvent, gamma_N

__all__ = [
    'SpectralKind', 'SpectralSample', 'eigenvalues', 'singular_values', 'nu_measure',
    'match_spectra', 'spectra_agree', 'householder_hessenberg', 'hessenberg_qr_eigenvalues',
    'QPoint', 'MatrixStieltjes', 'hermitize', 'resolvent', 'gamma_N',
]
