"""Orbital integrals over Hermitian matrices and ergodic unitarily invariant measures."""

__version__ = "0.1.0"

from .ergodic import ErgodicParams, charfn_F, charfn_f, density_diag, taylor_coeffs_F
from .orbital import (
    Spectrum,
    orbital_charfn_det,
    orbital_charfn_onevar,
    orbital_charfn_series,
    taylor_coeff_onevar,
    taylor_coeffs_onevar,
)
from .symfunc import Partition, dim_sym, partitions

__all__ = [
    "ErgodicParams",
    "Partition",
    "Spectrum",
    "charfn_F",
    "charfn_f",
    "density_diag",
    "dim_sym",
    "orbital_charfn_det",
    "orbital_charfn_onevar",
    "orbital_charfn_series",
    "partitions",
    "taylor_coeff_onevar",
    "taylor_coeffs_F",
    "taylor_coeffs_onevar",
]
