"""Spectra of symmetric random block matrices with group-valued blocks."""

__version__ = "0.1.0"

from .blocks import BlockMatrixSpec, assemble, block_mean_estimate, diagonal_block_norm_bound_check, goe_matrix, strip
from .eigen import symmetric_eigh, sturm_eigenvalues, tridiagonalize
from .groups import BlockLaw, parse_law, sample_block, sample_blocks
from .rng import RandomStream, make_stream, next_chi_square, next_gaussian, next_uniform, split_stream
from .semicircle import SemicircleRef, sc_cdf, sc_density, sc_quantile, sc_stieltjes
from .spectral import (
    Spectrum,
    UpperHalfPoint,
    eig_symmetric,
    ks_distance,
    ks_two_sample,
    qq_pairs,
    rank_perturbation_check,
    stieltjes,
)

__all__ = [
    "BlockLaw",
    "BlockMatrixSpec",
    "RandomStream",
    "SemicircleRef",
    "Spectrum",
    "UpperHalfPoint",
    "assemble",
    "block_mean_estimate",
    "diagonal_block_norm_bound_check",
    "eig_symmetric",
    "goe_matrix",
    "ks_distance",
    "ks_two_sample",
    "make_stream",
    "next_chi_square",
    "next_gaussian",
    "next_uniform",
    "parse_law",
    "qq_pairs",
    "rank_perturbation_check",
    "sample_block",
    "sample_blocks",
    "sc_cdf",
    "sc_density",
    "sc_quantile",
    "sc_stieltjes",
    "split_stream",
    "stieltjes",
    "strip",
    "symmetric_eigh",
    "sturm_eigenvalues",
    "tridiagonalize",
]
