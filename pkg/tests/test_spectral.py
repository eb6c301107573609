import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from blockspec.blocks import goe_matrix
from blockspec.eigen import symmetric_eigh, sturm_eigenvalues, tridiagonal_eigenvalues, tridiagonalize
from blockspec.rng import make_stream
from blockspec.spectral import (
    Spectrum,
    UpperHalfPoint,
    eig_symmetric,
    ks_distance,
    ks_two_sample,
    numerical_rank,
    qq_levels,
    qq_pairs,
    quantiles,
    rank_perturbation_check,
    read_spectrum,
    stieltjes,
    write_spectrum,
)


def test_small_known_spectra():
    assert np.allclose(symmetric_eigh(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    assert np.allclose(symmetric_eigh(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1, 1])
    assert np.allclose(symmetric_eigh(np.array([[5.0]])), [5.0])


@pytest.mark.parametrize("dim", [2, 3, 10, 50, 120])
def test_eigensolver_matches_lapack(dim):
    m = goe_matrix(make_stream(dim), dim)
    ev, vec = symmetric_eigh(m, vectors=True)
    assert np.all(np.diff(ev) >= 0)
    assert np.max(np.abs(ev - np.linalg.eigvalsh(m))) < 1e-10 * dim
    assert np.max(np.abs(m @ vec - vec * ev)) < 1e-10 * dim
    assert np.max(np.abs(vec.T @ vec - np.eye(dim))) < 1e-12 * dim


def test_tridiagonalization_is_a_similarity():
    m = goe_matrix(make_stream(1), 40)
    diag, off, q = tridiagonalize(m, want_q=True)
    t = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    assert np.max(np.abs(q.T @ m @ q - t)) < 1e-12
    assert np.max(np.abs(tridiagonal_eigenvalues(diag, off) - sturm_eigenvalues(diag, off))) < 1e-12


def test_repeated_eigenvalues():
    q = np.linalg.qr(make_stream(2).gaussian((8, 8)))[0]
    m = q @ np.diag([1.0, 1.0, 1.0, 2.0, 2.0, -3.0, 0.0, 0.0]) @ q.T
    m = 0.5 * (m + m.T)
    assert np.allclose(eig_symmetric(m).eigenvalues, [-3, 0, 0, 1, 1, 1, 2, 2], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-100, 100)))
def test_property_trace_and_frobenius(a):
    m = a + a.T
    ev = eig_symmetric(m).eigenvalues
    scale = 1 + np.abs(m).sum()
    assert abs(ev.sum() - np.trace(m)) <= 1e-10 * scale
    assert abs(np.sum(ev**2) - np.sum(m * m)) <= 1e-10 * scale**2
    diag, off, _ = tridiagonalize(m)
    assert np.allclose(ev, sturm_eigenvalues(diag, off), atol=1e-9 * scale)


def test_eig_symmetric_rejects_bad_input():
    with pytest.raises(ValueError):
        eig_symmetric(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        eig_symmetric(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_stieltjes_matches_direct_resolvent_and_herglotz():
    m = goe_matrix(make_stream(3), 20)
    sp = eig_symmetric(m)
    for z in (0.3 + 0.1j, -1.0 + 2.0j, 5.0 + 0.01j):
        direct = np.trace(np.linalg.inv(m - z * np.eye(20))) / 20
        assert abs(stieltjes(sp, z) - direct) < 1e-12
        assert stieltjes(sp, z).imag > 0
    assert stieltjes(sp, UpperHalfPoint(0.0, 1.0)) == stieltjes(sp, 1j)
    with pytest.raises(ValueError):
        stieltjes(sp, 1.0 + 0j)


def test_upper_half_point_parsing():
    assert UpperHalfPoint.parse("0.2+0.5i") == UpperHalfPoint(0.2, 0.5)
    assert UpperHalfPoint.parse("1i").z == 1j
    with pytest.raises(ValueError):
        UpperHalfPoint.parse("1-2i")
    with pytest.raises(ValueError):
        UpperHalfPoint(0.0, 0.0)


def test_ks_distance_against_uniform():
    sp = Spectrum(np.array([0.1, 0.4, 0.7]))
    # ECDF jumps to 1/3, 2/3, 1 at the points; largest gap is 1/3 - 0.1 ... max = 0.3
    assert ks_distance(sp, lambda x: np.clip(x, 0, 1)) == pytest.approx(max(1 / 3 - 0.1, 2 / 3 - 0.4, 1 - 0.7, 0.1, 0.4 - 1 / 3, 0.7 - 2 / 3))


def test_ks_two_sample_identical_and_disjoint():
    a = Spectrum(np.arange(10.0))
    assert ks_two_sample(a, a) == 0.0
    assert ks_two_sample(a, Spectrum(np.arange(10.0) + 100)) == 1.0


def test_qq_pairs_identical_spectra_lie_on_diagonal():
    sp = Spectrum(make_stream(1).gaussian(50))
    pairs = qq_pairs(sp, sp)
    assert np.array_equal(pairs[:, 0], pairs[:, 1])
    assert np.allclose(qq_levels(4), [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(quantiles(np.arange(4.0), qq_levels(4)), np.arange(4.0))
    with pytest.raises(ValueError):
        qq_pairs(Spectrum(np.array([])), sp)


def _low_rank(seed, dim, r):
    q = np.linalg.qr(make_stream(seed).gaussian((dim, r)))[0]
    return q @ np.diag(np.arange(1.0, r + 1)) @ q.T


@pytest.mark.parametrize("r", [1, 2, 5])
def test_rank_perturbation_bound(r):
    a = goe_matrix(make_stream(7), 25)
    delta = _low_rank(r, 25, r)
    delta = 0.5 * (delta + delta.T)
    assert numerical_rank(delta) == r
    res = rank_perturbation_check(a, a + delta, 0.2 + 0.5j)
    assert res.ok and res.lhs <= res.bound
    assert res.bound == pytest.approx(r / 0.5)


def test_spectrum_round_trip(tmp_path):
    sp = Spectrum(make_stream(2).gaussian(33), {"law": "so-haar:2", "n": 3})
    write_spectrum(sp, tmp_path / "ev.csv")
    back = read_spectrum(tmp_path / "ev.csv")
    assert np.array_equal(back.eigenvalues, sp.eigenvalues)
    assert back.meta == sp.meta
    assert (tmp_path / "ev.csv").read_bytes().count(b"\r") == 0


def test_shifted_spectrum():
    sp = Spectrum(np.array([1.0, 2.0]))
    assert np.array_equal(sp.shifted(1.0, -2.0).eigenvalues, [-3.0, -1.0])
