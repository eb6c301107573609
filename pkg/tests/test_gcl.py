import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from blockspec import gcl
from blockspec.checks import brute_force_alignment
from blockspec.rng import make_stream


def test_surrogates_use_per_signal_substreams():
    s = make_stream(3)
    e = gcl.gen_surrogates(s, 5, 16)
    assert e.data.shape == (5, 16)
    assert np.array_equal(e.data[2], s.split(2).gaussian(16))
    with pytest.raises(ValueError):
        gcl.gen_surrogates(s, 1, 16)


def test_align_pair_recovers_known_shift():
    z = make_stream(1).gaussian(50)
    for l in (0, 1, 17, 49):
        for method in ("brute", "fft"):
            shift, rid = gcl.align_pair(np.roll(z, l), z, method)
            assert shift == l and rid == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        gcl.align_pair(z, z[:-1])
    with pytest.raises(ValueError):
        gcl.align_pair(z, z, "dtw")


def test_ties_go_to_smallest_shift():
    z = np.array([1.0, 0.0, 1.0, 0.0])
    assert gcl.align_pair(z, z) == (0, 0.0)
    assert gcl.align_pair(z, z, "fft") == (0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 40).flatmap(lambda p: st.tuples(
    arrays(np.float64, p, elements=st.integers(-3, 3).map(float)),
    arrays(np.float64, p, elements=st.integers(-3, 3).map(float)))))
def test_fft_path_equals_exhaustive_search_with_ties(pair):
    zi, zj = pair
    ref_l, ref_d = brute_force_alignment(zi, zj)
    for method in ("brute", "fft"):
        l, dist = gcl.align_pair(zi, zj, method)
        assert l == ref_l
        assert dist == pytest.approx(ref_d, rel=1e-12, abs=1e-12)


def test_align_all_structure_and_fast_path_identity():
    e = gcl.gen_surrogates(make_stream(4), 12, 37)
    fast = gcl.align_all(e, "fft")
    brute = gcl.align_all(e, "brute")
    assert np.array_equal(fast.shifts, brute.shifts) and np.array_equal(fast.rids, brute.rids)
    assert np.array_equal(fast.rids, fast.rids.T)
    assert np.all(np.diag(fast.rids) == 0)
    assert np.all((fast.shifts + fast.shifts.T) % 37 == 0)


def test_rid_invariant_under_cyclic_shifts():
    s = make_stream(5)
    zi, zj = s.gaussian(30), s.gaussian(30)
    _, r0 = gcl.align_pair(zi, zj)
    _, r1 = gcl.align_pair(np.roll(zi, 4), np.roll(zj, 11))
    assert r1 == pytest.approx(r0, rel=1e-12)


def test_epsilon_quantile():
    e = gcl.gen_surrogates(make_stream(6), 10, 20)
    a = gcl.align_all(e)
    rids = np.sort(a.upper()[3])
    eps = gcl.epsilon_from_quantile(a, 0.25)
    assert eps in rids
    assert gcl.epsilon_from_quantile(a, 0.25, squared=True) == eps * eps
    with pytest.raises(ValueError):
        gcl.epsilon_from_quantile(a, 1.0)


def test_S_D_and_spectrum_bounds():
    e = gcl.gen_surrogates(make_stream(7), 30, 64)
    a = gcl.align_all(e)
    eps = gcl.epsilon_from_quantile(a)
    s, d = gcl.build_S(a, eps), gcl.build_D(a, eps)
    assert np.array_equal(s, s.T)
    # each 2x2 block is w * rotation
    blk = s[0:2, 2:4]
    w = math.exp(-a.rids[0, 1] ** 2 / eps)
    theta = 2 * math.pi * a.shifts[0, 1] / 64
    assert np.allclose(blk, w * np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]))
    degree = gcl.affinities(a, eps).sum(axis=1)
    assert np.array_equal(np.diag(d), np.repeat(degree, 2))
    sp = gcl.gcl_spectrum(s, d)
    direct = np.sort(np.linalg.eigvals(np.linalg.solve(d, s)).real)
    assert np.allclose(sp.eigenvalues, direct, atol=1e-10)
    assert sp.eigenvalues[0] >= -1 - 1e-9 and sp.eigenvalues[-1] <= 1 + 1e-9
    with pytest.raises(ValueError):
        gcl.gcl_spectrum(s, np.zeros_like(d))
    with pytest.raises(ValueError):
        gcl.affinities(a, 0.0)


def test_null_statistics_and_errors():
    e = gcl.gen_surrogates(make_stream(8), 120, 200)
    a = gcl.align_all(e)
    uni = gcl.uniformity_test(a, 20)
    ind = gcl.pairwise_independence_test(a, None, 6)
    assert uni.dof == 19 and ind.dof == 25
    assert uni.pvalue > 1e-3 and ind.pvalue > 1e-3
    small = gcl.align_all(gcl.gen_surrogates(make_stream(9), 5, 10))
    with pytest.raises(ValueError):
        gcl.uniformity_test(small, 20)
    with pytest.raises(ValueError):
        gcl.pairwise_independence_test(small, 0, 6)


def test_uniformity_test_detects_concentrated_shifts():
    z = make_stream(10).gaussian(100)
    data = np.stack([np.roll(z, k % 3) + 1e-3 * make_stream(11).split(k).gaussian(100) for k in range(60)])
    a = gcl.align_all(gcl.SurrogateEnsemble(data))
    assert gcl.uniformity_test(a, 20).pvalue < 1e-6


def test_alignment_round_trip(tmp_path):
    a = gcl.align_all(gcl.gen_surrogates(make_stream(12), 15, 33))
    gcl.write_alignment(a, tmp_path / "al.csv", {"epsilon": 1.0})
    b = gcl.read_alignment(tmp_path / "al.csv")
    assert np.array_equal(a.shifts, b.shifts) and np.array_equal(a.rids, b.rids) and b.p == 33
