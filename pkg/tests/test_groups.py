import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from blockspec.groups import (
    BlockLaw,
    bartlett_T,
    draw_many,
    goe_block,
    haar_orthogonal,
    haar_special_orthogonal,
    parse_law,
    qr_orthogonal_naive,
    rotation2,
    sample_block,
    sample_blocks,
    sl2_top_density,
    sl2_top_survival,
    sl_joint_density_unnormalized,
    sl_matrix,
)
from blockspec.rng import make_stream

LAWS = ["o-haar:2", "o-haar:3", "so-haar:2", "so-haar:4", "o-qr-naive:2", "o-qr-naive:3",
        "sl:2", "sl:3", "sl:4", "sl:5", "goe:2", "gauss-iid:3"]


def test_parse_law_round_trip_and_errors():
    law = parse_law("so-haar:2")
    assert law == BlockLaw("haar-special-orthogonal", 2)
    assert str(law) == "so-haar:2"
    assert parse_law("haar-orthogonal:3") == BlockLaw("haar-orthogonal", 3)
    for bad in ("so-haar", "unitary:2", "so-haar:x", "so-haar:0", "sl:1"):
        with pytest.raises(ValueError):
            parse_law(bad)


@pytest.mark.parametrize("text", LAWS)
def test_batched_and_single_paths_agree(text):
    law = parse_law(text)
    root = make_stream(99)
    batch = sample_blocks(root.child_keys(np.arange(25)), law)
    for r in range(25):
        assert np.array_equal(batch[r], sample_block(root.split(r), law))


def test_batched_random_flip_agrees():
    for d in (2, 3, 4):
        law = BlockLaw("sl", d, sl_flip="random")
        root = make_stream(4)
        batch = sample_blocks(root.child_keys(np.arange(40)), law)
        for r in range(40):
            assert np.array_equal(batch[r], sample_block(root.split(r), law))


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_orthogonal_samplers_are_orthogonal(d):
    s = make_stream(d)
    for sampler in (haar_orthogonal, haar_special_orthogonal, qr_orthogonal_naive):
        q = sampler(s, d)
        assert np.max(np.abs(q.T @ q - np.eye(d))) < 1e-12
    assert np.linalg.det(haar_special_orthogonal(s, d)) == pytest.approx(1.0, abs=1e-12)


def test_haar_orthogonal_has_both_determinant_signs():
    q = draw_many(make_stream(1), BlockLaw("haar-orthogonal", 3), 2000)
    frac = np.mean(np.linalg.det(q) > 0)
    assert abs(frac - 0.5) < 3 * 0.5 / math.sqrt(2000)


def test_naive_qr_mean_is_reflector_mean():
    # d=2 LAPACK Q is a reflector diag(-c, c)-like; its mean is diag(-2/pi, 2/pi)
    q = draw_many(make_stream(5), BlockLaw("qr-naive-orthogonal", 2), 100_000)
    band = 3 * q.std(axis=0) / math.sqrt(q.shape[0])
    target = np.diag([-2 / math.pi, 2 / math.pi])
    assert np.all(np.abs(q.mean(axis=0) - target) <= band)
    assert np.allclose(np.linalg.det(q), -1.0)


def test_haar_mean_is_zero():
    q = draw_many(make_stream(6), BlockLaw("haar-special-orthogonal", 2), 100_000)
    band = 3 * q.std(axis=0) / math.sqrt(q.shape[0])
    assert np.all(np.abs(q.mean(axis=0)) <= band)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("flip", ["first", "random"])
def test_sl_has_unit_determinant(d, flip):
    s = make_stream(10 * d)
    for _ in range(50):
        assert np.linalg.det(sl_matrix(s, d, flip)) == pytest.approx(1.0, rel=1e-10)


def test_sl_random_flip_for_odd_d_negates_matrix():
    # with a negative-determinant draw, the random variant for odd d is -|det|^{-1/d} G
    for seed in range(40):
        g = make_stream(seed).gaussian((3, 3))
        det = np.linalg.det(g)
        if det < 0:
            b = sl_matrix(make_stream(seed), 3, "random")
            assert np.allclose(b, -g / abs(det) ** (1 / 3))
            return
    pytest.fail("no negative determinant draw found")


def test_goe_block_symmetric_with_variances():
    b = draw_many(make_stream(2), BlockLaw("goe-block", 2), 50_000)
    assert np.array_equal(b, np.swapaxes(b, 1, 2))
    assert b[:, 0, 0].var() == pytest.approx(2.0, rel=0.05)
    assert b[:, 0, 1].var() == pytest.approx(1.0, rel=0.05)
    assert np.array_equal(goe_block(make_stream(3), 2), sample_block(make_stream(3), BlockLaw("goe-block", 2)))


def test_rotation2():
    assert np.allclose(rotation2(math.pi / 2), [[0, -1], [1, 0]])


def test_bartlett_factor_gives_wishart_mean():
    d = 3
    s = make_stream(12)
    acc = np.zeros((d, d))
    reps = 20_000
    for r in range(reps):
        t = bartlett_T(s.split(r), d)
        assert np.all(np.tril(t, -1) == 0) and np.all(np.diag(t) > 0)
        acc += t.T @ t
    # E[T^T T] = d * I for Wishart_d(d, I)
    assert np.allclose(acc / reps, d * np.eye(d), atol=0.1)


def test_sl2_density_normalizes_and_matches_survival():
    total, _ = integrate.quad(sl2_top_density, 1, np.inf)
    assert total == pytest.approx(1.0, abs=1e-9)
    for t in (1.5, 10.0, 50.0):
        tail, _ = integrate.quad(sl2_top_density, t, np.inf)
        assert tail == pytest.approx(sl2_top_survival(t), rel=1e-8)
    assert sl2_top_density(0.5) == 0.0 and sl2_top_survival(0.5) == 1.0


def test_sl2_reference_tail_values():
    # quadrature values quoted for the tail at t=10 and t=50
    assert integrate.quad(sl2_top_density, 10, np.inf)[0] == pytest.approx(0.197, abs=2e-3)
    assert integrate.quad(sl2_top_density, 50, np.inf)[0] == pytest.approx(0.0400, abs=2e-4)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.001, 1e4))
def test_joint_density_reduces_to_sl2_density(y):
    # for d=2 the joint density is proportional to the top-eigenvalue density (factor 2)
    assert sl_joint_density_unnormalized([y]) == pytest.approx(2 * sl2_top_density(y), rel=1e-12)


def test_joint_density_value_and_domain():
    assert sl_joint_density_unnormalized([4.0]) == pytest.approx(0.20761245674740483, rel=1e-14)
    assert sl_joint_density_unnormalized([0.9]) == 0.0
    with pytest.raises(ValueError):
        sl_joint_density_unnormalized([1.0, 2.0])
    with pytest.raises(ValueError):
        sl_joint_density_unnormalized([2.0, -1.0])


def test_sl2_top_eigenvalue_matches_density():
    b = draw_many(make_stream(21), BlockLaw("sl", 2), 50_000)
    y = np.linalg.eigvalsh(np.swapaxes(b, 1, 2) @ b)[:, -1]
    assert np.all(y >= 1 - 1e-12)
    for t in (2.0, 5.0):
        p = sl2_top_survival(t)
        assert abs(np.mean(y > t) - p) < 3 * math.sqrt(p * (1 - p) / y.size)
