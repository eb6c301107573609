import math

import numpy as np
import pytest

from blockspec.blocks import (
    BlockMatrixSpec,
    assemble,
    block_mean_estimate,
    diagonal_block_norm_bound_check,
    goe_diagonal_bound,
    goe_matrix,
    pair_index,
    strip,
)
from blockspec.checks import assemble_with_override
from blockspec.groups import BlockLaw, parse_law, sample_block
from blockspec.rng import make_stream


@pytest.mark.parametrize("law", ["so-haar:2", "o-qr-naive:2", "sl:3", "goe:2", "gauss-iid:2"])
@pytest.mark.parametrize("policy", ["zero", "sampled"])
def test_assembled_matrix_is_exactly_symmetric(law, policy):
    law = parse_law(law)
    m = assemble(make_stream(1), BlockMatrixSpec(7, law.d, law, policy))
    assert m.shape == (7 * law.d, 7 * law.d)
    assert np.array_equal(m, m.T)


def test_blocks_come_from_pair_substreams():
    law = parse_law("o-haar:2")
    s = make_stream(3)
    n, d = 5, 2
    m = assemble(s, BlockMatrixSpec(n, d, law, "zero", "none"))
    for i in range(n):
        assert np.all(m[i * d:(i + 1) * d, i * d:(i + 1) * d] == 0)
        for j in range(i + 1, n):
            expected = sample_block(s.split(pair_index(i, j, n)), law)
            assert np.array_equal(m[i * d:(i + 1) * d, j * d:(j + 1) * d], expected)


def test_scaling_by_inverse_sqrt_N():
    law = parse_law("so-haar:3")
    raw = assemble(make_stream(4), BlockMatrixSpec(6, 3, law, "zero", "none"))
    scaled = assemble(make_stream(4), BlockMatrixSpec(6, 3, law, "zero", "inv-sqrt-N"))
    assert np.allclose(scaled, raw / math.sqrt(18), rtol=0, atol=1e-16)


def test_single_block_with_zero_diagonal_is_zero():
    m = assemble(make_stream(0), BlockMatrixSpec(1, 2, "so-haar:2"))
    assert np.array_equal(m, np.zeros((2, 2)))


def test_spec_validation():
    with pytest.raises(ValueError):
        BlockMatrixSpec(0, 2, "so-haar:2")
    with pytest.raises(ValueError):
        BlockMatrixSpec(3, 3, "so-haar:2")
    with pytest.raises(ValueError):
        BlockMatrixSpec(3, 2, "so-haar:2", diagonal_policy="ones")
    with pytest.raises(ValueError):
        BlockMatrixSpec(3, 2, "bogus:2")


def test_strip_extracts_block_rows():
    m = np.arange(36.0).reshape(6, 6)
    assert np.array_equal(strip(m, 2, 2), m[2:4])
    with pytest.raises(IndexError):
        strip(m, 4, 2)
    with pytest.raises(IndexError):
        strip(m, 0, 2)
    with pytest.raises(ValueError):
        strip(m, 1, 4)


def test_redrawing_one_pair_changes_only_that_pair():
    spec = BlockMatrixSpec(4, 2, "o-haar:2", "zero", "none")
    s = make_stream(5)
    a = assemble(s, spec)
    b = assemble_with_override(s, spec, (0, 2), make_stream(6))
    changed = {(r // 2, c // 2) for r, c in np.argwhere(a != b)}
    assert changed == {(0, 2), (2, 0)}


def test_goe_matrix_entry_variances():
    m = np.stack([goe_matrix(make_stream(9).split(r), 30) for r in range(300)])
    assert np.array_equal(m, np.swapaxes(m, 1, 2))
    iu = np.triu_indices(30, 1)
    assert m[:, iu[0], iu[1]].var() == pytest.approx(1.0, rel=0.03)
    assert m[:, np.arange(30), np.arange(30)].var() == pytest.approx(2.0, rel=0.06)


def test_block_mean_estimate():
    s = make_stream(8)
    assert np.abs(block_mean_estimate(s.split(0), BlockLaw("haar-special-orthogonal", 2), 50_000)).max() < 0.02
    naive = block_mean_estimate(s.split(1), BlockLaw("qr-naive-orthogonal", 2), 50_000)
    assert naive[0, 0] == pytest.approx(-2 / math.pi, abs=0.02)
    assert naive[1, 1] == pytest.approx(2 / math.pi, abs=0.02)
    with pytest.raises(ValueError):
        block_mean_estimate(s, BlockLaw("gaussian-iid", 2), 0)


def test_goe_diagonal_bound():
    assert goe_diagonal_bound(1000, 2) == pytest.approx(math.sqrt(2 / 2000) * math.sqrt(2 * math.log(4000)))
    assert diagonal_block_norm_bound_check(make_stream(1), 50, 2, 20) >= 0.9
