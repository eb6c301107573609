"""Symmetric block random matrices and block-level Monte Carlo diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import BlockLaw, parse_law, sample_blocks
from .rng import RandomStream

DIAGONAL_POLICIES = ("zero", "sampled")
SCALES = ("none", "inv-sqrt-N")


@dataclass(frozen=True)
class BlockMatrixSpec:
    n: int
    d: int
    law: BlockLaw
    diagonal_policy: str = "zero"
    scale: str = "inv-sqrt-N"

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if isinstance(self.law, str):
            object.__setattr__(self, "law", parse_law(self.law))
        if self.law.d != self.d:
            raise ValueError(f"law dimension {self.law.d} does not match d={self.d}")
        if self.diagonal_policy not in DIAGONAL_POLICIES:
            raise ValueError(f"diagonal_policy must be one of {DIAGONAL_POLICIES}")
        if self.scale not in SCALES:
            raise ValueError(f"scale must be one of {SCALES}")

    @property
    def N(self) -> int:
        return self.n * self.d

    def describe(self) -> dict:
        return {
            "law": str(self.law),
            "n": self.n,
            "d": self.d,
            "diagonal_policy": self.diagonal_policy,
            "scale": self.scale,
        }


def pair_index(i: int, j: int, n: int) -> int:
    """Substream index of block (i, j), 0-based, i <= j."""
    return i * n + j


def _off_diagonal_law(law: BlockLaw) -> BlockLaw:
    # A GOE matrix has i.i.d. N(0,1) entries off the block diagonal.
    if law.kind == "goe-block":
        return BlockLaw("gaussian-iid", law.d)
    return law


def assemble(s: RandomStream, spec: BlockMatrixSpec) -> np.ndarray:
    """Dense symmetric ``N x N`` matrix with i.i.d. blocks above the block diagonal.

    Block (i, j), i < j, comes from ``split(s, i*n + j)``; block (j, i) is its
    transpose.  Under ``diagonal_policy="sampled"`` block (i, i) comes from
    ``split(s, i*n + i)`` and is symmetrized as ``(B + B^T)/2`` unless the law
    is already symmetric.
    """
    n, d = spec.n, spec.d
    m = np.zeros((n, d, n, d))
    iu, ju = np.triu_indices(n, 1)
    if iu.size:
        keys = s.child_keys(pair_index(iu, ju, n))
        blocks = sample_blocks(keys, _off_diagonal_law(spec.law))
        m[iu, :, ju, :] = blocks
        m[ju, :, iu, :] = np.swapaxes(blocks, 1, 2)
    if spec.diagonal_policy == "sampled":
        idx = np.arange(n)
        diag = sample_blocks(s.child_keys(pair_index(idx, idx, n)), spec.law)
        if not spec.law.is_symmetric:
            diag = 0.5 * (diag + np.swapaxes(diag, 1, 2))
        m[idx, :, idx, :] = diag
    m = m.reshape(n * d, n * d)
    if spec.scale == "inv-sqrt-N":
        m /= math.sqrt(n * d)
    return m


def goe_matrix(s: RandomStream, dim: int) -> np.ndarray:
    """Full GOE matrix of size ``dim`` (unscaled): off-diagonal variance 1, diagonal 2."""
    spec = BlockMatrixSpec(dim, 1, BlockLaw("goe-block", 1), "sampled", "none")
    return assemble(s, spec)


def strip(m: np.ndarray, i: int, d: int) -> np.ndarray:
    """Block row ``i`` (1-based) of height ``d``."""
    n_rows = m.shape[0]
    if n_rows % d:
        raise ValueError(f"matrix dimension {n_rows} is not a multiple of d={d}")
    n = n_rows // d
    if not 1 <= i <= n:
        raise IndexError(f"strip index {i} outside 1..{n}")
    return m[(i - 1) * d : i * d, :]


def block_mean_estimate(s: RandomStream, law: BlockLaw, reps: int) -> np.ndarray:
    """Entrywise Monte Carlo mean of ``reps`` independent blocks."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    blocks = sample_blocks(s.child_keys(np.arange(reps)), law)
    return blocks.mean(axis=0)


def goe_diagonal_bound(n: int, d: int) -> float:
    """``sqrt(2/(nd)) * sqrt(2 log(n d^2))``: a.s. bound on the scaled GOE block-diagonal norm."""
    return math.sqrt(2.0 / (n * d)) * math.sqrt(2.0 * math.log(n * d * d))


def diagonal_block_norm_bound_check(
    s: RandomStream, n: int, d: int, reps: int, slack: float = 1.5
) -> float:
    """Fraction of replicates whose max GOE diagonal-block norm over sqrt(nd) is within the bound."""
    limit = slack * goe_diagonal_bound(n, d)
    law = BlockLaw("goe-block", d)
    hits = 0
    for r in range(reps):
        rep = s.split(r)
        blocks = sample_blocks(rep.child_keys(np.arange(n)), law)
        norms = np.abs(np.linalg.eigvalsh(blocks)).max(axis=1)
        if norms.max() / math.sqrt(n * d) <= limit:
            hits += 1
    return hits / reps
