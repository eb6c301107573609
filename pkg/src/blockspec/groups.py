"""Block laws: samplers on matrix groups and the Sl(d) singular-value densities.

Each law exists in two forms that produce identical output:

* ``sample_block(stream, law)`` draws one block from a stream;
* ``sample_blocks(keys, law)`` draws one block per substream key, vectorized.
  Row ``r`` equals ``sample_block`` on a fresh stream with key ``keys[r]``.

All laws start from a ``d x d`` matrix of standard normals taken from the
beginning of the stream (row-major), so ``haar-orthogonal`` and
``qr-naive-orthogonal`` on the same stream share their Gaussian input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream, gaussian_from_keys

KINDS = (
    "haar-orthogonal",
    "haar-special-orthogonal",
    "qr-naive-orthogonal",
    "sl",
    "goe-block",
    "gaussian-iid",
)

_ALIASES = {
    "o-haar": "haar-orthogonal",
    "so-haar": "haar-special-orthogonal",
    "o-qr-naive": "qr-naive-orthogonal",
    "sl": "sl",
    "goe": "goe-block",
    "gauss-iid": "gaussian-iid",
}
_SHORT = {v: k for k, v in _ALIASES.items()}

DET_FLOOR = 1e-300
_MAX_RESAMPLE = 1000


@dataclass(frozen=True)
class BlockLaw:
    """Law of one ``d x d`` block.

    ``sl_flip`` selects how a negative determinant is fixed for ``kind="sl"``:
    ``"first"`` negates the first column; ``"random"`` negates the whole
    matrix for odd ``d`` and a uniformly chosen column for even ``d``.
    """

    kind: str
    d: int
    sl_flip: str = "first"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown block law {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"block dimension must be a positive integer, got {self.d}")
        if self.kind == "sl" and self.d < 2:
            raise ValueError("sl law requires d >= 2")
        if self.sl_flip not in ("first", "random"):
            raise ValueError(f"sl_flip must be 'first' or 'random', got {self.sl_flip!r}")

    def __str__(self):
        return f"{_SHORT[self.kind]}:{self.d}"

    @property
    def is_symmetric(self) -> bool:
        return self.kind == "goe-block"


def parse_law(text: str, sl_flip: str = "first") -> BlockLaw:
    """Parse ``"so-haar:2"``-style strings (short aliases or full kind names)."""
    name, sep, dim = text.strip().partition(":")
    if not sep:
        raise ValueError(f"block law {text!r} needs a ':d' suffix, e.g. 'so-haar:2'")
    kind = _ALIASES.get(name, name)
    if kind not in KINDS:
        raise ValueError(f"unknown block law {name!r}; expected one of {sorted(_ALIASES)}")
    try:
        d = int(dim)
    except ValueError:
        raise ValueError(f"block dimension in {text!r} is not an integer") from None
    return BlockLaw(kind, d, sl_flip=sl_flip)


# -- primitive samplers (single stream) -------------------------------------

def gaussian_matrix(s: RandomStream, rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return s.gaussian((rows, cols))


def haar_orthogonal(s: RandomStream, d: int) -> np.ndarray:
    return _haar_from_gaussian(gaussian_matrix(s, d, d)[None])[0]


def haar_special_orthogonal(s: RandomStream, d: int) -> np.ndarray:
    return _so_from_gaussian(gaussian_matrix(s, d, d)[None])[0]


def qr_orthogonal_naive(s: RandomStream, d: int) -> np.ndarray:
    """Q factor of a Gaussian matrix exactly as LAPACK returns it.

    LAPACK's Householder QR (``dgeqrf``) reflects each column onto
    ``-sign(x_1) * |x| e_1``, so ``R`` gets a diagonal of sign opposite to the
    pivot entry and no correction is applied.  Not Haar: ``E[Q] != 0``.
    """
    g = gaussian_matrix(s, d, d)
    return np.linalg.qr(g[None])[0][0]


def rotation2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def sl_matrix(s: RandomStream, d: int, flip: str = "first") -> np.ndarray:
    """``|det G|^{-1/d} G`` with a sign fix so that ``det = +1``."""
    if d < 2:
        raise ValueError("sl_matrix requires d >= 2")
    for _ in range(_MAX_RESAMPLE):
        g = gaussian_matrix(s, d, d)[None]
        det = np.linalg.det(g)
        if abs(det[0]) > DET_FLOOR:
            break
    else:  # pragma: no cover - probability zero
        raise RuntimeError("could not draw a non-singular Gaussian matrix")
    # same array expression as the batched path, for bit-identical output
    b = (g / np.abs(det)[:, None, None] ** (1.0 / d))[0]
    if det[0] < 0:
        _flip_sign(b, d, flip, s)
    return b


def _flip_sign(b: np.ndarray, d: int, flip: str, s: RandomStream) -> None:
    if flip == "first":
        b[:, 0] = -b[:, 0]
    elif d % 2 == 1:
        b *= -1.0
    else:
        col = min(int(s.uniform() * d), d - 1)
        b[:, col] = -b[:, col]


def goe_block(s: RandomStream, d: int) -> np.ndarray:
    """Symmetric ``(G + G^T)/sqrt(2)``: off-diagonal variance 1, diagonal 2."""
    return _goe_from_gaussian(gaussian_matrix(s, d, d)[None])[0]


def bartlett_T(s: RandomStream, d: int) -> np.ndarray:
    """Upper-triangular Bartlett factor of a ``Wishart_d(d, I)`` matrix.

    Draw order: the d diagonal chi-squares (``T_ii^2 ~ chi2_{d-i+1}``, 1-based
    i) then the strictly upper entries row by row.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    t = np.zeros((d, d))
    for i in range(d):
        t[i, i] = math.sqrt(s.chi_square(d - i))
    iu = np.triu_indices(d, 1)
    if iu[0].size:
        t[iu] = s.gaussian(iu[0].size)
    return t


# -- batched transforms ------------------------------------------------------

def _haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2)).copy()
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _so_from_gaussian(g: np.ndarray) -> np.ndarray:
    q = _haar_from_gaussian(g)
    neg = np.linalg.det(q) < 0
    q[neg, :, -1] *= -1.0
    return q


def _goe_from_gaussian(g: np.ndarray) -> np.ndarray:
    return (g + np.swapaxes(g, 1, 2)) / math.sqrt(2.0)


def sample_block(s: RandomStream, law: BlockLaw) -> np.ndarray:
    d = law.d
    if law.kind == "gaussian-iid":
        return gaussian_matrix(s, d, d)
    if law.kind == "haar-orthogonal":
        return haar_orthogonal(s, d)
    if law.kind == "haar-special-orthogonal":
        return haar_special_orthogonal(s, d)
    if law.kind == "qr-naive-orthogonal":
        return qr_orthogonal_naive(s, d)
    if law.kind == "sl":
        return sl_matrix(s, d, law.sl_flip)
    return goe_block(s, d)


def sample_blocks(keys: np.ndarray, law: BlockLaw) -> np.ndarray:
    """One block per substream key; shape ``(len(keys), d, d)``."""
    d = law.d
    keys = np.asarray(keys)
    if len(keys) == 0:
        return np.zeros((0, d, d))
    g = gaussian_from_keys(keys, d * d).reshape(-1, d, d)
    if law.kind == "gaussian-iid":
        return g
    if law.kind == "haar-orthogonal":
        return _haar_from_gaussian(g)
    if law.kind == "haar-special-orthogonal":
        return _so_from_gaussian(g)
    if law.kind == "qr-naive-orthogonal":
        return np.linalg.qr(g)[0]
    if law.kind == "goe-block":
        return _goe_from_gaussian(g)
    return _sl_batch(keys, g, law)


def _sl_batch(keys, g, law):
    d = law.d
    det = np.linalg.det(g)
    b = g / np.abs(det)[:, None, None] ** (1.0 / d)
    neg = det < 0
    if law.sl_flip == "first":
        b[neg, :, 0] *= -1.0
    elif d % 2 == 1:
        b[neg] *= -1.0
    # rows needing a column draw or a resample replay the scalar path
    redo = np.abs(det) <= DET_FLOOR
    if law.sl_flip == "random" and d % 2 == 0:
        redo |= neg
    for r in np.flatnonzero(redo):
        b[r] = sl_matrix(RandomStream(0, (), _key=keys[r]), d, law.sl_flip)
    return b


def draw_many(s: RandomStream, law: BlockLaw, reps: int) -> np.ndarray:
    """``reps`` blocks, replicate ``r`` drawn from ``split(s, r)``."""
    return sample_blocks(s.child_keys(np.arange(reps)), law)


# -- Sl(d) singular-value densities -----------------------------------------

def sl2_top_density(y: float) -> float:
    """Density of the top eigenvalue of ``B^T B`` for ``B`` in Sl(2)."""
    if y <= 1.0:
        return 0.0
    return 2.0 * (1.0 - y**-2) / (y + 1.0 / y) ** 2


def sl2_top_survival(t: float) -> float:
    """Closed-form tail ``P(y_1 > t) = 2 / (t + 1/t)`` for ``t >= 1``."""
    if t <= 1.0:
        return 1.0
    return 2.0 / (t + 1.0 / t)


def sl_joint_density_unnormalized(y) -> float:
    """Unnormalized joint density of the ``d-1`` largest eigenvalues of ``B^T B``.

    ``y`` must be strictly decreasing and positive; ``d = len(y) + 1``.
    Returns 0 outside the feasible region ``prod(y) > 1 / y[-1]``.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y must be a non-empty 1-d sequence")
    if np.any(np.diff(y) >= 0):
        raise ValueError("y must be strictly decreasing")
    if y[-1] <= 0:
        raise ValueError("y must be positive")
    d = y.size + 1
    prod = float(np.prod(y))
    if prod * y[-1] <= 1.0:
        return 0.0
    alpha = 1.0 / prod
    gamma = 0.5 * (float(np.sum(y)) + alpha)
    vandermonde = 1.0
    for i in range(y.size):
        for j in range(i + 1, y.size):
            vandermonde *= y[i] - y[j]
    r = alpha * vandermonde * float(np.prod(y - alpha))
    return r / gamma ** (d * d / 2.0)
