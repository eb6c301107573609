"""Dense real-symmetric eigensolver.

Householder reduction to tridiagonal form followed by implicit-shift QL
iterations (Wilkinson shift).  A Sturm-sequence bisection on the tridiagonal
is kept alongside as an independent check of the QL stage.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _tridiagonalize(a, want_q):
    """Reduce symmetric ``a`` (overwritten) to tridiagonal ``(diag, off)``.

    Step k annihilates a[k+2:, k] with the reflector I - 2 v v^T acting on
    rows/columns k+1..n-1.  The sign of the reflector target is opposite to
    a[k+1, k] to avoid cancellation.  When ``want_q`` the orthogonal ``q``
    with ``q^T a_in q = T`` is accumulated.
    """
    n = a.shape[0]
    diag = np.zeros(n)
    off = np.zeros(max(n - 1, 0))
    vs = np.zeros((n, n))
    for k in range(n - 2):
        m = n - k - 1
        scale = 0.0
        for i in range(k + 1, n):
            scale += abs(a[i, k])
        if scale == 0.0:
            off[k] = 0.0
            continue
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += a[i, k] * a[i, k]
        norm = math.sqrt(norm2)
        x0 = a[k + 1, k]
        alpha = -norm if x0 >= 0.0 else norm
        v = np.empty(m)
        v[0] = x0 - alpha
        for i in range(1, m):
            v[i] = a[k + 1 + i, k]
        vnorm2 = norm2 - x0 * x0 + v[0] * v[0]
        if vnorm2 == 0.0:
            off[k] = a[k + 1, k]
            continue
        vnorm = math.sqrt(vnorm2)
        for i in range(m):
            v[i] /= vnorm
            vs[k, k + 1 + i] = v[i]
        # p = A22 v, w = 2p - 2(v.p) v, A22 -= v w^T + w v^T
        p = np.zeros(m)
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = s
        vp = 0.0
        for i in range(m):
            vp += v[i] * p[i]
        w = np.empty(m)
        for i in range(m):
            w[i] = 2.0 * p[i] - 2.0 * vp * v[i]
        for i in range(m):
            vi = v[i]
            wi = w[i]
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= vi * w[j] + wi * v[j]
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
        off[k] = alpha
    for i in range(n):
        diag[i] = a[i, i]
    if n >= 2:
        off[n - 2] = a[n - 1, n - 2]
    q = np.eye(n)
    if want_q:
        # q = H_0 H_1 ... H_{n-3}; apply right to left.
        for k in range(n - 3, -1, -1):
            for j in range(n):
                s = 0.0
                for i in range(k + 1, n):
                    s += vs[k, i] * q[i, j]
                if s != 0.0:
                    for i in range(k + 1, n):
                        q[i, j] -= 2.0 * vs[k, i] * s
    return diag, off, q


@njit(cache=True)
def _ql_implicit(d, e_in, z, want_z):
    """Eigenvalues of the symmetric tridiagonal (d, e) by implicit QL.

    ``d`` is overwritten with eigenvalues (unsorted).  When ``want_z`` the
    plane rotations are accumulated into the columns of ``z``.
    Returns the number of eigenvalues that failed to converge (0 on success).
    """
    n = d.shape[0]
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_in[i]
    anorm = 0.0
    for i in range(n):
        anorm = max(anorm, abs(d[i]) + abs(e[i]))
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                # relative to the neighbours, or negligible against the whole matrix
                if abs(e[m]) <= 2.220446049250313e-16 * dd or abs(e[m]) <= 2.220446049250313e-16 * anorm:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return n - l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_z:
                    for k in range(z.shape[0]):
                        f = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * f
                        z[k, i] = c * z[k, i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def tridiagonalize(a: np.ndarray, want_q: bool = False):
    """Return ``(diag, off, q)`` with ``q.T @ a @ q`` tridiagonal."""
    work = np.array(a, dtype=np.float64, copy=True, order="C")
    return _tridiagonalize(work, want_q)


def _power_of_two_scale(x: np.ndarray) -> float:
    # exact rescaling that keeps the iteration away from underflow and overflow
    top = float(np.max(np.abs(x))) if x.size else 0.0
    if top == 0.0 or not math.isfinite(top):
        return 1.0
    return math.ldexp(1.0, -math.frexp(top)[1])


def tridiagonal_eigenvalues(diag, off) -> np.ndarray:
    d = np.array(diag, dtype=np.float64, copy=True)
    e = np.array(off, dtype=np.float64, copy=True)
    scale = _power_of_two_scale(np.concatenate([d, e]))
    d *= scale
    fails = _ql_implicit(d, e * scale, np.zeros((0, 0)), False)
    if fails:
        raise np.linalg.LinAlgError(f"QL iteration did not converge ({fails} eigenvalues)")
    return np.sort(d) / scale


def symmetric_eigh(a: np.ndarray, vectors: bool = False):
    """Eigenvalues (ascending) and optionally eigenvectors of symmetric ``a``.

    Only the values are used by the public API; vectors exist so residuals can
    be checked.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return (np.zeros(0), np.zeros((0, 0))) if vectors else np.zeros(0)
    scale = _power_of_two_scale(a)
    diag, off, q = tridiagonalize(a * scale, want_q=vectors)
    d = diag.copy()
    z = q if vectors else np.zeros((0, 0))
    fails = _ql_implicit(d, off, z, vectors)
    if fails:
        raise np.linalg.LinAlgError(f"QL iteration did not converge ({fails} eigenvalues)")
    d /= scale
    order = np.argsort(d, kind="stable")
    if vectors:
        return d[order], z[:, order]
    return d[order]


@njit(cache=True)
def _sturm_count(diag, off, x):
    """Number of eigenvalues of the tridiagonal strictly below ``x``."""
    count = 0
    q = 1.0
    for i in range(diag.shape[0]):
        e2 = off[i - 1] * off[i - 1] if i > 0 else 0.0
        q = diag[i] - x - (e2 / q if i > 0 else 0.0)
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect_all(diag, off, lo, hi, tol):
    n = diag.shape[0]
    out = np.empty(n)
    for k in range(n):
        a = lo
        b = hi
        while b - a > tol * max(1.0, abs(a) + abs(b)):
            mid = 0.5 * (a + b)
            if _sturm_count(diag, off, mid) > k:
                b = mid
            else:
                a = mid
        out[k] = 0.5 * (a + b)
    return out


def sturm_eigenvalues(diag, off, tol: float = 1e-14) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal by Sturm-count bisection."""
    diag = np.asarray(diag, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    n = diag.shape[0]
    if n == 0:
        return np.zeros(0)
    radius = np.zeros(n)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo = float(np.min(diag - radius)) - 1e-12
    hi = float(np.max(diag + radius)) + 1e-12
    return _bisect_all(diag, off, lo, hi, tol)
