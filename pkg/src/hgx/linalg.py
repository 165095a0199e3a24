"""Dense + sparse linear algebra kernels and a seeded, splittable RNG.

Dense matrices are plain 2-D ``numpy.ndarray``s (row-major, float64 by
default, float32 optional); sparse matrices are ``scipy.sparse.csr_array``
in canonical form (sorted indices, no duplicates, no explicit zeros).
Everything here is a pure function of its inputs, and bit-reproducible
for a fixed seed and thread configuration.
"""

from __future__ import annotations

import zlib

import numpy as np
import scipy.sparse as sp

EIGEN_SIZE_CAP = 2000

__all__ = [
    "EIGEN_SIZE_CAP",
    "Rng",
    "to_csr",
    "spmm",
    "symmetric_eigen",
    "max_singular_value",
    "elementwise_activation",
    "activation_derivative",
    "row_softmax",
]


class Rng:
    """Deterministic random source splittable into independent named streams.

    The same seed and the same sequence of calls produce bit-identical
    output. ``stream(name)`` derives a child whose state depends only on
    the root seed and the path of stream names, so concurrent consumers
    never share a generator.
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._path = _path
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=_path))
        )

    def stream(self, name: str) -> "Rng":
        """Child RNG for an independent named stream."""
        return Rng(self.seed, self._path + (zlib.crc32(name.encode("utf-8")),))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def random(self, size=None):
        return self._gen.random(size)

    def permutation(self, x):
        return self._gen.permutation(x)

    def choice(self, a, size=None, replace=True, p=None):
        return self._gen.choice(a, size=size, replace=replace, p=p)

    def poisson(self, lam, size=None):
        return self._gen.poisson(lam, size)


def to_csr(dense: np.ndarray) -> sp.csr_array:
    """Canonical CSR form of a dense matrix (no stored zeros, sorted indices)."""
    s = sp.csr_array(np.asarray(dense, dtype=np.float64))
    s.eliminate_zeros()
    s.sort_indices()
    return s


def spmm(s: sp.csr_array, d: np.ndarray) -> np.ndarray:
    """Sparse @ dense product with a fixed per-row accumulation order.

    ``d`` may be a vector (n,) or a matrix (n, m); the result has the
    same number of trailing dimensions.
    """
    d = np.asarray(d)
    n = d.shape[0]
    if s.shape[1] != n:
        raise ValueError(f"dimension mismatch: sparse is {s.shape}, dense has {n} rows")
    return s @ d


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def symmetric_eigen(a: np.ndarray, tol: float = 1e-10, size_cap: int = EIGEN_SIZE_CAP):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns, so ``a ≈ V @ diag(w) @ V.T``. Convergence is
    declared when the off-diagonal Frobenius norm falls below ``tol``.

    Raises ``ValueError`` if ``a`` is not symmetric within ``tol``, exceeds
    ``size_cap``, or the sweep limit is reached without convergence.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > size_cap:
        raise ValueError(f"matrix size {n} exceeds eigensolver cap {size_cap}")
    sym_err = float(np.max(np.abs(a - a.T))) if n > 0 else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if n > 0 else 1.0
    if sym_err > tol * scale:
        raise ValueError(f"matrix is not symmetric: max|A - A^T| = {sym_err:.3e}")

    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if n == 1:
        return a[0].copy(), np.ones((1, 1))

    w = 0.5 * (a + a.T)
    v = np.eye(n)
    max_sweeps = 50
    for _ in range(max_sweeps):
        if _off_diagonal_norm(w) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Stable rotation angle from the classic two-by-two solve.
                diff = w[q, q] - w[p, p]
                if abs(apq) < 1e-36 * abs(diff):
                    t = apq / diff
                else:
                    phi = diff / (2.0 * apq)
                    t = 1.0 / (abs(phi) + np.sqrt(phi * phi + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s_ = t * c

                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * row_p - s_ * row_q
                w[q, :] = s_ * row_p + c * row_q
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * col_p - s_ * col_q
                w[:, q] = s_ * col_p + c * col_q

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s_ * vq
                v[:, q] = s_ * vp + c * vq
    else:
        raise ValueError(f"Jacobi eigensolver failed to converge in {max_sweeps} sweeps")

    eigenvalues = np.diag(w).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def max_singular_value(m: np.ndarray, tol: float = 1e-10) -> float:
    """Largest singular value, computed from the eigenvalues of m^T m."""
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        return 0.0
    gram = m.T @ m
    gram = 0.5 * (gram + gram.T)
    eigenvalues, _ = symmetric_eigen(gram, tol=tol)
    return float(np.sqrt(max(eigenvalues[-1], 0.0)))


def elementwise_activation(x: np.ndarray, kind: str = "relu", slope: float = 0.01) -> np.ndarray:
    """Apply relu, leaky-relu(slope), or identity elementwise."""
    if kind == "identity":
        return x
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "leaky-relu":
        return np.where(x > 0.0, x, slope * x)
    raise ValueError(f"unknown activation kind: {kind!r}")


def activation_derivative(pre: np.ndarray, kind: str = "relu", slope: float = 0.01) -> np.ndarray:
    """Derivative of `elementwise_activation` at pre-activation values."""
    if kind == "identity":
        return np.ones_like(pre)
    if kind == "relu":
        return (pre > 0.0).astype(pre.dtype)
    if kind == "leaky-relu":
        return np.where(pre > 0.0, np.ones_like(pre), np.full_like(pre, slope))
    raise ValueError(f"unknown activation kind: {kind!r}")


def row_softmax(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for overflow safety."""
    x = np.asarray(x)
    shifted = x - np.max(x, axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=1, keepdims=True)
