"""Dense complex linear-algebra kernels.

Conventions used everywhere in the package:

* scalar product ``<x, y> = sum_k x_k * conj(y_k)`` (linear in the first slot),
  so ``<x, x> = ||x||**2`` and, for matrices, ``<a, b> = Tr(a b^*)``;
* ``proj(v) = v v^* / ||v||**2``;
* all kernels accept stacked inputs (leading batch axes) where noted.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidDimension, InvalidInput

ATOL_ALGEBRAIC = 1e-12
ATOL_STRUCTURAL = 1e-10
RANK_EPS = 2.0 ** -52


def _as_complex(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise InvalidInput("array has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def inner(x, y) -> complex | np.ndarray:
    """Scalar product over the last axis, conjugate-linear in ``y``."""
    return np.sum(np.asarray(x) * np.conj(np.asarray(y)), axis=-1)


def haar_unitaries(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent Haar unitaries, shape ``(size, n, n)``.

    A Ginibre matrix is orthonormalized by QR and each column of ``Q`` is
    multiplied by the phase of the matching diagonal entry of ``R``; without
    that correction the output is not Haar distributed.
    """
    if n < 1:
        raise InvalidDimension(f"unitary dimension must be >= 1, got {n}")
    if size < 0:
        raise InvalidDimension(f"sample count must be >= 0, got {size}")
    z = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one ``n x n`` Haar unitary from the stream ``rng``."""
    return haar_unitaries(n, 1, rng)[0]


def polar(m, return_min_singular: bool = False):
    """Unitary factor ``U`` of the polar decomposition ``M = U |M|``.

    Computed as ``A B^*`` from a full SVD ``M = A S B^*``, which coincides with
    ``M (M^* M)^{-1/2}`` for invertible ``M`` and stays unitary when ``M`` is
    singular. Works on stacks of square matrices.

    With ``return_min_singular=True`` the smallest singular value of each
    matrix is returned too (callers use it to flag degenerate inputs).
    """
    m = _as_complex(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise InvalidDimension(f"polar needs square matrices, got shape {m.shape}")
    a, s, bh = np.linalg.svd(m)
    u = a @ bh
    if return_min_singular:
        return u, s[..., -1]
    return u


def pinv_sqrt(p, rcond: float | None = None, tol: float = ATOL_STRUCTURAL, atol: float = 0.0) -> np.ndarray:
    """Moore-Penrose inverse square root of a Hermitian PSD matrix.

    Acts as ``P^{-1/2}`` on the range of ``P`` and as zero on its kernel.
    Eigenvalues at or below ``max(rcond * lambda_max, atol)`` count as zero;
    the default ``rcond`` is ``dim * 2**-52``.

    Raises
    ------
    InvalidInput
        If ``P`` is not Hermitian or has an eigenvalue below ``-tol``.
    """
    p = _as_complex(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {p.shape}")
    scale = max(1.0, float(np.abs(p).max(initial=0.0)))
    if np.abs(p - p.conj().T).max(initial=0.0) > tol * scale:
        raise InvalidInput("matrix is not Hermitian")
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    if w.size and w[0] < -tol * scale:
        raise InvalidInput(f"matrix has negative eigenvalue {w[0]:.3e}")
    if rcond is None:
        rcond = p.shape[0] * RANK_EPS
    cutoff = max(rcond * max(w.max(initial=0.0), 0.0), atol)
    keep = w > cutoff
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def proj(v) -> np.ndarray:
    """Rank-one orthogonal projection onto the span of ``v``.

    Accepts a stack of vectors (last axis is the vector) and returns the
    matching stack of projections.
    """
    v = _as_complex(v)
    norms = np.sum(np.abs(v) ** 2, axis=-1)
    if np.any(norms == 0):
        raise InvalidInput("cannot project onto the zero vector")
    return v[..., :, None] * np.conj(v[..., None, :]) / norms[..., None, None]


def gram(vectors) -> np.ndarray:
    """Gram matrix ``G[a, b] = <v_a, v_b>`` of a list of vectors."""
    if isinstance(vectors, np.ndarray):
        vs = vectors
    else:
        dims = {np.shape(v) for v in vectors}
        if len(dims) != 1:
            raise InvalidInput(f"vectors have mixed shapes {sorted(dims)}")
        vs = np.stack([np.asarray(v) for v in vectors])
    vs = _as_complex(vs)
    return vs @ vs.conj().T


def is_unitary(u, tol: float = ATOL_ALGEBRAIC) -> bool:
    u = np.asarray(u)
    if u.ndim < 2 or u.shape[-1] != u.shape[-2]:
        return False
    eye = np.eye(u.shape[-1])
    return bool(np.abs(dagger(u) @ u - eye).max() <= tol)


def is_projection(a, tol: float = ATOL_STRUCTURAL) -> bool:
    """Hermitian idempotent check, ``||A - A^*||`` and ``||A^2 - A||`` within ``tol``."""
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        return False
    herm = np.linalg.norm(a - dagger(a), ord=2, axis=(-2, -1)).max()
    idem = np.linalg.norm(a @ a - a, ord=2, axis=(-2, -1)).max()
    return bool(herm <= tol and idem <= tol)


def projection_rank(a) -> int:
    """Rank of a projection, read off as its rounded trace."""
    return int(round(float(np.real(np.trace(a)))))


def range_projection(p, cutoff: float = 1e-8) -> np.ndarray:
    """Orthogonal projection onto the span of eigenvectors with eigenvalue above ``cutoff``."""
    w, v = np.linalg.eigh((p + dagger(p)) / 2)
    keep = v[:, w > cutoff]
    return keep @ keep.conj().T


def numerical_rank(p, cutoff: float = 1e-8) -> int:
    """Number of eigenvalues of a Hermitian matrix above ``cutoff``."""
    return int(np.sum(np.linalg.eigvalsh((p + dagger(p)) / 2) > cutoff))
