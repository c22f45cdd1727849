"""Magic bases, flat magic unitaries and their constructors.

Shapes used throughout:

* a *vector grid* is an array ``(N, N, d)``; ``grid[i, j]`` is the unit vector
  in cell ``(i, j)``. It is a magic basis when every row ``grid[i, :]`` and
  every column ``grid[:, j]`` is an orthonormal basis of ``C^d`` (``d = N``);
* a *magic unitary* is an array ``(N, N, K, K)`` of projections.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInput
from .groups import OrthonormalUnitaryBasis, is_latin_square
from .linalg import ATOL_STRUCTURAL, dagger, proj


def _spectral_defect(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


def _hermitian_defect(a: np.ndarray) -> np.ndarray:
    # spectral norm of Hermitian matrices via eigenvalues (cheaper than an SVD)
    return np.abs(np.linalg.eigvalsh(a)).max(axis=-1)


def row_grams(grid) -> np.ndarray:
    """``out[i, j, k] = <grid[i, j], grid[i, k]>`` (Gram of each row)."""
    g = np.asarray(grid)
    return np.einsum("...ijd,...ikd->...ijk", g, np.conj(g))


def col_grams(grid) -> np.ndarray:
    """``out[j, i, k] = <grid[i, j], grid[k, j]>`` (Gram of each column)."""
    g = np.asarray(grid)
    return np.einsum("...ijd,...kjd->...jik", g, np.conj(g))


def row_defect(grid) -> float | np.ndarray:
    """Largest spectral-norm deviation of a row Gram matrix from the identity."""
    gr = row_grams(grid)
    return _hermitian_defect(gr - np.eye(gr.shape[-1])).max(axis=-1)


def col_defect(grid) -> float | np.ndarray:
    gc = col_grams(grid)
    return _hermitian_defect(gc - np.eye(gc.shape[-1])).max(axis=-1)


def rows_orthonormal(grid, tol: float = ATOL_STRUCTURAL) -> bool:
    return bool(row_defect(grid) <= tol)


def cols_orthonormal(grid, tol: float = ATOL_STRUCTURAL) -> bool:
    return bool(col_defect(grid) <= tol)


def is_magic_basis(grid, tol: float = ATOL_STRUCTURAL) -> bool:
    g = np.asarray(grid)
    if g.ndim != 3 or g.shape[0] != g.shape[1]:
        return False
    return rows_orthonormal(g, tol) and cols_orthonormal(g, tol)


def validate_grid(grid, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Check shape ``(N, N, d)``, finiteness and unit norm of every cell."""
    g = np.asarray(grid, dtype=complex)
    if g.ndim != 3 or g.shape[0] != g.shape[1]:
        raise InvalidInput(f"vector grid must have shape (N, N, d), got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise InvalidInput("vector grid has non-finite entries")
    norms = np.linalg.norm(g, axis=-1)
    if np.abs(norms - 1).max() > tol:
        raise InvalidInput(f"grid cells are not unit vectors (defect {np.abs(norms - 1).max():.3e})")
    return g


def phase_rescale(grid, phases) -> np.ndarray:
    """Multiply cell ``(i, j)`` by the unimodular scalar ``phases[i, j]``."""
    return np.asarray(grid) * np.asarray(phases)[..., None]


def transpose_grid(grid) -> np.ndarray:
    return np.swapaxes(np.asarray(grid), 0, 1)


@dataclass(frozen=True)
class MagicResidual:
    """Defects of a candidate magic unitary, all on the spectral-norm scale.

    ``row_defect``/``col_defect`` measure ``||sum - I||`` over rows/columns,
    ``projection_defect`` the worst of ``||A - A^*||`` and ``||A^2 - A||``,
    ``rank_defect`` the worst ``|tr(A) - 1|`` (zero when not checking flatness).
    """

    row_defect: float
    col_defect: float
    rank_defect: float
    projection_defect: float = 0.0

    @property
    def worst(self) -> float:
        return max(self.row_defect, self.col_defect, self.rank_defect, self.projection_defect)

    def passes(self, tol: float = ATOL_STRUCTURAL) -> bool:
        return self.worst <= tol

    def as_dict(self) -> dict:
        return asdict(self)


def validate_magic(u, tol: float = ATOL_STRUCTURAL, flat: bool = True) -> MagicResidual:
    """Measure how far ``u`` (shape ``(N, N, K, K)``) is from a magic unitary.

    ``tol`` is not used to decide anything here; call ``.passes(tol)`` on the
    result. With ``flat=True`` every cell must also have rank one.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 4 or u.shape[0] != u.shape[1] or u.shape[2] != u.shape[3]:
        raise InvalidInput(f"magic unitary must have shape (N, N, K, K), got {u.shape}")
    eye = np.eye(u.shape[-1])
    rows = float(_spectral_defect(u.sum(axis=1) - eye).max())
    cols = float(_spectral_defect(u.sum(axis=0) - eye).max())
    herm = _spectral_defect(u - dagger(u)).max()
    idem = _spectral_defect(u @ u - u).max()
    rank = 0.0
    if flat:
        rank = float(np.abs(np.trace(u, axis1=-2, axis2=-1) - 1).max())
    return MagicResidual(rows, cols, rank, float(max(herm, idem)))


def grid_to_unitary(grid, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Flat magic unitary ``u_ij = Proj(grid[i, j])`` of a magic basis.

    Raises
    ------
    InvalidInput
        If ``grid`` is not a magic basis within ``tol``.
    """
    g = validate_grid(grid, tol)
    rd, cd = float(row_defect(g)), float(col_defect(g))
    if rd > tol or cd > tol:
        raise InvalidInput(f"not a magic basis: row defect {rd:.3e}, column defect {cd:.3e}")
    return proj(g)


def latin_model(square, projections, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Magic unitary ``u_ij = p_{L_ij}`` from a Latin square and a resolution of identity."""
    sq = np.asarray(square, dtype=int)
    if not is_latin_square(sq):
        raise InvalidInput("not a Latin square")
    p = np.asarray(projections, dtype=complex)
    n = sq.shape[0]
    if p.ndim != 3 or p.shape[0] != n or p.shape[1] != p.shape[2]:
        raise InvalidInput(f"need {n} square projections, got shape {p.shape}")
    defect = float(_spectral_defect(p.sum(axis=0) - np.eye(p.shape[-1])))
    if defect > tol:
        raise InvalidInput(f"projections do not sum to the identity (defect {defect:.3e})")
    herm = float(_spectral_defect(p - dagger(p)).max())
    idem = float(_spectral_defect(p @ p - p).max())
    if max(herm, idem) > tol:
        raise InvalidInput("resolution members are not orthogonal projections")
    return p[sq - 1]


def check_hadamard(h, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInput(f"Hadamard matrix must be square, got {h.shape}")
    n = h.shape[0]
    if np.abs(np.abs(h) - 1).max() > tol:
        raise InvalidInput("Hadamard matrix entries must be unimodular")
    if np.abs(h @ h.conj().T - n * np.eye(n)).max() > tol * n:
        raise InvalidInput("Hadamard matrix rows are not orthogonal")
    return h


def hadamard_grid(h, k=None, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Magic basis with cells ``(H_i / K_j) / sqrt(N)``; ``K`` defaults to ``H``."""
    h = check_hadamard(h, tol)
    k = h if k is None else check_hadamard(k, tol)
    if k.shape != h.shape:
        raise InvalidInput("Hadamard matrices must have the same size")
    return (h[:, None, :] / k[None, :, :]) / np.sqrt(h.shape[0])


def hadamard_model(h, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Flat magic unitary ``u_ij = Proj(H_i / H_j)`` of a complex Hadamard matrix."""
    return proj(hadamard_grid(h, tol=tol))


def split_grid(e: OrthonormalUnitaryBasis, f: OrthonormalUnitaryBasis) -> np.ndarray:
    """Grid of vectorized ``e_i f_j^*`` (a magic basis for orthonormal ``e``, ``f``)."""
    if e.kind != f.kind or e.members.shape != f.members.shape:
        raise InvalidInput("bases live in different algebras")
    prod = e.mul(e.members[:, None], e.adjoint(f.members)[None, :])
    return e.vectorize(prod)


def split_model(e: OrthonormalUnitaryBasis, f: OrthonormalUnitaryBasis) -> np.ndarray:
    """Split magic unitary ``u_ij = Proj(e_i f_j^*)``."""
    return proj(split_grid(e, f))


def fully_split_grid(basis: OrthonormalUnitaryBasis, x, tol: float = 1e-12) -> np.ndarray:
    """Grid of vectorized ``g_i x g_j^*``; ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=complex)
    core = x.shape[-1:] if basis.kind == "diagonal" else x.shape[-2:]
    batch = x.shape[:x.ndim - len(core)]
    if not batch and not basis.is_unitary_element(x, tol):
        raise InvalidInput("x is not a unitary element of the algebra")
    g = basis.members
    gs = basis.adjoint(g)
    if basis.kind == "diagonal":
        cells = g[:, None, :] * x[..., None, None, :] * gs[None, :, :]
    else:
        gx = g @ x[..., None, :, :]
        cells = gx[..., :, None, :, :] @ gs[None, :, :, :]
    return basis.vectorize(cells)


def fully_split_model(basis: OrthonormalUnitaryBasis, x, tol: float = 1e-12) -> np.ndarray:
    """Fully split magic unitary ``u_ij = Proj(g_i x g_j^*)``."""
    return proj(fully_split_grid(basis, x, tol))
