"""Character moments of flat models.

Transfer matrices
-----------------
For a vector grid ``x`` (shape ``(N, N, d)``) the transfer matrix ``T_p^x`` has
rows indexed by ``(i_1..i_p)`` and columns by ``(j_1..j_p)``, both linearized
row-major, with entries

    (1/N) <x_{i_1 j_1}, x_{i_2 j_2}> <x_{i_2 j_2}, x_{i_3 j_3}> ... <x_{i_p j_p}, x_{i_1 j_1}>

and the truncated moments are ``c_p^r = Tr(T_p^r)`` for the averaged matrix.

Internally every product of cyclic scalar products is built as a "chain"
over the cell Gram matrix ``K[c, c'] = <x_c, x_c'>`` with cell index
``c = i * N + j``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput, ResourceLimit
from .groups import FiniteAbelianGroup, OrthonormalUnitaryBasis, weyl_basis
from .linalg import haar_unitaries
from .models import col_grams, cols_orthonormal, fully_split_grid, rows_orthonormal, validate_grid
from .montecarlo import DEFAULT_BATCH, jackknife, mc_mean, run_batches

MAX_ROWS = 2 ** 20
MAX_ENTRIES = 2 ** 22
GROUP_BUDGET = 2 ** 24
CHUNK_BUDGET = 2 ** 21
MAX_GRAM_DIM = 4096
IMAG_TOL = 1e-10


def _check_size(n: int, p: int) -> None:
    rows = n ** p
    if rows > MAX_ROWS or rows * rows > MAX_ENTRIES:
        raise ResourceLimit(f"transfer matrix with N={n}, p={p} has {rows} rows; over the memory guardrail")


def open_chain(k: np.ndarray, nodes: int) -> np.ndarray:
    """``out[..., c_1, .., c_m] = prod_{t<m} K[..., c_t, c_{t+1}]`` (flattened over the c's)."""
    c = k.shape[-1]
    batch = k.shape[:-2]
    out = np.ones(batch + (c,), dtype=complex)
    for _ in range(nodes - 1):
        out = _extend(out, k)
    return out


def _extend(chain: np.ndarray, k: np.ndarray) -> np.ndarray:
    c = k.shape[-1]
    batch = k.shape[:-2]
    flat = chain.reshape(batch + (-1, c))
    ext = flat[..., :, :, None] * k[..., None, :, :]
    return ext.reshape(batch + (-1,))


def closed_chain(k: np.ndarray, p: int) -> np.ndarray:
    """``out[..., c_1..c_p] = prod_t K[..., c_t, c_{t+1}]`` with ``c_{p+1} = c_1``."""
    c = k.shape[-1]
    batch = k.shape[:-2]
    if p == 1:
        return np.diagonal(k, axis1=-2, axis2=-1).copy()
    chain = open_chain(k, p).reshape(batch + (c, -1, c))
    close = np.swapaxes(k, -1, -2)[..., :, None, :]  # K[c_p, c_1] indexed [c_1, c_p]
    return (chain * close).reshape(batch + (-1,))


def cell_gram(grid: np.ndarray) -> np.ndarray:
    """``K[..., c, c'] = <x_c, x_c'>`` over flattened cells ``c = i*N + j``."""
    g = np.asarray(grid)
    n = g.shape[-3]
    cells = g.reshape(g.shape[:-3] + (n * n, g.shape[-1]))
    return cells @ np.conj(np.swapaxes(cells, -1, -2))


def _cells_to_matrix(tensor: np.ndarray, n: int, p: int) -> np.ndarray:
    """Reorder a flattened ``(c_1..c_p)`` tensor into the ``(i⃗, j⃗)`` matrix layout."""
    t = tensor.reshape((n, n) * p)
    order = list(range(0, 2 * p, 2)) + list(range(1, 2 * p, 2))
    return t.transpose(order).reshape(n ** p, n ** p)


def t_matrix(grid, p: int) -> np.ndarray:
    """Transfer matrix ``T_p^x`` of one vector grid.

    Raises
    ------
    ResourceLimit
        If ``N**p`` exceeds the memory guardrail.
    """
    if p < 1:
        raise InvalidInput(f"p must be >= 1, got {p}")
    g = validate_grid(grid)
    n = g.shape[0]
    _check_size(n, p)
    tensor = closed_chain(cell_gram(g), p) / n
    return _cells_to_matrix(tensor, n, p)


def _chunk_size(per_item: int, budget: int = CHUNK_BUDGET) -> int:
    return max(1, budget // max(per_item, 1))


def t_matrix_sum(grids: np.ndarray, p: int) -> np.ndarray:
    """Sum of ``T_p^x`` over a stack of grids, as a flattened cell-order tensor.

    The chain is split in two halves that share their end cells, so the sum
    over samples becomes a stack of small matrix products.
    """
    grids = np.asarray(grids)
    n = grids.shape[-3]
    c = n * n
    k = cell_gram(grids)
    if p == 1:
        return np.diagonal(k, axis1=-2, axis2=-1).sum(axis=0) / n
    if p == 2:
        return (k * np.swapaxes(k, -1, -2)).sum(axis=0).reshape(-1) / n
    m = (p + 2) // 2
    left_nodes, right_nodes = m, p - m + 2
    x_len, y_len = c ** (m - 2), c ** (p - m)
    total = np.zeros((c, c, x_len, y_len), dtype=complex)
    step = _chunk_size(c ** max(left_nodes, right_nodes))
    for start in range(0, k.shape[0], step):
        kb = k[start:start + step]
        b = kb.shape[0]
        left = open_chain(kb, left_nodes).reshape(b, c, x_len, c).transpose(1, 3, 2, 0)
        right = open_chain(kb, right_nodes).reshape(b, c, y_len, c).transpose(3, 1, 0, 2)
        total += np.ascontiguousarray(left) @ np.ascontiguousarray(right)
    # (c_1, c_m, X, Y) -> (c_1, X, c_m, Y)
    return total.transpose(0, 2, 1, 3).reshape(-1) / n


def truncated_moments(t, r_max: int, check_real: bool = True) -> np.ndarray:
    """``c^r = Tr(T^r)`` for ``r = 1..r_max`` (real parts).

    Raises
    ------
    InvalidInput
        With ``check_real`` set, if some trace has imaginary part above
        ``1e-10 * max(1, |c^r|)``.
    """
    t = np.asarray(t, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InvalidInput(f"transfer matrix must be square, got {t.shape}")
    out = np.empty(r_max, dtype=complex)
    power = t
    for r in range(r_max):
        if r:
            power = power @ t
        out[r] = np.trace(power)
    if check_real:
        bad = np.abs(out.imag) > IMAG_TOL * np.maximum(1.0, np.abs(out.real))
        if np.any(bad):
            r = int(np.argmax(bad)) + 1
            raise InvalidInput(f"Tr(T^{r}) has imaginary part {out[r - 1].imag:.3e}")
    return out.real.copy()


@dataclass
class AveragedTransfer:
    """Monte Carlo average of ``T_p^x`` with per-group sums kept for error bars."""

    N: int
    p: int
    num_samples: int
    group_sums: np.ndarray = field(repr=False)
    group_counts: np.ndarray = field(repr=False)

    @property
    def mean(self) -> np.ndarray:
        tensor = self.group_sums.sum(axis=0) / self.num_samples
        return _cells_to_matrix(tensor, self.N, self.p)

    @property
    def stderr(self) -> np.ndarray:
        """Entrywise jackknife standard error (modulus scale), NaN with one group."""
        _, se_re = jackknife(lambda m: m.real, self.group_sums, self.group_counts)
        _, se_im = jackknife(lambda m: m.imag, self.group_sums, self.group_counts)
        return _cells_to_matrix(np.hypot(se_re, se_im), self.N, self.p)

    def moments(self, r_max: int) -> tuple[np.ndarray, np.ndarray]:
        """``c_p^r`` for ``r = 1..r_max`` with jackknife standard errors."""
        def estimator(mean_tensor):
            return truncated_moments(_cells_to_matrix(mean_tensor, self.N, self.p), r_max)

        return jackknife(estimator, self.group_sums, self.group_counts)


Sampler = Callable[[np.random.Generator, int], "np.ndarray | tuple[np.ndarray, dict]"]


def averaged_t_matrices(sampler: Sampler, p_values, num_samples: int, seed: int,
                        batch_size: int = 256, threads: int = 1, groups: int = 32,
                        info: list | None = None) -> dict[int, AveragedTransfer]:
    """Average ``T_p^x`` over grids from ``sampler`` for several ``p`` at once.

    ``sampler(rng, size)`` returns a stack ``(size, N, N, d)`` of grids, or a
    pair ``(grids, info_dict)``; info dicts are appended to ``info`` in batch
    order. All ``p`` share the same samples. Jackknife groups are contiguous
    runs of batches; fewer groups are kept when ``groups * N**(2p)`` would
    exceed the memory budget.
    """
    p_values = sorted(set(int(p) for p in p_values))
    if not p_values or p_values[0] < 1:
        raise InvalidInput("p values must be >= 1")

    def work(rng, size):
        out = sampler(rng, size)
        extra = None
        if isinstance(out, tuple):
            out, extra = out
        grids = np.asarray(out)
        n = grids.shape[-3]
        for p in p_values:
            _check_size(n, p)
        return n, {p: t_matrix_sum(grids, p) for p in p_values}, size, extra

    results = run_batches(work, num_samples, seed, batch_size, threads)
    n = results[0][0]
    n_groups = min(groups, len(results), max(2, GROUP_BUDGET // (n * n) ** p_values[-1]))
    out = {}
    counts = np.zeros(n_groups)
    for b, (_, _, size, _) in enumerate(results):
        counts[b * n_groups // len(results)] += size
    for p in p_values:
        sums = np.zeros((n_groups, (n * n) ** p), dtype=complex)
        for b, (_, tsum, _, _) in enumerate(results):
            sums[b * n_groups // len(results)] += tsum[p]
        out[p] = AveragedTransfer(n, p, num_samples, sums, counts.copy())
    if info is not None:
        info.extend(r[3] for r in results if r[3] is not None)
    return out


def averaged_t_matrix(sampler: Sampler, p: int, num_samples: int, seed: int, **kwargs) -> AveragedTransfer:
    """Monte Carlo mean of ``T_p^x`` over ``sampler`` (see :func:`averaged_t_matrices`)."""
    return averaged_t_matrices(sampler, [p], num_samples, seed, **kwargs)[p]


@dataclass
class MomentSeries:
    """Moment estimates indexed by ``(p, r)``.

    ``estimate[a, b]`` and ``stderr[a, b]`` refer to ``p = p_values[a]`` and
    ``r = r_values[b]``. ``reference`` holds exact comparison columns keyed by
    name (each a list over ``p_values``).
    """

    model: str
    N: int
    p_values: list[int]
    r_values: list[int]
    estimate: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    reference: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def value(self, p: int, r: int) -> float:
        return float(self.estimate[self.p_values.index(p), self.r_values.index(r)])

    def error(self, p: int, r: int) -> float:
        return float(self.stderr[self.p_values.index(p), self.r_values.index(r)])

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "N": self.N,
            "p": [int(p) for p in self.p_values],
            "r": [int(r) for r in self.r_values],
            "samples": self.samples,
            "seed": self.seed,
            "estimate": [[float(v) for v in row] for row in self.estimate],
            "stderr": [[_finite_or_none(v) for v in row] for row in self.stderr],
            "reference": {k: list(v) for k, v in self.reference.items()},
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        refs = sorted(self.reference)
        writer.writerow(["model", "N", "p", "r", "samples", "seed", "estimate", "stderr", *refs])
        for a, p in enumerate(self.p_values):
            for b, r in enumerate(self.r_values):
                writer.writerow([self.model, self.N, p, r, self.samples, self.seed,
                                 repr(float(self.estimate[a, b])), repr(float(self.stderr[a, b])),
                                 *(self.reference[k][a] for k in refs)])
        return buf.getvalue()


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def model_gram_batch(basis: OrthonormalUnitaryBasis, xs: np.ndarray) -> np.ndarray:
    """Gram matrices of the tensor vectors ``g_{i_1} x_1 g_{i_2}^* ⊗ ... ⊗ g_{i_r} x_r g_{i_1}^*``.

    ``xs`` has shape ``(B, r, ...)`` (``r`` algebra unitaries per sample); the
    output has shape ``(B, N**r, N**r)`` with multi-indices row-major.
    """
    xs = np.asarray(xs)
    b, r = xs.shape[:2]
    n_basis = basis.N
    grams = []
    for s in range(r):
        v = fully_split_grid(basis, xs[:, s]).reshape(b, n_basis * n_basis, -1)
        grams.append((v @ np.conj(np.swapaxes(v, -1, -2))).reshape(b, n_basis, n_basis, n_basis, n_basis))
    low = "abcdefghijklmnopqrstuvwxy"
    up = low.upper()
    terms = [f"z{low[s]}{low[(s + 1) % r]}{up[s]}{up[(s + 1) % r]}" for s in range(r)]
    out = "z" + low[:r] + up[:r]
    g = np.einsum(",".join(terms) + "->" + out, *grams)
    return g.reshape(b, n_basis ** r, n_basis ** r)


def model_gram_matrix(basis: OrthonormalUnitaryBasis, xs) -> np.ndarray:
    """Gram matrix for one sample ``xs = (x_1, .., x_r)``."""
    return model_gram_batch(basis, np.asarray(xs)[None])[0]


def gram_model_moments(basis: OrthonormalUnitaryBasis, r: int, p_max: int, num_samples: int,
                       seed: int, batch_size: int = DEFAULT_BATCH, threads: int = 1) -> MomentSeries:
    """Moments ``E tr(G^p)`` of the normalized trace of the model Gram matrix.

    The ``x_s`` are independent Haar samples from ``U_B``.
    """
    n_basis = basis.N
    dim = n_basis ** r
    if dim > MAX_GRAM_DIM:
        raise ResourceLimit(f"Gram matrix of size {dim} exceeds the limit {MAX_GRAM_DIM}")
    step = _chunk_size(dim * dim * 4)
    powers = np.arange(1, p_max + 1)

    def stat(rng, size):
        xs = basis.sample_unitaries(size * r, rng)
        xs = xs.reshape((size, r) + xs.shape[1:])
        out = []
        for start in range(0, size, step):
            lam = np.linalg.eigvalsh(model_gram_batch(basis, xs[start:start + step]))
            out.append(np.mean(lam[..., None] ** powers, axis=1))
        return np.concatenate(out)

    mean, se = mc_mean(stat, num_samples, seed, batch_size, threads)
    return MomentSeries(f"gram[{basis.kind},N={n_basis}]", n_basis, powers.tolist(), [r],
                        mean[:, None], se[:, None], num_samples, seed)


def weyl_lambda_batch(weyl: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """``|Tr(W_{k_1c_1} x_1 ... W_{k_rc_r} x_r)|^2`` for all labels, shape ``(B, n^(2r))``."""
    xs = np.asarray(xs)
    b, r, n = xs.shape[0], xs.shape[1], xs.shape[-1]
    prod = weyl[None] @ xs[:, 0, None]
    for s in range(1, r):
        step = weyl[None] @ xs[:, s, None]
        prod = np.einsum("bpij,bqjk->bpqik", prod, step).reshape(b, -1, n, n)
    return np.abs(np.trace(prod, axis1=-2, axis2=-1)) ** 2


def weyl_lambda(h: FiniteAbelianGroup, xs) -> np.ndarray:
    """Diagonal values of the Weyl form for one sample ``xs = (x_1, .., x_r)``."""
    return weyl_lambda_batch(weyl_basis(h).members, np.asarray(xs)[None])[0]


def weyl_lambda_moments(h: FiniteAbelianGroup, r: int, p_max: int, num_samples: int, seed: int,
                        batch_size: int = DEFAULT_BATCH, threads: int = 1) -> MomentSeries:
    """Moments of the diagonal Weyl form: average of ``n^(-2r) sum Lambda^p`` over Haar samples."""
    n = h.size
    if n ** (2 * r) > MAX_GRAM_DIM:
        raise ResourceLimit(f"{n ** (2 * r)} diagonal entries exceed the limit {MAX_GRAM_DIM}")
    weyl = weyl_basis(h).members
    powers = np.arange(1, p_max + 1)
    step = _chunk_size(n ** (2 * r) * n * n * 4)

    def stat(rng, size):
        xs = haar_unitaries(n, size * r, rng).reshape(size, r, n, n)
        out = []
        for start in range(0, size, step):
            lam = weyl_lambda_batch(weyl, xs[start:start + step])
            out.append(np.mean(lam[..., None] ** powers, axis=1))
        return np.concatenate(out)

    mean, se = mc_mean(stat, num_samples, seed, batch_size, threads)
    return MomentSeries(f"weyl-lambda[{h}]", n * n, powers.tolist(), [r], mean[:, None], se[:, None],
                        num_samples, seed)


def char_square_moments(n: int, p_max: int, num_samples: int, seed: int,
                        batch_size: int = DEFAULT_BATCH, threads: int = 1) -> MomentSeries:
    """Moments ``E[|Tr x|^(2p)]`` for Haar ``x`` in ``U_n``."""
    powers = np.arange(1, p_max + 1)

    def stat(rng, size):
        x = haar_unitaries(n, size, rng)
        val = np.abs(np.trace(x, axis1=-2, axis2=-1)) ** 2
        return val[:, None] ** powers

    mean, se = mc_mean(stat, num_samples, seed, batch_size, threads)
    return MomentSeries(f"char-square[n={n}]", n, powers.tolist(), [1], mean[:, None], se[:, None],
                        num_samples, seed)


def pauli_sampler(basis: OrthonormalUnitaryBasis) -> Sampler:
    """Grid sampler for a fully split model with Haar ``x`` in ``U_B``."""
    def sample(rng, size):
        return fully_split_grid(basis, basis.sample_unitaries(size, rng))
    return sample


def longest_increasing_length(seq) -> int:
    tails: list = []
    for v in seq:
        k = bisect_left(tails, v)
        if k == len(tails):
            tails.append(v)
        else:
            tails[k] = v
    return len(tails)


def lis_moment(n: int, p: int) -> int:
    """Number of permutations of ``p`` letters with no increasing subsequence longer than ``n``."""
    if p > 10:
        raise ResourceLimit(f"enumerating S_{p} is over the limit (p <= 10)")
    if p < 0 or n < 0:
        raise InvalidInput("n and p must be nonnegative")
    return sum(1 for perm in itertools.permutations(range(p)) if longest_increasing_length(perm) <= n)


def catalan(p: int) -> int:
    if not 0 <= p <= 30:
        raise InvalidInput(f"catalan index must be in [0, 30], got {p}")
    return math.comb(2 * p, p) // (p + 1)


def _set_partitions(p: int):
    # restricted growth strings
    def rec(prefix, top):
        if len(prefix) == p:
            yield prefix
            return
        for v in range(top + 2):
            yield from rec(prefix + [v], max(top, v))
    if p == 0:
        yield []
        return
    yield from rec([0], 0)


def is_noncrossing(blocks) -> bool:
    label = {}
    for b, block in enumerate(blocks):
        for pos in block:
            label[pos] = b
    pos = sorted(label)
    for a, b, c, d in itertools.combinations(pos, 4):
        if label[a] == label[c] and label[b] == label[d] and label[a] != label[b]:
            return False
    return True


def noncrossing_partitions(p: int) -> list[tuple[tuple[int, ...], ...]]:
    """All noncrossing partitions of ``{1..p}`` as tuples of 1-based blocks."""
    if p > 8:
        raise ResourceLimit("noncrossing partitions are only enumerated for p <= 8")
    out = []
    for rgs in _set_partitions(p):
        blocks: dict[int, list[int]] = {}
        for pos, v in enumerate(rgs, start=1):
            blocks.setdefault(v, []).append(pos)
        part = tuple(tuple(b) for b in blocks.values())
        if is_noncrossing(part):
            out.append(part)
    return out


def singletons(p: int) -> tuple[tuple[int, ...], ...]:
    return tuple((k,) for k in range(1, p + 1))


def one_block(p: int) -> tuple[tuple[int, ...], ...]:
    return (tuple(range(1, p + 1)),)


@dataclass(frozen=True)
class PartitionVector:
    partition: tuple
    N: int
    vector: np.ndarray = field(repr=False)


def xi_partition(partition, n: int, p: int | None = None) -> PartitionVector:
    """0/1 vector on ``(C^n)^{⊗p}``: entry 1 iff the multi-index is constant on every block."""
    blocks = tuple(tuple(int(v) for v in b) for b in partition)
    pos = sorted(v for b in blocks for v in b)
    if p is None:
        p = len(pos)
    if pos != list(range(1, p + 1)):
        raise InvalidInput(f"{partition} is not a partition of 1..{p}")
    idx = np.indices((n,) * p).reshape(p, -1)
    ok = np.ones(idx.shape[1], dtype=bool)
    for block in blocks:
        first = idx[block[0] - 1]
        for v in block[1:]:
            ok &= idx[v - 1] == first
    return PartitionVector(blocks, n, ok.astype(float))


def f_p(grid, p: int) -> float | np.ndarray:
    """``F_p(x) = N^{-(p+2)} sum_{i⃗} |sum_j prod_k <x_{i_k j}, x_{i_{k+1} j}>|^2``.

    Accepts a stack of grids (leading axes) and returns one value per grid.
    """
    if p < 2:
        raise InvalidInput(f"F_p needs p >= 2, got {p}")
    g = np.asarray(grid)
    n = g.shape[-3]
    cg = col_grams(g)  # (..., j, a, b)
    s = closed_chain(cg, p).sum(axis=-2)
    val = np.sum(np.abs(s) ** 2, axis=-1) / n ** (p + 2)
    return float(val) if np.ndim(val) == 0 else val


def f_p_normalized(grid, p: int) -> float | np.ndarray:
    """``N^(p-1) F_p(x)``, the rescaling that equals 1 on magic bases.

    On a magic basis ``T_p^x xi_⊓ = xi_⊓``, so ``F_p = N^(1-p)`` there; the
    rescaled value is at least 1 on grids of unitaries.
    """
    n = np.shape(grid)[-3]
    return f_p(grid, p) * n ** (p - 1)


def grid_adjoint(grid) -> np.ndarray:
    """Grid with cells ``conj(x_{ji})``; its transfer matrix is ``(T_p^x)^*``."""
    return np.conj(np.swapaxes(np.asarray(grid), 0, 1))


@dataclass(frozen=True)
class EigenvectorReport:
    """Residuals of the partition-vector identities for one grid.

    A residual is ``None`` when its orthogonality hypothesis fails. ``rows``
    means each ``{x_ij}_j`` (fixed ``i``) is orthonormal, ``cols`` each
    ``{x_ij}_i``.
    """

    p: int
    rows_orthonormal: bool
    cols_orthonormal: bool
    t_ones: float | None
    tstar_diag: float | None
    tstar_ones: float | None
    t_diag: float | None
    ones_quadratic: float | None
    diag_quadratic: float

    def applicable(self) -> dict[str, float]:
        keys = ("t_ones", "tstar_diag", "tstar_ones", "t_diag", "ones_quadratic", "diag_quadratic")
        return {k: getattr(self, k) for k in keys if getattr(self, k) is not None}


def eigenvector_checks(grid, p: int, tol: float = 1e-10) -> EigenvectorReport:
    """Check the ``xi_{|..|}`` / ``xi_{⊓..⊓}`` identities of ``T_p^x``.

    Under row orthonormality: ``T xi_| = xi_|`` and ``T^* xi_⊓ = xi_⊓``.
    Under column orthonormality: ``T^* xi_| = xi_|`` and ``T xi_⊓ = xi_⊓``.
    Under either: ``<T xi_|, xi_|> = N^p`` (reported relative).
    Always: ``<T xi_⊓, xi_⊓> = N``.
    """
    g = validate_grid(grid)
    n = g.shape[0]
    t = t_matrix(g, p)
    ones = xi_partition(singletons(p), n).vector
    diag = xi_partition(one_block(p), n).vector
    rows = rows_orthonormal(g, tol)
    cols = cols_orthonormal(g, tol)
    ts = t.conj().T

    def res(v, w):
        return float(np.linalg.norm(v - w))

    return EigenvectorReport(
        p=p,
        rows_orthonormal=rows,
        cols_orthonormal=cols,
        t_ones=res(t @ ones, ones) if rows else None,
        tstar_diag=res(ts @ diag, diag) if rows else None,
        tstar_ones=res(ts @ ones, ones) if cols else None,
        t_diag=res(t @ diag, diag) if cols else None,
        ones_quadratic=float(abs(ones @ t @ ones - n ** p) / n ** p) if (rows or cols) else None,
        diag_quadratic=float(abs(diag @ t @ diag - n)),
    )
