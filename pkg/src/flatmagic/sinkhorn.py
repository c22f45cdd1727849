"""Polar-decomposition flattening of unitary tuples onto magic bases.

A tuple ``(x_1, .., x_N)`` of ``N x N`` unitaries is stored as the array
``x[i, j, :]`` = row ``j`` of ``x_i``; read as a vector grid its rows are
orthonormal by construction and flattening works on the columns.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension, InvalidInput, SamplingFailure
from .groups import is_latin_square
from .linalg import ATOL_STRUCTURAL, haar_unitaries, pinv_sqrt, polar
from .models import col_defect, validate_grid
from .moments import MomentSeries, averaged_t_matrices, catalan, f_p
from .montecarlo import batch_rng

DEGENERATE_SINGULAR = 1e-12
STALL_WINDOW = 50
STALL_TOL = 1e-14
RETRY_BUDGET = 5

LATIN_3 = (
    np.array([[1, 2, 3], [2, 3, 1], [3, 1, 2]]),
    np.array([[1, 2, 3], [3, 1, 2], [2, 3, 1]]),
)


def random_tuple(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed element of ``U_N^N`` in grid layout (``size`` adds a batch axis)."""
    if n < 1:
        raise InvalidDimension(f"N must be >= 1, got {n}")
    k = 1 if size is None else size
    x = haar_unitaries(n, k * n, rng).reshape(k, n, n, n)
    return x[0] if size is None else x


def alpha(x) -> np.ndarray:
    """Orthonormalize ``N`` unit vectors: rows of the polar part of the matrix with rows ``x_i``."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidDimension(f"expected N vectors in C^N, got shape {x.shape}")
    return polar(x)


def beta(p, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Orthogonalize ``N`` rank-one projections: ``P^{-1/2} p_i P^{-1/2}`` with ``P = sum p_i``.

    ``P^{-1/2}`` is the Moore-Penrose inverse square root, so degenerate
    inputs produce projections summing to the range projection of ``P``.
    """
    p = np.asarray(p, dtype=complex)
    if p.ndim != 3 or p.shape[1] != p.shape[2]:
        raise InvalidDimension(f"expected a stack of square projections, got shape {p.shape}")
    root = pinv_sqrt(p.sum(axis=0), tol=tol)
    return root @ p @ root


def phi_map(x, return_min_singular: bool = False):
    """One step of the flattening map on grids (batch axes allowed in front).

    Column ``j`` of the input grid is orthonormalized by polar decomposition
    and becomes row ``j`` of the output, so on magic bases this is the grid
    transpose.
    """
    x = np.asarray(x, dtype=complex)
    cols = np.swapaxes(x, -3, -2)
    return polar(cols, return_min_singular=return_min_singular)


def psi_map(u, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Projection-level flattening: ``Psi(u)_{ij} = P_i^{-1/2} u_{ji} P_i^{-1/2}``, ``P_i = sum_j u_{ji}``.

    Raises
    ------
    InvalidInput
        If some row of ``u`` does not sum to the identity within ``tol``.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 4 or u.shape[0] != u.shape[1] or u.shape[2] != u.shape[3]:
        raise InvalidInput(f"expected an (N, N, K, K) grid of projections, got {u.shape}")
    rows = np.abs(u.sum(axis=1) - np.eye(u.shape[-1])).max()
    if rows > tol:
        raise InvalidInput(f"rows do not sum to the identity (defect {rows:.3e})")
    return np.stack([beta(u[:, i], tol) for i in range(u.shape[0])])


def vol(grid) -> float | np.ndarray:
    """``prod_j |det M_j|`` where ``M_j`` has rows ``x_{ij}`` (column ``j`` of the grid)."""
    g = np.asarray(grid)
    dets = np.abs(np.linalg.det(np.swapaxes(g, -3, -2)))
    out = np.prod(dets, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class FlatteningTrace:
    """Per-iteration record of a flattening run (iteration 0 is the start point)."""

    iteration: list[int] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    vol: list[float] = field(default_factory=list)
    f2: list[float] = field(default_factory=list)
    f3: list[float] | None = None
    degenerate: list[int] = field(default_factory=list)

    def record(self, it: int, grid: np.ndarray) -> None:
        self.iteration.append(it)
        self.residual.append(float(col_defect(grid)))
        self.vol.append(vol(grid))
        self.f2.append(f_p(grid, 2))
        if self.f3 is not None:
            self.f3.append(f_p(grid, 3))

    def vol_drops(self, slack: float = 1e-12) -> list[tuple[int, float]]:
        """Steps where the volume decreased by more than ``slack``, with the change."""
        v = np.asarray(self.vol)
        d = np.diff(v)
        return [(self.iteration[k + 1], float(d[k])) for k in np.flatnonzero(d < -slack)]

    def to_csv(self, slack: float = 1e-12) -> str:
        """CSV with columns iteration, residual, vol, F_2 (, F_3), vol_drop.

        ``vol_drop`` is 1 on rows whose volume fell by more than ``slack``.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["iteration", "residual", "vol", "F_2"] + (["F_3"] if self.f3 is not None else [])
        w.writerow(head + ["vol_drop"])
        for k, it in enumerate(self.iteration):
            drop = int(k > 0 and self.vol[k] - self.vol[k - 1] < -slack)
            row = [it, repr(self.residual[k]), repr(self.vol[k]), repr(self.f2[k])]
            if self.f3 is not None:
                row.append(repr(self.f3[k]))
            w.writerow(row + [drop])
        return buf.getvalue()


@dataclass
class FlattenResult:
    grid: np.ndarray
    trace: FlatteningTrace
    converged: bool

    @property
    def iterations(self) -> int:
        return self.trace.iteration[-1]


def _stalled(residuals, tol: float) -> bool:
    if len(residuals) <= STALL_WINDOW:
        return False
    return residuals[-STALL_WINDOW - 1] - residuals[-1] < STALL_TOL and residuals[-1] > tol


def flatten(x0, max_iters: int = 10_000, residual_tol: float = 1e-8, record_f3: bool = False) -> FlattenResult:
    """Iterate :func:`phi_map` until the column defect of the grid is at most ``residual_tol``.

    Non-convergence (iteration budget or a stall, i.e. improvement below
    ``1e-14`` over 50 steps) is reported through ``converged=False``.
    """
    if max_iters < 1:
        raise InvalidInput(f"max_iters must be >= 1, got {max_iters}")
    x = validate_grid(x0)
    trace = FlatteningTrace(f3=[] if record_f3 else None)
    trace.record(0, x)
    for it in range(1, max_iters + 1):
        if trace.residual[-1] <= residual_tol:
            return FlattenResult(x, trace, True)
        if _stalled(trace.residual, residual_tol):
            return FlattenResult(x, trace, False)
        x, smin = phi_map(x, return_min_singular=True)
        if smin.min() < DEGENERATE_SINGULAR:
            trace.degenerate.append(it)
        trace.record(it, x)
    return FlattenResult(x, trace, trace.residual[-1] <= residual_tol)


@dataclass
class BatchFlatten:
    """Outcome of :func:`flatten_batch`; the volume fields are ``None`` unless tracked."""

    grids: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    worst_vol_step: np.ndarray | None = None
    worst_vol_step2: np.ndarray | None = None


def flatten_batch(x0: np.ndarray, max_iters: int = 10_000, residual_tol: float = 1e-8,
                  track_vol: bool = False) -> BatchFlatten:
    """Flatten a stack of grids together; same per-sample iteration as :func:`flatten`.

    With ``track_vol`` the smallest one-step and two-step volume changes seen
    along each trajectory are returned too (``+inf`` when no such step was taken).
    """
    x = np.array(x0, dtype=complex)
    b = x.shape[0]
    iters = np.zeros(b, dtype=int)
    done = np.zeros(b, dtype=bool)
    ok = np.zeros(b, dtype=bool)
    history = np.full((b, STALL_WINDOW + 1), np.inf)
    res = col_defect(x)
    history[:, -1] = res
    vols = vol(x) if track_vol else None
    prev = np.full(b, np.nan)
    worst = np.full(b, np.inf) if track_vol else None
    worst2 = np.full(b, np.inf) if track_vol else None
    for it in range(1, max_iters + 1):
        ok |= ~done & (res <= residual_tol)
        stall = (it > STALL_WINDOW) & (history[:, 0] - history[:, -1] < STALL_TOL) & (res > residual_tol)
        done |= ok | stall
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        xa = phi_map(x[active])
        x[active] = xa
        iters[active] = it
        res[active] = col_defect(xa)
        history[active] = np.roll(history[active], -1, axis=1)
        history[active, -1] = res[active]
        if track_vol:
            new = vol(xa)
            worst[active] = np.minimum(worst[active], new - vols[active])
            two = new - prev[active]
            worst2[active] = np.where(np.isnan(two), worst2[active], np.minimum(worst2[active], two))
            prev[active] = vols[active]
            vols[active] = new
    ok |= res <= residual_tol
    return BatchFlatten(x, ok, iters, worst, worst2)


def sample_k_n_batch(n: int, size: int, rng: np.random.Generator, max_iters: int = 10_000,
                     residual_tol: float = 1e-8, retries: int = RETRY_BUDGET):
    """``size`` magic bases pushed forward from Haar samples of ``U_N^N``.

    Each start is iterated under ``phi_map`` itself, not its square. Starts
    that fail to converge are redrawn from the same stream; the number of
    redraws is returned in the info dict.

    Raises
    ------
    SamplingFailure
        If some requested sample still fails after ``retries`` redraws.
    """
    if n < 2:
        raise InvalidDimension(f"N must be >= 2, got {n}")
    out = np.empty((size, n, n, n), dtype=complex)
    iterations = np.zeros(size, dtype=int)
    pending = np.arange(size)
    attempts = np.zeros(size, dtype=int)
    resamples = 0
    while pending.size:
        run = flatten_batch(random_tuple(n, rng, pending.size), max_iters, residual_tol)
        ok = run.converged
        out[pending[ok]] = run.grids[ok]
        iterations[pending[ok]] = run.iterations[ok]
        failed = pending[~ok]
        attempts[failed] += 1
        resamples += failed.size
        if np.any(attempts > retries):
            raise SamplingFailure(f"flattening failed to converge after {retries} redraws")
        pending = failed
    return out, {"resamples": int(resamples), "max_iterations": int(iterations.max(initial=0)),
                 "total_iterations": int(iterations.sum())}


def sample_k_n(n: int, seed: int, **kwargs) -> np.ndarray:
    """One magic basis from the push-forward of Haar measure (stream ``[seed, 0]``)."""
    grids, _ = sample_k_n_batch(n, 1, batch_rng(seed, 0), **kwargs)
    return grids[0]


def latin_square_of_grid(grid, tol: float = 1e-6) -> np.ndarray:
    """Read a Latin square off a magic basis whose cells come from one orthonormal basis.

    Row 0 serves as the reference basis and each cell gets the label of the
    reference vector it overlaps most.

    Raises
    ------
    InvalidInput
        If some best overlap is not 1 within ``tol`` or the labels do not form
        a Latin square.
    """
    g = np.asarray(grid)
    overlap = np.abs(np.einsum("ijd,kd->ijk", g, np.conj(g[0]))) ** 2
    labels = overlap.argmax(axis=-1) + 1
    purity = np.abs(overlap.max(axis=-1) - 1).max()
    if purity > tol or not is_latin_square(labels):
        raise InvalidInput(f"grid is not of Latin-square type (overlap defect {purity:.3e})")
    return labels


def latin_frequencies(num_samples: int, seed: int, **kwargs) -> dict:
    """Frequencies of the two normalized 3x3 Latin squares among sampled ``K_3`` points."""
    grids, info = sample_k_n_batch(3, num_samples, batch_rng(seed, 0), **kwargs)
    counts = [0, 0]
    for g in grids:
        sq = latin_square_of_grid(g)
        counts[next(k for k, ref in enumerate(LATIN_3) if np.array_equal(sq, ref))] += 1
    return {"squares": [ref.tolist() for ref in LATIN_3], "counts": counts,
            "samples": num_samples, "seed": seed, "resamples": info["resamples"]}


def universal_moments(n: int, p_max: int, r_max: int, num_samples: int, seed: int,
                      batch_size: int = 256, threads: int = 1, max_iters: int = 10_000,
                      residual_tol: float = 1e-8) -> MomentSeries:
    """Truncated moments ``c_p^r`` of the universal flat model with a Catalan reference column."""
    def sampler(rng, size):
        return sample_k_n_batch(n, size, rng, max_iters, residual_tol)

    info: list = []
    ps = list(range(1, p_max + 1))
    avg = averaged_t_matrices(sampler, ps, num_samples, seed, batch_size=batch_size,
                              threads=threads, info=info)
    est = np.empty((p_max, r_max))
    se = np.empty((p_max, r_max))
    for a, p in enumerate(ps):
        est[a], se[a] = avg[p].moments(r_max)
    extra = {"resamples": sum(i["resamples"] for i in info),
             "max_iterations": max(i["max_iterations"] for i in info)}
    return MomentSeries(f"universal[N={n}]", n, ps, list(range(1, r_max + 1)), est, se,
                        num_samples, seed, reference={"catalan": [catalan(p) for p in ps]},
                        extra=extra)
