"""Randomized evidence harnesses for the open flattening and projection inequalities.

Nothing here asserts a conjecture: each harness returns a :class:`TrialReport`
counting margins below ``-slack``. Margins in ``(-10 slack, -slack)`` are
recomputed at 50 significant digits before being counted, and every counted
violation carries enough data to replay it (the per-trial stream is
``default_rng([seed, trial])``).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import InvalidInput
from .linalg import dagger, haar_unitary, pinv_sqrt
from .montecarlo import batch_rng
from .moments import f_p, f_p_normalized
from .sinkhorn import flatten_batch, phi_map, random_tuple, sample_k_n_batch, vol

RANK_CUTOFF = 1e-8
PRIMED_TOL = 1e-8
MP_DIGITS = 50
MODES = ("literal", "s-zero-relaxed")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _finite_or_none(v) -> float | None:
    v = float(v)
    return v if np.isfinite(v) else None


def _rank(a: np.ndarray) -> int:
    return int(np.sum(np.linalg.svd(a, compute_uv=False) > RANK_CUTOFF))


@dataclass
class ProjectionQuadruple:
    """Four projections in ``M_K(C)``; ``mode`` records which constraint set applies."""

    K: int
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    S: np.ndarray
    mode: str = "literal"

    @property
    def ranks(self) -> tuple[int, int, int, int]:
        return tuple(_rank(a) for a in (self.P, self.Q, self.R, self.S))

    def constraints(self, tol: float = 1e-10) -> dict[str, bool]:
        """Numerical status of the orthogonality, intersection and rank constraints.

        The two rank identities are only reported in literal mode.
        """
        rp, rq, rr, rs = self.ranks
        out = {
            "P_perp_Q": float(np.linalg.norm(self.P @ self.Q, 2)) <= tol,
            "R_perp_S": float(np.linalg.norm(self.R @ self.S, 2)) <= tol,
            "P_cap_R": _rank(np.hstack([self.P, self.R])) == rp + rr,
            "Q_cap_S": _rank(np.hstack([self.Q, self.S])) == rq + rs,
        }
        if self.mode == "literal":
            out["rank_sum_1"] = rp + rq == rr + rs
            out["rank_sum_2"] = rp + rr == rq + rs
        return out

    def valid(self, tol: float = 1e-10) -> bool:
        return all(self.constraints(tol).values())

    def to_dict(self) -> dict:
        from .serialize import complex_to_json
        return {"K": self.K, "mode": self.mode,
                **{k: complex_to_json(getattr(self, k)) for k in "PQRS"}}


def _block(k: int, start: int, stop: int) -> np.ndarray:
    d = np.zeros(k)
    d[start:stop] = 1.0
    return np.diag(d).astype(complex)


def _conj(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    m = u @ a @ dagger(u)
    return (m + dagger(m)) / 2


def gen_quadruple(K: int, rank_p: int, rank_q: int, seed, force_s_zero: bool = False,
                  mode: str = "literal", rank_r: int | None = None,
                  attempts: int = 10) -> ProjectionQuadruple:
    """Random quadruple honouring the constraints of ``mode``.

    ``P, Q`` are coordinate blocks conjugated by one Haar unitary and ``R, S``
    by an independent one. In literal mode the rank identities force
    ``rank R = rank Q`` and ``rank S = rank P``, so ``force_s_zero`` is only
    satisfiable with ``rank_p = 0``. In ``s-zero-relaxed`` mode ``S = 0`` and
    the rank identities are dropped; ``rank_r`` defaults to ``rank_q``.

    Raises
    ------
    InvalidInput
        For unknown modes or ranks that cannot be realized in dimension ``K``.
    """
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "literal":
        if rank_r is not None and rank_r != rank_q:
            raise InvalidInput("literal mode forces rank(R) = rank(Q)")
        rank_r, rank_s = rank_q, rank_p
        if force_s_zero and rank_p != 0:
            raise InvalidInput("with S = 0 the rank identities force rank(P) = 0; use mode='s-zero-relaxed'")
    else:
        rank_r, rank_s = (rank_q if rank_r is None else rank_r), 0
    ranks = (rank_p, rank_q, rank_r, rank_s)
    if min(ranks) < 0 or rank_p + rank_q > K or rank_r + rank_s > K \
            or rank_p + rank_r > K or rank_q + rank_s > K:
        raise InvalidInput(f"ranks {ranks} cannot be realized with trivial intersections in dimension {K}")
    rng = _rng(seed)
    for _ in range(attempts):
        u1, u2 = haar_unitary(K, rng), haar_unitary(K, rng)
        q = ProjectionQuadruple(
            K,
            _conj(u1, _block(K, 0, rank_p)),
            _conj(u1, _block(K, rank_p, rank_p + rank_q)),
            _conj(u2, _block(K, 0, rank_r)),
            _conj(u2, _block(K, rank_r, rank_r + rank_s)),
            mode,
        )
        if q.valid():
            return q
    raise InvalidInput(f"could not generate a valid quadruple in {attempts} attempts")


def _sandwich(total: np.ndarray, a: np.ndarray) -> np.ndarray:
    root = pinv_sqrt(total, atol=RANK_CUTOFF)
    return root @ a @ root


def primed_quadruple(q: ProjectionQuadruple) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``P', Q', R', S'`` with Moore-Penrose inverse square roots of ``P + R`` and ``Q + S``."""
    pr, qs = q.P + q.R, q.Q + q.S
    return _sandwich(pr, q.P), _sandwich(qs, q.Q), _sandwich(pr, q.R), _sandwich(qs, q.S)


def projection_defect(a: np.ndarray) -> float:
    return float(max(np.linalg.norm(a - dagger(a), 2), np.linalg.norm(a @ a - a, 2)))


def margin_66(q: ProjectionQuadruple, primed=None) -> float:
    """``Tr(PR) + Tr(QS) - Tr(P'Q') - Tr(R'S')``."""
    p1, q1, r1, s1 = primed_quadruple(q) if primed is None else primed
    val = np.trace(q.P @ q.R) + np.trace(q.Q @ q.S) - np.trace(p1 @ q1) - np.trace(r1 @ s1)
    return float(val.real)


def _mp_matrix(a: np.ndarray) -> mpmath.matrix:
    m = mpmath.matrix(a.shape[0], a.shape[1])
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            m[i, j] = mpmath.mpc(float(a[i, j].real), float(a[i, j].imag))
    return m


def _mp_sandwich(total: mpmath.matrix, a: mpmath.matrix) -> mpmath.matrix:
    w, v = mpmath.eighe(total)
    n = total.rows
    d = mpmath.matrix(n, n)
    for k in range(n):
        if w[k] > RANK_CUTOFF:
            d[k, k] = 1 / mpmath.sqrt(w[k])
    root = v * d * v.H
    return root * a * root


def _mp_trace(a: mpmath.matrix):
    return mpmath.fsum(a[k, k] for k in range(a.rows))


def margin_66_mp(q: ProjectionQuadruple) -> float:
    """High-precision margin, starting from the stored double-precision matrices."""
    with mpmath.workdps(MP_DIGITS):
        p, qq, r, s = (_mp_matrix(getattr(q, k)) for k in "PQRS")
        pr, qs = p + r, qq + s
        p1, q1, r1, s1 = (_mp_sandwich(pr, p), _mp_sandwich(qs, qq),
                          _mp_sandwich(pr, r), _mp_sandwich(qs, s))
        val = _mp_trace(p * r) + _mp_trace(qq * s) - _mp_trace(p1 * q1) - _mp_trace(r1 * s1)
        return float(mpmath.re(val))


def _mp_polar(m: mpmath.matrix) -> mpmath.matrix:
    u, _, v = mpmath.svd_c(m)
    return u * v


def _mp_grid(x: np.ndarray) -> list[list[list]]:
    n = x.shape[0]
    return [[[mpmath.mpc(float(x[i, j, d].real), float(x[i, j, d].imag)) for d in range(n)]
             for j in range(n)] for i in range(n)]


def _mp_phi(g: list) -> list:
    n = len(g)
    out = [[None] * n for _ in range(n)]
    for j in range(n):
        m = mpmath.matrix([[g[i][j][d] for d in range(n)] for i in range(n)])
        u = _mp_polar(m)
        for i in range(n):
            out[j][i] = [u[i, d] for d in range(n)]
    return out


def _mp_vol(g: list):
    n = len(g)
    out = mpmath.mpf(1)
    for j in range(n):
        out *= abs(mpmath.det(mpmath.matrix([[g[i][j][d] for d in range(n)] for i in range(n)])))
    return out


def _mp_fp(g: list, p: int):
    n = len(g)

    def ip(x, y):
        return mpmath.fsum(x[d] * mpmath.conj(y[d]) for d in range(n))

    total = mpmath.mpf(0)
    for idx in itertools.product(range(n), repeat=p):
        s = mpmath.mpc(0)
        for j in range(n):
            term = mpmath.mpc(1)
            for k in range(p):
                term *= ip(g[idx[k]][j], g[idx[(k + 1) % p]][j])
            s += term
        total += abs(s) ** 2
    return total / mpmath.mpf(n) ** (p + 2)


def vol_step_margin_mp(x: np.ndarray) -> float:
    with mpmath.workdps(MP_DIGITS):
        g = _mp_grid(x)
        return float(_mp_vol(_mp_phi(g)) - _mp_vol(g))


def fp_margin_mp(x: np.ndarray, p: int) -> float:
    with mpmath.workdps(MP_DIGITS):
        g = _mp_grid(x)
        return float(_mp_fp(g, p) - _mp_fp(_mp_phi(_mp_phi(g)), p))


@dataclass
class TrialReport:
    """Evidence report; ``violations`` counts margins below ``-slack`` after re-evaluation."""

    conjecture: str
    params: dict
    trials: int
    violations: int
    worst_margin: float
    seed: int
    instances: list = field(default_factory=list)
    rejected: int = 0
    reevaluated: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"conjecture": self.conjecture, "params": self.params, "trials": self.trials,
                "violations": self.violations, "worst_margin": self.worst_margin, "seed": self.seed,
                "instances": self.instances, "rejected": self.rejected,
                "reevaluated": self.reevaluated, "extra": self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


class _Tally:
    def __init__(self, slack: float):
        self.slack = slack
        self.violations = 0
        self.reevaluated = 0
        self.worst = np.inf
        self.instances: list = []

    def add(self, margin: float, refine, instance) -> float:
        """Count one margin; ``refine()`` gives the high-precision value, ``instance()`` the dump."""
        if -10 * self.slack < margin < -self.slack:
            margin = refine()
            self.reevaluated += 1
        self.worst = min(self.worst, margin)
        if margin < -self.slack:
            self.violations += 1
            self.instances.append({"margin": margin, **instance()})
        return margin


def _random_ranks(k: int, rng: np.random.Generator, mode: str) -> tuple[int, int, int]:
    if mode == "literal":
        a = int(rng.integers(0, k // 2 + 1))
        b = int(rng.integers(0, k - a + 1))
        b = min(b, k - a)
        return a, b, b
    a = int(rng.integers(1, k))
    b = int(rng.integers(0, k - a + 1))
    c = int(rng.integers(1, k - a + 1))
    return a, b, c


def test_inequality_66(trials: int, K, ranks, seed: int, mode: str = "literal",
                       slack: float = 1e-10) -> TrialReport:
    """Evaluate the trace inequality on random quadruples.

    ``K`` is a dimension or a list of dimensions (one is drawn per trial);
    ``ranks`` is ``(rank_p, rank_q[, rank_r])`` or ``None`` for random
    admissible ranks per trial.
    """
    dims = [int(K)] if np.isscalar(K) else [int(k) for k in K]
    tally = _Tally(slack)
    rejected = 0
    for t in range(trials):
        rng = batch_rng(seed, t)
        k = dims[int(rng.integers(len(dims)))] if len(dims) > 1 else dims[0]
        if ranks is None:
            rp, rq, rr = _random_ranks(k, rng, mode)
        else:
            rp, rq = ranks[0], ranks[1]
            rr = ranks[2] if len(ranks) > 2 else rq
        q = gen_quadruple(k, rp, rq, rng, force_s_zero=mode != "literal", mode=mode,
                          rank_r=rr if mode != "literal" else None)
        primed = primed_quadruple(q)
        if max(projection_defect(a) for a in primed) > PRIMED_TOL:
            rejected += 1
            continue
        tally.add(margin_66(q, primed), lambda: margin_66_mp(q),
                  lambda: {"trial": t, "stream": [seed, t], "quadruple": q.to_dict()})
    name = "trace-inequality" + ("" if mode == "literal" else "[S=0 relaxed]")
    params = {"K": dims, "ranks": None if ranks is None else list(ranks), "mode": mode, "slack": slack}
    return TrialReport(name, params, trials, tally.violations, _finite_or_none(tally.worst), seed,
                       tally.instances, rejected, tally.reevaluated)


def test_volume_monotone(N: int, trials: int, seed: int, slack: float = 1e-12,
                         trajectories: bool = True, max_iters: int = 10_000) -> TrialReport:
    """One flattening step must not decrease ``vol``.

    With ``trajectories`` every start is also flattened to convergence and
    both single steps and double steps along the way are checked; those
    counts go to ``extra`` (the headline count covers the first step only).
    """
    rng = batch_rng(seed, 0)
    x = random_tuple(N, rng, trials)
    after = phi_map(x)
    margins = vol(after) - vol(x)
    tally = _Tally(slack)
    for t in range(trials):
        tally.add(float(margins[t]), lambda: vol_step_margin_mp(x[t]),
                  lambda: {"trial": t, "stream": [seed, 0], "index": t})
    extra = {}
    if trajectories:
        run = flatten_batch(x, max_iters, track_vol=True)
        steps, steps2 = run.worst_vol_step, run.worst_vol_step2
        extra = {"trajectory_violations": int(np.sum(steps < -slack)),
                 "trajectory_worst_step": _finite_or_none(steps.min()),
                 "trajectory_violations_two_step": int(np.sum(steps2 < -slack)),
                 "trajectory_worst_two_step": _finite_or_none(steps2.min()),
                 "converged": int(run.converged.sum()),
                 "max_iterations": int(run.iterations.max())}
    return TrialReport("vol-monotone", {"N": N, "slack": slack, "trajectories": trajectories},
                       trials, tally.violations, _finite_or_none(tally.worst), seed, tally.instances,
                       reevaluated=tally.reevaluated, extra=extra)


def test_fp_monotone(N: int, p: int, trials: int, seed: int, slack: float = 1e-12,
                     kn_samples: int = 20) -> TrialReport:
    """``F_p(x) - F_p(Phi^2(x))`` on Haar tuples, plus the rescaled value of ``F_p`` on ``K_N`` samples."""
    rng = batch_rng(seed, 0)
    x = random_tuple(N, rng, trials)
    margins = f_p(x, p) - f_p(phi_map(phi_map(x)), p)
    tally = _Tally(slack)
    for t in range(trials):
        tally.add(float(margins[t]), lambda: fp_margin_mp(x[t], p),
                  lambda: {"trial": t, "stream": [seed, 0], "index": t})
    extra = {}
    if kn_samples:
        grids, info = sample_k_n_batch(N, kn_samples, batch_rng(seed, 1))
        dev = np.abs(f_p_normalized(grids, p) - 1)
        extra = {"kn_samples": kn_samples, "kn_max_deviation": float(dev.max()),
                 "kn_resamples": info["resamples"]}
    return TrialReport("fp-monotone", {"N": N, "p": p, "slack": slack}, trials, tally.violations,
                       _finite_or_none(tally.worst), seed, tally.instances, reevaluated=tally.reevaluated,
                       extra=extra)


# harness entry points are not pytest tests
for _fn in (test_inequality_66, test_volume_monotone, test_fp_monotone):
    _fn.__test__ = False
