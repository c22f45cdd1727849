"""Finite groups, 2-cocycles and the unitary bases they generate.

Abelian groups are products of cyclic groups ``Z_{n_1} x ... x Z_{n_k}``;
elements are residue tuples, enumerated in lexicographic order. The dual
group is identified with the group itself through the pairing
``<i, a> = exp(2 pi i sum_j i_j a_j / n_j)``.

General finite groups are given by a multiplication table over
``0..|G|-1`` (see :class:`FiniteGroup`).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInput
from .linalg import ATOL_ALGEBRAIC, dagger


def roots_of_unity(m: int) -> np.ndarray:
    """``exp(2 pi i k / m)`` for ``k < m``, exact at multiples of a quarter turn."""
    k = np.arange(m)
    out = np.exp(2j * np.pi * k / m)
    quarter = (4 * k) % m == 0
    out[quarter] = np.array([1, 1j, -1, -1j])[(4 * k[quarter]) // m]
    return out


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its multiplication table ``mul[g, h] = gh``."""

    mul: np.ndarray
    identity: int = 0
    names: tuple = ()

    def __post_init__(self):
        mul = np.asarray(self.mul, dtype=int)
        object.__setattr__(self, "mul", mul)
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise InvalidInput(f"multiplication table must be square, got {mul.shape}")
        full = np.arange(n)
        for k in range(n):
            if not (np.array_equal(np.sort(mul[k]), full) and np.array_equal(np.sort(mul[:, k]), full)):
                raise InvalidInput("multiplication table is not a Latin square")
        if not (np.array_equal(mul[self.identity], full) and np.array_equal(mul[:, self.identity], full)):
            raise InvalidInput("identity index does not act as identity")
        if not self.is_associative():
            raise InvalidInput("multiplication table is not associative")

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.argmax(self.mul == self.identity, axis=1)

    def is_associative(self) -> bool:
        m = self.mul
        return bool(np.array_equal(m[m], m[:, m]))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Product of cyclic groups ``Z_{orders[0]} x ... x Z_{orders[-1]}``."""

    orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(n) for n in self.orders)
        if not orders or any(n < 1 for n in orders):
            raise InvalidInput(f"cyclic orders must be >= 1, got {self.orders}")
        object.__setattr__(self, "orders", orders)

    @classmethod
    def parse(cls, spec: str) -> "FiniteAbelianGroup":
        """Parse the mini-syntax ``"Z2"``, ``"Z3"``, ``"Z2xZ2"``."""
        parts = spec.replace(" ", "").split("x")
        orders = []
        for part in parts:
            m = re.fullmatch(r"Z(\d+)", part)
            if m is None:
                raise InvalidInput(f"cannot parse group spec {spec!r}")
            orders.append(int(m.group(1)))
        return cls(tuple(orders))

    def __str__(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)

    @property
    def size(self) -> int:
        return int(np.prod(self.orders))

    @cached_property
    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(n) for n in self.orders)))

    def element(self, g) -> tuple[int, ...]:
        """Validate ``g`` (a residue tuple, or an int for cyclic groups) and reduce it."""
        if isinstance(g, (int, np.integer)):
            g = (int(g),)
        g = tuple(int(x) for x in g)
        if len(g) != len(self.orders):
            raise InvalidInput(f"element {g} does not belong to {self}")
        return tuple(x % n for x, n in zip(g, self.orders))

    def index(self, g) -> int:
        g = self.element(g)
        idx = 0
        for x, n in zip(g, self.orders):
            idx = idx * n + x
        return idx

    def add(self, g, h) -> tuple[int, ...]:
        g, h = self.element(g), self.element(h)
        return tuple((x + y) % n for x, y, n in zip(g, h, self.orders))

    def neg(self, g) -> tuple[int, ...]:
        return tuple((-x) % n for x, n in zip(self.element(g), self.orders))

    @cached_property
    def _phase_table(self) -> np.ndarray:
        # pairing matrix over element indices
        # exponents as exact integers modulo the lcm of the orders
        lcm = int(np.lcm.reduce(self.orders))
        elems = np.array(self.elements, dtype=np.int64).reshape(self.size, len(self.orders))
        weights = np.array([lcm // n for n in self.orders], dtype=np.int64)
        expo = np.mod((elems * weights) @ elems.T, lcm)
        return roots_of_unity(lcm)[expo]

    def table(self) -> FiniteGroup:
        """Multiplication table (addition) over element indices."""
        n = self.size
        mul = np.empty((n, n), dtype=int)
        for a, g in enumerate(self.elements):
            for b, h in enumerate(self.elements):
                mul[a, b] = self.index(self.add(g, h))
        return FiniteGroup(mul, identity=0, names=tuple(self.elements))

    def product(self, other: "FiniteAbelianGroup") -> "FiniteAbelianGroup":
        return FiniteAbelianGroup(self.orders + other.orders)


def pairing(group: FiniteAbelianGroup, i, a) -> complex:
    """Bicharacter ``<i, a> = exp(2 pi i sum_j i_j a_j / n_j)``."""
    return complex(group._phase_table[group.index(i), group.index(a)])


@dataclass(frozen=True)
class Cocycle:
    """A ``T``-valued function on ``G x G`` stored as a dense table."""

    group: FiniteGroup
    table: np.ndarray = field(repr=False)

    def __call__(self, g: int, h: int) -> complex:
        return complex(self.table[g, h])


@dataclass(frozen=True)
class CocycleCheck:
    ok: bool
    residual: float
    violation: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def trivial_cocycle(group: FiniteGroup) -> Cocycle:
    return Cocycle(group, np.ones((group.order, group.order), dtype=complex))


def standard_cocycle(h: FiniteAbelianGroup) -> Cocycle:
    """The cocycle ``sigma((i, a), (j, b)) = <i, b>`` on ``H x H^``.

    Elements of ``G = H x H^`` are indexed as ``index(i) * |H| + index(a)``.
    """
    g = h.product(h)
    n = h.size
    ph = h._phase_table
    # row (i, a), column (j, b) -> <i, b>
    table = np.repeat(np.tile(ph, (1, n)), n, axis=0)
    return Cocycle(g.table(), table)


def cocycle_check(sigma: Cocycle, tol: float = ATOL_ALGEBRAIC) -> CocycleCheck:
    """Exhaustively test the 2-cocycle identities.

    Checks ``sigma(gh, k) sigma(g, h) = sigma(g, hk) sigma(h, k)`` for all
    triples and the normalization ``sigma(g, 1) = sigma(1, g) = 1``. The first
    violating tuple (in lexicographic order) is reported.
    """
    grp = sigma.group
    t = np.asarray(sigma.table, dtype=complex)
    n = grp.order
    if t.shape != (n, n) or not np.all(np.isfinite(t)):
        raise InvalidInput("cocycle table is incomplete")
    e = grp.identity
    m = grp.mul
    norm_res = np.maximum(np.abs(t[:, e] - 1), np.abs(t[e, :] - 1))
    # lhs[g, h, k] = sigma(gh, k) sigma(g, h); rhs = sigma(g, hk) sigma(h, k)
    lhs = t[m, :] * t[:, :, None]
    rhs = t[:, m] * t[None, :, :]
    res = np.abs(lhs - rhs)
    worst = float(max(res.max(), norm_res.max()))
    if norm_res.max() > tol:
        g = int(np.argmax(norm_res > tol))
        return CocycleCheck(False, worst, ("normalization", g))
    if res.max() > tol:
        g, h, k = np.argwhere(res > tol)[0]
        return CocycleCheck(False, worst, ("identity", int(g), int(h), int(k)))
    if np.abs(np.abs(t) - 1).max() > tol:
        g, h = np.argwhere(np.abs(np.abs(t) - 1) > tol)[0]
        return CocycleCheck(False, worst, ("modulus", int(g), int(h)))
    return CocycleCheck(True, worst)


@dataclass(frozen=True)
class OrthonormalUnitaryBasis:
    """Orthonormal family of unitaries in a finite-dimensional algebra ``B``.

    ``kind`` fixes how members are stored and how algebra elements become
    vectors of ``C^N`` (``N = dim B``) with the canonical trace pairing
    ``<a, b> = tr(a b^*)``:

    ``"matrix"``
        ``B = M_n(C)``, members ``(N, n, n)`` with ``N = n**2``; an element is
        vectorized as its row-major entries divided by ``sqrt(n)``.
    ``"diagonal"``
        ``B = C^N``, members ``(N, N)`` (one vector each), product entrywise;
        an element is vectorized as itself divided by ``sqrt(N)``.
    ``"regular"``
        ``B = C*_sigma(G)`` realized by the twisted regular representation,
        members ``(N, N, N)``; an element is vectorized by its coordinates in
        the basis itself.
    """

    kind: str
    members: np.ndarray = field(repr=False)
    labels: tuple = ()

    def __post_init__(self):
        members = np.asarray(self.members, dtype=complex)
        object.__setattr__(self, "members", members)
        if self.kind == "matrix":
            n = members.shape[-1]
            if members.shape != (n * n, n, n):
                raise InvalidInput(f"matrix basis needs shape (n^2, n, n), got {members.shape}")
        elif self.kind == "diagonal":
            if members.ndim != 2 or members.shape[0] != members.shape[1]:
                raise InvalidInput(f"diagonal basis needs shape (N, N), got {members.shape}")
        elif self.kind == "regular":
            n = members.shape[0]
            if members.shape != (n, n, n):
                raise InvalidInput(f"regular basis needs shape (N, N, N), got {members.shape}")
        else:
            raise InvalidInput(f"unknown basis kind {self.kind!r}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(members.shape[0])))

    @property
    def N(self) -> int:
        return self.members.shape[0]

    @property
    def n(self) -> int:
        """Matrix size of a member (``N`` for the diagonal kind)."""
        return self.members.shape[-1]

    def mul(self, a, b):
        return a * b if self.kind == "diagonal" else a @ b

    def adjoint(self, a):
        return np.conj(a) if self.kind == "diagonal" else dagger(a)

    def trace(self, a):
        """Canonical normalized trace (batched over leading axes)."""
        if self.kind == "diagonal":
            return np.mean(a, axis=-1)
        return np.trace(a, axis1=-2, axis2=-1) / a.shape[-1]

    def pairing(self, a, b):
        return self.trace(self.mul(a, self.adjoint(b)))

    def vectorize(self, a) -> np.ndarray:
        """Isometric image of algebra elements in ``C^N`` (batched)."""
        a = np.asarray(a)
        if self.kind == "matrix":
            return a.reshape(a.shape[:-2] + (-1,)) / np.sqrt(self.n)
        if self.kind == "diagonal":
            return a / np.sqrt(self.N)
        # coordinates c_k = tr(a g_k^*)
        return np.einsum("...ij,kij->...k", a, np.conj(self.members)) / self.N

    def right_multiply(self, x) -> "OrthonormalUnitaryBasis":
        """The basis ``{g_i x}``, still orthonormal when ``x`` is unitary."""
        return OrthonormalUnitaryBasis(self.kind, self.mul(self.members, x), self.labels)

    def orthonormality_defect(self) -> float:
        g = self.members
        gram = self.pairing(g[:, None], g[None, :])
        return float(np.abs(gram - np.eye(self.N)).max())

    def unitarity_defect(self) -> float:
        g = self.members
        eye = np.ones(self.N) if self.kind == "diagonal" else np.eye(self.n)
        return float(np.abs(self.mul(self.adjoint(g), g) - eye).max())

    def is_unitary_element(self, x, tol: float = ATOL_ALGEBRAIC) -> bool:
        x = np.asarray(x)
        if self.kind == "diagonal":
            return x.shape == (self.N,) and bool(np.abs(np.abs(x) - 1).max() <= tol)
        if x.shape != (self.n, self.n):
            return False
        return bool(np.abs(dagger(x) @ x - np.eye(self.n)).max() <= tol)

    def identity(self):
        return np.ones(self.N, dtype=complex) if self.kind == "diagonal" else np.eye(self.n, dtype=complex)

    def sample_unitaries(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Haar samples from ``U_B`` for the two supported algebra shapes."""
        from .linalg import haar_unitaries

        if self.kind == "matrix":
            return haar_unitaries(self.n, size, rng)
        if self.kind == "diagonal":
            return np.exp(2j * np.pi * rng.random((size, self.N)))
        raise InvalidInput("Haar sampling of U_B is only available for matrix and diagonal bases")


def weyl_matrix(h: FiniteAbelianGroup, k, c) -> np.ndarray:
    """Weyl unitary ``W_{kc}: e_i -> <k, i> e_{i+c}`` on ``l^2(H)``."""
    n = h.size
    w = np.zeros((n, n), dtype=complex)
    for i in h.elements:
        w[h.index(h.add(i, c)), h.index(i)] = pairing(h, k, i)
    return w


def weyl_basis(h: FiniteAbelianGroup) -> OrthonormalUnitaryBasis:
    """All ``|H|**2`` Weyl matrices, labels ``(k, c)`` in lexicographic order."""
    labels = tuple((k, c) for k in h.elements for c in h.elements)
    members = np.stack([weyl_matrix(h, k, c) for k, c in labels])
    return OrthonormalUnitaryBasis("matrix", members, labels)


def phi_iso(h: FiniteAbelianGroup, i, a) -> np.ndarray:
    """Image of the generator ``g_{ia}`` of ``C*_sigma(H x H^)`` in ``M_n(C)``.

    ``g_{ia} -> sum_k <k, a> E_{k, k+i}``.
    """
    n = h.size
    m = np.zeros((n, n), dtype=complex)
    for k in h.elements:
        m[h.index(k), h.index(h.add(k, i))] = pairing(h, k, a)
    return m


def phi_basis(h: FiniteAbelianGroup) -> OrthonormalUnitaryBasis:
    """Standard basis ``{phi(g_{ia})}`` with labels ``(i, a)``."""
    labels = tuple((i, a) for i in h.elements for a in h.elements)
    members = np.stack([phi_iso(h, i, a) for i, a in labels])
    return OrthonormalUnitaryBasis("matrix", members, labels)


PAULI = np.array([
    [[1, 0], [0, 1]],
    [[1j, 0], [0, -1j]],
    [[0, 1], [-1, 0]],
    [[0, 1j], [1j, 0]],
], dtype=complex)


def pauli_basis() -> OrthonormalUnitaryBasis:
    """The four matrices ``g_1..g_4`` of the Pauli model (multiples of Pauli matrices)."""
    return OrthonormalUnitaryBasis("matrix", PAULI.copy(), ("g1", "g2", "g3", "g4"))


def twisted_regular_rep(group: FiniteGroup, sigma: Cocycle, g: int, check: bool = True) -> np.ndarray:
    """Twisted left regular representation ``lambda(g): e_h -> sigma(g, h) e_{gh}``."""
    if check:
        res = cocycle_check(sigma)
        if not res:
            raise InvalidInput(f"not a 2-cocycle: {res.violation}")
    n = group.order
    lam = np.zeros((n, n), dtype=complex)
    lam[group.mul[g], np.arange(n)] = sigma.table[g]
    return lam


def regular_basis(group: FiniteGroup, sigma: Cocycle) -> OrthonormalUnitaryBasis:
    """Standard basis of ``C*_sigma(G)`` in its twisted regular representation."""
    res = cocycle_check(sigma)
    if not res:
        raise InvalidInput(f"not a 2-cocycle: {res.violation}")
    members = np.stack([twisted_regular_rep(group, sigma, g, check=False) for g in range(group.order)])
    return OrthonormalUnitaryBasis("regular", members, tuple(range(group.order)))


def fourier_matrix(g: FiniteAbelianGroup) -> np.ndarray:
    """Fourier coupling ``F[i, a] = <i, a>`` (a complex Hadamard matrix)."""
    return g._phase_table.copy()


def fourier_basis(g: FiniteAbelianGroup) -> OrthonormalUnitaryBasis:
    """Standard basis of ``C*(G) = C^N`` for abelian ``G``: the characters (rows of ``F_G``)."""
    return OrthonormalUnitaryBasis("diagonal", fourier_matrix(g), tuple(g.elements))


def is_latin_square(square) -> bool:
    sq = np.asarray(square)
    if sq.ndim != 2 or sq.shape[0] != sq.shape[1]:
        return False
    target = np.arange(1, sq.shape[0] + 1)
    return all(np.array_equal(np.sort(sq[k]), target) and np.array_equal(np.sort(sq[:, k]), target)
               for k in range(sq.shape[0]))


def latin_square_of_group(group: FiniteGroup | FiniteAbelianGroup) -> np.ndarray:
    """Latin square ``L[i, j] = i j^{-1}`` with 1-based labels."""
    if isinstance(group, FiniteAbelianGroup):
        group = group.table()
    inv = group.inverse
    return group.mul[:, inv] + 1


def latin_square_group(square) -> tuple[int, list[tuple[int, ...]]]:
    """Permutation group generated by a Latin square.

    Each label ``k`` gives the permutation matrix ``(L[i, j] == k)_{ij}``,
    i.e. the permutation ``j -> i`` with ``L[i, j] = k``; these are the
    characters of the commutative model ``u_ij = p_{L_ij}``. For ``L = L_G``
    they are the left translations of ``G``. Returns the group order and its
    elements (0-based image tuples), found by breadth-first closure under
    composition.
    """
    sq = np.asarray(square, dtype=int)
    if not is_latin_square(sq):
        raise InvalidInput("not a Latin square")
    n = sq.shape[0]
    gens = []
    for k in range(1, n + 1):
        rows, cols = np.nonzero(sq == k)
        perm = [0] * n
        for i, j in zip(rows, cols):
            perm[j] = int(i)
        gens.append(tuple(perm))
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for perm in frontier:
            for g in gens:
                comp = tuple(g[perm[k]] for k in range(n))
                if comp not in seen:
                    seen.add(comp)
                    nxt.append(comp)
        frontier = nxt
    return len(seen), sorted(seen)
