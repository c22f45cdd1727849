"""Abelian groups, pairings, cocycles, Weyl and Fourier bases, Latin squares."""

import itertools

import numpy as np
import pytest

from conftest import group
from flatmagic.errors import InvalidInput
from flatmagic.groups import (PAULI, Cocycle, FiniteAbelianGroup, FiniteGroup, cocycle_check,
                              fourier_basis, fourier_matrix, latin_square_group, latin_square_of_group,
                              pairing, pauli_basis, phi_basis, phi_iso, regular_basis, standard_cocycle,
                              trivial_cocycle, twisted_regular_rep, weyl_basis, weyl_matrix)

GROUPS = ["Z1", "Z2", "Z3", "Z4", "Z2xZ2"]


def test_parse_and_elements():
    h = group("Z2xZ3")
    assert h.orders == (2, 3)
    assert h.size == 6
    assert h.elements[:3] == [(0, 0), (0, 1), (0, 2)]
    assert str(h) == "Z2xZ3"
    with pytest.raises(InvalidInput):
        FiniteAbelianGroup.parse("Q8")
    with pytest.raises(InvalidInput):
        FiniteAbelianGroup((0,))


def test_pairing_values():
    assert np.isclose(pairing(group("Z2"), 1, 1), -1)
    assert np.isclose(pairing(group("Z3"), 1, 1), np.exp(2j * np.pi / 3))
    with pytest.raises(InvalidInput):
        pairing(group("Z2"), (1, 1), 0)


@pytest.mark.parametrize("spec", GROUPS)
def test_pairing_is_bicharacter(spec):
    h = group(spec)
    for a in h.elements:
        assert np.isclose(pairing(h, h.elements[0], a), 1)
    for i, j, a in itertools.product(h.elements, repeat=3):
        assert np.isclose(pairing(h, h.add(i, j), a), pairing(h, i, a) * pairing(h, j, a))


def test_standard_cocycle_z2():
    h = group("Z2")
    sigma = standard_cocycle(h)
    g = h.product(h)
    # (i, a) = (1, 0), (j, b) = (0, 1)
    assert np.isclose(sigma(g.index((1, 0)), g.index((0, 1))), -1)
    for a, j, b in itertools.product(range(2), repeat=3):
        assert np.isclose(sigma(g.index((0, a)), g.index((j, b))), 1)


@pytest.mark.parametrize("spec", GROUPS)
def test_standard_cocycle_passes_check(spec):
    assert cocycle_check(standard_cocycle(group(spec)))


def test_trivial_cocycle_passes():
    assert cocycle_check(trivial_cocycle(group("Z3").table()))


def test_mutated_cocycle_is_reported():
    sigma = standard_cocycle(group("Z2"))
    table = sigma.table.copy()
    table[1, 2] *= -1
    res = cocycle_check(Cocycle(sigma.group, table))
    assert not res
    assert res.violation[0] == "identity"
    g, h, k = res.violation[1:]
    t, m = table, sigma.group.mul
    assert abs(t[m[g, h], k] * t[g, h] - t[g, m[h, k]] * t[h, k]) > 1e-12


def test_cocycle_normalization_violation():
    grp = group("Z2").table()
    table = np.ones((2, 2), dtype=complex)
    table[0, 1] = 1j
    assert cocycle_check(Cocycle(grp, table)).violation[0] == "normalization"


def test_incomplete_cocycle_table():
    with pytest.raises(InvalidInput):
        cocycle_check(Cocycle(group("Z2").table(), np.ones((2, 3))))


def test_weyl_z2_examples():
    h = group("Z2")
    assert np.allclose(weyl_matrix(h, 0, 0), np.eye(2))
    assert np.allclose(weyl_matrix(h, 1, 0), np.diag([1, -1]))
    assert np.allclose(weyl_matrix(h, 0, 1), [[0, 1], [1, 0]])


@pytest.mark.parametrize("spec", GROUPS)
def test_weyl_relations(spec):
    h = group(spec)
    w = {(i, a): weyl_matrix(h, i, a) for i in h.elements for a in h.elements}
    for (i, a), (j, b) in itertools.product(w, repeat=2):
        rhs = pairing(h, i, b) * w[h.add(i, j), h.add(a, b)]
        assert np.abs(w[i, a] @ w[j, b] - rhs).max() <= 1e-12
    for (i, a), m in w.items():
        assert np.abs(m.conj().T - pairing(h, i, a) * w[h.neg(i), h.neg(a)]).max() <= 1e-12


@pytest.mark.parametrize("spec", GROUPS)
def test_weyl_basis_orthonormal(spec):
    b = weyl_basis(group(spec))
    assert b.N == group(spec).size ** 2
    assert b.orthonormality_defect() <= 1e-12
    assert b.unitarity_defect() <= 1e-12


def test_weyl_z2_are_pauli_multiples():
    b = weyl_basis(group("Z2"))
    span = np.linalg.matrix_rank(b.members.reshape(4, 4))
    assert span == 4
    for m in b.members:
        ratios = [np.vdot(p, m) / 2 for p in PAULI]
        k = int(np.argmax(np.abs(ratios)))
        assert np.isclose(abs(ratios[k]), 1)
        assert np.allclose(m, ratios[k] * PAULI[k])


def test_phi_z2_matches_pauli():
    h = group("Z2")
    assert np.allclose(phi_iso(h, 0, 0), np.eye(2))
    images = [phi_iso(h, 0, 0), phi_iso(h, 0, 1), phi_iso(h, 1, 1), phi_iso(h, 1, 0)]
    for img, factor, pauli in zip(images, [1, 1j, 1, 1j], PAULI):
        assert np.allclose(factor * img, pauli)


@pytest.mark.parametrize("spec", GROUPS)
def test_phi_multiplicative_and_involutive(spec):
    h = group(spec)
    f = {(i, a): phi_iso(h, i, a) for i in h.elements for a in h.elements}
    for (i, a), (j, b) in itertools.product(f, repeat=2):
        rhs = pairing(h, i, b) * f[h.add(i, j), h.add(a, b)]
        assert np.abs(f[i, a] @ f[j, b] - rhs).max() <= 1e-12
    for (i, a), m in f.items():
        assert np.abs(m.conj().T - pairing(h, i, a) * f[h.neg(i), h.neg(a)]).max() <= 1e-12


@pytest.mark.parametrize("spec", ["Z2", "Z3", "Z4", "Z2xZ2"])
def test_phi_and_weyl_agree_up_to_phase(spec):
    h = group(spec)
    w = weyl_basis(h).members
    for m in phi_basis(h).members:
        overlaps = np.abs(np.einsum("kij,ij->k", w.conj(), m)) / h.size
        k = int(np.argmax(overlaps))
        assert np.isclose(overlaps[k], 1)
        phase = np.vdot(w[k], m) / h.size
        assert np.abs(m - phase * w[k]).max() <= 1e-12


def test_pauli_basis():
    b = pauli_basis()
    assert b.orthonormality_defect() <= 1e-12
    assert b.unitarity_defect() <= 1e-12


def test_regular_rep_trivial_z3_is_cyclic():
    grp = group("Z3").table()
    lam = twisted_regular_rep(grp, trivial_cocycle(grp), 1)
    assert np.array_equal(lam, np.roll(np.eye(3), 1, axis=0))
    assert np.array_equal(twisted_regular_rep(grp, trivial_cocycle(grp), 0), np.eye(3))


@pytest.mark.parametrize("spec", ["Z2", "Z2xZ2"])
def test_regular_rep_multiplicative(spec):
    sigma = standard_cocycle(group(spec))
    grp = sigma.group
    lam = [twisted_regular_rep(grp, sigma, g) for g in range(grp.order)]
    for g, h in itertools.product(range(grp.order), repeat=2):
        assert np.abs(lam[g] @ lam[h] - sigma(g, h) * lam[grp.mul[g, h]]).max() <= 1e-12
    basis = regular_basis(grp, sigma)
    assert basis.orthonormality_defect() <= 1e-12


def test_regular_rep_nonabelian():
    # S_3 with the trivial cocycle, as permutations composed left to right
    perms = list(itertools.permutations(range(3)))
    mul = [[perms.index(tuple(p[q[k]] for k in range(3))) for q in perms] for p in perms]
    grp = FiniteGroup(np.array(mul))
    lam = [twisted_regular_rep(grp, trivial_cocycle(grp), g) for g in range(6)]
    for g, h in itertools.product(range(6), repeat=2):
        assert np.array_equal(lam[g] @ lam[h], lam[grp.mul[g, h]])


def test_regular_rep_rejects_bad_cocycle():
    grp = group("Z2").table()
    bad = Cocycle(grp, np.array([[1, 1], [1, 2]]))
    with pytest.raises(InvalidInput):
        twisted_regular_rep(grp, bad, 1)


def test_fourier_examples():
    assert np.allclose(fourier_matrix(group("Z2")), [[1, 1], [1, -1]])
    f4 = fourier_matrix(group("Z4"))
    assert np.allclose(f4 @ f4.conj().T, 4 * np.eye(4))
    f22 = fourier_matrix(group("Z2xZ2"))
    h2 = np.array([[1, 1], [1, -1]])
    assert np.allclose(f22, np.kron(h2, h2))
    assert np.allclose(f22.imag, 0)


@pytest.mark.parametrize("spec", GROUPS + ["Z5", "Z2xZ4"])
def test_fourier_rescaled_is_unitary(spec):
    f = fourier_matrix(group(spec))
    n = f.shape[0]
    u = f / np.sqrt(n)
    assert np.abs(u @ u.conj().T - np.eye(n)).max() <= 1e-12
    assert np.allclose(np.abs(f), 1)
    assert fourier_basis(group(spec)).orthonormality_defect() <= 1e-12


def test_latin_square_of_small_groups():
    assert np.array_equal(latin_square_of_group(group("Z2")), [[1, 2], [2, 1]])
    sq = latin_square_of_group(group("Z3"))
    assert np.array_equal(sq, [[1, 3, 2], [2, 1, 3], [3, 2, 1]])
    # circulant: each row is the previous one shifted right
    assert all(np.array_equal(sq[k], np.roll(sq[k - 1], 1)) for k in range(1, 3))


@pytest.mark.parametrize("spec", ["Z3", "Z4", "Z2xZ2", "Z2xZ3"])
def test_latin_identity_row_is_inversion(spec):
    h = group(spec)
    sq = latin_square_of_group(h)
    inv = [h.index(h.neg(g)) + 1 for g in h.elements]
    assert list(sq[0]) == inv


@pytest.mark.parametrize("spec", ["Z3", "Z4", "Z2xZ2", "Z2xZ3"])
def test_latin_square_group_recovers_order(spec):
    order, _ = latin_square_group(latin_square_of_group(group(spec)))
    assert order == group(spec).size


def test_latin_square_group_generates_s4():
    sq = np.array([[1, 2, 3, 4], [2, 3, 4, 1], [4, 1, 2, 3], [3, 4, 1, 2]])
    order, elements = latin_square_group(sq)
    assert order == 24
    assert len(set(elements)) == 24


def test_latin_square_group_nonabelian():
    perms = list(itertools.permutations(range(3)))
    mul = [[perms.index(tuple(p[q[k]] for k in range(3))) for q in perms] for p in perms]
    order, _ = latin_square_group(latin_square_of_group(FiniteGroup(np.array(mul))))
    assert order == 6


def test_latin_square_group_rejects_non_latin():
    with pytest.raises(InvalidInput):
        latin_square_group([[1, 1], [2, 2]])
