"""Haar sampling, polar factors, Moore-Penrose roots, projections and Gram matrices."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatmagic.errors import InvalidDimension, InvalidInput
from flatmagic.linalg import (dagger, gram, haar_unitaries, haar_unitary, inner, is_projection,
                              is_unitary, pinv_sqrt, polar, projection_rank, proj)


def _herm_sqrt(a):
    # independent square root via eigh
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def test_inner_is_linear_in_first_slot():
    x = np.array([1j, 2.0])
    y = np.array([1.0, 1j])
    assert np.isclose(inner(2j * x, y), 2j * inner(x, y))
    assert np.isclose(inner(x, x), np.linalg.norm(x) ** 2)
    assert np.isclose(inner(x, y), np.sum(x * np.conj(y)))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_haar_unitary_is_unitary(n, rng):
    x = haar_unitaries(n, 50, rng)
    assert x.shape == (50, n, n)
    assert np.abs(dagger(x) @ x - np.eye(n)).max() <= 1e-12


def test_haar_one_dimensional_is_circle(rng):
    x = haar_unitary(1, rng)
    assert x.shape == (1, 1)
    assert abs(abs(x[0, 0]) - 1) < 1e-14


def test_haar_rejects_zero_dimension(rng):
    with pytest.raises(InvalidDimension):
        haar_unitary(0, rng)


def test_haar_is_deterministic_given_stream():
    a = haar_unitaries(3, 10, np.random.default_rng(5))
    b = haar_unitaries(3, 10, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_haar_trace_moments_u2(rng):
    # E|Tr x|^2 = 1 and E|Tr x|^4 = 2 on U_2
    x = haar_unitaries(2, 100_000, rng)
    t = np.abs(np.trace(x, axis1=-2, axis2=-1)) ** 2
    se = t.std(ddof=1) / np.sqrt(t.size)
    assert abs(t.mean() - 1) < 3 * se
    t2 = t ** 2
    assert abs(t2.mean() - 2) < 3 * t2.std(ddof=1) / np.sqrt(t.size)


def test_haar_phase_correction_matters(rng):
    # E[x_00] must vanish; plain QR of Ginibre has a biased diagonal
    x = haar_unitaries(3, 40_000, rng)
    assert abs(x[:, 0, 0].mean()) < 0.02
    z = rng.standard_normal((40_000, 3, 3)) + 1j * rng.standard_normal((40_000, 3, 3))
    q, _ = np.linalg.qr(z)
    assert abs(q[:, 0, 0].mean()) > 0.1


@pytest.mark.parametrize("t", [np.pi / 6, np.pi / 4, np.pi / 3])
def test_polar_two_by_two_rotation(t):
    m = np.array([[np.cos(t), np.sin(t)], [np.cos(t), -np.sin(t)]])
    expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.abs(polar(m) - expected).max() < 1e-12


def test_polar_identity():
    assert np.abs(polar(np.eye(4)) - np.eye(4)).max() < 1e-15


def test_polar_reconstructs(rng):
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    u = polar(m)
    assert np.abs(m - u @ _herm_sqrt(m.conj().T @ m)).max() <= 1e-10


def test_polar_fixes_unitaries(rng):
    x = haar_unitaries(4, 20, rng)
    assert np.abs(polar(x) - x).max() <= 1e-12


def test_polar_singular_is_unitary():
    m = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert is_unitary(polar(m))


def test_polar_rejects_rectangular():
    with pytest.raises(InvalidDimension):
        polar(np.ones((2, 3)))


def test_pinv_sqrt_diagonal():
    assert np.allclose(pinv_sqrt(np.diag([4.0, 0.0])), np.diag([0.5, 0.0]))
    assert np.allclose(pinv_sqrt(np.eye(3)), np.eye(3))


def test_pinv_sqrt_of_polar_configuration():
    t = np.pi / 6
    m = np.array([[np.cos(t), np.sin(t)], [np.cos(t), -np.sin(t)]])
    expected = np.diag([1 / np.cos(t), 1 / np.sin(t)]) / np.sqrt(2)
    assert np.abs(pinv_sqrt(m.T @ m) - expected).max() < 1e-12


def test_pinv_sqrt_sandwich_is_range_projection(rng):
    a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    p = a @ a.conj().T
    r = pinv_sqrt(p)
    q = r @ p @ r
    u, _, _ = np.linalg.svd(a, full_matrices=False)
    assert np.abs(q - u @ u.conj().T).max() <= 1e-10


def test_pinv_sqrt_rejects_bad_input():
    with pytest.raises(InvalidInput):
        pinv_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInput):
        pinv_sqrt(np.diag([1.0, -1.0]))


def test_pinv_sqrt_absolute_cutoff():
    out = pinv_sqrt(np.diag([1.0, 1e-12]), atol=1e-8)
    assert np.allclose(out, np.diag([1.0, 0.0]))


def test_proj_examples():
    assert np.array_equal(proj([1, 0]), np.array([[1, 0], [0, 0]]))
    assert np.allclose(proj(np.array([1, 1]) / np.sqrt(2)), 0.5)
    with pytest.raises(InvalidInput):
        proj([0, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=5),
       st.floats(0, 2 * np.pi))
def test_proj_properties(entries, theta):
    v = np.array(entries)
    if np.linalg.norm(v) < 1e-3:
        return
    p = proj(v)
    assert is_projection(p, 1e-12)
    assert projection_rank(p) == 1
    assert np.abs(p - np.outer(v, v.conj()) / np.vdot(v, v).real).max() <= 1e-12
    assert np.abs(proj(np.exp(1j * theta) * v) - p).max() <= 1e-14


def test_gram_examples():
    assert np.allclose(gram(list(np.eye(3))), np.eye(3))
    assert np.allclose(gram([np.array([1.0])]), [[1.0]])
    v = [np.array([1, 0]), np.array([1, 1]) / np.sqrt(2)]
    s = 1 / np.sqrt(2)
    assert np.allclose(gram(v), [[1, s], [s, 1]])


def test_gram_convention():
    a, b = np.array([1j, 0]), np.array([1, 0])
    assert np.isclose(gram([a, b])[0, 1], inner(a, b))


def test_gram_rejects_mixed_dimensions():
    with pytest.raises(InvalidInput):
        gram([np.ones(2), np.ones(3)])
