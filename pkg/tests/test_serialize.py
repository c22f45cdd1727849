"""JSON round trips with validation on load."""

import json

import numpy as np
import pytest

from conftest import group, random_grid
from flatmagic import serialize as ser
from flatmagic.errors import InvalidInput
from flatmagic.groups import latin_square_of_group, pauli_basis, standard_cocycle
from flatmagic.linalg import haar_unitary
from flatmagic.models import fully_split_grid, fully_split_model


def _roundtrip(obj):
    return json.loads(ser.dumps(obj))


def test_complex_pairs():
    assert ser.complex_to_json([1 + 2j]) == [[1.0, 2.0]]
    assert ser.complex_from_json([[1.0, 2.0]])[0] == 1 + 2j
    with pytest.raises(InvalidInput):
        ser.complex_from_json([1.0, 2.0, 3.0])


def test_grid_roundtrip(rng):
    g = fully_split_grid(pauli_basis(), haar_unitary(2, rng))
    back = ser.grid_from_json(_roundtrip(ser.grid_to_json(g)), magic=True)
    assert np.array_equal(back, g)


def test_grid_loader_validates(rng):
    rec = ser.grid_to_json(random_grid(3, rng))
    ser.grid_from_json(rec)
    with pytest.raises(InvalidInput):
        ser.grid_from_json(rec, magic=True)
    with pytest.raises(InvalidInput):
        ser.grid_from_json({**rec, "N": 4})
    with pytest.raises(InvalidInput):
        ser.grid_from_json({**rec, "type": "other"})


def test_grids_roundtrip(rng):
    gs = np.stack([random_grid(2, rng) for _ in range(3)])
    assert np.array_equal(ser.grids_from_json(_roundtrip(ser.grids_to_json(gs))), gs)


def test_magic_roundtrip(rng):
    u = fully_split_model(pauli_basis(), haar_unitary(2, rng))
    back = ser.magic_from_json(_roundtrip(ser.magic_to_json(u)))
    assert np.array_equal(back, u)
    bad = ser.magic_to_json(2 * u)
    with pytest.raises(InvalidInput):
        ser.magic_from_json(bad)


def test_cocycle_roundtrip():
    sigma = standard_cocycle(group("Z3"))
    back = ser.cocycle_from_json(_roundtrip(ser.cocycle_to_json(sigma)))
    assert np.array_equal(back.table, sigma.table)
    assert np.array_equal(back.group.mul, sigma.group.mul)
    rec = ser.cocycle_to_json(sigma)
    rec["table"][1][2] = [2.0, 0.0]
    with pytest.raises(InvalidInput):
        ser.cocycle_from_json(rec)


def test_latin_roundtrip():
    sq = latin_square_of_group(group("Z2xZ2"))
    assert np.array_equal(ser.latin_from_json(_roundtrip(ser.latin_to_json(sq))), sq)
    with pytest.raises(InvalidInput):
        ser.latin_from_json({"type": "latin-square", "square": [[1, 1], [2, 2]]})


def test_dumps_is_canonical():
    text = ser.dumps({"b": 1, "a": [1.5]})
    assert text.endswith("\n") and text.index('"a"') < text.index('"b"')
    with pytest.raises(ValueError):
        ser.dumps({"x": float("nan")})
