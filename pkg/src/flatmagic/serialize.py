"""JSON encoding of grids, magic unitaries, cocycles and Latin squares.

Complex numbers are stored as ``[re, im]`` pairs inside nested lists. Loaders
validate what they read and raise :class:`~flatmagic.errors.InvalidInput`.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidInput
from .groups import Cocycle, FiniteGroup, cocycle_check, is_latin_square
from .linalg import ATOL_STRUCTURAL
from .models import is_magic_basis, validate_grid, validate_magic


def complex_to_json(a) -> list:
    """Nested lists with every complex entry replaced by ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def complex_from_json(obj) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed complex array: {exc}") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise InvalidInput("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def grid_to_json(grid) -> dict:
    g = np.asarray(grid)
    return {"type": "vector-grid", "N": int(g.shape[0]), "cells": complex_to_json(g)}


def grid_from_json(obj: dict, magic: bool = False, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    """Load a vector grid; with ``magic=True`` it must also be a magic basis."""
    if obj.get("type") != "vector-grid":
        raise InvalidInput("not a vector-grid record")
    g = validate_grid(complex_from_json(obj["cells"]), tol)
    if g.shape[0] != obj.get("N"):
        raise InvalidInput("declared N does not match the cells")
    if magic and not is_magic_basis(g, tol):
        raise InvalidInput("grid is not a magic basis")
    return g


def grids_to_json(grids) -> dict:
    g = np.asarray(grids)
    return {"type": "vector-grids", "N": int(g.shape[1]), "grids": complex_to_json(g)}


def grids_from_json(obj: dict, magic: bool = False, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    if obj.get("type") != "vector-grids":
        raise InvalidInput("not a vector-grids record")
    gs = complex_from_json(obj["grids"])
    if gs.ndim != 4:
        raise InvalidInput("expected a stack of grids")
    for g in gs:
        grid_from_json({"type": "vector-grid", "N": obj.get("N"), "cells": complex_to_json(g)},
                       magic, tol)
    return gs


def magic_to_json(u) -> dict:
    u = np.asarray(u)
    return {"type": "magic-unitary", "N": int(u.shape[0]), "K": int(u.shape[-1]),
            "entries": complex_to_json(u)}


def magic_from_json(obj: dict, flat: bool = True, tol: float = ATOL_STRUCTURAL) -> np.ndarray:
    if obj.get("type") != "magic-unitary":
        raise InvalidInput("not a magic-unitary record")
    u = complex_from_json(obj["entries"])
    res = validate_magic(u, tol, flat=flat)
    if not res.passes(tol):
        raise InvalidInput(f"not a magic unitary (worst defect {res.worst:.3e})")
    if u.shape[0] != obj.get("N") or u.shape[-1] != obj.get("K"):
        raise InvalidInput("declared sizes do not match the entries")
    return u


def cocycle_to_json(sigma: Cocycle) -> dict:
    return {"type": "cocycle", "multiplication": sigma.group.mul.tolist(),
            "identity": int(sigma.group.identity), "table": complex_to_json(sigma.table)}


def cocycle_from_json(obj: dict, tol: float = 1e-12) -> Cocycle:
    if obj.get("type") != "cocycle":
        raise InvalidInput("not a cocycle record")
    group = FiniteGroup(np.asarray(obj["multiplication"], dtype=int), int(obj["identity"]))
    sigma = Cocycle(group, complex_from_json(obj["table"]))
    check = cocycle_check(sigma, tol)
    if not check:
        raise InvalidInput(f"cocycle identity fails: {check.violation}")
    return sigma


def latin_to_json(square) -> dict:
    return {"type": "latin-square", "square": np.asarray(square, dtype=int).tolist()}


def latin_from_json(obj: dict) -> np.ndarray:
    if obj.get("type") != "latin-square":
        raise InvalidInput("not a latin-square record")
    sq = np.asarray(obj["square"], dtype=int)
    if not is_latin_square(sq):
        raise InvalidInput("not a Latin square")
    return sq
