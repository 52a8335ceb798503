"""Octonion arithmetic.

Octonions are plain ``numpy`` arrays whose last axis holds the 8 coefficients
of ``e0, ..., e7``.  Every function broadcasts over leading axes, so a batch of
``n`` octonions is an ``(n, 8)`` array.

The product is driven by a compiled (sign, index) table.  A second product,
built from pairs of quaternions, is kept as an independent check on the table.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DomainError",
    "MUL_INDEX",
    "MUL_SIGN",
    "basis",
    "structure_constants",
    "oct_mul",
    "oct_mul_cd",
    "quat_mul",
    "quat_conj",
    "oct_conj",
    "oct_inner",
    "oct_norm",
    "oct_inv",
    "associator",
    "imag_to_oct",
    "isclose",
]

EQ_TOL = 1e-12


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


# Row i, column j holds e_i e_j as a signed basis index: +k means e_k, -k means
# -e_k.  Index 0 is ambiguous in sign, so the signs live in a separate array.
_TABLE = (
    ("e0", "e1", "e2", "e3", "e4", "e5", "e6", "e7"),
    ("e1", "-e0", "e3", "-e2", "e5", "-e4", "-e7", "e6"),
    ("e2", "-e3", "-e0", "e1", "e6", "e7", "-e4", "-e5"),
    ("e3", "e2", "-e1", "-e0", "e7", "-e6", "e5", "-e4"),
    ("e4", "-e5", "-e6", "-e7", "-e0", "e1", "e2", "e3"),
    ("e5", "e4", "-e7", "e6", "-e1", "-e0", "-e3", "e2"),
    ("e6", "e7", "e4", "-e5", "-e2", "e3", "-e0", "-e1"),
    ("e7", "-e6", "e5", "e4", "-e3", "-e2", "e1", "-e0"),
)


def _compile_table():
    index = np.empty((8, 8), dtype=np.intp)
    sign = np.empty((8, 8), dtype=float)
    for i, row in enumerate(_TABLE):
        for j, entry in enumerate(row):
            sign[i, j] = -1.0 if entry.startswith("-") else 1.0
            index[i, j] = int(entry[-1])
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


MUL_INDEX, MUL_SIGN = _compile_table()


def _gather_plan():
    # For each output slot k, the 8 (i, j) pairs landing there.
    left = np.empty((8, 8), dtype=np.intp)
    right = np.empty((8, 8), dtype=np.intp)
    sign = np.empty((8, 8), dtype=float)
    fill = [0] * 8
    for i in range(8):
        for j in range(8):
            k = MUL_INDEX[i, j]
            left[k, fill[k]] = i
            right[k, fill[k]] = j
            sign[k, fill[k]] = MUL_SIGN[i, j]
            fill[k] += 1
    assert fill == [8] * 8
    return left, right, sign


_LEFT, _RIGHT, _SIGN = _gather_plan()
_CONJ = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])
_QCONJ = np.array([1.0, -1, -1, -1])


def basis(i: int) -> np.ndarray:
    """The basis octonion ``e_i``."""
    e = np.zeros(8)
    e[i] = 1.0
    return e


def structure_constants() -> np.ndarray:
    """Totally antisymmetric ``f[i-1, j-1, k-1]`` with ``e_i e_j = -delta_ij + f_ijk e_k``."""
    f = np.zeros((7, 7, 7))
    for i in range(1, 8):
        for j in range(1, 8):
            if i != j:
                f[i - 1, j - 1, MUL_INDEX[i, j] - 1] = MUL_SIGN[i, j]
    return f


def oct_mul(g, h) -> np.ndarray:
    """Octonion product ``g h`` from the multiplication table."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    return np.sum(_SIGN * g[..., _LEFT] * h[..., _RIGHT], axis=-1)


def quat_mul(p, q) -> np.ndarray:
    """Hamilton product of quaternions stored as ``(w, x, y, z)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conj(q) -> np.ndarray:
    return np.asarray(q, dtype=float) * _QCONJ


def oct_mul_cd(g, h) -> np.ndarray:
    """Octonion product through the quaternion-pair (Cayley-Dickson) rule.

    ``g = (a, b)`` with ``a`` the coefficients of ``e0..e3`` and ``b`` those of
    ``e4..e7``; then ``(a, b)(c, d) = (ac - d*b, da + bc*)``.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    a, b = g[..., :4], g[..., 4:]
    c, d = h[..., :4], h[..., 4:]
    first = quat_mul(a, c) - quat_mul(quat_conj(d), b)
    second = quat_mul(d, a) + quat_mul(b, quat_conj(c))
    return np.concatenate([first, second], axis=-1)


def oct_conj(g) -> np.ndarray:
    return np.asarray(g, dtype=float) * _CONJ


def oct_inner(g, h) -> np.ndarray:
    """Euclidean inner product of coefficient vectors, ``Re(g h*)``."""
    return np.sum(np.asarray(g, dtype=float) * np.asarray(h, dtype=float), axis=-1)


def oct_norm(g) -> np.ndarray:
    return np.linalg.norm(np.asarray(g, dtype=float), axis=-1)


def oct_inv(g) -> np.ndarray:
    """``g* / |g|^2``.  Raises :class:`DomainError` on a zero octonion."""
    g = np.asarray(g, dtype=float)
    n2 = np.sum(g * g, axis=-1)
    if np.any(n2 == 0.0):
        raise DomainError("zero octonion has no inverse")
    return oct_conj(g) / n2[..., None]


def associator(g, h, k) -> np.ndarray:
    """``(gh)k - g(hk)``."""
    return oct_mul(oct_mul(g, h), k) - oct_mul(g, oct_mul(h, k))


def imag_to_oct(x) -> np.ndarray:
    """Embed 7 imaginary coefficients as an octonion; 8-vectors pass through."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == 8:
        return x
    if x.shape[-1] != 7:
        raise ValueError(f"expected 7 or 8 coefficients, got shape {x.shape}")
    return np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)


def isclose(g, h, eps: float = EQ_TOL) -> bool:
    """Tolerance equality: max componentwise difference at most ``eps``."""
    return bool(np.max(np.abs(np.asarray(g, float) - np.asarray(h, float))) <= eps)
