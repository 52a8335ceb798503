"""Smooth loops built on octonion storage.

Three instances share one code path: the unit octonions (S^7, a Moufang loop
that is not a group), the invertible octonions, and the unit quaternions
(S^3, kept as an associative control with coefficients 4..7 pinned to zero).

Points and tangent vectors are octonions embedded in R^8.  Elements of the
tangent algebra at the identity are coordinate vectors over the loop's
imaginary basis (7 entries for octonions, 3 for quaternions).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import (
    DomainError,
    basis,
    imag_to_oct,
    oct_inner,
    oct_inv,
    oct_mul,
    oct_norm,
)
from .numerics import as_generator, sample_algebra

__all__ = [
    "ChartDomainError",
    "BracketError",
    "UNIT_TOL",
    "as_unit",
    "TangentVector",
    "Loop",
    "UNIT_OCTONIONS",
    "INVERTIBLE_OCTONIONS",
    "UNIT_QUATERNIONS",
    "left_prolong",
    "right_prolong",
    "bracket_left",
    "bracket_right",
    "bracket_field_at",
    "jacobiator",
    "malcev_residual",
    "exp_map",
    "log_map",
    "loop_inverse_diff_check",
    "tangent_loop_mul",
    "moufang_residuals",
    "leibniz_coefficients",
    "non_invariance",
]

UNIT_TOL = 1e-10
RENORM_TOL = 1e-6
TANGENT_TOL = 1e-10
BRACKET_REAL_TOL = 1e-12


class ChartDomainError(DomainError):
    """Point outside the domain of the logarithm chart."""


class BracketError(ValueError):
    """A bracket of imaginary inputs came out with a real part."""


def as_unit(x, tol: float = RENORM_TOL) -> np.ndarray:
    """Validate a point of S^7, renormalizing small drift.

    Inputs within ``tol`` of unit norm are rescaled onto the sphere; anything
    further away raises :class:`DomainError`.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 8:
        raise DomainError(f"expected 8 coefficients, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite coefficients")
    n = oct_norm(x)
    if np.any(np.abs(n - 1.0) > tol):
        raise DomainError(f"not a unit octonion (norm {n})")
    return x / n[..., None]


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        dev = np.max(np.abs(oct_inner(self.vec, self.base)))
        if dev > TANGENT_TOL * max(1.0, float(np.max(oct_norm(self.vec)))):
            raise DomainError(f"vector is not tangent at base (<vec, base> = {dev:.3g})")


@dataclass(frozen=True)
class Loop:
    """A loop realized inside the octonions.

    ``imag`` lists the basis units spanning the tangent algebra at ``e0``;
    ``support`` lists every coefficient a point may use.
    """

    name: str
    imag: tuple
    support: tuple
    unit: bool = True

    @property
    def dim(self) -> int:
        return len(self.imag)

    @property
    def identity(self) -> np.ndarray:
        return basis(0)

    @property
    def basis(self) -> np.ndarray:
        """``(dim, 8)`` array of the tangent-algebra basis octonions."""
        return np.eye(8)[list(self.imag)]

    def mul(self, g, h):
        return oct_mul(g, h)

    def inv(self, g):
        return oct_inv(g)

    def contains(self, g, tol: float = UNIT_TOL) -> bool:
        g = np.asarray(g, dtype=float)
        off = [i for i in range(8) if i not in self.support]
        if off and np.any(np.abs(g[..., off]) > tol):
            return False
        n = oct_norm(g)
        if self.unit:
            return bool(np.all(np.abs(n - 1.0) <= tol))
        return bool(np.all(n > 0))

    def left_diff(self, g, v):
        """Differential of left translation by ``g`` applied to ``v``: ``g v``."""
        return oct_mul(g, v)

    def right_diff(self, g, v):
        return oct_mul(v, g)

    def embed(self, X) -> np.ndarray:
        """Tangent-algebra coordinates to an octonion."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise ValueError(f"{self.name}: expected {self.dim} coordinates, got {X.shape}")
        out = np.zeros(X.shape[:-1] + (8,))
        out[..., list(self.imag)] = X
        return out

    def coords(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)[..., list(self.imag)]

    def exp(self, X) -> np.ndarray:
        v = self.embed(X)
        if self.unit:
            return exp_map(v)
        return np.exp(v[..., :1]) * exp_map(np.concatenate([np.zeros_like(v[..., :1]), v[..., 1:]], axis=-1))

    def log(self, g) -> np.ndarray:
        if self.unit:
            return self.coords(imag_to_oct(log_map(g)))
        g = np.asarray(g, dtype=float)
        n = oct_norm(g)
        out = imag_to_oct(log_map(g / n[..., None]))
        out[..., 0] = np.log(n)
        return self.coords(out)

    def sample(self, rng, size=None) -> np.ndarray:
        gen = as_generator(rng)
        shape = (len(self.support),) if size is None else (size, len(self.support))
        x = gen.standard_normal(shape)
        if self.unit:
            x /= np.linalg.norm(x, axis=-1, keepdims=True)
        out = np.zeros(x.shape[:-1] + (8,))
        out[..., list(self.support)] = x
        return out

    def sample_algebra(self, rng, radius: float = 1.0, size=None) -> np.ndarray:
        return sample_algebra(rng, radius, size, dim=self.dim)


UNIT_OCTONIONS = Loop("unit-octonions", tuple(range(1, 8)), tuple(range(8)))
INVERTIBLE_OCTONIONS = Loop("invertible-octonions", tuple(range(8)), tuple(range(8)), unit=False)
UNIT_QUATERNIONS = Loop("unit-quaternions", (1, 2, 3), (0, 1, 2, 3))


def left_prolong(a, X) -> TangentVector:
    """Left prolongation of ``X`` evaluated at ``a``: the tangent vector ``a X``."""
    a = as_unit(a)
    return TangentVector(a, oct_mul(a, imag_to_oct(X)))


def right_prolong(a, X) -> TangentVector:
    a = as_unit(a)
    return TangentVector(a, oct_mul(imag_to_oct(X), a))


def _imaginary_part(v, what):
    real = np.max(np.abs(v[..., 0]))
    if not real <= BRACKET_REAL_TOL:
        raise BracketError(f"{what} has real part {real:.3g}; input is corrupted")
    return v[..., 1:]


def bracket_left(X, Y) -> np.ndarray:
    """``XY - YX``, the bracket of left prolongations at ``e0``."""
    x, y = imag_to_oct(X), imag_to_oct(Y)
    return _imaginary_part(oct_mul(x, y) - oct_mul(y, x), "left bracket")


def bracket_right(X, Y) -> np.ndarray:
    """``YX - XY``; at the identity this is exactly minus :func:`bracket_left`."""
    x, y = imag_to_oct(X), imag_to_oct(Y)
    return _imaginary_part(oct_mul(y, x) - oct_mul(x, y), "right bracket")


def bracket_field_at(a, X, Y, side: str = "left") -> TangentVector:
    """Commutator of prolonged vector fields, evaluated at ``a``.

    ``left``:  ``(aX)Y - (aY)X``
    ``right``: ``Y(Xa) - X(Ya)``
    ``mixed``: ``Y(aX) - (Ya)X``, the right/left commutator, which equals the
    associator ``-[Y, a, X]`` and so vanishes identically on associative loops.
    """
    a = as_unit(a)
    x, y = imag_to_oct(X), imag_to_oct(Y)
    if side == "left":
        v = oct_mul(oct_mul(a, x), y) - oct_mul(oct_mul(a, y), x)
    elif side == "right":
        v = oct_mul(y, oct_mul(x, a)) - oct_mul(x, oct_mul(y, a))
    elif side == "mixed":
        v = oct_mul(y, oct_mul(a, x)) - oct_mul(oct_mul(y, a), x)
    else:
        raise ValueError(f"unknown side {side!r}")
    return TangentVector(a, v)


def jacobiator(X, Y, Z) -> np.ndarray:
    b = bracket_left
    return b(b(X, Y), Z) + b(b(Y, Z), X) + b(b(Z, X), Y)


def malcev_residual(X, Y, Z) -> np.ndarray:
    """Norm of ``[[X,Y],[X,Z]] - [[[X,Y],Z],X] - [[[Y,Z],X],X] - [[[Z,X],X],Y]``."""
    b = bracket_left
    lhs = b(b(X, Y), b(X, Z))
    rhs = b(b(b(X, Y), Z), X) + b(b(b(Y, Z), X), X) + b(b(b(Z, X), X), Y)
    return np.linalg.norm(lhs - rhs, axis=-1)


def exp_map(X) -> np.ndarray:
    """``cos|X| + sin|X| X/|X|`` for imaginary ``X`` (7 or 8 coefficients)."""
    x = imag_to_oct(X)
    t = oct_norm(x)
    out = np.sinc(t / np.pi)[..., None] * x
    out[..., 0] = np.cos(t)
    return out


def log_map(a) -> np.ndarray:
    """Principal logarithm on S^7, with ``|X|`` in ``[0, pi)``.

    The antipode ``-e0`` has no preferred axis and raises
    :class:`ChartDomainError`.
    """
    a = np.asarray(a, dtype=float)
    im = a[..., 1:]
    s = np.linalg.norm(im, axis=-1)
    if np.any((s <= 1e-15) & (a[..., 0] < 0)):
        raise ChartDomainError("log is undefined at -e0")
    t = np.arctan2(s, a[..., 0])
    return im / np.sinc(t / np.pi)[..., None]


def loop_inverse_diff_check(a, X, h: float = 1e-5) -> float:
    """Residual of ``D(inv)_a(aX) + X a^-1`` with a central-difference differential."""
    a = as_unit(a)
    x = imag_to_oct(X)
    v = oct_mul(a, x)
    d_inv = (oct_inv(a + h * v) - oct_inv(a - h * v)) / (2 * h)
    return float(oct_norm(d_inv + oct_mul(x, oct_inv(a))))


def tangent_loop_mul(u: TangentVector, v: TangentVector) -> TangentVector:
    """Product on the tangent bundle: ``(gh, X_g h + g Y_h)``."""
    g, h = u.base, v.base
    return TangentVector(oct_mul(g, h), oct_mul(u.vec, h) + oct_mul(g, v.vec))


def moufang_residuals(a, x, y) -> np.ndarray:
    """Norms of the three Moufang identity defects, stacked on the last axis."""
    m = oct_mul
    r1 = m(m(m(a, x), a), y) - m(a, m(x, m(a, y)))
    r2 = m(m(m(x, a), y), a) - m(x, m(a, m(y, a)))
    r3 = m(m(a, x), m(y, a)) - m(m(a, m(x, y)), a)
    return np.stack([oct_norm(r1), oct_norm(r2), oct_norm(r3)], axis=-1)


def leibniz_coefficients() -> dict:
    """Map ``(i, j) -> 2 e_i e_j`` (imaginary coordinates) for ``i != j``.

    These are the coefficients of the linear bivector on the dual algebra that
    encodes the left bracket.
    """
    out = {}
    for i, j in itertools.permutations(range(1, 8), 2):
        out[(i, j)] = bracket_left(basis(i), basis(j))
    return out


def non_invariance(a, X, Y) -> float:
    """``|[lX, lY](a) - a [X, Y]|``; zero on a group, ``2|[a, X, Y]|`` here."""
    field = bracket_field_at(a, X, Y, "left").vec
    return float(oct_norm(field - oct_mul(a, imag_to_oct(bracket_left(X, Y)))))

