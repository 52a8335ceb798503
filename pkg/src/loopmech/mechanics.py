"""Discrete Lagrangian and Hamiltonian dynamics on a unit loop.

A Lagrangian carries its value and a gradient taken in the ambient R^8.  Only
pairings of that gradient with tangent directions matter, and the directions
used here (``a e_i`` and ``e_i a``) are tangent already, so nothing is
projected before pairing.

The discrete Euler-Lagrange (EL) equations for a step ``a -> b`` read

    <grad L(a), a e_i> = <grad L(b), e_i b>,    i over the algebra basis,

i.e. ``F+L(a) = F-L(b)`` in terms of the two Legendre maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import DomainError, oct_inner, oct_inv, oct_mul, oct_norm
from .loop import UNIT_OCTONIONS, Loop, as_unit
from .numerics import (
    SolverConfig,
    as_generator,
    fd_jacobian,
    newton_solve,
)

__all__ = [
    "Lagrangian",
    "ELStepReport",
    "CotangentPoint",
    "FlowUndefinedError",
    "InvalidCovectorError",
    "lagrangian_linear",
    "lagrangian_sq",
    "lagrangian_kinetic",
    "el_residual",
    "legendre_plus",
    "legendre_minus",
    "legendre_jacobian",
    "el_solve_step",
    "el_brute_oracle",
    "dL_lift",
    "source_map",
    "target_map",
    "hamiltonian_flow",
    "cotangent_obstruction",
    "kinetic_recurrence_defect",
    "sq_recurrence_defect",
    "kinetic_pair",
]

COVECTOR_TOL = 1e-10
OBSTRUCTION_TOL = 1e-8


class FlowUndefinedError(RuntimeError):
    """The Legendre map could not be inverted at the requested momentum."""


class InvalidCovectorError(DomainError):
    """A covector representative is not orthogonal to its base point."""


@dataclass(frozen=True)
class Lagrangian:
    label: str
    value: Callable
    ambient_grad: Callable
    loop: Loop = UNIT_OCTONIONS

    def __call__(self, a):
        return self.value(np.asarray(a, dtype=float))

    def grad(self, a):
        return self.ambient_grad(np.asarray(a, dtype=float))


@dataclass
class ELStepReport:
    from_: np.ndarray
    to: np.ndarray
    residual: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    degenerate_branch: bool = False


@dataclass(frozen=True)
class CotangentPoint:
    base: np.ndarray
    covector: np.ndarray
    loop: Loop = UNIT_OCTONIONS

    def __post_init__(self):
        dev = abs(float(oct_inner(self.covector, self.base)))
        if dev > COVECTOR_TOL * max(1.0, float(oct_norm(self.covector))):
            raise InvalidCovectorError(f"<covector, base> = {dev:.3g}")


def lagrangian_linear(loop: Loop = UNIT_OCTONIONS) -> Lagrangian:
    """``L(a) = <e1, a>``."""
    e1 = np.eye(8)[1]
    return Lagrangian(
        "linear",
        lambda a: a[..., 1],
        lambda a: np.broadcast_to(e1, a.shape).copy(),
        loop,
    )


def lagrangian_sq(loop: Loop = UNIT_OCTONIONS) -> Lagrangian:
    """``L(a) = <e1, a>^2 / 2``."""

    def grad(a):
        g = np.zeros_like(a)
        g[..., 1] = a[..., 1]
        return g

    return Lagrangian("sq", lambda a: 0.5 * a[..., 1] ** 2, grad, loop)


def lagrangian_kinetic(masses, loop: Loop = UNIT_OCTONIONS) -> Lagrangian:
    """``L(a) = sum_k m_k <e_k, a>^2 / 2`` over the loop's imaginary units."""
    m = np.asarray(masses, dtype=float)
    if m.shape != (loop.dim,):
        raise DomainError(f"{loop.name} needs {loop.dim} masses, got shape {m.shape}")
    if np.any(~(m > 0)):
        raise DomainError("masses must be positive")
    weights = np.zeros(8)
    weights[list(loop.imag)] = m

    return Lagrangian(
        "kinetic",
        lambda a: 0.5 * np.sum(weights * a * a, axis=-1),
        lambda a: weights * a,
        loop,
    )


def _pair(grad, directions):
    return np.sum(grad[..., None, :] * directions, axis=-1)


def legendre_plus(L: Lagrangian, a) -> np.ndarray:
    """``F+L(a)_i = <grad L(a), a e_i>``."""
    a = np.asarray(a, dtype=float)
    return _pair(L.grad(a), oct_mul(a[..., None, :], L.loop.basis))


def legendre_minus(L: Lagrangian, a) -> np.ndarray:
    """``F-L(a)_i = <grad L(a), e_i a>``."""
    a = np.asarray(a, dtype=float)
    return _pair(L.grad(a), oct_mul(L.loop.basis, a[..., None, :]))


def el_residual(L: Lagrangian, a, b) -> np.ndarray:
    """EL defect of the step ``a -> b``; zero exactly on solutions."""
    return legendre_plus(L, a) - legendre_minus(L, b)


def _chart(loop: Loop):
    def retract(b, xi):
        return as_unit(loop.mul(b, loop.exp(xi)))

    return retract


def legendre_jacobian(L: Lagrangian, a, side: str = "plus", h: float = 1e-6) -> np.ndarray:
    """Jacobian of ``F+L`` or ``F-L`` in the chart ``xi -> a exp(xi)``."""
    fmap = {"plus": legendre_plus, "minus": legendre_minus}[side]
    a = as_unit(a)
    retract = _chart(L.loop)
    return fd_jacobian(lambda xi: fmap(L, retract(a, xi)), np.zeros(L.loop.dim), h)


def el_solve_step(L: Lagrangian, a, guess, cfg: SolverConfig = SolverConfig()) -> ELStepReport:
    """Find ``b`` near ``guess`` with ``el_residual(L, a, b) = 0``.

    Newton runs in the exponential chart ``b = b_cur exp(xi)``, re-centred at
    each iterate.  The EL equation has several solution branches; this solver
    is local and lands on the one nearest ``guess``.  A converged step whose
    Jacobian is rank-deficient is flagged as ``degenerate_branch`` (the
    solution is not isolated).
    """
    a = as_unit(a)
    b0 = as_unit(guess)
    target = legendre_plus(L, a)

    def residual(b):
        return target - legendre_minus(L, b)

    b, rep = newton_solve(residual, b0, cfg, retract=_chart(L.loop))
    r = residual(b)
    return ELStepReport(
        from_=a,
        to=b,
        residual=r,
        residual_norm=float(np.linalg.norm(r)),
        converged=rep.converged,
        iterations=rep.iterations,
        degenerate_branch=rep.converged and rep.rank_deficient,
    )


def _random_planes(dim, count, gen):
    planes = []
    for _ in range(count):
        q, _ = np.linalg.qr(gen.standard_normal((dim, 2)))
        planes.append((q[:, 0], q[:, 1]))
    return planes


def el_brute_oracle(
    L: Lagrangian,
    a,
    chart_radius: float,
    grid_n: int,
    center=None,
    slices: int = 50,
    coordinate_planes: bool = True,
    planes=None,
    seed: int = 0,
    tol: float = 1e-6,
    refine_steps: int = 45,
) -> list:
    """Grid search for EL partners of ``a`` in a chart ball.

    Points ``b = center exp(xi)`` with ``|xi| <= chart_radius`` are scanned on
    two-dimensional slices through ``xi = 0``: every coordinate plane (when
    ``coordinate_planes``), ``slices`` random planes, plus any explicit
    ``planes`` given as pairs of direction vectors.  Each slice is a
    ``grid_n x grid_n`` lattice.  Discrete local minima of the residual norm are
    refined by repeated grid zooming within the slice, and those ending at or
    below ``tol`` are returned.

    No derivative information is used, so the result is independent of the
    Newton solver.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    loop = L.loop
    a = as_unit(a)
    center = a if center is None else as_unit(center)
    dim = loop.dim
    gen = as_generator(seed)

    all_planes = []
    if coordinate_planes:
        eye = np.eye(dim)
        all_planes += [(eye[i], eye[j]) for i, j in itertools.combinations(range(dim), 2)]
    all_planes += _random_planes(dim, slices, gen)
    for u, v in planes or ():
        q, _ = np.linalg.qr(np.stack([u, v], axis=1))
        all_planes.append((q[:, 0], q[:, 1]))

    target = legendre_plus(L, a)

    def cost(st, u, v):
        xi = st[..., :1] * u + st[..., 1:] * v
        b = oct_mul(center, loop.exp(xi))
        b = b / oct_norm(b)[..., None]
        return np.linalg.norm(target - legendre_minus(L, b), axis=-1), b

    r = chart_radius
    ticks = np.linspace(-r, r, grid_n)
    spacing = ticks[1] - ticks[0]
    S, T = np.meshgrid(ticks, ticks, indexing="ij")
    grid = np.stack([S, T], axis=-1)
    inside = np.hypot(S, T) <= r + 1e-12
    zoom = np.array(list(itertools.product((-1, -0.5, 0, 0.5, 1), repeat=2)))

    found = []
    for u, v in all_planes:
        f, _ = cost(grid, u, v)
        f = np.where(inside, f, np.inf)
        padded = np.pad(f, 1, constant_values=np.inf)
        is_min = inside.copy()
        for di, dj in itertools.product((-1, 0, 1), repeat=2):
            if di or dj:
                is_min &= f <= padded[1 + di : 1 + di + grid_n, 1 + dj : 1 + dj + grid_n]
        for i, j in zip(*np.nonzero(is_min)):
            best = grid[i, j].copy()
            best_f = f[i, j]
            d = spacing
            for _ in range(refine_steps):
                cand = best + d * zoom
                cand = cand[np.hypot(cand[:, 0], cand[:, 1]) <= r + 1e-12]
                fc, _ = cost(cand, u, v)
                k = int(np.argmin(fc))
                if fc[k] < best_f:
                    best, best_f = cand[k], fc[k]
                d *= 0.5
            if best_f <= tol:
                found.append(cost(best, u, v)[1])

    unique = []
    for b in found:
        if all(oct_norm(b - c) > 1e-6 for c in unique):
            unique.append(b)
    return unique


def dL_lift(L: Lagrangian, a) -> CotangentPoint:
    """``dL(a)`` as a cotangent point: the tangential part of the ambient gradient."""
    a = as_unit(a)
    g = L.grad(a)
    return CotangentPoint(a, g - oct_inner(g, a) * a, L.loop)


def target_map(p: CotangentPoint) -> np.ndarray:
    """``beta(p)_i = <covector, base e_i>``."""
    return _pair(p.covector, oct_mul(p.base, p.loop.basis))


def source_map(p: CotangentPoint) -> np.ndarray:
    """``alpha(p)_i = <covector, e_i base>``."""
    return _pair(p.covector, oct_mul(p.loop.basis, p.base))


def composable(p: CotangentPoint, q: CotangentPoint, tol: float = 1e-10) -> bool:
    return bool(np.linalg.norm(target_map(p) - source_map(q)) <= tol)


def hamiltonian_flow(L: Lagrangian, p, seed, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """``F+L((F-L)^-1(p))``, inverting ``F-L`` by Newton from ``seed``.

    Raises :class:`FlowUndefinedError` when the inversion does not converge or
    lands on a point where ``F-L`` is singular.
    """
    p = np.asarray(p, dtype=float)
    g, rep = newton_solve(lambda b: legendre_minus(L, b) - p, as_unit(seed), cfg, retract=_chart(L.loop))
    if not rep.converged:
        raise FlowUndefinedError(f"Legendre inversion stalled at residual {rep.residual_norm:.3g}")
    if rep.rank_deficient:
        raise FlowUndefinedError("Legendre map is singular at the preimage")
    return legendre_plus(L, g)


def cotangent_obstruction(g, h, theta) -> float:
    """``|g^-1 (theta h^-1) - (g^-1 theta) h^-1|`` for a covector ``theta`` at ``gh``.

    On a group both translations commute and this is zero; its failure is what
    keeps the cotangent bundle from inheriting a product.
    """
    g, h = as_unit(g), as_unit(h)
    theta = np.asarray(theta, dtype=float)
    dev = abs(float(oct_inner(theta, oct_mul(g, h))))
    if dev > OBSTRUCTION_TOL:
        raise InvalidCovectorError(f"theta is not orthogonal to gh (<theta, gh> = {dev:.3g})")
    gi, hi = oct_inv(g), oct_inv(h)
    return float(oct_norm(oct_mul(gi, oct_mul(theta, hi)) - oct_mul(oct_mul(gi, theta), hi)))


def kinetic_recurrence_defect(a, b) -> np.ndarray:
    """``a^i a^0 - b^i b^0`` for the imaginary indices."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    return a[..., 1:] * a[..., :1] - b[..., 1:] * b[..., :1]


def sq_recurrence_defect(a, b) -> np.ndarray:
    """``a^1 a^0 - b^1 b^0`` followed by ``a^1 a^j + b^1 b^j`` for ``j = 2..7``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    first = a[..., 1:2] * a[..., :1] - b[..., 1:2] * b[..., :1]
    rest = a[..., 1:2] * a[..., 2:] + b[..., 1:2] * b[..., 2:]
    return np.concatenate([first, rest], axis=-1)


def kinetic_pair(A: float, B: float, direction):
    """The pair ``((A, a'), (B, u a'))`` with ``|a'|^2 = 1 - A^2`` and ``u^2 = (1-B^2)/(1-A^2)``.

    ``u`` takes the sign of ``A/B``; with ``A^2(1-A^2) = B^2(1-B^2)`` this makes
    ``u = A/B``, which the imaginary recurrence requires.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    a_imag = np.sqrt(1 - A * A) * d
    u = np.copysign(np.sqrt((1 - B * B) / (1 - A * A)), A * B)
    a = np.concatenate([[A], a_imag])
    b = np.concatenate([[B], u * a_imag])
    return a, b
