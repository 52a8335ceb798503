"""Finite differences, a damped Newton kernel, rank estimation and sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SolverConfig",
    "RngSpec",
    "NewtonReport",
    "NonFiniteResidual",
    "fd_jacobian",
    "matrix_rank",
    "newton_solve",
    "as_generator",
    "sample_unit_octonion",
    "sample_algebra",
]

RANK_RTOL = 1e-7


class NonFiniteResidual(ArithmeticError):
    """The residual became NaN or infinite during an iteration."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 50
    fd_step: float = 1e-6
    damping: float = 0.5
    chart_clamp: float = math.pi / 2

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.fd_step < 1e-2:
            raise ValueError("fd_step must lie in (0, 1e-2)")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if not self.chart_clamp > 0:
            raise ValueError("chart_clamp must be positive")


@dataclass(frozen=True)
class RngSpec:
    """Seed plus the distribution the stream is meant for.

    Each call to :meth:`generator` starts a fresh stream, so a spec can be
    handed to several tasks without any of them sharing mutable state.
    """

    seed: int = 0
    distribution: str = "uniform-on-sphere"

    def __post_init__(self):
        if self.distribution not in ("uniform-on-sphere", "gaussian-tangent"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return rng.generator()
    return RngSpec(int(rng)).generator()


@dataclass
class NewtonReport:
    iterations: int
    residual_norm: float
    converged: bool
    jacobian_rank: int
    dim: int
    history: list = field(default_factory=list)

    @property
    def rank_deficient(self) -> bool:
        return self.jacobian_rank < self.dim


def fd_jacobian(f: Callable, x, h: float) -> np.ndarray:
    """Central-difference Jacobian; column ``j`` is ``(f(x+h e_j) - f(x-h e_j)) / 2h``."""
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        # divide by the step actually represented, not the nominal 2h
        cols.append((np.asarray(f(xp)) - np.asarray(f(xm))) / (xp[j] - xm[j]))
    return np.stack(cols, axis=-1)


def matrix_rank(J, rtol: float = RANK_RTOL) -> int:
    """Count singular values above ``rtol`` times the largest one."""
    s = np.linalg.svd(np.atleast_2d(J), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def _check_finite(r, it):
    if not np.all(np.isfinite(r)):
        raise NonFiniteResidual(f"non-finite residual at iteration {it}: {r}")


def newton_solve(residual: Callable, x0, cfg: SolverConfig = SolverConfig(), retract=None):
    """Damped Newton iteration with a finite-difference Jacobian.

    ``retract(x, d)`` moves the iterate by a step ``d`` in local coordinates;
    the default is ``x + d``.  The Jacobian is always taken with respect to
    ``d`` at ``d = 0``, so a manifold chart is re-centred at every iterate.

    A rank-deficient Jacobian switches to a minimum-norm least-squares step
    scaled by ``cfg.damping``.  When a chart retraction is supplied, steps
    longer than ``cfg.chart_clamp`` are shortened to that length.  A step
    that fails to reduce the residual is shrunk by ``cfg.damping`` up to 20 times.

    Returns ``(x, NewtonReport)``.
    """
    if retract is None:
        clamp = np.inf

        def retract(x, d):
            return x + d

        def jacobian(x, n):
            return fd_jacobian(residual, x, cfg.fd_step)
    else:
        clamp = cfg.chart_clamp

        def jacobian(x, n):
            return fd_jacobian(lambda d: residual(retract(x, d)), np.zeros(n), cfg.fd_step)

    x = x0
    r = np.asarray(residual(x), dtype=float)
    _check_finite(r, 0)
    n_res = float(np.linalg.norm(r))
    history = [n_res]
    it = 0
    J = None
    while n_res > cfg.tol and it < cfg.max_iter:
        it += 1
        J = jacobian(x, r.size)
        if matrix_rank(J) == J.shape[1]:
            step = np.linalg.solve(J, -r)
        else:
            step = -cfg.damping * np.linalg.lstsq(J, r, rcond=None)[0]
        length = np.linalg.norm(step)
        if length > clamp:
            step *= clamp / length

        for _ in range(20):
            x_new = retract(x, step)
            r_new = np.asarray(residual(x_new), dtype=float)
            _check_finite(r_new, it)
            if np.linalg.norm(r_new) < n_res:
                break
            step = step * cfg.damping
        else:
            history.append(n_res)
            break
        x, r = x_new, r_new
        n_res = float(np.linalg.norm(r))
        history.append(n_res)
        J = None

    if J is None:
        J = jacobian(x, r.size)
    report = NewtonReport(
        iterations=it,
        residual_norm=n_res,
        converged=n_res <= cfg.tol,
        jacobian_rank=matrix_rank(J),
        dim=J.shape[1],
        history=history,
    )
    return x, report


def sample_unit_octonion(rng, size=None) -> np.ndarray:
    """Uniform samples on S^7 (normalized 8-d Gaussians)."""
    gen = as_generator(rng)
    shape = (8,) if size is None else (size, 8)
    x = gen.standard_normal(shape)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def sample_algebra(rng, radius: float = 1.0, size=None, dim: int = 7) -> np.ndarray:
    """Uniform samples in the ball of the given radius in the tangent algebra."""
    gen = as_generator(rng)
    shape = (dim,) if size is None else (size, dim)
    x = gen.standard_normal(shape)
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    u = gen.random(() if size is None else (size, 1))
    return x * radius * u ** (1.0 / dim)
