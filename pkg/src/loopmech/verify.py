"""Randomized property checks behind ``loopmech verify``.

Each check returns a :class:`Check` carrying the worst value it saw, the
bound it was held to, and the first offending sample when it fails.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .algebra import (
    associator,
    basis,
    oct_conj,
    oct_inv,
    oct_mul,
    oct_mul_cd,
    oct_norm,
)
from .loop import (
    INVERTIBLE_OCTONIONS,
    UNIT_OCTONIONS,
    UNIT_QUATERNIONS,
    bracket_field_at,
    bracket_left,
    bracket_right,
    exp_map,
    jacobiator,
    log_map,
    loop_inverse_diff_check,
    malcev_residual,
    moufang_residuals,
    non_invariance,
)
from .mechanics import (
    cotangent_obstruction,
    dL_lift,
    el_residual,
    el_solve_step,
    kinetic_pair,
    lagrangian_kinetic,
    lagrangian_linear,
    lagrangian_sq,
    legendre_jacobian,
    legendre_minus,
    legendre_plus,
    source_map,
    target_map,
)
from .numerics import matrix_rank

SUITES = ("algebra", "loop", "mechanics")
N_SAMPLES = 10_000


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    relation: str
    passed: bool
    counterexample: list | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite}: {self.name}: {self.value:.3e} {self.relation} {self.tolerance:.1e}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"], d["tolerance"] = float(self.value), float(self.tolerance)
        d["passed"] = bool(self.passed)
        return d


def worker_count() -> int:
    cap = os.environ.get("LOOPMECH_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _max_check(suite, name, values, tol, samples=None):
    values = np.asarray(values, dtype=float).reshape(len(values), -1).max(axis=1)
    k = int(np.argmax(values))
    worst = float(values[k])
    ok = worst <= tol
    ce = None
    if not ok and samples is not None:
        ce = [np.asarray(s[k]).tolist() for s in samples]
    return Check(suite, name, worst, tol, "<=", ok, ce)


def _min_check(suite, name, value, bound):
    return Check(suite, name, float(value), bound, ">=", bool(value >= bound))


def _ball(gen, n):
    x = UNIT_OCTONIONS.sample(gen, n)
    return x * gen.random((n, 1))


# --- algebra -----------------------------------------------------------------


def _algebra_checks(seed):
    gen = np.random.default_rng([seed, 1])
    g, h = _ball(gen, N_SAMPLES), _ball(gen, N_SAMPLES)
    E = np.eye(8)
    out = []

    table = oct_mul(E[:, None, :], E[None, :, :])
    cd = oct_mul_cd(E[:, None, :], E[None, :, :])
    out.append(_max_check("algebra", "basis table vs quaternion pairs (64 products)",
                          np.abs(table - cd).reshape(64, 8), 0.0))
    out.append(_max_check("algebra", "table vs quaternion-pair product",
                          np.abs(oct_mul(g, h) - oct_mul_cd(g, h)), 1e-14, (g, h)))
    gh = oct_mul(g, h)
    out.append(_max_check("algebra", "norm multiplicativity",
                          np.abs(oct_norm(gh) - oct_norm(g) * oct_norm(h)), 1e-12, (g, h)))
    out.append(_max_check("algebra", "alternativity [g,h,g]",
                          oct_norm(associator(g, h, g)), 1e-12, (g, h)))
    out.append(_max_check("algebra", "alternativity [g,g,h]",
                          oct_norm(associator(g, g, h)), 1e-12, (g, h)))
    out.append(_max_check("algebra", "conjugation reverses products",
                          np.abs(oct_conj(gh) - oct_mul(oct_conj(h), oct_conj(g))), 1e-14, (g, h)))
    out.append(_max_check("algebra", "diassociativity (length-4 words)",
                          diassociativity_spread(g, h, gen), 1e-12, (g, h)))
    u, v = UNIT_OCTONIONS.sample(gen, N_SAMPLES), _ball(gen, N_SAMPLES)
    out.append(_max_check("algebra", "strong inverse u^-1(uv) = v",
                          oct_norm(oct_mul(oct_inv(u), oct_mul(u, v)) - v), 1e-12, (u, v)))
    wit = oct_norm(associator(E[1], E[4], E[7]))
    out.append(Check("algebra", "non-associativity witness |[e1,e4,e7]|", float(wit), 2.0, "==", wit == 2.0))
    return out


def diassociativity_spread(g, h, gen):
    """Largest disagreement among the 5 bracketings of a random word in {g, h}."""
    pick = gen.integers(0, 2, size=(len(g), 4)).astype(bool)
    w = [np.where(pick[:, i : i + 1], g, h) for i in range(4)]
    m = oct_mul
    a, b, c, d = w
    forms = np.stack(
        [
            m(m(m(a, b), c), d),
            m(m(a, m(b, c)), d),
            m(m(a, b), m(c, d)),
            m(a, m(m(b, c), d)),
            m(a, m(b, m(c, d))),
        ]
    )
    return np.max(np.abs(forms - forms[0]), axis=(0, 2))


# --- loop --------------------------------------------------------------------


def _loop_checks(seed):
    gen = np.random.default_rng([seed, 2])
    out = []
    for loop in (UNIT_OCTONIONS, INVERTIBLE_OCTONIONS, UNIT_QUATERNIONS):
        a, b = loop.sample(gen, N_SAMPLES), loop.sample(gen, N_SAMPLES)
        e = loop.identity
        ai = loop.inv(a)
        worst = np.max(
            [
                oct_norm(loop.mul(e, a) - a),
                oct_norm(loop.mul(a, e) - a),
                oct_norm(loop.mul(ai, loop.mul(a, b)) - b),
                oct_norm(loop.mul(loop.mul(b, a), ai) - b),
                oct_norm(loop.mul(a, ai) - e),
                oct_norm(loop.mul(ai, a) - e),
                oct_norm(loop.inv(ai) - a),
                oct_norm(loop.inv(loop.mul(a, b)) - loop.mul(loop.inv(b), ai)),
            ],
            axis=0,
        )
        scale = oct_norm(a) * oct_norm(b) + 1.0
        out.append(_max_check("loop", f"loop and inverse-loop laws on {loop.name}",
                              worst / scale, 1e-12, (a, b)))
        m = moufang_residuals(a, b, loop.sample(gen, N_SAMPLES))
        if loop.unit:
            out.append(_max_check("loop", f"Moufang identities on {loop.name}", m, 1e-12))

    E = np.eye(8)
    diffs = [
        np.abs(bracket_left(E[i], E[j]) - 2 * oct_mul(E[i], E[j])[1:])
        for i, j in itertools.permutations(range(1, 8), 2)
    ]
    out.append(_max_check("loop", "[e_i, e_j] = 2 e_i e_j on 42 basis pairs", diffs, 0.0))

    X, Y, Z = (UNIT_OCTONIONS.sample_algebra(gen, 1.0, N_SAMPLES) for _ in range(3))
    out.append(_max_check("loop", "right bracket = -left bracket at e0",
                          np.abs(bracket_right(X, Y) + bracket_left(X, Y)), 1e-14))
    out.append(_max_check("loop", "Mal'cev residual", malcev_residual(X, Y, Z), 1e-10, (X, Y, Z)))
    jac = max(
        float(np.linalg.norm(jacobiator(E[i], E[j], E[k])))
        for i, j, k in itertools.combinations(range(1, 8), 3)
    )
    out.append(_min_check("loop", "Jacobiator witness among basis triples", jac, 1.0))

    W = UNIT_OCTONIONS.sample_algebra(gen, np.pi - 0.1, N_SAMPLES)
    out.append(_max_check("loop", "exp/log round trip", np.abs(log_map(exp_map(W)) - W), 1e-10, (W,)))

    pts = UNIT_OCTONIONS.sample(gen, 50)
    fd = [loop_inverse_diff_check(p, E[k][1:]) for p in pts for k in range(1, 8)]
    out.append(_max_check("loop", "inversion differential (finite differences)", fd, 1e-6))

    inv_wit = max(non_invariance(p, E[1][1:], E[2][1:]) for p in pts)
    out.append(_min_check("loop", "left prolongations not left-invariant (witness)", inv_wit, 0.01))

    q = UNIT_QUATERNIONS.sample(gen, 200)
    mixed = [
        oct_norm(bracket_field_at(p, E[i], E[j], "mixed").vec)
        for p in q
        for i, j in itertools.product(range(1, 4), repeat=2)
    ]
    out.append(_max_check("loop", "mixed prolongation commutator on unit-quaternions", mixed, 1e-10))
    return out


# --- mechanics ---------------------------------------------------------------


def _mechanics_checks(seed):
    gen = np.random.default_rng([seed, 3])
    out = []
    lin, sq = lagrangian_linear(), lagrangian_sq()
    kin = lagrangian_kinetic(np.ones(7))

    a = UNIT_OCTONIONS.sample(gen, N_SAMPLES)
    out.append(_max_check("mechanics", "conjugate-pair law for the linear Lagrangian",
                          np.abs(el_residual(lin, a, oct_conj(a))), 1e-12, (a,)))
    out.append(_max_check("mechanics", "kinetic F+L = F-L (unit masses)",
                          np.abs(legendre_plus(kin, a) - legendre_minus(kin, a)), 1e-10, (a,)))

    pts = UNIT_OCTONIONS.sample(gen, 200)
    gaps, comp = [], []
    for L in (lin, sq, kin):
        for p, q in zip(pts[:100], pts[100:]):
            lp, lq = dL_lift(L, p), dL_lift(L, q)
            gaps.append(np.abs(target_map(lp) - legendre_plus(L, p)))
            gaps.append(np.abs(source_map(lq) - legendre_minus(L, q)))
            comp.append(np.abs(target_map(lp) - source_map(lq) - el_residual(L, p, q)))
    out.append(_max_check("mechanics", "beta.dL = F+L and alpha.dL = F-L", gaps, 1e-14))
    out.append(_max_check("mechanics", "composability = EL residual", comp, 1e-12))

    m = np.arange(1.0, 8.0)
    J = legendre_jacobian(lagrangian_kinetic(m), basis(0))
    out.append(_max_check("mechanics", "kinetic Legendre Jacobian at e0 = diag(1..7)",
                          [np.abs(J - np.diag(m))], 1e-5))
    rank = matrix_rank(legendre_jacobian(lin, basis(0), "minus"))
    out.append(Check("mechanics", "linear Lagrangian singular at e0 (rank)", rank, 7, "<", rank < 7))

    mismatches = 0
    for L in (lin, sq, kin):
        for p in pts[:20]:
            r_plus = matrix_rank(legendre_jacobian(L, p, "plus"))
            r_minus = matrix_rank(legendre_jacobian(L, oct_inv(p), "minus"))
            mismatches += r_plus != r_minus
    out.append(Check("mechanics", "Legendre duality rank(F+ at a) = rank(F- at a^-1)",
                     mismatches, 0, "==", mismatches == 0))

    trivial = []
    for X in UNIT_OCTONIONS.sample_algebra(gen, 0.3, 20):
        p = exp_map(X)
        rep = el_solve_step(kin, p, p)
        trivial.append(oct_norm(rep.to - p) if rep.converged else np.inf)
    out.append(_max_check("mechanics", "kinetic steps near e0 are trivial", trivial, 1e-10))

    pa, pb = kinetic_pair(0.5, np.sqrt(3) / 2, gen.standard_normal(7))
    out.append(_max_check("mechanics", "explicit nontrivial kinetic pair",
                          [np.abs(el_residual(kin, pa, pb))], 1e-10))

    obs = max_obstruction(1000, seed, quaternionic=False)
    out.append(_min_check("mechanics", "cotangent product obstruction (max of 1000)", obs, 0.01))
    obs_q = max_obstruction(1000, seed, quaternionic=True)
    out.append(Check("mechanics", "obstruction on a quaternion subalgebra", obs_q, 1e-10, "<=", obs_q <= 1e-10))
    return out


# --- obstruction sampling ----------------------------------------------------

CHUNK = 250


def obstruction_samples(trials: int, seed: int, quaternionic: bool = False, threads: int | None = None):
    """Obstruction values for ``trials`` random ``(g, h, theta)``.

    Work is cut into fixed chunks with their own seed streams, so the output
    does not depend on how many threads run it.
    """
    loop = UNIT_QUATERNIONS if quaternionic else UNIT_OCTONIONS

    def chunk(k):
        gen = np.random.default_rng([seed, 7, k])
        n = min(CHUNK, trials - k * CHUNK)
        vals = []
        for _ in range(n):
            g, h = loop.sample(gen), loop.sample(gen)
            gh = oct_mul(g, h)
            theta = loop.sample(gen)
            theta = theta - np.dot(theta, gh) * gh
            theta /= oct_norm(theta)
            vals.append(cotangent_obstruction(g, h, theta))
        return vals

    n_chunks = -(-trials // CHUNK)
    with ThreadPoolExecutor(max_workers=threads or worker_count()) as ex:
        parts = list(ex.map(chunk, range(n_chunks)))
    return np.array([v for p in parts for v in p])


def max_obstruction(trials, seed, quaternionic=False):
    return float(obstruction_samples(trials, seed, quaternionic).max())


_RUNNERS = {"algebra": _algebra_checks, "loop": _loop_checks, "mechanics": _mechanics_checks}


def run_suite(suite: str = "all", seed: int = 0) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}")
    with ThreadPoolExecutor(max_workers=min(len(names), worker_count())) as ex:
        parts = list(ex.map(lambda n: _RUNNERS[n](seed), names))
    return [c for p in parts for c in p]
