"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line (shown in the terminal
summary) and then asserts.  Run with ``pytest tests/test_acceptance.py``.
"""

import itertools

import numpy as np

from loopmech.algebra import associator, oct_conj, oct_inv, oct_mul, oct_mul_cd, oct_norm
from loopmech.cli import obstruction_report
from loopmech.loop import (
    UNIT_OCTONIONS,
    UNIT_QUATERNIONS,
    bracket_field_at,
    bracket_left,
    bracket_right,
    exp_map,
    jacobiator,
    log_map,
    malcev_residual,
    moufang_residuals,
)
from loopmech.mechanics import (
    composable,
    dL_lift,
    el_brute_oracle,
    el_residual,
    el_solve_step,
    hamiltonian_flow,
    kinetic_pair,
    lagrangian_kinetic,
    lagrangian_linear,
    lagrangian_sq,
    legendre_jacobian,
    legendre_minus,
    legendre_plus,
    source_map,
    sq_recurrence_defect,
    target_map,
)
from loopmech.numerics import RngSpec, SolverConfig, matrix_rank

from conftest import ACCEPTANCE_LINES, e, im
from test_algebra import _reference

O, Q = UNIT_OCTONIONS, UNIT_QUATERNIONS
N = 10_000
CFG = SolverConfig()


def gen(k):
    return RngSpec(1000 + k).generator()


def report(number, title, clauses):
    """``clauses`` is a list of ``(label, value, passed)``."""
    ok = all(bool(p) for _, _, p in clauses)
    detail = "; ".join(f"{label}={value:.3g}{'' if p else ' (FAIL)'}" for label, value, p in clauses)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_multiplication_table():
    mismatches = sum(
        not np.array_equal(oct_mul(e(i), e(j)), _reference(i, j))
        for i, j in itertools.product(range(8), repeat=2)
    )
    g, h = gen(1).uniform(-1, 1, (2, N, 8))
    cd = float(np.max(np.abs(oct_mul(g, h) - oct_mul_cd(g, h))))
    lhs = oct_mul(oct_mul(e(1), e(4)), e(7))
    rhs = oct_mul(e(1), oct_mul(e(4), e(7)))
    witness = np.array_equal(lhs, e(2)) and np.array_equal(rhs, -e(2))
    report(1, "multiplication table", [
        ("basis mismatches", mismatches, mismatches == 0),
        ("max|table - Cayley-Dickson|", cd, cd <= 1e-14),
        ("(e1e4)e7=e2, e1(e4e7)=-e2", float(witness), witness),
    ])


def test_criterion_02_identity_suite():
    rng = gen(2)
    a, x, y = (O.sample(rng, N) for _ in range(3))
    g, h = rng.uniform(-1, 1, (2, N, 8)) / np.sqrt(8)
    m = oct_mul
    moufang = float(np.max(moufang_residuals(a, x, y)))
    alt = max(float(np.max(oct_norm(associator(g, g, h)))), float(np.max(oct_norm(associator(g, h, h)))),
              float(np.max(oct_norm(associator(g, h, g)))))
    norm = float(np.max(np.abs(oct_norm(m(g, h)) - oct_norm(g) * oct_norm(h))))
    ai = oct_inv(a)
    inverse = max(
        float(np.max(np.abs(m(ai, m(a, x)) - x))),
        float(np.max(np.abs(m(m(x, a), ai) - x))),
        float(np.max(np.abs(m(a, ai) - e(0)))),
        float(np.max(np.abs(oct_inv(ai) - a))),
        float(np.max(np.abs(oct_inv(m(a, x)) - m(oct_inv(x), ai)))),
    )
    conj = float(np.max(np.abs(oct_conj(m(g, h)) - m(oct_conj(h), oct_conj(g)))))
    diassoc = 0.0
    for word in itertools.product((0, 1), repeat=4):
        p, q, r, s = (g if w == 0 else h for w in word)
        forms = np.stack([m(m(m(p, q), r), s), m(m(p, m(q, r)), s), m(m(p, q), m(r, s)),
                          m(p, m(m(q, r), s)), m(p, m(q, m(r, s)))])
        diassoc = max(diassoc, float(np.max(np.abs(forms - forms[0]))))
    report(2, "algebraic identities on 1e4 samples", [
        ("Moufang", moufang, moufang <= 1e-12),
        ("alternativity", alt, alt <= 1e-12),
        ("norm multiplicativity", norm, norm <= 1e-12),
        ("inverse-loop laws", inverse, inverse <= 1e-12),
        ("(gh)*=h*g*", conj, conj <= 1e-12),
        ("diassociativity", diassoc, diassoc <= 1e-12),
    ])


def test_criterion_03_tangent_algebra():
    exact = all(
        np.array_equal(bracket_left(im(i), im(j)), 2 * oct_mul(e(i), e(j))[1:])
        for i, j in itertools.permutations(range(1, 8), 2)
    )
    X, Y, Z = gen(3).uniform(-1, 1, (3, N, 7))
    lr = float(np.max(np.abs(bracket_right(X, Y) + bracket_left(X, Y))))
    malcev = float(np.max(malcev_residual(X, Y, Z)))
    jac = max(float(np.linalg.norm(jacobiator(im(i), im(j), im(k))))
              for i, j, k in itertools.combinations(range(1, 8), 3))
    report(3, "tangent algebra", [
        ("[e_i,e_j]=2e_ie_j on 42 pairs", float(exact), exact),
        ("max|[,]_r + [,]_l|", lr, lr <= 1e-14),
        ("Mal'cev residual", malcev, malcev <= 1e-10),
        ("max basis Jacobiator", jac, jac >= 1),
    ])


def test_criterion_04_exponential_map():
    quarter = float(np.max(np.abs(exp_map(np.pi / 2 * im(1)) - e(1))))
    X = O.sample_algebra(gen(4), np.pi - 0.1, N)
    trip = float(np.max(np.abs(log_map(exp_map(X)) - X)))
    ts = np.array([0.1, 0.05, 0.025])
    rem = []
    for t in ts:
        Zt = log_map(oct_mul(exp_map(t * im(1)), exp_map(t * im(2))))
        rem.append(np.linalg.norm(Zt - t * (im(1) + im(2)) - 0.5 * t * t * bracket_left(im(1), im(2))))
    order = float(np.polyfit(np.log(ts), np.log(rem), 1)[0])
    report(4, "exponential map", [
        ("|exp(pi/2 e1) - e1|", quarter, quarter <= 1e-14),
        ("exp/log round trip", trip, trip <= 1e-10),
        ("Campbell-Hausdorff remainder order", order, order >= 3),
    ])


def test_criterion_05_linear_lagrangian():
    L = lagrangian_linear()
    rng = gen(5)
    a = O.sample(rng, N)
    conj = float(np.max(np.abs(el_residual(L, a, oct_conj(a)))))
    worst_res, worst_it, worst_dist, second = 0.0, 0, 0.0, 0
    for p in O.sample(rng, 100):
        xi = rng.standard_normal(7)
        guess = oct_mul(oct_conj(p), exp_map(0.05 * xi / np.linalg.norm(xi)))
        rep = el_solve_step(L, p, guess)
        worst_res = max(worst_res, rep.residual_norm if rep.converged else np.inf)
        worst_it = max(worst_it, rep.iterations)
        worst_dist = max(worst_dist, float(oct_norm(rep.to - oct_conj(p))))
        # the other exact solution keeps a^0, a^1 and negates a^2..a^7; it lies
        # 2|a^1| from conj(a), so a guess 0.05 away can sit nearer to it
        other = p * np.r_[1, 1, -np.ones(6)]
        if oct_norm(rep.to - other) <= 1e-8 and oct_norm(guess - other) < oct_norm(guess - oct_conj(p)):
            second += 1
    fm = float(np.max(np.abs(legendre_minus(L, e(0)) - im(1))))
    rank = matrix_rank(legendre_jacobian(L, e(0), "minus"))
    report(5, "linear Lagrangian", [
        ("max|EL(a, conj a)|", conj, conj <= 1e-12),
        ("solver residual from 0.05 away", worst_res, worst_res <= 1e-10),
        ("solver iterations", worst_it, worst_it <= 15),
        ("distance to conj(a)", worst_dist, worst_dist <= 1e-8),
        ("runs ending on the nearer second branch (info)", second, True),
        ("|F-L(e0) - e^1|", fm, fm == 0),
        ("rank DF-L(e0)", rank, rank < 7),
    ])


def test_criterion_06_kinetic_lagrangian():
    m = np.arange(1.0, 8.0)
    J = legendre_jacobian(lagrangian_kinetic(m), e(0), "minus")
    jac = float(np.max(np.abs(J - np.diag(m))))
    # the remaining clauses hold for equal masses; see test_mechanics for unequal ones
    L = lagrangian_kinetic(np.ones(7))
    rng = gen(6)
    pts = O.sample(rng, 100)
    fpm = float(np.max(np.abs(legendre_plus(L, pts) - legendre_minus(L, pts))))
    solver_off, oracle_extra = 0.0, 0
    for p in O.exp(O.sample_algebra(rng, 0.3, 5)):
        rep = el_solve_step(L, p, p)
        solver_off = max(solver_off, float(oct_norm(rep.to - p)) if rep.converged else np.inf)
        found = el_brute_oracle(L, p, 0.5, 21, slices=50, coordinate_planes=False, seed=int(rng.integers(2**31)))
        trivial = [b for b in found if oct_norm(b - p) <= 1e-5]
        oracle_extra += (len(found) - len(trivial)) + (0 if trivial else 1)
    A, B = 0.5, np.sqrt(3) / 2
    ab = abs(A**2 * (1 - A**2) - B**2 * (1 - B**2))
    pair = 0.0
    for d in [im(3), *rng.standard_normal((10, 7))]:
        a, b = kinetic_pair(A, B, d)
        pair = max(pair, float(np.linalg.norm(el_residual(L, a, b))))
    report(6, "kinetic Lagrangian", [
        ("|DF-L(e0) - diag(1..7)|", jac, jac <= 1e-5),
        ("max|F+L - F-L| (unit masses)", fpm, fpm <= 1e-10),
        ("solver distance from trivial branch", solver_off, solver_off <= 1e-10),
        ("oracle non-trivial or missing branches", oracle_extra, oracle_extra == 0),
        ("|f(A) - f(B)|", ab, ab <= 1e-15 and B != A),
        ("nontrivial pair residual", pair, pair <= 1e-10),
    ])


def test_criterion_07_squared_linear_lagrangian():
    L = lagrangian_sq()
    rng = gen(7)
    rec, hits = 0.0, 0
    for p in O.exp(O.sample_algebra(rng, 1.2, 20)):
        rep = el_solve_step(L, p, oct_mul(p, exp_map(0.1 * rng.standard_normal(7))))
        if rep.converged:
            hits += 1
            rec = max(rec, float(np.max(np.abs(sq_recurrence_defect(p, rep.to)))))
    basis = max(float(np.max(np.abs(legendre_minus(L, e(s))))) for s in range(8))
    J = legendre_jacobian(L, e(0), "minus")
    dfl = float(np.max(np.abs(J)))
    report(7, "squared-linear Lagrangian", [
        (f"recurrence defect over {hits} converged pairs", rec, rec <= 1e-8 and hits > 0),
        ("max|F-L(e_s)|", basis, basis <= 1e-12),
        ("max|DF-L(e0)|", dfl, dfl <= 1e-5),
    ])


def test_criterion_08_cotangent_formulation():
    rng = gen(8)
    g, h = O.sample(rng, 1000), O.sample(rng, 1000)
    lit = 0.0
    for L in (lagrangian_linear(), lagrangian_sq(), lagrangian_kinetic(np.arange(1.0, 8.0))):
        for gi, hi in zip(g, h):
            lit = max(lit, float(np.max(np.abs(target_map(dL_lift(L, gi)) - legendre_plus(L, gi)))),
                      float(np.max(np.abs(source_map(dL_lift(L, hi)) - legendre_minus(L, hi)))))
    L1, Lk = lagrangian_linear(), lagrangian_kinetic(np.ones(7))
    agree = 0
    cases = 0
    for p in g[:100]:
        q = O.sample(rng)
        for L, b in ((L1, oct_conj(p)), (Lk, p), (L1, q), (Lk, q)):
            cases += 1
            zero = np.linalg.norm(el_residual(L, p, b)) <= 1e-10
            agree += composable(dL_lift(L, p), dL_lift(L, b)) == zero
    report(8, "cotangent formulation", [
        ("max|beta.dL - F+L|, |alpha.dL - F-L|", lit, lit <= 1e-14),
        ("composable <=> EL cases disagreeing", cases - agree, agree == cases),
    ])


def test_criterion_09_obstruction():
    octo = obstruction_report(1000, 0, quaternionic=False)
    quat = obstruction_report(1000, 0, quaternionic=True)
    report(9, "cotangent product obstruction", [
        ("max over 1000 (octonions)", octo["max"], octo["max"] > 0.01),
        ("max over 1000 (quaternions)", quat["max"], quat["max"] <= 1e-10),
    ])


def test_criterion_10_associative_control():
    rng = gen(10)
    a = Q.sample(rng, 1000)
    X, Y = (Q.embed(v) for v in rng.uniform(-1, 1, (2, 1000, 3)))
    mixed = float(np.max(np.abs(bracket_field_at(a, X, Y, "mixed").vec)))
    L1 = lagrangian_linear(Q)
    Lsq = lagrangian_sq(Q)
    Lk = lagrangian_kinetic([1.0, 2.0, 3.0], Q)
    Liso = lagrangian_kinetic(np.ones(3), Q)
    conj = float(np.max(np.abs(el_residual(L1, a, oct_conj(a)))))
    fpm = float(np.max(np.abs(legendre_plus(Liso, a) - legendre_minus(Liso, a))))
    jac = float(np.max(np.abs(legendre_jacobian(Lk, e(0), "minus") - np.diag([1.0, 2.0, 3.0]))))
    lit = max(
        float(np.max(np.abs(target_map(dL_lift(L, p)) - legendre_plus(L, p))))
        for L in (L1, Lsq, Lk) for p in a[:100]
    )
    flow_err, steps_err, duality = 0.0, 0.0, 0
    for p in Q.exp(Q.sample_algebra(rng, 0.3, 10)):
        rep = el_solve_step(Liso, p, p)
        steps_err = max(steps_err, float(oct_norm(rep.to - p)) if rep.converged else np.inf)
        v = 0.05 * rng.standard_normal(3)
        flow_err = max(flow_err, float(np.max(np.abs(hamiltonian_flow(Liso, v, e(0)) - v))))
        for L in (L1, Lsq, Lk):
            duality += matrix_rank(legendre_jacobian(L, p, "plus")) != matrix_rank(
                legendre_jacobian(L, Q.inv(p), "minus"))
    stays = all(np.all(el_solve_step(Lk, p, p).to[4:] == 0) for p in a[:10])
    report(10, "associative control on S^3", [
        ("max mixed commutator", mixed, mixed <= 1e-10),
        ("linear conjugate pairs", conj, conj <= 1e-12),
        ("F+L - F-L (equal masses)", fpm, fpm <= 1e-10),
        ("|DF-L(e0) - diag(m)|", jac, jac <= 1e-5),
        ("max|beta.dL - F+L|", lit, lit <= 1e-14),
        ("trivial steps near e0", steps_err, steps_err <= 1e-10),
        ("flow - identity", flow_err, flow_err <= 1e-10),
        ("duality rank mismatches", duality, duality == 0),
        ("solutions stay in S^3", float(stays), stays),
    ])
