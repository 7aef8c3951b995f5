"""Quick invariant checks run by ``superbalance selftest``."""
from __future__ import annotations

import numpy as np

from .balance import PointEmbedding, balance_residual_points, moment_matrix_point, solve_point_balance
from .grassmann import AlgebraContext, Multivector, analytic_apply, berezin, conjugate, invert
from .integrate import plane_quadrature
from .projective import ProjectivePoint, change_chart, normalize, super_norm
from .supermatrix import SuperMatrix, act, berezinian, is_unitary, matmul, u11_element


def _rand_c(rng):
    return complex(rng.normal(), rng.normal())


def random_element(ctx, rng, parity=None, body=None, density=0.6):
    terms = {}
    for mask in range(1 << ctx.n_generators):
        k = bin(mask).count("1")
        if parity is not None and k % 2 != parity:
            continue
        if mask == 0:
            if parity in (None, 0):
                terms[0] = _rand_c(rng) + 2.0 if body is None else body
            continue
        if rng.random() < density:
            terms[mask] = _rand_c(rng)
    return Multivector(ctx, terms)


def random_gl11(ctx, rng):
    e = lambda: random_element(ctx, rng, 0)
    o = lambda: random_element(ctx, rng, 1)
    return SuperMatrix(ctx, 1, 1, [[e(), o()], [o(), e()]])


def run_checks(seed: int = 0, count: int = 20):
    rng = np.random.default_rng(seed)
    ctx = AlgebraContext(2)
    results = []

    def record(name, value, limit):
        results.append({"check": name, "value": float(value), "limit": limit, "passed": bool(value <= limit)})

    worst = 0.0
    for _ in range(count):
        a, b, c = (random_element(ctx, rng) for _ in range(3))
        worst = max(worst, ((a * b) * c - a * (b * c)).max_abs())
    record("associativity", worst, 1e-12)

    worst = 0.0
    for _ in range(count):
        a = random_element(ctx, rng, 0)
        worst = max(worst, (a * invert(a) - 1).max_abs(), (invert(a) * a - 1).max_abs(),
                    (conjugate(conjugate(a)) - a).max_abs(),
                    (analytic_apply("reciprocal", a) - invert(a)).max_abs())
    record("inverse/conjugation/reciprocal", worst, 1e-12)

    top = ctx.eta(1) * ctx.etabar(1) * ctx.eta(2) * ctx.etabar(2)
    record("berezin top monomial", abs(berezin(top, [0, 2, 1, 3]).body() - 1), 0.0)

    worst = 0.0
    for _ in range(count):
        g, h = random_gl11(ctx, rng), random_gl11(ctx, rng)
        worst = max(worst, (berezinian(matmul(g, h)) - berezinian(g) * berezinian(h)).max_abs())
    record("berezinian multiplicative", worst, 1e-12)

    worst = 0.0
    for _ in range(count):
        u = u11_element(rng.uniform(0, 2 * np.pi), random_element(ctx, rng, 1))
        worst = max(worst, is_unitary(u).residual)
    record("U(1|1) unitary", worst, 1e-13)

    worst = 0.0
    c3 = AlgebraContext(2)
    for _ in range(count):
        pt = ProjectivePoint(c3, [random_element(c3, rng, 0) for _ in range(3)],
                             [random_element(c3, rng, 1) for _ in range(2)])
        a0 = normalize(pt, 0)
        worst = max(worst, change_chart(change_chart(change_chart(a0, 1), 2), 0).max_abs_diff(a0))
    record("chart cocycle", worst, 1e-12)

    worst = 0.0
    for _ in range(count):
        u = u11_element(rng.uniform(0, 2 * np.pi), random_element(ctx, rng, 1))
        pt = ProjectivePoint(ctx, [random_element(ctx, rng, 0)], [random_element(ctx, rng, 1)])
        worst = max(worst, (super_norm(act(u, pt)) - super_norm(pt)).max_abs())
    record("unitary action preserves norm", worst, 1e-12)

    record("quadrature pi", abs(plane_quadrature(lambda z: 1 / (1 + abs(z) ** 2) ** 2) - np.pi), 1e-8)

    sol = solve_point_balance(PointEmbedding.from_parameters([1, 0], [0, 0], np.eye(2)))
    record("point balance at [1:0]", sol.report.even_residual, 1e-10)

    e = PointEmbedding.from_parameters([0.6, 0.8], [0, 0], np.zeros((2, 2)))
    record("bosonic embedding integrates to zero", float(np.max(np.abs(moment_matrix_point(e)))), 0.0)
    record("classical point residual", balance_residual_points([e]).residual, 1e-12)
    return results
