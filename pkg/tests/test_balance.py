import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (
    classical_b,
    derived_point_matrix,
    fock_moment_matrix,
    published_point_matrix,
    published_point_matrix_at_origin,
)
from superbalance.balance import (
    BalanceError,
    PointEmbedding,
    SectionScaling,
    balance_residual_points,
    cy_entries,
    moment_matrix_point,
    mv_blocks_cy,
    solve_cy_balance,
    solve_point_balance,
    su_block_matrix,
    su_block_point,
)
from superbalance.grassmann import AlgebraContext, NonInvertible
from superbalance.integrate import QuadratureError

seeds = st.integers(0, 2**32 - 1)


def rand_params(rng):
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    at = rng.normal(size=2) + 1j * rng.normal(size=2)
    s = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return a, at, s


def test_embedding_validation():
    ctx = AlgebraContext(2)
    with pytest.raises(BalanceError):
        PointEmbedding(2, [ctx.one()], [ctx.eta(1), ctx.eta(2)])
    with pytest.raises(BalanceError):
        PointEmbedding(2, [ctx.one(), ctx.zero()], [ctx.one(), ctx.eta(2)])
    with pytest.raises(NonInvertible):
        PointEmbedding(2, [ctx.eta(1) * ctx.eta(2), ctx.zero()], [ctx.eta(1), ctx.eta(2)])
    e = PointEmbedding.from_parameters([1, 2], [3, 4], [[1, 2], [3, 4]])
    assert np.array_equal(e.alpha(), [1, 2]) and np.array_equal(e.alpha_tilde(), [3, 4])
    assert np.array_equal(e.sigma(), [[1, 2], [3, 4]])


def test_bosonic_embedding_gives_zero():
    e = PointEmbedding.from_parameters([0.6, 0.8j], [0, 0], np.zeros((2, 2)))
    assert np.all(moment_matrix_point(e) == 0)
    assert np.all(moment_matrix_point(e, "exp") == 0)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_moment_matrix_matches_matrix_oracle_and_closed_form(seed):
    a, at, s = rand_params(np.random.default_rng(seed))
    m = moment_matrix_point(PointEmbedding.from_parameters(a, at, s))
    assert np.max(np.abs(m - fock_moment_matrix(a, at, s))) <= 1e-10
    assert np.max(np.abs(m - derived_point_matrix(a, at, s))) <= 1e-10
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_exp_weight_matches_matrix_oracle(seed):
    a, at, s = rand_params(np.random.default_rng(seed))
    m = moment_matrix_point(PointEmbedding.from_parameters(a, at, s), "exp")
    assert np.max(np.abs(m - fock_moment_matrix(a, at, s, "exp"))) <= 1e-10


def test_origin_point_exact_form():
    at = np.array([0.3 + 0.2j, 0.5 - 0.1j])
    s = np.array([[1.0, 0.5j], [0.2, 2.0]])
    d = abs(np.linalg.det(s)) ** 2
    m = moment_matrix_point(PointEmbedding.from_parameters([1, 0], at, s))
    want = np.diag([abs(at[1]) ** 2 - 2 * d, -abs(at[1]) ** 2])
    assert np.max(np.abs(m - want)) <= 1e-12


def test_published_form_reduces_to_published_origin_matrix():
    # checks the transcription of the general closed form, not the physics
    rng = np.random.default_rng(7)
    for _ in range(10):
        _, at, s = rand_params(rng)
        assert np.allclose(published_point_matrix([1, 0], at, s), published_point_matrix_at_origin(at, s))


def test_published_form_minimal_discrepancies():
    zero = np.zeros((2, 2))
    a0 = 0.7 + 0.4j
    m = moment_matrix_point(PointEmbedding.from_parameters([1, 0], [a0, 0], zero))
    assert np.max(np.abs(m)) <= 1e-15
    assert abs(published_point_matrix([1, 0], [a0, 0], zero)[0, 0] - 2 * (a0 ** 2).real) <= 1e-15
    a1 = 0.5
    m = moment_matrix_point(PointEmbedding.from_parameters([1, 0], [0, a1], zero))
    assert abs(m[0, 0] - a1 ** 2) <= 1e-15
    assert abs(published_point_matrix([1, 0], [0, a1], zero)[0, 0] + a1 ** 2) <= 1e-15


def test_det_sigma_readings_coincide():
    s = np.array([[1 + 1j, 0.3], [0.2j, 2.0]])
    assert abs(abs(np.linalg.det(s)) ** 2 - np.linalg.det(s @ s.conj().T).real) < 1e-12
    a = [1, 0.5]
    assert np.allclose(published_point_matrix(a, [0.1, 0.2], s, "abs"), published_point_matrix(a, [0.1, 0.2], s, "gram"))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_su_block_is_scalar(seed):
    a, at, s = rand_params(np.random.default_rng(seed))
    e = PointEmbedding.from_parameters(a, at, s)
    lam = abs(np.linalg.det(s)) ** 2 / np.sum(np.abs(a) ** 2) ** 2
    assert np.max(np.abs(su_block_matrix(e) - lam * np.eye(2))) <= 1e-12


def test_su_block_examples():
    s = np.array([[2.0, 1.0], [0.5, 1.5]])
    e = PointEmbedding.from_parameters([1, 0], [0.3, 0.1], s)
    assert abs(su_block_point(e, 0, 0) - abs(np.linalg.det(s)) ** 2) <= 1e-12
    assert su_block_point(PointEmbedding.from_parameters([1, 0], [0.3, 0.1], np.zeros((2, 2))), 1, 1) == 0


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0, 2 * np.pi))
def test_common_odd_phase_invariance(seed, phi):
    a, at, s = rand_params(np.random.default_rng(seed))
    e = PointEmbedding.from_parameters(a, at, s)
    rotated = e.with_phase(cmath.exp(1j * phi))
    for w in ("none", "exp"):
        assert np.max(np.abs(moment_matrix_point(e, w) - moment_matrix_point(rotated, w))) <= 1e-12


def test_trace_integrates_to_zero():
    rng = np.random.default_rng(11)
    for _ in range(5):
        e = PointEmbedding.from_parameters(*rand_params(rng))
        assert abs(np.trace(moment_matrix_point(e)) + np.trace(su_block_matrix(e))) <= 1e-12


def test_exp_weight_on_bosonic_x_is_multiple_of_classical_b():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a, _, s = rand_params(rng)
        m = moment_matrix_point(PointEmbedding.from_parameters(a, [0, 0], s), "exp")
        u = 1 / np.sum(np.abs(a) ** 2)
        d = abs(np.linalg.det(s)) ** 2
        assert np.max(np.abs(m + d * (1 - 2 * u + 2 * u ** 2) * classical_b(a))) <= 1e-12


def test_residual_points_basic():
    with pytest.raises(BalanceError):
        balance_residual_points([])
    e = solve_point_balance(PointEmbedding.from_parameters([1, 0], [0, 0], np.eye(2))).embedding
    one = balance_residual_points([e])
    two = balance_residual_points([e, e])
    assert one.residual <= 1e-10
    assert abs(two.lam - 2 * one.lam) <= 1e-12 and abs(two.residual - 2 * one.residual) <= 1e-12
    assert one.equal_counts and abs(one.lam_plus_eta) <= 1e-12


def test_residual_points_reject_mixed_n():
    e2 = PointEmbedding.from_parameters([1, 0], [0, 0], np.eye(2))
    e1 = PointEmbedding.from_parameters([1, 0], [0, 0], np.eye(1), n=1)
    with pytest.raises(BalanceError):
        balance_residual_points([e2, e1])


@pytest.mark.parametrize("sigma,a0,at0,at1,lam", [
    (np.eye(2), 1.0, 1.0, 1.0, -1.0),
    (np.zeros((2, 2)), 1.0, 0.0, 0.0, 0.0),
    (np.diag([2.0, 1.0]), 1.0, 2.0, 2.0, -4.0),
    (np.eye(2), 2.0, 1.0, 0.5, -1 / 16),
])
def test_solve_point_balance(sigma, a0, at0, at1, lam):
    sol = solve_point_balance(PointEmbedding.from_parameters([a0, 0], [0.3, 0.9], sigma))
    assert np.allclose(sol.alpha_tilde, [at0, at1], atol=1e-15)
    assert sol.report.even_residual <= 1e-10 and sol.report.converged
    assert abs(sol.report.lam - lam) <= 1e-12
    # the published condition Re(at0^2) = |det sigma|^2 holds for the chosen root
    assert abs((sol.alpha_tilde[0] ** 2).real - sol.det_sigma_sq) <= 1e-12


def test_solve_point_balance_requires_origin():
    with pytest.raises(BalanceError):
        solve_point_balance(PointEmbedding.from_parameters([1, 1], [0, 0], np.eye(2)))


# ------------------------------------------------------------------- CY


@pytest.fixture(scope="module")
def unit_report():
    return mv_blocks_cy(2)


def test_cy_blocks_structure(unit_report):
    r = unit_report
    off_even = r.even_block - np.diag(np.diag(r.even_block))
    off_odd = r.odd_block - np.diag(np.diag(r.odd_block))
    assert np.max(np.abs(off_even)) <= 1e-8 and np.max(np.abs(off_odd)) <= 1e-8
    assert r.mixed_max <= 1e-8
    assert r.even_hermiticity <= 1e-8 and r.odd_hermiticity <= 1e-8 and r.odd_antipattern <= 1e-8
    assert np.all(np.abs(np.diag(r.even_block).imag) <= 1e-12)
    assert abs(np.trace(r.even_block) + np.trace(r.odd_block)) <= 1e-8


def test_cy_unit_diagonal_values(unit_report):
    # frozen from the default-spec run; B_33 also has the closed form 8 pi^2 / (3 sqrt 3)
    want_even = [8.377580409572781, 5.065083338487296, 8.377580409572781, 8 * np.pi ** 2 / (3 * np.sqrt(3))]
    assert np.allclose(np.diag(unit_report.even_block).real, want_even, atol=1e-8)
    assert np.allclose(np.diag(unit_report.odd_block).real, -9.253873553, atol=1e-8)


def test_cy_literal_density_diverges():
    with pytest.raises(QuadratureError):
        cy_entries(SectionScaling.unit(2), [(0, 0)], density="literal")


def test_scaling_validation():
    with pytest.raises(BalanceError):
        SectionScaling(2, [1, 1, 1], [1, 1, 1, 1])
    with pytest.raises(BalanceError):
        SectionScaling(2, [1, 1, 1, -1], [1, 1, 1, 1])
    with pytest.raises(BalanceError):
        SectionScaling(1, [1, 1], [1, 1])


def test_cy_common_rescaling_invariance():
    s = SectionScaling(2, [1.0, 1.3, 0.9, 0.7], [1.0, 1.1, 0.8, 0.95])
    t = SectionScaling(2, [3 * c for c in s.even], [3 * c for c in s.odd])
    r1, r2 = mv_blocks_cy(2, s), mv_blocks_cy(2, t)
    assert abs(r1.residual - r2.residual) <= 1e-10


@pytest.fixture(scope="module")
def solved():
    return solve_cy_balance(2)


def test_cy_solver_converges(solved):
    s, r = solved
    assert r.converged and r.residual <= 1e-6
    assert r.equal_counts and abs(r.lam_plus_eta) <= 1e-6
    assert [t["iteration"] for t in r.trace] == list(range(len(r.trace)))
    assert abs(s.even[1] - np.sqrt(2)) <= 1e-5


def test_cy_solver_already_balanced(solved):
    s, _ = solved
    s2, r2 = solve_cy_balance(2, scaling=s)
    assert r2.iterations == 0 and s2 == s


def test_cy_solver_reports_nonconvergence():
    s, r = solve_cy_balance(2, max_iter=2)
    assert not r.converged and r.iterations == 2 and "max_iter" in r.note
