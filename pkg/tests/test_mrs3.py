import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewkrylov import (
    OpCounters,
    OracleInapplicable,
    SparseSkewMatrix,
    SssOperator,
    Status,
    UsageError,
    gmres_solve,
    mrs3_init,
    mrs3_iterate,
    mrs3_solve,
    z_sequence,
)
from skewkrylov.mrs3 import (
    IDENTITY,
    givens_from,
    recover_xi,
    w_recurrence_error,
    xi_reconstruction_error,
)
from skewkrylov.problems import AdvectionConfig, make_sss_system, random_sss_system

from .oracles import c_literal, min_residual, z_literal

# --- Givens rotations -------------------------------------------------------


def test_givens_examples():
    g = givens_from(3.0, 4.0)
    assert (g.c, g.s) == (0.6, 0.8)
    r, z = g.apply(3.0, 4.0)
    assert r == 5.0 and abs(z) <= 1e-14 * 5.0
    g = givens_from(2.5, 0.0)
    assert (g.c, g.s) == (1.0, 0.0)
    g = givens_from(0.0, 0.0)
    assert (g.c, g.s) == (1.0, 0.0)
    assert IDENTITY.apply(1.5, -2.0) == (1.5, -2.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_givens_invariants(yk, yl):
    g = givens_from(yk, yl)
    assert abs(g.c**2 + g.s**2 - 1.0) <= 1e-14
    r, z = g.apply(yk, yl)
    assert abs(z) <= 1e-14 * math.hypot(yk, yl)
    assert abs(abs(r) - math.hypot(yk, yl)) <= 1e-14 * max(1.0, math.hypot(yk, yl))


# --- examples on the 2 x 2 system ----------------------------------------------


def test_two_by_two_iterations(sys2):
    a, b = sys2
    state = mrs3_init(a, b.copy(), np.zeros(2))
    mrs3_iterate(state, a)
    assert abs(state.eps) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    # dense least-squares oracle: min_t ||b - t A q_1||
    q1 = np.array([-1.0, 0.0])
    aq = a.to_dense() @ q1
    t = (aq @ b) / (aq @ aq)
    assert abs(state.eps) == pytest.approx(np.linalg.norm(b - t * aq), abs=1e-15)
    mrs3_iterate(state, a)
    assert abs(state.eps) <= 1e-14
    np.testing.assert_allclose(state.x, [0.5, 0.5], atol=1e-15)


def test_two_by_two_solve(sys2):
    a, b = sys2
    r = mrs3_solve(a, b, tol=1e-12)
    assert r.status is Status.CONVERGED and r.iterations == 2
    np.testing.assert_allclose(r.x, np.linalg.solve(a.to_dense(), b), atol=1e-15)
    assert r.residual_history[1] == pytest.approx(7.0710678118654746e-1, rel=1e-15)


def test_pure_skew_two_by_two(rot2):
    a = SssOperator(0.0, rot2)
    b = np.array([1.0, 0.0])
    r = mrs3_solve(a, b, tol=1e-12)
    assert r.status is Status.CONVERGED and r.iterations == 2
    np.testing.assert_allclose(r.x, np.linalg.solve(a.to_dense(), b), atol=1e-15)


def test_zero_rhs(sys2):
    a, _ = sys2
    r = mrs3_solve(a, np.zeros(2))
    assert r.status is Status.CONVERGED and r.iterations == 0
    np.testing.assert_array_equal(r.x, 0.0)


def test_dimension_and_argument_errors(sys2):
    a, b = sys2
    with pytest.raises(UsageError):
        mrs3_solve(a, np.ones(3))
    with pytest.raises(UsageError):
        mrs3_solve(a, b, x0=np.ones(3))
    with pytest.raises(UsageError):
        mrs3_solve(a, b, tol=0.0)
    with pytest.raises(UsageError):
        mrs3_solve(a, b, maxit=0)


def test_nonzero_initial_guess():
    a, b = random_sss_system(12, 0.5, seed=4)
    x0 = np.random.default_rng(0).standard_normal(12)
    r = mrs3_solve(a, b, x0=x0, tol=1e-12)
    assert r.converged
    np.testing.assert_allclose(r.x, np.linalg.solve(a.to_dense(), b), atol=1e-10)
    xs, res = min_residual(a.to_dense(), b, x0, 6)
    np.testing.assert_allclose(r.residual_history[:7], res, atol=1e-12)


def test_maxit_status():
    a, b, _ = make_sss_system(AdvectionConfig(alpha=1e-3, gamma=1.0))
    r = mrs3_solve(a, b, maxit=15)
    assert r.status is Status.MAX_ITERATIONS and r.iterations == 15
    assert len(r.residual_history) == 16


def test_exhaustion_on_invariant_subspace():
    # b lies in a 2-dimensional invariant subspace of S, but A is singular
    # there only if alpha = 0 and the component is in the null space. Use a
    # block-diagonal S with a zero block: b in that block is an eigenvector of
    # A with eigenvalue alpha, so the space is exhausted after one step.
    s = SparseSkewMatrix.from_dense([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    a = SssOperator(2.0, s)
    r = mrs3_solve(a, np.array([0.0, 0.0, 1.0]), tol=1e-14)
    assert r.status is Status.CONVERGED and r.iterations == 1
    np.testing.assert_allclose(r.x, [0, 0, 0.5])


def test_exhausted_status_when_space_invariant_and_singular():
    s = SparseSkewMatrix.zeros(3)
    r = mrs3_solve(SssOperator(0.0, s), np.array([1.0, 0.0, 0.0]))
    assert r.status in (Status.SINGULAR, Status.EXHAUSTED)
    assert r.breakdown_at == 1
    assert r.breakdown_detail


# --- against independent oracles ----------------------------------------------


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 20), alpha=st.sampled_from([1e-3, 0.1, 1.0, -2.0, 10.0]), seed=st.integers(0, 5000))
def test_matches_dense_minimal_residual(n, alpha, seed):
    a, b = random_sss_system(n, alpha, seed)
    r = mrs3_solve(a, b, tol=1e-12, maxit=n, record_iterates=True)
    xs, res = min_residual(a.to_dense(), b, np.zeros(n), r.iterations)
    # step n (exhaustion) is excluded: there the plain recurrence has lost
    # orthogonality and only matches to about eps * kappa^2
    k = min(len(res), len(r.residual_history), n)
    np.testing.assert_allclose(r.residual_history[:k], res[:k], atol=1e-9)
    for j in range(min(k, 8)):
        np.testing.assert_allclose(r.iterates[j], xs[j], atol=1e-7 * max(1.0, np.linalg.norm(xs[j])))


@pytest.mark.parametrize("seed", range(5))
def test_matches_full_gmres(seed):
    a, b = random_sss_system(20, 0.5, seed)
    m = mrs3_solve(a, b, tol=1e-10)
    g = gmres_solve(a, b, tol=1e-10)
    k = min(len(m.residual_history), len(g.residual_history))
    np.testing.assert_allclose(m.residual_history[:k], g.residual_history[:k], atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 25), alpha=st.floats(-5, 5), seed=st.integers(0, 5000))
def test_monotone_history(n, alpha, seed):
    a, b = random_sss_system(n, alpha, seed)
    h = mrs3_solve(a, b, tol=1e-12, maxit=2 * n).residual_history
    assert all(h[j] <= h[j - 1] + 1e-14 for j in range(1, len(h)))


@pytest.mark.parametrize("alpha,gamma", [(10.0, 1.0), (1e-3, 100.0), (1e-5, 100.0), (1e-3, 1.0)])
def test_residual_estimate_fidelity(alpha, gamma):
    a, b, _ = make_sss_system(AdvectionConfig(alpha=alpha, gamma=gamma))
    r = mrs3_solve(a, b, maxit=200, audit_every=1)
    for j, true in r.true_residuals.items():
        assert abs(r.residual_history[j] - true) <= 1e-8


def test_advection_alpha10_converges_monotone():
    a, b, _ = make_sss_system(AdvectionConfig(alpha=10.0, gamma=1.0))
    r = mrs3_solve(a, b, maxit=400)
    assert r.converged and r.iterations <= 400
    h = r.residual_history
    assert all(h[j] <= h[j - 1] for j in range(1, len(h)))
    assert r.true_final_residual <= 1e-8 * 2


# --- structure of the rotated columns -----------------------------------------


@pytest.mark.parametrize("alpha", [1e-3, 1.0, 10.0, -1.0])
def test_sparsity_pattern(alpha):
    a, b, _ = make_sss_system(AdvectionConfig(alpha=alpha, gamma=1.0))
    r = mrs3_solve(a, b, maxit=120, tol=1e-30)
    for u in r.trace.u_cols:
        scale = np.linalg.norm(u)
        assert abs(u[1]) <= 1e-12 * scale and abs(u[3]) <= 1e-12 * scale


@pytest.mark.parametrize("alpha", [1e-3, 0.5, 3.0])
def test_closed_forms(alpha):
    a, b, _ = make_sss_system(AdvectionConfig(alpha=alpha, gamma=1.0))
    tr = mrs3_solve(a, b, maxit=100, tol=1e-30).trace
    z = z_sequence(alpha, tr.betas[1:])
    for j, (u, g) in enumerate(zip(tr.u_cols, tr.rotations), start=1):
        assert u[2] == pytest.approx(z.diagonal(j), rel=1e-10)
        c, s = z.rotation(j)
        assert g.c == pytest.approx(c, rel=1e-10)
        assert g.s == pytest.approx(s, rel=1e-10)
        if j >= 3:
            assert u[0] == pytest.approx(z.second_superdiagonal(j), rel=1e-10)


def test_z_sequence_examples():
    assert z_sequence(1.0, [1.0, 1.0]).values == (1.0, 2.0, 3.0)
    assert z_sequence(1.0, [1.0, 1.0, 1.0]).values[3] == 2.5
    assert z_sequence(0.0, [1.0]).values == (0.0, 1.0)


def test_z_sequence_inapplicable():
    # alpha = 0 makes Z_1 = 0 and the quotient for Z_4 divides by Z_2 only,
    # but Z_5 divides by Z_3; force Z_2 = 0 with a zero beta.
    with pytest.raises(OracleInapplicable):
        z_sequence(0.0, [0.0, 1.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(0.01, 10.0),
    betas=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=20),
)
def test_z_sequence_matches_product_display(alpha, betas):
    z = z_sequence(alpha, betas)
    lit = z_literal(alpha, betas)
    np.testing.assert_allclose(z.values, [float(v) for v in lit], rtol=1e-12)
    for i in range(1, len(betas) + 1):
        assert z.rotation(i)[0] == pytest.approx(c_literal(lit, i), rel=1e-12)


def test_w_recurrence_and_xi_reconstruction():
    a, b, _ = make_sss_system(AdvectionConfig(alpha=0.5, gamma=2.0, n1=8, n2=8))
    r = mrs3_solve(a, b, maxit=30, tol=1e-30, debug=True)
    for j in (1, 2, 5, 17, 30):
        assert w_recurrence_error(r.trace, j) <= 1e-9
        assert xi_reconstruction_error(r.trace, j) <= 1e-9


def test_recover_xi_two_by_two(sys2):
    a, b = sys2
    r = mrs3_solve(a, b, tol=1e-12, debug=True)
    tr = r.trace
    q = np.column_stack(tr.q_cols)
    np.testing.assert_allclose(q @ recover_xi(tr.ritz(2), tr.rotations, tr.r0_norm), [0.5, 0.5], atol=1e-15)
    xi1 = recover_xi(tr.ritz(1), tr.rotations, tr.r0_norm)
    res1 = np.linalg.norm(b - a.to_dense() @ (q[:, :1] @ xi1))
    assert res1 == pytest.approx(1 / math.sqrt(2), rel=1e-14)


def test_recover_xi_at_exhaustion():
    a, b = random_sss_system(8, 0.7, seed=11)
    r = mrs3_solve(a, b, tol=1e-13, maxit=8, debug=True)
    tr = r.trace
    xi = recover_xi(tr.ritz(), tr.rotations, tr.r0_norm)
    x = np.column_stack(tr.q_cols) @ xi
    assert np.linalg.norm(b - a.to_dense() @ x) <= 1e-10


def test_debug_requires_vectors(sys2):
    a, b = sys2
    tr = mrs3_solve(a, b).trace
    with pytest.raises(ValueError):
        w_recurrence_error(tr)


# --- per-iteration budget -------------------------------------------------------


def test_counter_budget():
    a, b, _ = make_sss_system(AdvectionConfig(alpha=1e-3, gamma=100.0))
    r = mrs3_solve(a, b)
    d = r.iteration_counters()
    k = r.iterations
    assert d["matvecs"] == k
    assert d["inner_products"] == k
    assert d["vector_updates"] == 3 * k
    assert d["peak_vectors"] == 5
    assert d["audit_matvecs"] >= k // 10


def test_iterate_counts_exactly():
    a, b, _ = make_sss_system(AdvectionConfig(n1=6, n2=6))
    c = OpCounters()
    state = mrs3_init(a, b.copy(), np.zeros(a.n), c)
    for _ in range(3):
        before = c.snapshot()
        mrs3_iterate(state, a, c)
        d = c.minus(before)
        assert (d["matvecs"], d["vector_updates"], d["inner_products"]) == (1, 3, 1)
    assert c.peak_vectors == 5


def test_negative_alpha_mirrors_positive():
    a, b, _ = make_sss_system(AdvectionConfig(alpha=2.0, gamma=1.0))
    neg = SssOperator(-2.0, a.s)
    r1 = mrs3_solve(a, b)
    r2 = mrs3_solve(neg, b)
    assert r2.converged
    np.testing.assert_allclose(r1.residual_history, r2.residual_history, atol=1e-12)
