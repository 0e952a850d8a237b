"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records one ``[PASS]``/``[FAIL]`` line (shown in the terminal
summary) before asserting, so a failing criterion still reports its numbers.
"""

import math

import numpy as np
import pytest

from skewkrylov import (
    AdvectionConfig,
    SssOperator,
    Status,
    bicgstab_solve,
    cgnr_solve,
    cgw_solve,
    condition_number,
    diagonal_scale_transform,
    full_gcr_solve,
    gmres_solve,
    hwl_solve,
    lanczos_basis,
    make_sss_system,
    mrs3_solve,
    random_sss_system,
    spd_split_transform,
    trunc_gcr_solve,
    z_sequence,
)
from skewkrylov.problems import random_skew_matrix

from .conftest import ACCEPTANCE_LINES

EQUIV_ALPHAS = (1e-3, 1.0, 10.0)
EQUIV_SEEDS = range(20)
ADVECTION_CONFIGS = [(1e-6, 1.0), (1e-5, 100.0), (10.0, 1.0), (1e-3, 1.0), (1e-3, 100.0)]


def verdict(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _advection(alpha, gamma):
    a, b, _ = make_sss_system(AdvectionConfig(alpha=alpha, gamma=gamma))
    return a, b


def test_criterion_01_gmres_equivalence():
    worst = {}
    failures = []
    for alpha in EQUIV_ALPHAS:
        worst[alpha] = 0.0
        for seed in EQUIV_SEEDS:
            a, b = random_sss_system(25, alpha, seed)
            bn = np.linalg.norm(b)
            m = mrs3_solve(a, b, tol=1e-8, maxit=200).residual_history
            g = gmres_solve(a, b, tol=1e-8, maxit=200).residual_history
            k = min(len(m), len(g))
            diff = max(abs(x - y) for x, y in zip(m[:k], g[:k])) / bn
            worst[alpha] = max(worst[alpha], diff)
            if diff > 1e-8:
                failures.append((alpha, seed))
    detail = ", ".join(f"alpha={al:g}: max diff {d:.1e}" for al, d in worst.items())
    detail += f"; {len(failures)} of {len(EQUIV_ALPHAS) * len(EQUIV_SEEDS)} systems over 1e-8"
    ok = verdict(1, "MRS3 and full GMRES residuals agree", not failures, detail)
    assert ok, detail


def test_criterion_02_truncated_equals_full_gcr():
    worst = {}
    worst_omitted = 0.0
    failures = []
    for alpha in EQUIV_ALPHAS:
        worst[alpha] = 0.0
        for seed in EQUIV_SEEDS:
            a, b = random_sss_system(25, alpha, seed)
            t = trunc_gcr_solve(a, b, tol=1e-8, maxit=200, record_iterates=True)
            f = full_gcr_solve(a, b, tol=1e-8, maxit=200, record_iterates=True)
            scale = max(1.0, np.linalg.norm(np.linalg.solve(a.to_dense(), b)))
            diff = max(np.max(np.abs(xt - xf)) for xt, xf in zip(t.iterates, f.iterates)) / scale
            worst[alpha] = max(worst[alpha], diff)
            omitted = f.trace["omitted"][:20]
            worst_omitted = max([worst_omitted, *omitted])
            if diff > 1e-8:
                failures.append((alpha, seed))
    ok = not failures and worst_omitted <= 1e-10
    detail = ", ".join(f"alpha={al:g}: max iterate diff {d:.1e}" for al, d in worst.items())
    detail += " (relative to max(1, |x*|))"
    detail += f"; max |(v_i, A r_j)| {worst_omitted:.1e}; {len(failures)} systems over 1e-8"
    verdict(2, "truncated GCR iterates equal full GCR", ok, detail)
    assert ok, detail


def test_criterion_03_gcr_breakdown():
    systems = [SssOperator(0.0, random_skew_matrix(25, seed)) for seed in range(10)]
    rhs = [np.random.default_rng(seed).standard_normal(25) for seed in range(10)]
    a, b = _advection(0.0, 1.0)
    systems.append(a)
    rhs.append(b)
    bad = []
    for k, (a, b) in enumerate(zip(systems, rhs)):
        for solve in (trunc_gcr_solve, full_gcr_solve):
            runs = [solve(a, b) for _ in range(2)]
            if any(r.status != Status.BREAKDOWN or r.breakdown_at != 2 for r in runs):
                bad.append((k, solve.__name__))
            if runs[0].residual_history != runs[1].residual_history:
                bad.append((k, solve.__name__, "nondeterministic"))
    detail = f"{len(systems)} systems x 2 variants, {len(bad)} not breaking down at iteration 2"
    ok = verdict(3, "GCR breaks down at iteration 2 for alpha = 0", not bad, detail)
    assert ok, bad


def test_criterion_04_residual_estimate():
    parts, ok = [], True
    for alpha, gamma in ADVECTION_CONFIGS:
        a, b = _advection(alpha, gamma)
        kappa = condition_number(a)
        if kappa > 1e5:
            parts.append(f"({alpha:g},{gamma:g}) skipped, kappa {kappa:.1e}")
            continue
        r = mrs3_solve(a, b, maxit=400, audit_every=1)
        diff = max(abs(r.residual_history[j] - t) for j, t in r.true_residuals.items())
        ok &= diff <= 1e-8 * np.linalg.norm(b)
        parts.append(f"({alpha:g},{gamma:g}) {len(r.true_residuals)} audits, max gap {diff:.1e}")
    detail = "; ".join(parts)
    verdict(4, "|eps_j| tracks the true residual", ok, detail)
    assert ok, detail


def test_criterion_05_sparsity_pattern():
    alpha = 1e-3
    a, b = _advection(alpha, 1.0)
    tr = mrs3_solve(a, b, maxit=200, tol=1e-30).trace
    assert tr.j == 200
    z = z_sequence(alpha, tr.betas[1:])
    off, diag = 0.0, 0.0
    for j, u in enumerate(tr.u_cols, start=1):
        scale = np.linalg.norm(u)
        off = max(off, abs(u[1]) / scale, abs(u[3]) / scale)
        diag = max(diag, abs(u[2] - z.diagonal(j)) / z.diagonal(j))
    ok = off <= 1e-12 and diag <= 1e-10
    detail = f"200 iterations, max |u(j-1)|,|u(j+1)| rel {off:.1e}, max rel |u(j) - sqrt(Z_j+1)| {diag:.1e}"
    verdict(5, "rotated columns have the predicted sparsity", ok, detail)
    assert ok, detail


def test_criterion_06_mr_galerkin_identity():
    a, b = _advection(1e-3, 100.0)
    m = mrs3_solve(a, b).residual_history
    g = cgw_solve(a, b).residual_history
    k = min(len(m), len(g))
    worst, checked, above = 0.0, 0, []
    for j in range(1, k):
        if m[j] > g[j]:
            above.append(j)
        c = m[j] / m[j - 1]
        if c <= 1 - 1e-6:
            checked += 1
            worst = max(worst, abs(m[j] - math.sqrt(1 - c * c) * g[j]) / m[j])
    ok = worst <= 1e-6 and not above
    detail = f"{checked} checked iterations, worst rel {worst:.1e}, {len(above)} with MRS3 above CGW"
    verdict(6, "MR/Galerkin residual identity", ok, detail)
    assert ok, detail


def test_criterion_07_hwl_equals_cgnr():
    worst = 0.0
    for seed in range(10):
        s = random_skew_matrix(16, seed)
        b = np.random.default_rng(100 + seed).standard_normal(16)
        h = hwl_solve(s, b, tol=1e-10, record_iterates=True)
        c = cgnr_solve(SssOperator(0.0, s), b, tol=1e-10, record_iterates=True)
        assert len(h.iterates) > 2
        k = min(len(h.iterates), len(c.iterates))
        scale = max(1.0, np.linalg.norm(np.linalg.solve(s.to_dense(), b)))
        diff = max(np.max(np.abs(h.iterates[j] - c.iterates[j])) for j in range(k)) / scale
        worst = max(worst, diff)
    ok = worst <= 1e-8
    detail = f"10 systems, max iterate diff {worst:.1e} (relative to max(1, |x*|))"
    verdict(7, "HWL and CGNR iterates coincide", ok, detail)
    assert ok, detail


def test_criterion_08_table1():
    a, b = _advection(1.0, 1.0)
    got = {}
    for name, solve in (("mrs3", mrs3_solve), ("cgw", cgw_solve), ("cgnr", cgnr_solve),
                        ("bicgstab", bicgstab_solve)):
        r = solve(a, b)
        d = r.iteration_counters()
        k = r.iterations
        assert k > 0
        got[name] = (d["matvecs"] / k, d["inner_products"] / k, d["peak_vectors"])
    ok = (got["mrs3"] == (1, 1, 5) and got["cgw"][:2] == (1, 2)
          and got["cgnr"][0] == 2 and got["bicgstab"][0] == 2)
    detail = ", ".join(f"{n}: {mv:g} matvec, {ip:g} inner, peak {pk}" for n, (mv, ip, pk) in got.items())
    verdict(8, "per-iteration costs match the cost table", ok, detail)
    assert ok, detail


def test_criterion_09_condition_numbers():
    k_a = condition_number(_advection(10.0, 1.0)[0])
    k_b = condition_number(_advection(1e-3, 100.0)[0])
    ok = 4 / 1.5 <= k_a <= 4 * 1.5 and 15 / 1.5 <= k_b <= 15 * 1.5
    # reference values that are logged only
    k_c = condition_number(_advection(1e-3, 1.0)[0])
    k_d = condition_number(_advection(1e-6, 1.0)[0])
    k_e = condition_number(_advection(1e-5, 100.0)[0])
    detail = (f"kappa(10,1) = {k_a:.3g} vs 4, kappa(1e-3,100) = {k_b:.3g} vs 15; "
              f"logged: kappa(1e-3,1) = {k_c:.3g} (reference 4e4 and 4e3), "
              f"kappa(1e-6,1) = {k_d:.3g} (reference 4e7), kappa(1e-5,100) = {k_e:.3g} (reference 15)")
    verdict(9, "condition numbers match the reference values", ok, detail)
    assert ok, detail


def test_criterion_10_robustness_ordering():
    a_hard, b_hard = _advection(1e-6, 1.0)
    hard = {name: solve(a_hard, b_hard, tol=1e-8, maxit=400)
            for name, solve in (("mrs3", mrs3_solve), ("cgnr", cgnr_solve), ("trunc-gcr", trunc_gcr_solve))}
    a, b = _advection(10.0, 1.0)
    easy = {name: solve(a, b, tol=1e-8, maxit=400)
            for name, solve in (("mrs3", mrs3_solve), ("trunc-gcr", trunc_gcr_solve),
                                ("cgnr", cgnr_solve), ("cgw", cgw_solve))}

    def reached(r):
        return r.converged and r.true_final_residual <= 1e-8 * (1 + 1e-6)

    ok = (reached(hard["mrs3"]) and not reached(hard["cgnr"]) and not reached(hard["trunc-gcr"])
          and all(reached(r) for r in easy.values()))
    # supplementary: CGNR given the matvecs MRS3 needed (two per CGNR iteration)
    cgnr_equal_work = cgnr_solve(a_hard, b_hard, tol=1e-8, maxit=hard["mrs3"].iterations // 2)
    detail = ("alpha=1e-6: " + ", ".join(
        f"{n} {r.status} it={r.iterations} res={r.true_final_residual:.2e}" for n, r in hard.items())
        + f" (CGNR at equal matvecs: {cgnr_equal_work.true_final_residual:.1e}); alpha=10: "
        + ", ".join(f"{n} {r.status} it={r.iterations}" for n, r in easy.items()))
    verdict(10, "only MRS3 survives the ill-conditioned system", ok, detail)
    assert ok, detail


def test_criterion_11_transform_round_trips():
    worst = 0.0
    for seed in range(10):
        n = 4 + seed
        rng = np.random.default_rng(seed)
        s = random_skew_matrix(n, seed)
        b = rng.standard_normal(n)
        d = rng.uniform(0.1, 5.0, n)
        M = rng.standard_normal((n, n))
        H = M @ M.T + 0.5 * np.eye(n)
        for hmat, transform, arg in ((np.diag(d), diagonal_scale_transform, d),
                                     (H, spd_split_transform, H)):
            x = np.linalg.solve(hmat + s.to_dense(), b)
            a, bs, back = transform(arg, s, b)
            r = mrs3_solve(a, bs, tol=1e-13, maxit=10 * n)
            worst = max(worst, np.linalg.norm(back(r.x) - x) / np.linalg.norm(x))
    ok = worst <= 1e-8
    detail = f"20 instances (n = 4..13), worst rel error {worst:.1e}"
    verdict(11, "transform, solve and back-map reproduce direct solves", ok, detail)
    assert ok, detail


def test_criterion_12_lanczos_relation():
    parts, ok = [], True
    for alpha, gamma in ((10.0, 1.0), (1e-3, 100.0), (1e-3, 1.0)):
        a, b = _advection(alpha, gamma)
        Q, betas = lanczos_basis(a, b, 30)
        A = a.to_dense()
        worst = 0.0
        for j in range(1, Q.shape[1]):
            T = np.zeros((j + 1, j))
            for i in range(j):
                T[i, i] = alpha
                T[i + 1, i] = -betas[i + 1]
                if i + 1 < j:
                    T[i, i + 1] = betas[i + 1]
            lhs = A @ Q[:, :j]
            rel = np.max(np.abs(lhs - Q[:, : j + 1] @ T)) / (abs(alpha) + max(betas[1 : j + 1]))
            worst = max(worst, rel)
        ok &= worst <= 1e-10
        parts.append(f"({alpha:g},{gamma:g}) j<={Q.shape[1] - 1}: {worst:.1e}")
    detail = "; ".join(parts)
    verdict(12, "A Q_j = Q_j+1 T_j holds", ok, detail)
    assert ok, detail
