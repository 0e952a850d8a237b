"""GMRES with modified Gram-Schmidt Arnoldi and Givens least squares."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import blas, solve_triangular

from ..mrs3 import givens_from
from ..operators import EPS, SssOperator, dot, norm2, sss_apply
from ..report import SolveReport, Status
from ._common import start


def gmres_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=1000, restart=None,
                audit_every=10, record_iterates=False) -> SolveReport:
    """GMRES, full (``restart=None``) or restarted every ``restart`` iterations.

    ``residual_history`` holds the least-squares residual of each inner
    iteration. At a restart the true residual is recomputed (one matvec,
    counted as algorithmic work). An Arnoldi breakdown
    (``h_{k+1,k} <= n eps ||A||_est``) means the current space is invariant
    and the least-squares solution is exact.
    """
    if restart is not None and restart < 1:
        raise ValueError("restart must be at least 1")
    name = "gmres" if restart is None else f"gmres({restart})"
    b, x, r, counters, log = start(name, a, b, x0, tol, maxit, audit_every, record_iterates)
    n = a.n
    thr = n * EPS * a.norm_est
    counters.hold(2)  # x, r
    beta = norm2(r, counters)
    log.record(beta, x)
    status = detail = breakdown_at = None

    while status is None:
        if log.converged():
            status = Status.CONVERGED
            break
        if log.j >= maxit:
            status = Status.MAX_ITERATIONS
            break
        m = restart if restart is not None else maxit - log.j
        m = min(m, maxit - log.j)
        basis = np.zeros((n, m + 1))
        basis[:, 0] = r / beta
        counters.update()
        counters.hold(1)
        h = np.zeros((m + 1, m))
        rots = []
        g = np.zeros(m + 1)
        g[0] = beta
        k_done = 0
        lucky = singular = False

        def current_x(k):
            if k == 0:
                return x.copy()
            y = solve_triangular(h[:k, :k], g[:k], lower=False)
            return x + basis[:, :k] @ y

        for k in range(m):
            w = sss_apply(a, basis[:, k], counters=counters)
            for i in range(k + 1):
                hik = dot(w, basis[:, i], counters)
                h[i, k] = hik
                blas.daxpy(basis[:, i], w, a=-hik)
            counters.update(k + 1)
            hk1 = norm2(w, counters)
            h[k + 1, k] = hk1
            for i, rot in enumerate(rots):
                h[i, k], h[i + 1, k] = rot.apply(h[i, k], h[i + 1, k])
            if math.hypot(h[k, k], h[k + 1, k]) <= thr:
                # A maps the new basis vector into the old space: the
                # least-squares residual cannot improve (A singular there)
                singular = True
                log.record(abs(g[k]), lambda kk=k_done: current_x(kk))
                break
            rot = givens_from(h[k, k], h[k + 1, k])
            rots.append(rot)
            h[k, k], h[k + 1, k] = rot.apply(h[k, k], h[k + 1, k])
            h[k + 1, k] = 0.0
            g[k], g[k + 1] = rot.apply(g[k], 0.0)
            k_done = k + 1
            lucky = hk1 <= thr
            log.record(abs(g[k + 1]), lambda kk=k_done: current_x(kk))
            if lucky or log.converged() or log.stagnated():
                break
            basis[:, k + 1] = w / hk1
            counters.update()
            counters.hold(1)

        if k_done:
            y = solve_triangular(h[:k_done, :k_done], g[:k_done], lower=False)
            x += basis[:, :k_done] @ y
            counters.update(k_done)
        counters.release(counters.live_vectors - 2)
        if singular:
            status, breakdown_at = Status.BREAKDOWN, log.j
            detail = f"Hessenberg least-squares problem singular at iteration {log.j}"
            break
        if log.converged():
            status = Status.CONVERGED
        elif lucky:
            status, breakdown_at = Status.BREAKDOWN, log.j + 1
            detail = "Arnoldi exhausted the Krylov space without reaching tol"
        elif log.stagnated():
            status = Status.STAGNATED
        elif restart is None or log.j >= maxit:
            status = Status.MAX_ITERATIONS
        else:
            r = b - sss_apply(a, x, counters=counters)
            beta = norm2(r, counters)
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)
