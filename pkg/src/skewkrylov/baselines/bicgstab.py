"""Bi-CGSTAB (van der Vorst's stabilized bi-conjugate gradients)."""

from __future__ import annotations

import numpy as np
from scipy.linalg import blas

from ..operators import EPS, SssOperator, dot, norm2, sss_apply
from ..report import SolveReport, Status
from ._common import start


def bicgstab_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=1000, audit_every=10,
                   record_iterates=False) -> SolveReport:
    """Classical Bi-CGSTAB with shadow residual ``r_hat = r_0``.

    Two matvecs per iteration. Vanishing ``rho``, ``(r_hat, v)`` or ``omega``
    stop the run as ``Breakdown`` with the offending quantity named.
    """
    b, x, r, counters, log = start("bicgstab", a, b, x0, tol, maxit, audit_every, record_iterates)
    counters.hold(7)  # x, r, r_hat, p, v, s, t
    r_hat = r.copy()
    p = np.zeros(a.n)
    v = np.zeros(a.n)
    rnorm = norm2(r, counters)
    rhat_norm = rnorm
    log.record(rnorm, x)
    rho = alpha = omega = 1.0
    status = detail = breakdown_at = None
    while True:
        if log.converged():
            status = Status.CONVERGED
            break
        if log.j >= maxit:
            status = Status.MAX_ITERATIONS
            break
        if log.stagnated():
            status = Status.STAGNATED
            break
        j = log.j + 1
        rho_new = dot(r_hat, r, counters)
        if abs(rho_new) <= EPS * rhat_norm * log.history[-1]:
            status, breakdown_at = Status.BREAKDOWN, j
            detail = f"rho_{j} = (r_hat, r) = {rho_new:.3e} vanished"
            break
        beta = (rho_new / rho) * (alpha / omega)
        # p = r + beta (p - omega v)
        blas.daxpy(v, p, a=-omega)
        p *= beta
        p += r
        v = sss_apply(a, p, counters=counters)
        rv = dot(r_hat, v, counters)
        if abs(rv) <= EPS * abs(rho_new):
            status, breakdown_at = Status.BREAKDOWN, j
            detail = f"(r_hat, A p) = {rv:.3e} vanished"
            break
        alpha = rho_new / rv
        s = r  # r is dead once s is formed
        blas.daxpy(v, s, a=-alpha)
        t = sss_apply(a, s, counters=counters)
        tt = dot(t, t, counters)
        if tt == 0.0:
            blas.daxpy(p, x, a=alpha)
            counters.update(3)
            r = s
            log.record(norm2(r, counters), x)
            if not log.converged():
                status, breakdown_at = Status.BREAKDOWN, j
                detail = "A s = 0 with s != 0"
                break
            continue
        omega = dot(t, s, counters) / tt
        blas.daxpy(p, x, a=alpha)
        blas.daxpy(s, x, a=omega)
        blas.daxpy(t, s, a=-omega)
        r = s
        counters.update(5)
        rho = rho_new
        log.record(norm2(r, counters), x)
        if abs(omega) <= EPS and not log.converged():
            status, breakdown_at = Status.BREAKDOWN, j + 1
            detail = f"omega_{j} = {omega:.3e} vanished"
            break
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)
