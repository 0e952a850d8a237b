"""Conjugate-gradient style baselines.

``gencg_solve`` and ``cgw_solve`` need a definite symmetric part; for
``A = alpha I + S`` that part is ``alpha I`` and the inner solves reduce to a
division by ``alpha``. ``hwl_solve`` handles the pure skew case and
``cgnr_solve`` runs CG on the normal equations.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import blas

from ..errors import UsageError
from ..operators import EPS, OpCounters, SparseSkewMatrix, SssOperator, dot, norm2, sss_apply
from ..report import IterationLog, SolveReport, Status, check_common
from ._common import start


def _stop(log: IterationLog, maxit):
    if log.converged():
        return Status.CONVERGED
    if log.j >= maxit:
        return Status.MAX_ITERATIONS
    if log.stagnated():
        return Status.STAGNATED
    return None


def gencg_solve(a: SssOperator, b, tol=1e-8, maxit=1000, audit_every=10,
                record_iterates=False) -> SolveReport:
    """Three-term generalized CG, started from ``x_{-1} = x_0 = 0``.

    For ``alpha < 0`` the method runs on ``-A x = -b``, which leaves
    ``v_j = (b - A x_j)/alpha`` unchanged and makes ``rho_j = |alpha| (v_j, v_j)``.
    """
    if a.alpha == 0.0:
        raise UsageError("generalized CG needs alpha != 0")
    b, _ = check_common(a, b, None, tol, maxit)
    counters = OpCounters()
    log = IterationLog("gencg", a, b, tol, counters, audit_every, record_iterates)
    alpha = a.alpha
    h = abs(alpha)
    counters.hold(3)  # x_{j-1}, x_j, v_j
    x_prev = np.zeros(a.n)
    x = np.zeros(a.n)
    v = b / alpha
    counters.update()
    rho_prev = omega_prev = None
    status = detail = breakdown_at = None
    while True:
        vv = dot(v, v, counters)
        rho = h * vv
        log.record(h * math.sqrt(vv), x)
        status = _stop(log, maxit)
        if status is not None:
            break
        if rho_prev is None:
            omega = 1.0
        else:
            denom = 1.0 + (rho / rho_prev) / omega_prev
            if abs(denom) <= EPS:
                status, breakdown_at = Status.BREAKDOWN, log.j + 1
                detail = f"omega denominator {denom:.3e} vanished"
                break
            omega = 1.0 / denom
        # x_{j+1} = (1 - omega) x_{j-1} + omega (v_j + x_j), written into x_{j-1}
        v += x
        x_prev *= 1.0 - omega
        blas.daxpy(v, x_prev, a=omega)
        counters.update(3)
        x_prev, x = x, x_prev
        v = b - sss_apply(a, x, counters=counters)
        v /= alpha
        counters.update()
        rho_prev, omega_prev = rho, omega
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)


def cgw_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=1000, audit_every=10,
              record_iterates=False) -> SolveReport:
    """Concus-Golub-Widlund iteration with ``H = alpha I``.

    Identical to preconditioned CG except for the sign of the direction
    coefficient. With ``z_j = r_j / alpha`` substituted the step length is
    ``(r, r)/(A p, r)`` and ``beta_j = -(r_{j+1}, r_{j+1})/(r_j, r_j)``.
    Galerkin: the residual is orthogonal to the current Krylov space.
    """
    if a.alpha == 0.0:
        raise UsageError("CGW needs alpha != 0")
    b, x, r, counters, log = start("cgw", a, b, x0, tol, maxit, audit_every, record_iterates)
    alpha = a.alpha
    counters.hold(4)  # x, r, p, Ap
    p = r / alpha
    counters.update()
    rr = dot(r, r, counters)
    log.record(math.sqrt(rr), x)
    status = detail = breakdown_at = None
    while True:
        status = _stop(log, maxit)
        if status is not None:
            break
        ap = sss_apply(a, p, counters=counters)
        den = dot(ap, r, counters)
        if abs(den) <= EPS * a.norm_est * rr / abs(alpha):
            status, breakdown_at = Status.BREAKDOWN, log.j + 1
            detail = f"(A p, z) = {den / alpha:.3e} vanished"
            break
        step = rr / den
        blas.daxpy(p, x, a=step)
        blas.daxpy(ap, r, a=-step)
        rr_new = dot(r, r, counters)
        beta = -rr_new / rr
        p *= beta
        blas.daxpy(r, p, a=1.0 / alpha)
        counters.update(3)
        rr = rr_new
        log.record(math.sqrt(rr), x)
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)


def hwl_solve(s: SparseSkewMatrix, b, x0=None, tol=1e-8, maxit=1000, audit_every=10,
              record_iterates=False) -> SolveReport:
    """Huang-Wathen-Li iteration for ``S x = b`` with ``S`` skew.

    Follows the published steps literally, including the explicit residual
    ``r_{j+1} = b - A x_{j+1}``; four matvecs per iteration.
    """
    a = SssOperator(0.0, s)
    b, x, r, counters, log = start("hwl", a, b, x0, tol, maxit, audit_every, record_iterates)
    counters.hold(5)  # x, r, p, A p, A r
    p = sss_apply(a, r, counters=counters)
    log.record(norm2(r, counters), x)
    status = detail = breakdown_at = None
    while True:
        status = _stop(log, maxit)
        if status is not None:
            break
        ap = sss_apply(a, p, counters=counters)
        apap = dot(ap, ap, counters)
        pp = dot(p, p, counters)
        if apap <= (EPS * a.norm_est) ** 2 * pp:
            status, breakdown_at = Status.BREAKDOWN, log.j + 1
            detail = f"(A p, A p) = {apap:.3e} vanished"
            break
        step = dot(r, ap, counters) / apap
        blas.daxpy(p, x, a=step)
        r = b - sss_apply(a, x, counters=counters)
        ar = sss_apply(a, r, counters=counters)
        a2p = sss_apply(a, ap, counters=counters)
        beta = dot(a2p, ar, counters) / apap
        p *= beta
        p += ar
        counters.update(3)
        log.record(norm2(r, counters), x)
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)


def cgnr_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=1000, audit_every=10,
               record_iterates=False) -> SolveReport:
    """CG on ``A^T A x = A^T b`` in the residual-updating (CGLS) form."""
    b, x, r, counters, log = start("cgnr", a, b, x0, tol, maxit, audit_every, record_iterates)
    counters.hold(5)  # x, r, s, p, q
    s = sss_apply(a, r, transpose=True, counters=counters)
    p = s.copy()
    counters.update()
    gamma = dot(s, s, counters)
    log.record(norm2(r, counters), x)
    status = detail = breakdown_at = None
    while True:
        status = _stop(log, maxit)
        if status is not None:
            break
        q = sss_apply(a, p, counters=counters)
        qq = dot(q, q, counters)
        # gamma = ||s||^2 <= ||p||^2, so this flags A p below eps ||A|| ||p||
        if qq <= (EPS * a.norm_est) ** 2 * gamma:
            status, breakdown_at = Status.BREAKDOWN, log.j + 1
            detail = f"(A p, A p) = {qq:.3e} vanished"
            break
        step = gamma / qq
        blas.daxpy(p, x, a=step)
        blas.daxpy(q, r, a=-step)
        s = sss_apply(a, r, transpose=True, counters=counters)
        gamma_new = dot(s, s, counters)
        p *= gamma_new / gamma
        p += s
        counters.update(3)
        gamma = gamma_new
        log.record(norm2(r, counters), x)
    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at)
