"""Generalized conjugate residual method, truncated to one direction
(Orthomin(1)) and with full orthogonalization.

For ``A = alpha I + S`` the orthogonalization coefficients against all but the
latest direction vanish, so both variants produce the same iterates. For a
pure skew operator ``gamma_1 = (r_0, S r_0)/beta_1 = 0``, the residual does
not move, and the next normalization divides zero by zero: both variants
break down in their second iteration.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import blas

from ..operators import EPS, SssOperator, dot, norm2, sss_apply
from ..report import SolveReport, Status
from ._common import start


def _gcr(name, a: SssOperator, b, x0, tol, maxit, full, audit_every, record_iterates) -> SolveReport:
    b, x, r, counters, log = start(name, a, b, x0, tol, maxit, audit_every, record_iterates)
    n = a.n
    counters.hold(2)  # x, r
    log.record(norm2(r, counters), x)

    # ratio below which (r, A r) counts as an exact zero for a skew operator
    gamma_rtol = 10.0 * n * EPS
    beta_rtol = 10.0 * n * EPS

    dirs_s: list[np.ndarray] = []
    dirs_v: list[np.ndarray] = []
    trace = {"betas": [], "gammas": [], "mus": []}
    if full:
        trace.update(v=dirs_v, r=[r.copy()], omitted=[])
    s_prev = v_prev = None
    beta_prev = 1.0
    gamma_zero_at = None
    status, detail, breakdown_at = None, None, None

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
        r_norm = log.history[-1]
        v = sss_apply(a, r, counters=counters)  # A r_{j-1}
        if full:
            s = r.copy()
            counters.update()
            counters.hold(2)
            coefs = np.array([dot(vi, v, counters) for vi in dirs_v])
            if coefs.size > 1:
                trace["omitted"].append(float(np.max(np.abs(coefs[:-1]))))
            for c, si, vi in zip(coefs, dirs_s, dirs_v):
                blas.daxpy(si, s, a=-c)
                blas.daxpy(vi, v, a=-c)
            counters.update(2 * coefs.size)
            trace["mus"].append(coefs)
        elif v_prev is not None:
            # directions are kept unnormalized; 1/beta_{j-1} is folded into the updates
            counters.hold(1)  # A r_{j-1} is live until v_{j-1} is consumed
            mu = dot(v_prev, v, counters) / beta_prev
            blas.daxpy(v_prev, v, a=-mu / beta_prev)
            s = s_prev
            s *= -mu / beta_prev
            s += r
            counters.update(2)
            counters.release(1)
            trace["mus"].append(mu)
        else:
            s = r.copy()
            counters.update()
            counters.hold(2)

        beta = norm2(v, counters)
        trace["betas"].append(beta)
        if gamma_zero_at is not None or beta <= beta_rtol * a.norm_est * r_norm:
            status = Status.BREAKDOWN
            breakdown_at = j
            if gamma_zero_at is not None:
                detail = (f"gamma_{gamma_zero_at} = 0 leaves r unchanged, so beta_{j} = "
                          f"{beta:.3e} vanishes and v_{j} = 0/0")
            else:
                detail = f"beta_{j} = {beta:.3e} vanished"
            break
        if full:
            s /= beta
            v /= beta
            counters.update(2)
            gamma = dot(r, v, counters)
            step = gamma
        else:
            gamma = dot(r, v, counters) / beta
            step = gamma / beta
        trace["gammas"].append(gamma)
        blas.daxpy(s, x, a=step)
        blas.daxpy(v, r, a=-step)
        counters.update(2)
        if abs(gamma) <= gamma_rtol * r_norm:
            gamma_zero_at = j
        if full:
            dirs_s.append(s)
            dirs_v.append(v)
            trace["r"].append(r.copy())
        else:
            s_prev, v_prev, beta_prev = s, v, beta
        log.record(norm2(r, counters), x)

    return log.finish(status, x, detail=detail, breakdown_at=breakdown_at, trace=trace)


def trunc_gcr_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=1000, audit_every=10,
                    record_iterates=False) -> SolveReport:
    """Orthomin(1): GCR keeping only the previous direction pair."""
    return _gcr("trunc-gcr", a, b, x0, tol, maxit, False, audit_every, record_iterates)


def full_gcr_solve(a: SssOperator, b, x0=None, tol=1e-8, maxit=100, audit_every=10,
                   record_iterates=False) -> SolveReport:
    """GCR orthogonalizing against every previous direction.

    Keeps all directions; meant as a check on :func:`trunc_gcr_solve`. The
    trace records, per iteration, the largest coefficient that the truncated
    variant drops (``trace["omitted"]``).
    """
    return _gcr("full-gcr", a, b, x0, tol, maxit, True, audit_every, record_iterates)
