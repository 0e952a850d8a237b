"""Minimal residual solver for shifted skew-symmetric systems (MRS3).

Each iteration runs one Lanczos step, rotates the newest column of the
extended Ritz matrix with the last three Givens rotations and updates the
iterate through a two-term recurrence for the search directions
``w_j = (q_j - u_{j-2,j} w_{j-2}) / u_{j,j}``. The entry ``u_{j-1,j}`` of the
rotated column vanishes for these operators, which is what makes the
recurrence two-term instead of three-term.

Working set: five length-n vectors (``q_j``, ``p_{j+1}``, ``w_{j-1}``,
``w_j``, ``x_j``). Per iteration: 1 matvec, 3 vector updates, 1 inner
product.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas, solve_triangular

from .errors import AlreadyConverged, LuckyBreakdown, OracleInapplicable, SingularBreakdown
from .lanczos import (
    ExtendedRitz,
    LanczosState,
    assemble_extended_ritz,
    breakdown_threshold,
    lanczos_init,
    lanczos_step,
)
from .operators import OpCounters, SssOperator, sss_apply
from .report import IterationLog, SolveReport, Status, check_common

DRIFT_EXTRA_ITERATIONS = 5


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation on rows ``(k, k+1)``: ``(y_k, y_l) -> (c y_k + s y_l, -s y_k + c y_l)``."""

    c: float
    s: float
    k: int = 0

    def apply(self, yk, yl):
        return self.c * yk + self.s * yl, -self.s * yk + self.c * yl


IDENTITY = GivensRotation(1.0, 0.0, 0)


def givens_from(yk, yl, k=0) -> GivensRotation:
    """Rotation that maps ``(yk, yl)`` to ``(sqrt(yk^2 + yl^2), 0)``.

    ``(0, 0)`` gives the identity.
    """
    if yk == 0.0 and yl == 0.0:
        return GivensRotation(1.0, 0.0, k)
    # scale first so subnormal pairs still give c^2 + s^2 = 1
    m = max(abs(yk), abs(yl))
    yk, yl = yk / m, yl / m
    r = math.hypot(yk, yl)
    return GivensRotation(yk / r, yl / r, k)


@dataclass
class Mrs3Trace:
    """Scalar record of a run, plus basis/direction/iterate vectors in debug mode."""

    alpha: float
    r0_norm: float
    betas: list = field(default_factory=list)  # beta_1, beta_2, ...
    u_cols: list = field(default_factory=list)  # rotated (j-2, j-1, j, j+1) entries
    rotations: list = field(default_factory=list)  # G_1, G_2, ...
    mus: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    q_cols: list | None = None
    w_cols: list | None = None
    x_iterates: list | None = None

    @property
    def j(self) -> int:
        return len(self.u_cols)

    def ritz(self, j=None) -> ExtendedRitz:
        j = self.j if j is None else j
        return assemble_extended_ritz(self.alpha, self.betas[1 : j + 1])

    def upper_triangular(self, j=None) -> np.ndarray:
        """``U_j`` assembled from the recorded rotated columns."""
        j = self.j if j is None else j
        u = np.zeros((j, j))
        for i in range(j):
            col = self.u_cols[i]
            for off, row in enumerate((i - 2, i - 1, i)):
                if row >= 0:
                    u[row, i] = col[off]
        return u


@dataclass
class Mrs3State:
    lanczos: LanczosState
    alpha: float
    x: np.ndarray
    w_prev2: np.ndarray  # w_{j-1} after iteration j, i.e. w_{j-2} for the next one
    w_prev1: np.ndarray  # w_j after iteration j
    eps: float  # signed last entry of the rotated right-hand side
    threshold: float
    mu: float = 0.0
    u_col: np.ndarray = field(default_factory=lambda: np.zeros(4))
    rot_window: deque = field(default_factory=lambda: deque([IDENTITY, IDENTITY, IDENTITY], maxlen=3))
    trace: Mrs3Trace | None = None

    @property
    def j(self) -> int:
        return self.lanczos.j

    @property
    def residual_estimate(self) -> float:
        return abs(self.eps)


def mrs3_init(a: SssOperator, r0, x0, counters=None, trace=True, debug=False) -> Mrs3State:
    """Set up the iteration from ``r0 = b - A x0``; takes ownership of ``r0``.

    Raises :class:`AlreadyConverged` when ``r0 == 0``.
    """
    lz = lanczos_init(r0, counters)
    if counters is not None:
        counters.hold(3)  # w_{j-1}, w_j, x
    n = a.n
    tr = None
    if trace:
        tr = Mrs3Trace(alpha=a.alpha, r0_norm=lz.beta_next, betas=[lz.beta_next])
        if debug:
            tr.q_cols, tr.w_cols, tr.x_iterates = [], [], [np.array(x0, copy=True)]
    return Mrs3State(
        lanczos=lz,
        alpha=a.alpha,
        x=np.array(x0, dtype=float, copy=True),
        w_prev2=np.zeros(n),
        w_prev1=np.zeros(n),
        eps=-lz.beta_next,
        threshold=breakdown_threshold(a),
        trace=tr,
    )


def mrs3_iterate(state: Mrs3State, a: SssOperator, counters: OpCounters | None = None) -> Mrs3State:
    """One MRS3 iteration in place.

    Raises :class:`~skewkrylov.errors.LuckyBreakdown` if the Krylov space is
    already exhausted and :class:`~skewkrylov.errors.SingularBreakdown` if the
    new diagonal entry ``u_{j,j}`` is at or below the breakdown threshold.
    """
    lz = lanczos_step(state.lanczos, a.s, counters, threshold=state.threshold)
    j = lz.j
    u = np.array([0.0, lz.beta if j >= 2 else 0.0, state.alpha, -lz.beta_next])
    g2, g1 = state.rot_window[-2], state.rot_window[-1]
    u[0], u[1] = g2.apply(u[0], u[1])
    u[1], u[2] = g1.apply(u[1], u[2])
    g = givens_from(u[2], u[3], k=j)
    u[2], u[3] = g.apply(u[2], u[3])

    mu = g.c * state.eps
    eps = -g.s * state.eps
    if u[2] <= state.threshold:
        raise SingularBreakdown(f"u_({j},{j}) = {u[2]:.3e} at iteration {j}")

    # w_j overwrites w_{j-2}: w = (q_j - u[0] w) / u[2]
    w = state.w_prev2
    w *= -u[0] / u[2]
    blas.daxpy(lz.q, w, a=1.0 / u[2])
    blas.daxpy(w, state.x, a=mu)
    if counters is not None:
        counters.update(2)

    state.w_prev2, state.w_prev1 = state.w_prev1, w
    state.rot_window.append(g)
    state.u_col = u
    state.mu = mu
    state.eps = eps

    tr = state.trace
    if tr is not None:
        tr.betas.append(lz.beta_next)
        tr.u_cols.append(u.copy())
        tr.rotations.append(g)
        tr.mus.append(mu)
        tr.eps.append(eps)
        if tr.q_cols is not None:
            tr.q_cols.append(lz.q.copy())
            tr.w_cols.append(w.copy())
            tr.x_iterates.append(state.x.copy())
    return state


def mrs3_solve(
    a: SssOperator,
    b,
    x0=None,
    tol=1e-8,
    maxit=None,
    audit_every=10,
    debug=False,
    record_iterates=False,
) -> SolveReport:
    """Solve ``(alpha I + S) x = b`` with MRS3.

    Stops when the recurred residual ``|eps_j| <= tol*||b||``, then confirms
    with one explicit residual. If the confirmation (``||b - A x|| <=
    tol*(1+||b||)``) fails, up to five more iterations are tried before the
    run ends as ``EstimateDrift``. Other outcomes: ``MaxIterations``,
    ``Exhausted`` (Krylov space invariant before convergence) and
    ``Singular``.

    ``debug`` keeps every ``q_j``, ``w_j`` and ``x_j`` in ``report.trace`` for
    the reconstruction checks in this module. Audits of the true residual
    every ``audit_every`` iterations are counted as ``audit_matvecs``.
    """
    b, x0 = check_common(a, b, x0, tol, maxit if maxit is not None else 1)
    maxit = 2 * a.n if maxit is None else maxit
    counters = OpCounters()
    log = IterationLog("mrs3", a, b, tol, counters, audit_every, record_iterates)

    if np.any(x0):
        r0 = b - sss_apply(a, x0, counters=counters)
    else:
        r0 = b.copy()
    try:
        state = mrs3_init(a, r0, x0, counters, trace=True, debug=debug)
    except AlreadyConverged:
        counters.hold(1)
        log.record(0.0, x0)
        return log.finish(Status.CONVERGED, x0)

    log.record(state.residual_estimate, state.x)
    status = None
    detail = None
    true_final = None
    drift_left = None
    while True:
        if log.converged():
            true_final = log.true_residual(state.x)
            if log.confirms(true_final):
                status = Status.CONVERGED
                break
            if drift_left is None:
                drift_left = DRIFT_EXTRA_ITERATIONS
            if drift_left == 0:
                status = Status.ESTIMATE_DRIFT
                detail = f"|eps| = {log.history[-1]:.3e} but ||b - Ax|| = {true_final:.3e}"
                break
            drift_left -= 1
            true_final = None
        elif log.j >= maxit:
            status = Status.MAX_ITERATIONS
            break
        try:
            mrs3_iterate(state, a, counters)
        except LuckyBreakdown as exc:
            status, detail = Status.EXHAUSTED, str(exc)
            break
        except SingularBreakdown as exc:
            status, detail = Status.SINGULAR, str(exc)
            break
        log.record(state.residual_estimate, state.x)

    breakdown_at = log.j + 1 if status in (Status.EXHAUSTED, Status.SINGULAR) else None
    return log.finish(status, state.x, detail=detail, breakdown_at=breakdown_at,
                      trace=state.trace, true_final=true_final)


@dataclass(frozen=True)
class ZSequence:
    """``Z_1 .. Z_{k+1}`` plus the companion terms ``P_i = Z_i - beta_i^2``.

    Closed forms (valid for ``alpha > 0``): ``u_{j,j} = sqrt(Z_{j+1})``,
    ``s_i = -beta_{i+1}/sqrt(Z_{i+1})``, ``c_i = sqrt(P_{i+1}/Z_{i+1})`` and
    ``u_{j-2,j} = -beta_{j-1} beta_j / sqrt(Z_{j-1})``.
    """

    values: tuple
    partial: tuple  # P_1 (unused, 0) .. P_{k+1}
    betas: tuple  # beta_2 .. beta_{k+1}

    def z(self, i) -> float:
        return self.values[i - 1]

    def diagonal(self, j) -> float:
        return math.sqrt(self.z(j + 1))

    def rotation(self, i):
        zi1 = self.z(i + 1)
        return math.sqrt(self.partial[i] / zi1), -self.betas[i - 1] / math.sqrt(zi1)

    def second_superdiagonal(self, j) -> float:
        return -self.betas[j - 3] * self.betas[j - 2] / math.sqrt(self.z(j - 1))


def z_sequence(alpha, betas) -> ZSequence:
    """``Z_1 = alpha^2``, ``Z_2 = Z_1 + beta_2^2``, ``Z_3 = Z_2 + beta_3^2`` and
    for ``i > 3`` the alternating quotient of earlier ``Z`` plus ``beta_i^2``.

    The quotient is carried as ``P_i = P_{i-2} Z_{i-1} / Z_{i-2}`` (with
    ``P_2 = Z_1``, ``P_3 = Z_2``), which avoids over/underflow in the long
    products. ``betas`` holds ``beta_2, beta_3, ...``.
    """
    betas = tuple(float(b) for b in betas)
    z = [float(alpha) ** 2]
    p = [0.0]
    for idx, beta in enumerate(betas):
        i = idx + 2
        if i == 2:
            pi = z[0]
        elif i == 3:
            pi = z[1]
        else:
            denom = z[i - 3]
            if denom == 0.0:
                raise OracleInapplicable(f"Z_{i - 2} = 0 in the recursion for Z_{i}")
            pi = p[i - 3] * z[i - 2] / denom
        p.append(pi)
        z.append(pi + beta * beta)
    return ZSequence(tuple(z), tuple(p), betas)


def recover_xi(ritz: ExtendedRitz, rotations, r0_norm) -> np.ndarray:
    """Coefficients ``xi`` with ``x_j = x_0 + Q_j xi`` (debug / test only).

    Applies ``G_j ... G_1`` to the extended Ritz matrix and to
    ``-||r0|| e_1`` and back-substitutes the leading ``j x j`` triangle.
    """
    j = ritz.j
    t = ritz.matrix()
    v = np.zeros(j + 1)
    v[0] = -r0_norm
    for i, g in enumerate(rotations[:j]):
        t[i, :], t[i + 1, :] = g.apply(t[i, :].copy(), t[i + 1, :].copy())
        v[i], v[i + 1] = g.apply(v[i], v[i + 1])
    u = np.triu(t[:j, :j])
    diag = np.abs(np.diag(u))
    if np.any(diag <= np.finfo(float).eps * max(np.max(np.abs(u)), 1.0)):
        raise SingularBreakdown("rotated Ritz matrix has a vanishing diagonal entry")
    return solve_triangular(u, v[:j], lower=False)


def w_recurrence_error(trace: Mrs3Trace, j=None) -> float:
    """``max |W_j U_j - Q_j|`` from a debug trace."""
    if trace.w_cols is None:
        raise ValueError("trace was recorded without debug vectors")
    j = trace.j if j is None else j
    w = np.column_stack(trace.w_cols[:j])
    q = np.column_stack(trace.q_cols[:j])
    return float(np.max(np.abs(w @ trace.upper_triangular(j) - q)))


def xi_reconstruction_error(trace: Mrs3Trace, j=None) -> float:
    """``max |x_j - (x_0 + Q_j xi_j)|`` from a debug trace."""
    if trace.q_cols is None:
        raise ValueError("trace was recorded without debug vectors")
    j = trace.j if j is None else j
    xi = recover_xi(trace.ritz(j), trace.rotations, trace.r0_norm)
    q = np.column_stack(trace.q_cols[:j])
    x0 = trace.x_iterates[0]
    return float(np.max(np.abs(trace.x_iterates[j] - (x0 + q @ xi))))
