"""Lanczos recurrence for shifted skew-symmetric operators.

For ``A = alpha*I + S`` the Arnoldi process collapses to a two-coefficient
recurrence that only touches ``S``::

    q_j     = -p_j / beta_j
    p_{j+1} = S q_j - beta_j q_{j-1}
    beta_{j+1} = ||p_{j+1}||

and the basis satisfies ``A Q_j = Q_{j+1} T_j`` with the (j+1) x j extended
Ritz matrix built by :func:`assemble_extended_ritz`.

The state keeps two rotating length-n buffers. ``q_{j-1}`` is consumed in
place: its buffer is overwritten by ``p_{j+1}`` through a fused
``y <- S q_j - beta_j y`` update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlreadyConverged, LuckyBreakdown, UsageError
from .operators import EPS, OpCounters, SparseSkewMatrix, SssOperator, norm2


def breakdown_threshold(a: SssOperator) -> float:
    """Floating-point stand-in for ``beta_{j+1} > 0``: ``n eps (|alpha| + ||S||_est)``."""
    return a.n * EPS * a.norm_est


@dataclass
class LanczosState:
    """Rolling state between steps.

    After step ``j``: ``q`` holds ``q_j``, ``p`` holds ``p_{j+1}``,
    ``beta`` is ``beta_j`` and ``beta_next`` is ``beta_{j+1} = ||p||``.
    Before the first step ``q`` is the zero vector ``q_0``, ``p = r_0`` and
    ``beta_next = beta_1``.
    """

    q: np.ndarray
    p: np.ndarray
    beta: float
    beta_next: float
    j: int = 0


def lanczos_init(r0, counters: OpCounters | None = None) -> LanczosState:
    """Start the recurrence from ``p_1 = r0``.

    Takes ownership of ``r0`` (it becomes the ``p`` buffer) and allocates the
    ``q_0 = 0`` buffer. Raises :class:`AlreadyConverged` if ``r0 == 0``.
    """
    p = np.asarray(r0, dtype=float)
    beta1 = norm2(p, counters)
    if beta1 == 0.0:
        raise AlreadyConverged("initial residual is zero")
    if counters is not None:
        counters.hold(2)
    return LanczosState(q=np.zeros_like(p), p=p, beta=0.0, beta_next=beta1, j=0)


def lanczos_step(
    state: LanczosState,
    s: SparseSkewMatrix,
    counters: OpCounters | None = None,
    threshold: float = 0.0,
) -> LanczosState:
    """Advance one step in place: 1 matvec, 1 vector update, 1 inner product."""
    if state.beta_next <= threshold:
        raise LuckyBreakdown(
            f"beta_{state.j + 1} = {state.beta_next:.3e} <= {threshold:.3e}: Krylov space exhausted"
        )
    beta = state.beta_next
    qj = state.p
    qj *= -1.0 / beta  # p_j -> q_j
    if counters is not None:
        counters.update()
        counters.matvec()
    nxt = state.q  # q_{j-1} -> p_{j+1}
    nxt *= -beta
    s.matvec_acc(qj, nxt)
    state.q, state.p = qj, nxt
    state.beta = beta
    state.beta_next = norm2(nxt, counters)
    state.j += 1
    return state


@dataclass(frozen=True)
class ExtendedRitz:
    alpha: float
    betas: tuple  # beta_2 .. beta_{j+1}

    @property
    def j(self) -> int:
        return len(self.betas)

    def matrix(self) -> np.ndarray:
        j = self.j
        t = np.zeros((j + 1, j))
        idx = np.arange(j)
        t[idx, idx] = self.alpha
        b = np.asarray(self.betas, dtype=float)
        t[idx[:-1], idx[1:]] = b[:-1]
        t[idx + 1, idx] = -b
        return t


def assemble_extended_ritz(alpha, betas) -> ExtendedRitz:
    """Extended Ritz matrix from ``alpha`` and ``(beta_2, ..., beta_{j+1})``."""
    betas = tuple(float(b) for b in betas)
    if not betas:
        raise UsageError("need at least one beta")
    return ExtendedRitz(float(alpha), betas)


def lanczos_basis(a: SssOperator, r0, steps, reorthogonalize=False):
    """Run up to ``steps + 1`` Lanczos steps and return ``(Q, betas)``.

    ``Q`` holds the computed basis vectors ``q_1 .. q_m`` as columns and
    ``betas[i]`` is ``beta_{i+1}``, so ``len(betas) == m + 1``. ``m`` is
    ``steps + 1`` unless the space was exhausted earlier. Debug and test
    support only: the basis is stored, and ``reorthogonalize`` applies full
    Gram-Schmidt against it (never used by the solvers).
    """
    state = lanczos_init(np.array(r0, dtype=float))
    thr = breakdown_threshold(a)
    cols = []
    betas = [state.beta_next]
    for _ in range(steps + 1):
        try:
            lanczos_step(state, a.s, threshold=thr)
        except LuckyBreakdown:
            break
        cols.append(state.q.copy())
        if reorthogonalize and len(cols) > 1:
            basis = np.column_stack(cols)
            p = state.p
            # p_{j+1} must be orthogonal to q_1..q_j
            p -= basis @ (basis.T @ p)
            p -= basis @ (basis.T @ p)
            state.beta_next = float(np.linalg.norm(p))
        betas.append(state.beta_next)
        if len(cols) == steps + 1:
            break
    return np.column_stack(cols), np.asarray(betas)
