"""Solve reports and the per-iteration bookkeeping shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np

from .operators import OpCounters, SssOperator, UsageError, as_vector

STAGNATION_WINDOW = 50
STAGNATION_RTOL = 1e-14


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    BREAKDOWN = "Breakdown"
    STAGNATED = "Stagnated"
    EXHAUSTED = "Exhausted"
    SINGULAR = "Singular"
    ESTIMATE_DRIFT = "EstimateDrift"

    def __str__(self):
        return self.value


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``residual_history[j]`` is the residual norm the solver itself tracks at
    iteration ``j`` (recurred or estimated), with entry 0 equal to
    ``||r_0||``. ``true_residuals`` maps audited iterations to an explicitly
    computed ``||b - A x_j||``.
    """

    solver: str
    status: Status
    x: np.ndarray
    iterations: int
    residual_history: list
    true_final_residual: float
    counters: OpCounters
    setup_counters: OpCounters
    tol: float
    b_norm: float
    true_residuals: dict = field(default_factory=dict)
    breakdown_detail: str | None = None
    breakdown_at: int | None = None
    iterates: list | None = None
    trace: Any = None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def iteration_counters(self) -> dict:
        """Counter increments spent in the iterations (setup excluded)."""
        return self.counters.minus(self.setup_counters)

    def per_iteration(self) -> dict:
        d = self.iteration_counters()
        k = max(self.iterations, 1)
        return {
            "matvecs": d["matvecs"] / k,
            "vector_updates": d["vector_updates"] / k,
            "inner_products": d["inner_products"] / k,
            "peak_vectors": d["peak_vectors"],
        }

    def summary(self) -> dict:
        return {
            "solver": self.solver,
            "status": str(self.status),
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "true_final_residual": self.true_final_residual,
            "breakdown_at": self.breakdown_at,
            "breakdown_detail": self.breakdown_detail,
            "counters": self.counters.as_dict(),
            "per_iteration": self.per_iteration(),
        }


def convergence_threshold(tol, b_norm) -> float:
    """Stopping threshold on the residual norm: ``tol * ||b||`` (``tol`` if b = 0)."""
    return tol * (b_norm if b_norm > 0 else 1.0)


def check_common(a: SssOperator, b, x0, tol, maxit):
    if tol <= 0:
        raise UsageError("tol must be positive")
    if maxit < 1:
        raise UsageError("maxit must be at least 1")
    b = as_vector(b, a.n, "b")
    x0 = np.zeros(a.n) if x0 is None else as_vector(x0, a.n, "x0")
    return b, x0


class IterationLog:
    """History, audits, stagnation tracking and report assembly for one solve."""

    def __init__(
        self,
        solver: str,
        a: SssOperator,
        b: np.ndarray,
        tol: float,
        counters: OpCounters,
        audit_every: int | None = 10,
        record_iterates: bool = False,
    ):
        self.solver = solver
        self.a = a
        self.b = b
        self.tol = tol
        self.counters = counters
        self.audit_every = audit_every
        self.b_norm = float(np.linalg.norm(b))
        self.threshold = convergence_threshold(tol, self.b_norm)
        self.history: list[float] = []
        self.true_residuals: dict[int, float] = {}
        self.iterates = [] if record_iterates else None
        self.setup: OpCounters | None = None
        self._best = np.inf
        self._best_at = 0

    @property
    def j(self) -> int:
        return len(self.history) - 1

    def record(self, resnorm: float, x: np.ndarray | Callable[[], np.ndarray] | None = None):
        """Log the residual norm of the iterate just formed.

        ``x`` may be a callable for solvers that only form the iterate on
        demand; it is evaluated only for audits and iterate recording.
        """
        if self.setup is None:
            self.setup = self.counters.snapshot()
        self.history.append(float(resnorm))
        j = self.j
        if resnorm < self._best * (1.0 - STAGNATION_RTOL):
            self._best = resnorm
            self._best_at = j
        want_audit = self.audit_every and j % self.audit_every == 0
        if x is not None and (want_audit or self.iterates is not None):
            xv = x() if callable(x) else x
            if want_audit:
                self.true_residuals[j] = float(np.linalg.norm(self.a.residual(self.b, xv, self.counters)))
            if self.iterates is not None:
                self.iterates.append(np.array(xv, copy=True))

    def converged(self) -> bool:
        return self.history[-1] <= self.threshold

    def stagnated(self) -> bool:
        return self.j - self._best_at >= STAGNATION_WINDOW

    def true_residual(self, x) -> float:
        return float(np.linalg.norm(self.a.residual(self.b, x, self.counters)))

    def confirms(self, true_res: float) -> bool:
        return true_res <= self.tol * (1.0 + self.b_norm)

    def finish(self, status: Status, x, *, detail=None, breakdown_at=None, trace=None,
               true_final=None) -> SolveReport:
        if true_final is None:
            true_final = self.true_residual(x)
        if status is Status.CONVERGED and not self.confirms(true_final):
            status = Status.ESTIMATE_DRIFT
            detail = detail or (
                f"recurred residual {self.history[-1]:.3e} passed but true residual "
                f"{true_final:.3e} > tol*(1+||b||)"
            )
        return SolveReport(
            solver=self.solver,
            status=status,
            x=np.array(x, copy=True),
            iterations=self.j,
            residual_history=list(self.history),
            true_final_residual=true_final,
            counters=self.counters,
            setup_counters=self.setup if self.setup is not None else self.counters.snapshot(),
            tol=self.tol,
            b_norm=self.b_norm,
            true_residuals=dict(self.true_residuals),
            breakdown_detail=detail,
            breakdown_at=breakdown_at,
            iterates=self.iterates,
            trace=trace,
        )
