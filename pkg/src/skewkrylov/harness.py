"""Experiment runner: solver shoot-outs, residual-history CSVs and a JSON summary."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .baselines import (
    bicgstab_solve,
    cgnr_solve,
    cgw_solve,
    full_gcr_solve,
    gencg_solve,
    gmres_solve,
    hwl_solve,
    trunc_gcr_solve,
)
from .errors import UsageError
from .mmio import read_matrix_market, read_vector
from .mrs3 import mrs3_solve, w_recurrence_error, xi_reconstruction_error
from .operators import SparseSkewMatrix, SssOperator, as_vector
from .problems import DENSE_LIMIT, AdvectionConfig, condition_number, make_sss_system
from .report import SolveReport

CSV_HEADER = ("iteration", "residual_norm", "true_residual_norm")


@dataclass(frozen=True)
class SolverEntry:
    run: Callable[..., SolveReport]
    # returns a reason string when the solver cannot be applied to ``a``
    precondition: Callable[[SssOperator], str | None] = lambda a: None


def _nonzero_alpha(a):
    return None if a.alpha != 0.0 else "requires alpha != 0"


def _zero_alpha(a):
    return None if a.alpha == 0.0 else "solves S x = b only (requires alpha = 0)"


SOLVERS: dict[str, SolverEntry] = {
    "mrs3": SolverEntry(lambda a, b, tol, maxit, audit, debug: mrs3_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit, debug=debug)),
    "cgw": SolverEntry(lambda a, b, tol, maxit, audit, debug: cgw_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit), _nonzero_alpha),
    "gencg": SolverEntry(lambda a, b, tol, maxit, audit, debug: gencg_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit), _nonzero_alpha),
    "trunc-gcr": SolverEntry(lambda a, b, tol, maxit, audit, debug: trunc_gcr_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit)),
    "full-gcr": SolverEntry(lambda a, b, tol, maxit, audit, debug: full_gcr_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit)),
    "hwl": SolverEntry(lambda a, b, tol, maxit, audit, debug: hwl_solve(
        a.s, b, tol=tol, maxit=maxit, audit_every=audit), _zero_alpha),
    "cgnr": SolverEntry(lambda a, b, tol, maxit, audit, debug: cgnr_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit)),
    "gmres": SolverEntry(lambda a, b, tol, maxit, audit, debug: gmres_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit)),
    "gmres3": SolverEntry(lambda a, b, tol, maxit, audit, debug: gmres_solve(
        a, b, tol=tol, maxit=maxit, restart=3, audit_every=audit)),
    "bicgstab": SolverEntry(lambda a, b, tol, maxit, audit, debug: bicgstab_solve(
        a, b, tol=tol, maxit=maxit, audit_every=audit)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a list of solvers applied to one system.

    The system is either an advection problem (``problem``) or a Matrix
    Market file (``matrix_path`` with ``rhs_path``; ``alpha`` adds a shift to
    a skew file or overrides the one it carries).
    """

    solvers: tuple
    out: Path
    problem: AdvectionConfig | None = None
    matrix_path: Path | None = None
    rhs_path: Path | None = None
    alpha: float | None = None
    tol: float = 1e-8
    maxit: int = 1000
    audit_every: int = 10
    debug_recurrences: bool = False

    def __post_init__(self):
        object.__setattr__(self, "solvers", tuple(s.strip().lower() for s in self.solvers))
        if not self.solvers:
            raise UsageError("no solver given")
        unknown = [s for s in self.solvers if s not in SOLVERS]
        if unknown:
            raise UsageError(f"unknown solver(s) {', '.join(unknown)}; known: {', '.join(SOLVERS)}")
        if len(set(self.solvers)) != len(self.solvers):
            raise UsageError("solver listed twice")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.maxit < 1:
            raise UsageError("maxit must be at least 1")
        if self.audit_every < 1:
            raise UsageError("audit interval must be at least 1")
        if (self.problem is None) == (self.matrix_path is None):
            raise UsageError("give exactly one of an advection problem or a matrix file")
        if self.matrix_path is not None and self.rhs_path is None:
            raise UsageError("a matrix file needs a right-hand side file")


@dataclass
class ExperimentResult:
    summary: dict
    reports: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def load_system(cfg: ExperimentConfig):
    """``(A, b, description)`` for the configured problem."""
    if cfg.problem is not None:
        p = cfg.problem
        if cfg.alpha is not None:
            p = AdvectionConfig(p.n1, p.n2, p.gamma, cfg.alpha, p.seed)
        a, b, _ = make_sss_system(p)
        desc = {"kind": "advection", "n1": p.n1, "n2": p.n2, "gamma": p.gamma,
                "alpha": p.alpha, "seed": p.seed, "n": p.n}
        return a, b, desc
    m = read_matrix_market(cfg.matrix_path)
    if isinstance(m, SparseSkewMatrix):
        a = SssOperator(cfg.alpha if cfg.alpha is not None else 0.0, m)
    else:
        a = m if cfg.alpha is None else SssOperator(cfg.alpha, m.s)
    b = as_vector(read_vector(cfg.rhs_path), a.n, "rhs")
    desc = {"kind": "file", "matrix": str(cfg.matrix_path), "rhs": str(cfg.rhs_path),
            "alpha": a.alpha, "n": a.n}
    return a, b, desc


def write_history_csv(report: SolveReport, path):
    """Residual history with audited true residuals, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for j, res in enumerate(report.residual_history):
            true = report.true_residuals.get(j)
            w.writerow((j, f"{res:.16e}", "" if true is None else f"{true:.16e}"))


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _report_summary(report: SolveReport, debug: dict | None) -> dict:
    s = report.summary()
    s["final_residual"] = _json_float(s["final_residual"])
    s["true_final_residual"] = _json_float(s["true_final_residual"])
    if debug:
        s["debug_recurrences"] = debug
    return s


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every configured solver; write ``<solver>.csv`` files and ``summary.json``.

    Breakdowns are results, not failures: they are recorded in the summary.
    Solvers whose precondition the system violates are listed as not
    applicable and produce no CSV.
    """
    a, b, desc = load_system(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    kappa = condition_number(a) if a.n <= DENSE_LIMIT else None
    summary = {
        "problem": desc,
        "tol": cfg.tol,
        "maxit": cfg.maxit,
        "audit_every": cfg.audit_every,
        "kappa": _json_float(kappa),
        "solvers": {},
    }
    result = ExperimentResult(summary)
    for name in cfg.solvers:
        entry = SOLVERS[name]
        reason = entry.precondition(a)
        if reason is not None:
            summary["solvers"][name] = {"solver": name, "status": "NotApplicable", "reason": reason}
            continue
        debug = cfg.debug_recurrences and name == "mrs3"
        report = entry.run(a, b, cfg.tol, cfg.maxit, cfg.audit_every, debug)
        checks = None
        if debug and report.trace is not None and report.trace.j > 0:
            checks = {
                "w_recurrence_max_error": w_recurrence_error(report.trace),
                "xi_reconstruction_max_error": xi_reconstruction_error(report.trace),
            }
        path = out / f"{name}.csv"
        write_history_csv(report, path)
        result.files.append(path)
        result.reports[name] = report
        summary["solvers"][name] = _report_summary(report, checks)
    spath = out / "summary.json"
    spath.write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    result.files.append(spath)
    return result


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
