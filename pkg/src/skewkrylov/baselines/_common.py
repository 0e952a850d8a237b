from __future__ import annotations

import numpy as np

from ..operators import EPS, OpCounters, SssOperator, norm2, sss_apply
from ..report import IterationLog, check_common


def start(name, a: SssOperator, b, x0, tol, maxit, audit_every, record_iterates):
    """Validate inputs and form ``x0`` and ``r0 = b - A x0``.

    The matvec for ``r0`` is skipped when ``x0 = 0``.
    """
    b, x0 = check_common(a, b, x0, tol, maxit)
    counters = OpCounters()
    log = IterationLog(name, a, b, tol, counters, audit_every, record_iterates)
    x = x0.copy()
    r = b - sss_apply(a, x0, counters=counters) if np.any(x0) else b.copy()
    return b, x, r, counters, log


def tiny(scale) -> float:
    """Breakdown threshold for a denominator whose factors have size ``scale``."""
    return EPS * scale


__all__ = ["start", "tiny", "norm2", "EPS"]
