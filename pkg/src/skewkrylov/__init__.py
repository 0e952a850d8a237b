"""Krylov solvers for shifted skew-symmetric systems ``(alpha I + S) x = b``.

The main entry point is :func:`mrs3_solve`, a minimal residual method with
short recurrences. Baseline solvers live in :mod:`skewkrylov.baselines`.
"""

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
from .errors import (
    AlreadyConverged,
    LuckyBreakdown,
    MatrixMarketError,
    OracleInapplicable,
    SingularBreakdown,
    SkewKrylovError,
    SkewValidationError,
    UsageError,
)
from .lanczos import assemble_extended_ritz, lanczos_basis, lanczos_init, lanczos_step
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .mrs3 import mrs3_init, mrs3_iterate, mrs3_solve, z_sequence
from .operators import OpCounters, SparseSkewMatrix, SssOperator, skew_matvec, sss_apply, verify_skew
from .problems import (
    AdvectionConfig,
    advection_matrix,
    condition_number,
    diagonal_scale_transform,
    hermitian_split,
    make_sss_system,
    random_sss_system,
    spd_split_transform,
)
from .report import SolveReport, Status

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
