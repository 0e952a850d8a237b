"""Instrumented reference solvers for comparison with MRS3."""

from .bicgstab import bicgstab_solve
from .cg import cgnr_solve, cgw_solve, gencg_solve, hwl_solve
from .gcr import full_gcr_solve, trunc_gcr_solve
from .gmres import gmres_solve

__all__ = [
    "bicgstab_solve",
    "cgnr_solve",
    "cgw_solve",
    "full_gcr_solve",
    "gencg_solve",
    "gmres_solve",
    "hwl_solve",
    "trunc_gcr_solve",
]
