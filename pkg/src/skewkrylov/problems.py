"""Test-problem family and system transforms.

The advection family discretises ``u_x + gamma u_y = f`` on the unit square
with central differences, giving a block-tridiagonal skew matrix with
``n1 x n1`` blocks::

    S_ii     = 1/(2 h1) tridiag(-1, 0, 1)
    S_i,i+1  = -S_i+1,i = gamma/(2 h2) I

Only these blocks are assembled (no boundary rows are modified).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SkewValidationError, UsageError
from .operators import EPS, SparseSkewMatrix, SssOperator, as_vector

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class AdvectionConfig:
    n1: int = 20
    n2: int = 20
    gamma: float = 1.0
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise UsageError("n1 and n2 must be at least 2")

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def h1(self) -> float:
        return 1.0 / self.n1

    @property
    def h2(self) -> float:
        return 1.0 / self.n2


def _skew_tridiag(m) -> sp.csr_matrix:
    off = np.ones(m - 1)
    return sp.diags([-off, off], [-1, 1], shape=(m, m), format="csr")


def advection_matrix(cfg: AdvectionConfig) -> SparseSkewMatrix:
    inner = _skew_tridiag(cfg.n1) * (1.0 / (2.0 * cfg.h1))
    coupling = _skew_tridiag(cfg.n2) * (cfg.gamma / (2.0 * cfg.h2))
    s = sp.kron(sp.identity(cfg.n2), inner) + sp.kron(coupling, sp.identity(cfg.n1))
    return SparseSkewMatrix(s.tocsr())


def random_rhs(n, seed) -> np.ndarray:
    """Entries uniform on (-1, 1), normalised to unit 2-norm."""
    b = np.random.default_rng(seed).uniform(-1.0, 1.0, n)
    return b / np.linalg.norm(b)


def make_sss_system(cfg: AdvectionConfig):
    """``(A, b, x0)`` with ``A = alpha I + S``, unit-norm random ``b`` and ``x0 = 0``."""
    a = SssOperator(cfg.alpha, advection_matrix(cfg))
    return a, random_rhs(cfg.n, cfg.seed), np.zeros(cfg.n)


def random_skew_matrix(n, seed, density=1.0) -> SparseSkewMatrix:
    """``(M - M^T)/2`` for Gaussian ``M`` scaled by ``1/sqrt(n)``; optional sparsity."""
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) / np.sqrt(n)
    if density < 1.0:
        m *= rng.random((n, n)) < density
    return SparseSkewMatrix.from_dense((m - m.T) / 2.0)


def random_sss_system(n, alpha, seed):
    """Random dense-pattern SSS operator with a unit random right-hand side."""
    a = SssOperator(alpha, random_skew_matrix(n, seed))
    return a, random_rhs(n, seed + 10_007)


def hermitian_split(B):
    """``B = H + S`` with ``H = (B + B^T)/2`` and ``S = (B - B^T)/2``."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise UsageError(f"B must be square, got shape {B.shape}")
    if B.shape[0] > DENSE_LIMIT:
        raise UsageError(f"dense split limited to n <= {DENSE_LIMIT}")
    return (B + B.T) / 2.0, SparseSkewMatrix.from_dense((B - B.T) / 2.0)


def diagonal_scale_transform(d, s: SparseSkewMatrix, b):
    """Turn ``(D + S) dx = b`` into ``(I + D^-1/2 S D^-1/2) y = D^-1/2 b``.

    ``d`` is the positive diagonal of ``D`` (a vector, or a diagonal matrix).
    Returns ``(operator, b_scaled, back_map)`` where ``back_map(y) = D^-1/2 y``
    recovers ``dx``.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        d = np.diag(d).copy()
    d = as_vector(d, s.n, "d")
    if np.any(d <= 0):
        raise UsageError("diagonal scaling needs strictly positive entries")
    scale = 1.0 / np.sqrt(d)
    rows, cols, vals = s.triplets()
    scaled = SparseSkewMatrix.from_triplets(s.n, rows, cols, vals * (scale[rows] * scale[cols]))
    b_scaled = scale * as_vector(b, s.n, "b")

    def back_map(y):
        return scale * np.asarray(y, dtype=float)

    return SssOperator(1.0, scaled), b_scaled, back_map


def spd_split_transform(H, s: SparseSkewMatrix, b, skew_tol=1e-12):
    """Turn ``(H + S) x = b`` into ``(I + H^-1/2 S H^-1/2) y = H^-1/2 b``.

    ``H^-1/2`` comes from a dense eigendecomposition, so this is for desk
    scale only. ``back_map(y) = H^-1/2 y`` recovers ``x``.
    """
    H = np.asarray(H, dtype=float)
    n = s.n
    if H.shape != (n, n):
        raise UsageError(f"H has shape {H.shape}, expected {(n, n)}")
    if n > DENSE_LIMIT:
        raise UsageError(f"dense transform limited to n <= {DENSE_LIMIT}")
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-14 * max(1.0, np.max(np.abs(H)))):
        raise UsageError("H is not symmetric")
    w, v = np.linalg.eigh((H + H.T) / 2.0)
    if np.any(w <= 0):
        raise UsageError(f"H is not positive definite (min eigenvalue {w.min():.3e})")
    h_isqrt = (v / np.sqrt(w)) @ v.T
    m = h_isqrt @ s.to_dense() @ h_isqrt
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m + m.T)) > skew_tol * scale:
        raise SkewValidationError("transformed matrix lost skew-symmetry")
    s_new = SparseSkewMatrix.from_dense((m - m.T) / 2.0)
    b_scaled = h_isqrt @ as_vector(b, n, "b")

    def back_map(y):
        return h_isqrt @ np.asarray(y, dtype=float)

    return SssOperator(1.0, s_new), b_scaled, back_map


def condition_number(a: SssOperator, method="svd") -> float:
    """2-norm condition number of ``A = alpha I + S`` (dense, desk scale).

    ``method="svd"`` uses the singular values of the assembled matrix.
    ``method="eig"`` uses the eigenvalues ``+-i s_k`` of ``S``:
    ``sqrt((alpha^2 + max s^2) / (alpha^2 + min s^2))``. Returns ``inf`` when
    the smallest singular value is below ``n eps sigma_max``.
    """
    n = a.n
    if n > DENSE_LIMIT:
        raise UsageError(f"dense condition number limited to n <= {DENSE_LIMIT}")
    if method == "svd":
        sv = np.linalg.svd(a.to_dense(), compute_uv=False)
        smax, smin = sv[0], sv[-1]
    elif method == "eig":
        mods = np.abs(np.linalg.eigvalsh(1j * a.s.to_dense()))
        smax = np.sqrt(a.alpha**2 + mods.max() ** 2)
        smin = np.sqrt(a.alpha**2 + mods.min() ** 2)
    else:
        raise UsageError(f"unknown method {method!r}")
    if smax == 0.0 or smin <= n * EPS * smax:
        return float("inf")
    return float(smax / smin)
