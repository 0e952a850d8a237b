"""Sparse skew-symmetric storage, the shifted operator ``A = alpha*I + S`` and
operation counters.

Vectors are plain 1-D ``float64`` NumPy arrays. Every solver in the package
routes its length-n work through the helpers below so that the counters in
:class:`OpCounters` reflect the per-iteration cost of the algorithm.

Counting conventions
--------------------
* ``matvecs``: one per application of ``S`` (or ``A``). A fused
  ``y <- S x + beta*y`` (BLAS ``gemv`` style) counts as one matvec and nothing
  else.
* ``vector_updates``: one per pass that writes a length-n vector (scale, axpy,
  axpby).
* ``inner_products``: one per dot product or 2-norm of a length-n vector.
* ``peak_vectors``: high-water mark of the working vectors a solver declares
  live with :meth:`OpCounters.hold`. Inputs owned by the caller (``b``,
  ``x0``) are not working vectors.
* ``audit_matvecs``: matvecs spent on diagnostics (true-residual audits,
  confirmation checks). Kept apart so they never pollute the algorithmic
  counts.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import SkewValidationError, UsageError

try:  # in-place accumulate y += A x, no temporary
    from scipy.sparse._sparsetools import csr_matvec as _csr_matvec
except ImportError:  # pragma: no cover - depends on scipy internals
    _csr_matvec = None

EPS = np.finfo(float).eps


@dataclass
class OpCounters:
    matvecs: int = 0
    vector_updates: int = 0
    inner_products: int = 0
    peak_vectors: int = 0
    live_vectors: int = 0
    audit_matvecs: int = 0

    def matvec(self, k=1):
        self.matvecs += k

    def update(self, k=1):
        self.vector_updates += k

    def inner(self, k=1):
        self.inner_products += k

    def hold(self, k=1):
        self.live_vectors += k
        self.peak_vectors = max(self.peak_vectors, self.live_vectors)

    def release(self, k=1):
        self.live_vectors = max(0, self.live_vectors - k)

    def snapshot(self) -> "OpCounters":
        return copy.copy(self)

    def minus(self, other: "OpCounters") -> dict:
        """Counter increments since ``other`` (peak is reported as-is)."""
        return {
            "matvecs": self.matvecs - other.matvecs,
            "vector_updates": self.vector_updates - other.vector_updates,
            "inner_products": self.inner_products - other.inner_products,
            "audit_matvecs": self.audit_matvecs - other.audit_matvecs,
            "peak_vectors": self.peak_vectors,
        }

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("live_vectors")
        return d


def as_vector(x, n=None, name="x") -> np.ndarray:
    """Validate and return ``x`` as a finite 1-D float64 array (a copy)."""
    v = np.array(x, dtype=float, copy=True)
    if v.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise UsageError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise UsageError(f"{name} contains non-finite entries")
    return v


def dot(x, y, counters=None) -> float:
    if counters is not None:
        counters.inner()
    return float(np.dot(x, y))


def norm2(x, counters=None) -> float:
    if counters is not None:
        counters.inner()
    return float(np.linalg.norm(x))


def _as_csr(matrix) -> sp.csr_matrix:
    if isinstance(matrix, SparseSkewMatrix):
        return matrix.csr
    if sp.issparse(matrix):
        return sp.csr_matrix(matrix, dtype=float)
    dense = np.asarray(matrix, dtype=float)
    if dense.ndim != 2:
        raise SkewValidationError(f"expected a 2-D matrix, got shape {dense.shape}")
    return sp.csr_matrix(dense)


def verify_skew(matrix, tol=0.0) -> bool:
    """True iff ``max |S_ij + S_ji| <= tol`` over all stored entries.

    Accepts a :class:`SparseSkewMatrix`, any SciPy sparse matrix or a dense
    array. A stored diagonal entry ``d`` is checked as ``|2 d| <= tol``.
    Non-square input is never skew.
    """
    csr = _as_csr(matrix)
    if csr.shape[0] != csr.shape[1]:
        return False
    if csr.nnz == 0:
        return True
    sym = (csr + csr.T).tocsr()
    if sym.nnz == 0:
        return True
    return bool(np.max(np.abs(sym.data)) <= tol)


class SparseSkewMatrix:
    """Compressed-row storage of a real matrix with ``S^T = -S``.

    Both triangles are stored. Construction validates skew-symmetry; with
    ``tol > 0`` (ingested data) the stored values are replaced by the exact
    skew part ``(S - S^T)/2`` once the check passes, so the pairing invariant
    always holds exactly. Instances are immutable.

    Parameters
    ----------
    matrix : array_like or scipy.sparse matrix
        Square matrix. Duplicate entries in COO input are rejected; use
        :meth:`from_triplets` for explicit triplet input.
    tol : float
        Allowed ``max |S_ij + S_ji|``.
    """

    __slots__ = ("_csr", "_norm_est")

    def __init__(self, matrix, tol=0.0):
        if sp.issparse(matrix) and matrix.format == "coo":
            _reject_duplicates(matrix.shape[0], matrix.row, matrix.col)
        csr = _as_csr(matrix).copy()
        n, m = csr.shape
        if n != m:
            raise SkewValidationError(f"matrix must be square, got {n}x{m}")
        if n < 1:
            raise SkewValidationError("matrix dimension must be at least 1")
        csr.sum_duplicates()
        csr.sort_indices()
        if not verify_skew(csr, tol):
            worst = np.max(np.abs((csr + csr.T).data))
            raise SkewValidationError(
                f"matrix is not skew-symmetric: max |S_ij + S_ji| = {worst:.3e} > tol = {tol:.3e}"
            )
        if tol > 0:
            csr = ((csr - csr.T) * 0.5).tocsr()
        csr.eliminate_zeros()
        csr.sort_indices()
        csr.data.setflags(write=False)
        csr.indices.setflags(write=False)
        csr.indptr.setflags(write=False)
        self._csr = csr
        self._norm_est = float(abs(csr).sum(axis=1).max()) if csr.nnz else 0.0

    @classmethod
    def from_triplets(cls, n, rows, cols, vals, tol=0.0) -> "SparseSkewMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise SkewValidationError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
            raise SkewValidationError(f"triplet index out of range for dimension {n}")
        coo = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(coo, tol=tol)

    @classmethod
    def from_dense(cls, dense, tol=0.0) -> "SparseSkewMatrix":
        return cls(np.asarray(dense, dtype=float), tol=tol)

    @classmethod
    def zeros(cls, n) -> "SparseSkewMatrix":
        return cls(sp.csr_matrix((n, n)))

    @property
    def n(self) -> int:
        return self._csr.shape[0]

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    @property
    def csr(self) -> sp.csr_matrix:
        return self._csr

    @property
    def norm_est(self) -> float:
        """Max row 1-norm; an upper bound on ``||S||_2``."""
        return self._norm_est

    def triplets(self):
        coo = self._csr.tocoo()
        return coo.row, coo.col, coo.data

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def scaled(self, factor) -> "SparseSkewMatrix":
        return SparseSkewMatrix(self._csr * float(factor))

    def matvec(self, x) -> np.ndarray:
        """Return ``S x`` (uncounted; see :func:`skew_matvec`)."""
        return self._csr @ x

    def matvec_acc(self, x, out) -> np.ndarray:
        """In place ``out += S x``."""
        if _csr_matvec is not None:
            n = self.n
            _csr_matvec(n, n, self._csr.indptr, self._csr.indices, self._csr.data, x, out)
        else:  # pragma: no cover
            out += self._csr @ x
        return out

    def __repr__(self):
        return f"SparseSkewMatrix(n={self.n}, nnz={self.nnz})"


def _reject_duplicates(n, rows, cols):
    key = np.asarray(rows, dtype=np.int64) * n + np.asarray(cols, dtype=np.int64)
    if np.unique(key).size != key.size:
        raise SkewValidationError("duplicate (row, col) entries")


@dataclass(frozen=True)
class SssOperator:
    """``A = alpha*I + S``. Normal by construction; ``A^T = alpha*I - S``."""

    alpha: float
    s: SparseSkewMatrix = field(repr=True)

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise UsageError("alpha must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.s.n

    dimension = n

    @property
    def norm_est(self) -> float:
        return abs(self.alpha) + self.s.norm_est

    def apply(self, x, transpose=False, counters=None) -> np.ndarray:
        return sss_apply(self, x, transpose=transpose, counters=counters)

    def to_dense(self) -> np.ndarray:
        return self.alpha * np.eye(self.n) + self.s.to_dense()

    def residual(self, b, x, counters=None) -> np.ndarray:
        """``b - A x``, counted as an audit matvec."""
        if counters is not None:
            counters.audit_matvecs += 1
        return b - sss_apply(self, x)


def skew_matvec(s: SparseSkewMatrix, x, counters=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (s.n,):
        raise UsageError(f"vector of shape {x.shape} does not match dimension {s.n}")
    if counters is not None:
        counters.matvec()
    return s.matvec(x)


def sss_apply(a: SssOperator, x, transpose=False, counters=None) -> np.ndarray:
    """``alpha*x + S x``, or ``alpha*x - S x`` when ``transpose``."""
    y = skew_matvec(a.s, x, counters)
    if transpose:
        np.negative(y, out=y)
    if a.alpha != 0.0:
        y += a.alpha * np.asarray(x, dtype=float)
    return y
