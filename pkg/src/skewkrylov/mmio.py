"""Matrix Market reading and writing for skew and shifted skew operators.

Two coordinate kinds are supported:

``real general``
    every stored entry; a constant nonzero diagonal is read as the shift
    ``alpha`` and the off-diagonal part must be skew within
    ``1e-13 * max|entry|``.
``real skew-symmetric``
    strict lower triangle only, the upper triangle is implied.

A header comment ``%% alpha = <value>`` attaches a shift to a skew file, in
which case an :class:`SssOperator` is returned. Right-hand sides are read from
Matrix Market ``array`` files or from plain whitespace-separated text.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import MatrixMarketError, SkewValidationError
from .operators import SparseSkewMatrix, SssOperator

READ_SKEW_RTOL = 1e-13

_BANNER = "%%MatrixMarket"
_ALPHA_RE = re.compile(r"^%%\s*alpha\s*=\s*(\S+)\s*$", re.IGNORECASE)


def _fmt(v) -> str:
    return f"{float(v):.16e}"


def _parse_float(token, lineno) -> float:
    try:
        return float(token)
    except ValueError:
        raise MatrixMarketError(f"cannot parse number {token!r}", lineno) from None


def _parse_int(token, lineno) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketError(f"cannot parse integer {token!r}", lineno) from None


def _read_header(lines):
    """Return ``(format, field, symmetry, alpha, body)`` where ``body`` is a list
    of ``(lineno, tokens)`` for every non-comment, non-blank line."""
    if not lines or not lines[0].startswith(_BANNER):
        raise MatrixMarketError("missing %%MatrixMarket banner", 1)
    parts = lines[0].split()
    if len(parts) != 5 or parts[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed banner {lines[0].strip()!r}", 1)
    fmt, field, symmetry = (p.lower() for p in parts[2:])
    alpha = None
    body = []
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if stripped.startswith("%"):
            m = _ALPHA_RE.match(stripped)
            if m:
                alpha = _parse_float(m.group(1), lineno)
            continue
        if stripped:
            body.append((lineno, stripped.split()))
    return fmt, field, symmetry, alpha, body


def read_matrix_market(path):
    """Read a coordinate file into a :class:`SparseSkewMatrix` or :class:`SssOperator`.

    Raises :class:`MatrixMarketError` (with the offending line) on malformed
    input and :class:`SkewValidationError` if the matrix is not square or not
    skew (plus a constant diagonal) within tolerance.
    """
    lines = Path(path).read_text().splitlines()
    fmt, field, symmetry, alpha, body = _read_header(lines)
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r}, expected coordinate", 1)
    if field != "real":
        raise MatrixMarketError(f"unsupported field {field!r}, expected real", 1)
    if symmetry not in ("general", "skew-symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)
    if not body:
        raise MatrixMarketError("missing size line", len(lines))

    size_line, size_tokens = body[0]
    if len(size_tokens) != 3:
        raise MatrixMarketError("size line must be 'rows cols entries'", size_line)
    nrows, ncols, nnz = (_parse_int(t, size_line) for t in size_tokens)
    if nrows < 1 or ncols < 1 or nnz < 0:
        raise MatrixMarketError("dimensions must be positive", size_line)
    if nrows != ncols:
        raise SkewValidationError(f"matrix is {nrows} x {ncols}, not square")
    n = nrows
    entries = body[1:]
    if len(entries) != nnz:
        where = entries[nnz][0] if len(entries) > nnz else len(lines)
        raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}", where)

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    seen = set()
    for k, (lineno, tokens) in enumerate(entries):
        if len(tokens) != 3:
            raise MatrixMarketError("entry must be 'row col value'", lineno)
        i, j = _parse_int(tokens[0], lineno), _parse_int(tokens[1], lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixMarketError(f"index ({i}, {j}) out of range for n = {n}", lineno)
        if symmetry == "skew-symmetric" and i <= j:
            raise MatrixMarketError("skew-symmetric files store the strict lower triangle only", lineno)
        if (i, j) in seen:
            raise MatrixMarketError(f"duplicate entry ({i}, {j})", lineno)
        seen.add((i, j))
        rows[k], cols[k], vals[k] = i - 1, j - 1, _parse_float(tokens[2], lineno)

    if symmetry == "skew-symmetric":
        s = SparseSkewMatrix.from_triplets(
            n, np.concatenate([rows, cols]), np.concatenate([cols, rows]), np.concatenate([vals, -vals])
        )
        return s if alpha is None else SssOperator(alpha, s)

    on_diag = rows == cols
    diag_vals = vals[on_diag]
    shift = None
    if np.any(diag_vals != 0.0):
        if on_diag.sum() != n or np.any(diag_vals != diag_vals[0]):
            raise SkewValidationError("diagonal is not a constant shift alpha * I")
        shift = float(diag_vals[0])
        if alpha is not None and alpha != shift:
            raise SkewValidationError(f"diagonal {shift!r} contradicts header alpha = {alpha!r}")
    off = ~on_diag
    scale = float(np.max(np.abs(vals[off]))) if off.any() else 0.0
    s = SparseSkewMatrix.from_triplets(n, rows[off], cols[off], vals[off], tol=READ_SKEW_RTOL * scale)
    if shift is None:
        shift = alpha
    return s if shift is None else SssOperator(shift, s)


def write_matrix_market(path, matrix, kind="skew-symmetric"):
    """Write a :class:`SparseSkewMatrix` or :class:`SssOperator`.

    ``kind="skew-symmetric"`` stores the strict lower triangle of ``S``
    (and, for an operator, ``alpha`` in a ``%% alpha =`` comment).
    ``kind="general"`` stores every entry, with the shift folded into the
    diagonal for an operator.
    """
    if isinstance(matrix, SssOperator):
        alpha, s = matrix.alpha, matrix.s
    elif isinstance(matrix, SparseSkewMatrix):
        alpha, s = None, matrix
    else:
        raise TypeError(f"cannot write {type(matrix).__name__}")
    rows, cols, vals = s.triplets()
    order = np.lexsort((rows, cols))  # column-major, as is customary
    rows, cols, vals = rows[order], cols[order], vals[order]
    n = s.n
    out = []
    if kind == "skew-symmetric":
        keep = rows > cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        out.append(f"{_BANNER} matrix coordinate real skew-symmetric")
        if alpha is not None:
            out.append(f"%% alpha = {_fmt(alpha)}")
    elif kind == "general":
        out.append(f"{_BANNER} matrix coordinate real general")
        if alpha:
            idx = np.arange(n)
            rows = np.concatenate([rows, idx])
            cols = np.concatenate([cols, idx])
            vals = np.concatenate([vals, np.full(n, float(alpha))])
            order = np.lexsort((rows, cols))
            rows, cols, vals = rows[order], cols[order], vals[order]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    out.append(f"{n} {n} {len(vals)}")
    out.extend(f"{i + 1} {j + 1} {_fmt(v)}" for i, j, v in zip(rows, cols, vals))
    Path(path).write_text("\n".join(out) + "\n")


def read_vector(path) -> np.ndarray:
    """Right-hand side from a Matrix Market ``array`` file or plain text."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if lines and lines[0].startswith(_BANNER):
        fmt, field, _, _, body = _read_header(lines)
        if fmt != "array" or field != "real":
            raise MatrixMarketError("vector files must be 'array real'", 1)
        if not body:
            raise MatrixMarketError("missing size line", len(lines))
        size_line, size_tokens = body[0]
        if len(size_tokens) != 2:
            raise MatrixMarketError("size line must be 'rows cols'", size_line)
        m, k = (_parse_int(t, size_line) for t in size_tokens)
        if k != 1:
            raise MatrixMarketError(f"expected a single column, got {k}", size_line)
        values = [(ln, t) for ln, tokens in body[1:] for t in tokens]
        if len(values) != m:
            raise MatrixMarketError(f"expected {m} values, found {len(values)}", size_line)
        return np.array([_parse_float(t, ln) for ln, t in values])
    values = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        values.extend(_parse_float(t, lineno) for t in stripped.replace(",", " ").split())
    if not values:
        raise MatrixMarketError("no values found", 1)
    return np.array(values)


def write_vector(path, v):
    """Write ``v`` as a Matrix Market ``array real general`` column."""
    v = np.asarray(v, dtype=float).ravel()
    out = [f"{_BANNER} matrix array real general", f"{v.size} 1"]
    out.extend(_fmt(x) for x in v)
    Path(path).write_text("\n".join(out) + "\n")
