"""Arithmetic over GF(2^8) and dense linear algebra on uint8 matrices.

Field elements are plain ints (or uint8 arrays) in [0, 255] using the
polynomial basis modulo x^8 + x^4 + x^3 + x^2 + 1 (0x11D).  Matrices are
2-D ``numpy.uint8`` arrays; every routine here is exact.
"""
from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

POLY = 0x11D
ORDER = 256
FIELD_ID = 0  # identifier written into share headers


class FieldError(ArithmeticError):
    pass


class NoSolutionError(FieldError):
    pass


def _build_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    exp = np.zeros(510, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= POLY
    exp[255:] = exp[:255]

    nz = np.arange(1, 256)
    mul = np.zeros((256, 256), dtype=np.uint8)
    mul[1:, 1:] = exp[(log[nz][:, None] + log[nz][None, :]) % 255]
    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[(255 - log[nz]) % 255]
    return exp, log, mul, inv


# Built once at import; the import lock makes this race-free.
EXP, LOG, MUL, INV = _build_tables()


def add(a: int, b: int) -> int:
    return int(a) ^ int(b)


def mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("division by zero in field")
    return int(INV[a])


def div(a: int, b: int) -> int:
    return mul(a, inv(b))


def power(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return int(EXP[(int(LOG[a]) * e) % 255])


def field_arith(a: int, b: int | None, op: str) -> int:
    """Single entry point for ``add``, ``mul`` and ``inv`` (of *a*)."""
    if op == "add":
        return add(a, b)
    if op == "mul":
        return mul(a, b)
    if op == "inv":
        return inv(a)
    raise ValueError(f"unknown field op {op!r}")


def as_matrix(m: Iterable) -> np.ndarray:
    a = np.asarray(m, dtype=np.uint8)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((0, 0), dtype=np.uint8)
    if a.ndim != 2:
        raise ValueError("field matrix must be 2-D")
    return a


def scale(c: int, v: np.ndarray) -> np.ndarray:
    """Multiply every entry of *v* by the scalar *c*."""
    return MUL[c][v]


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of (p x q) and (q x N) matrices over the field.

    Loops over the small left operand and vectorizes along N, which is
    the shape every caller has (coefficient matrix times symbol streams).
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0],) + b.shape[1:], dtype=np.uint8)
    for i in range(a.shape[0]):
        row = out[i]
        for k in np.flatnonzero(a[i]):
            row ^= MUL[a[i, k]][b[k]]
    return out


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def _eliminate(a: np.ndarray, ncols: int | None = None, *, full: bool) -> list[int]:
    """Row-reduce *a* in place; returns pivot columns.

    Only the first *ncols* columns are used for pivots.  With ``full`` the
    result is reduced row echelon form (entries above pivots cleared too).
    """
    rows = a.shape[0]
    ncols = a.shape[1] if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = MUL[INV[a[r, c]]][a[r]]
        if full:
            targets = np.flatnonzero(a[:, c])
            targets = targets[targets != r]
        else:
            targets = r + 1 + np.flatnonzero(a[r + 1:, c])
        if targets.size:
            a[targets] ^= MUL[a[targets, c][:, None], a[r][None, :]]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    a = as_matrix(m).copy()
    pivots = _eliminate(a, full=True)
    return a, pivots


def mat_rank(m: np.ndarray) -> int:
    a = np.asarray(m, dtype=np.uint8)
    if a.size == 0:
        return 0
    a = as_matrix(a).copy()
    return len(_eliminate(a, full=False))


def mat_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return some x with a @ x == b; free variables are set to zero."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=np.uint8)
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch {a.shape} vs {b.shape}")
    n = a.shape[1]
    aug = np.concatenate([a, b], axis=1)
    pivots = _eliminate(aug, n, full=True)
    r = len(pivots)
    if np.any(aug[r:, n:]):
        raise NoSolutionError("no solution")
    x = np.zeros((n, b.shape[1]), dtype=np.uint8)
    for row, col in enumerate(pivots):
        x[col] = aug[row, n:]
    return x[:, 0] if vector else x


def mat_inv(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix is not square")
    if mat_rank(a) < a.shape[0]:
        raise FieldError("matrix is singular")
    return mat_solve(a, identity(a.shape[0]))


def vandermonde_matrix(rows: int, cols: int, points: Sequence[int]) -> np.ndarray:
    """Entry (i, j) is ``points[i] ** j``."""
    pts = [int(p) for p in points]
    if len(pts) != rows:
        raise ValueError(f"need {rows} points, got {len(pts)}")
    if len(set(pts)) != len(pts):
        raise ValueError("vandermonde points must be distinct")
    if any(not 0 <= p < ORDER for p in pts):
        raise ValueError("points must be field elements")
    if cols > ORDER - 1:
        raise ValueError("too many columns for GF(256)")
    out = np.zeros((rows, cols), dtype=np.uint8)
    for i, p in enumerate(pts):
        for j in range(cols):
            out[i, j] = power(p, j)
    return out


def all_minors_nonsingular(m: np.ndarray, k: int) -> bool:
    """True if every k-row submatrix of the first k columns is invertible."""
    m = as_matrix(m)
    return all(mat_rank(m[list(rs), :k]) == k for rs in combinations(range(m.shape[0]), k))
