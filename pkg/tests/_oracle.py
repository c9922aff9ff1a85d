"""Reference implementations used to freeze expected values.

Deliberately naive and independent of the package: shift-and-add field
multiplication, pure-Python elimination and closed-form rate formulas.
"""
from __future__ import annotations

from fractions import Fraction


def gf_mul_ref(a: int, b: int, poly: int = 0x11D) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= poly
    return out


def gf_inv_ref(a: int) -> int:
    # a^254 = a^-1 in GF(256)
    out, base, e = 1, a, 254
    while e:
        if e & 1:
            out = gf_mul_ref(out, base)
        base = gf_mul_ref(base, base)
        e >>= 1
    return out


def rank_ref(rows) -> int:
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    rank, ncols = 0, len(m[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = gf_inv_ref(m[rank][c])
        m[rank] = [gf_mul_ref(inv, x) for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c]
                m[r] = [x ^ gf_mul_ref(f, y) for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def matmul_ref(a, b):
    a = [list(map(int, r)) for r in a]
    b = [list(map(int, r)) for r in b]
    out = []
    for row in a:
        acc = [0] * len(b[0])
        for x, brow in zip(row, b):
            if x:
                acc = [s ^ gf_mul_ref(x, y) for s, y in zip(acc, brow)]
        out.append(acc)
    return out


def t_ref(d: int, k: int, ell: int) -> int:
    """Closed form of the sum over t in [ell+1, k] of (d + 1 - t)."""
    return (k - ell) * (d + 1) - (k * (k + 1) - ell * (ell + 1)) // 2


def corner_ref(d: int, ell: int, weights: dict[int, Fraction]) -> tuple[Fraction, Fraction]:
    """(alpha_bar, beta_bar) where the flat and steepest sloped bounds meet."""
    s = sum((w / t_ref(d, j, ell) for j, w in weights.items() if w), Fraction(0))
    return d * s, s
