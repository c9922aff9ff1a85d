"""Rank-based entropy oracle for linear codes.

Each named variable is a linear function G_X @ x of a uniform source vector
x (message symbols followed by key symbols).  For a set of variables the
joint entropy, in units of one field symbol, is the rank of the stacked
generator matrices.

Names follow a fixed grammar: ``M<j>``, ``K``, ``W<i>``, ``S[<h>-><i>]``.
A variable set on the command line is those names joined by commas.
"""
from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations, permutations
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fieldcore as gf

_NAME = re.compile(r"^(?:M(\d+)|K|W(\d+)|S\[(\d+)->(\d+)\])$")


class UnknownVariableError(ValueError):
    pass


def parse_varset(text: str) -> list[str]:
    """Split ``"W1,S[2->1]"`` into names; whitespace is ignored."""
    names = [t.strip() for t in text.replace(" ", "").split(",") if t.strip()]
    for name in names:
        if not _NAME.match(name):
            raise UnknownVariableError(f"malformed variable name {name!r}")
    return names


def permute_name(name: str, perm: Mapping[int, int] | Sequence[int]) -> str:
    """Relabel node indices; *perm* maps node i (1-based) to perm[i]."""
    get = perm.__getitem__ if isinstance(perm, Mapping) else (lambda i: perm[i - 1])
    if name[0] == "W":
        return f"W{get(int(name[1:]))}"
    if name[0] == "S":
        m = _NAME.match(name)
        return f"S[{get(int(m.group(3)))}->{get(int(m.group(4)))}]"
    return name


class LinearSystem:
    """Registry of generator matrices over a common source vector."""

    def __init__(self, source_dim: int, registry: Mapping[str, np.ndarray],
                 message_names: Iterable[str] = (), key_names: Iterable[str] = (),
                 n: int | None = None) -> None:
        self.source_dim = source_dim
        self.registry: dict[str, np.ndarray] = {}
        for name, m in registry.items():
            m = np.asarray(m, dtype=np.uint8).reshape(-1, source_dim)
            m.setflags(write=False)
            self.registry[name] = m
        self.message_names = tuple(message_names)
        self.key_names = tuple(key_names)
        self.n = n
        self._cache: dict[frozenset, int] = {}
        self._sym: SymmetrizedSystem | None = None

    def __contains__(self, name: str) -> bool:
        return name in self.registry

    def names(self) -> list[str]:
        return list(self.registry)

    def matrix(self, names: Iterable[str]) -> np.ndarray:
        mats = [self.registry[n] for n in sorted(names)]
        if not mats:
            return np.zeros((0, self.source_dim), dtype=np.uint8)
        return np.concatenate(mats, axis=0)

    def _key(self, names: Iterable[str]) -> frozenset:
        key = frozenset(names)
        missing = [n for n in key if n not in self.registry]
        if missing:
            raise UnknownVariableError(f"unknown variable(s): {', '.join(sorted(missing))}")
        return key

    def rank(self, names: Iterable[str]) -> int:
        key = self._key(names)
        r = self._cache.get(key)
        if r is None:
            r = gf.mat_rank(self.matrix(key)) if key else 0
            self._cache[key] = r
        return r

    def h(self, names: Iterable[str]) -> Fraction:
        return Fraction(self.rank(names))

    def symmetrized(self) -> "SymmetrizedSystem":
        if self._sym is None:
            self._sym = SymmetrizedSystem(self)
        return self._sym

    def restrict_messages(self, message_names: Iterable[str], key_names: Iterable[str]) -> "LinearSystem":
        """Same generators with a different message/key labelling."""
        return LinearSystem(self.source_dim, self.registry, message_names, key_names, self.n)


class SymmetrizedSystem:
    """Entropy averaged over all relabellings of the storage nodes.

    The average of rank functions is the entropy function (per copy) of
    the n!-fold space-sharing of the permuted codes, hence symmetric and
    polymatroidal.
    """

    def __init__(self, base: LinearSystem) -> None:
        if base.n is None:
            raise ValueError("symmetrization needs the node count")
        self.base = base
        self.n = base.n
        self.source_dim = base.source_dim
        self.message_names = base.message_names
        self.key_names = base.key_names
        self.perms = list(permutations(range(1, self.n + 1)))
        self._cache: dict[frozenset, Fraction] = {}

    def __contains__(self, name: str) -> bool:
        return name in self.base

    def h(self, names: Iterable[str]) -> Fraction:
        key = self.base._key(names)
        v = self._cache.get(key)
        if v is None:
            total = sum(self.base.rank(permute_name(x, p) for x in key) for p in self.perms)
            v = Fraction(total, factorial(self.n))
            self._cache[key] = v
        return v

    def symmetrized(self) -> "SymmetrizedSystem":
        return self


def register_system(code) -> LinearSystem:
    """Unroll a product-matrix code into explicit generator matrices.

    Rows are assembled from psi and the stripe layout directly (not by
    running ``encode``), so comparing them with ``encode`` is a real check.
    """
    n, d, dim = code.n, code.d, code.source_dim
    reg: dict[str, np.ndarray] = {}
    off = 0
    for j in range(1, d + 1):
        size = code.message_size(j)
        m = np.zeros((size, dim), dtype=np.uint8)
        m[np.arange(size), off + np.arange(size)] = 1
        reg[f"M{j}"] = m
        off += size
    if code.key_size:
        m = np.zeros((code.key_size, dim), dtype=np.uint8)
        m[np.arange(code.key_size), code.message_dim + np.arange(code.key_size)] = 1
        reg["K"] = m

    # coefficient tensor per stripe: entry (r, c) of M is x[col] (symmetric)
    stripes = []
    for lv, s, g in code.stripes():
        entries = np.zeros((d, d, dim), dtype=np.uint8)
        for (r, c), col in code.source_map(lv.k, s).items():
            entries[r, c, col] = 1
            entries[c, r, col] = 1
        stripes.append(entries)

    psi = code.psi
    for i in range(n):
        rows = []
        for e in stripes:
            for c in range(d):
                rows.append(gf.matmul(psi[i].reshape(1, d), e[:, c, :])[0])
        reg[f"W{i + 1}"] = np.array(rows, dtype=np.uint8)
    for h in range(n):
        for f in range(n):
            if h == f:
                continue
            rows = []
            for e in stripes:
                # psi_h^T M psi_f, contracted one index at a time
                left = gf.matmul(psi[h].reshape(1, d), e.reshape(d, d * dim)).reshape(d, dim)
                rows.append(gf.matmul(psi[f].reshape(1, d), left)[0])
            reg[f"S[{h + 1}->{f + 1}]"] = np.array(rows, dtype=np.uint8).reshape(-1, dim)
    msgs = [f"M{j}" for j in range(1, d + 1)]
    keys = ["K"] if code.key_size else []
    return LinearSystem(dim, reg, msgs, keys, n=n)


def _set(vars: Iterable[str] | str) -> frozenset:
    if isinstance(vars, str):
        return frozenset(parse_varset(vars))
    return frozenset(vars)


def joint_entropy(sys, vars) -> Fraction:
    return sys.h(_set(vars))


def cond_entropy(sys, a, b) -> Fraction:
    a, b = _set(a), _set(b)
    return sys.h(a | b) - sys.h(b)


def mutual_information(sys, a, b) -> Fraction:
    a, b = _set(a), _set(b)
    return sys.h(a) + sys.h(b) - sys.h(a | b)


def cond_mutual_information(sys, a, b, c) -> Fraction:
    a, b, c = _set(a), _set(b), _set(c)
    return sys.h(a | c) + sys.h(b | c) - sys.h(a | b | c) - sys.h(c)


def is_deterministic_given(sys, a, b) -> bool:
    return cond_entropy(sys, a, b) == 0


def symmetrized_entropy(sys, vars) -> Fraction:
    """Average of H over all node relabellings of *vars*.

    *vars* is a name iterable or anything with ``resolve(sys)``.
    """
    if hasattr(vars, "resolve"):
        vars = vars.resolve(sys)
    return sys.symmetrized().h(_set(vars))


def eavesdropper_names(n: int, eaves_set: Iterable[int]) -> list[str]:
    return [f"S[{h}->{i}]" for i in sorted(set(eaves_set)) for h in range(1, n + 1) if h != i]


def secrecy_index(sys, ell: int) -> Fraction:
    """Largest leakage I(messages; downloads into E) over all |E| = ell."""
    base = sys.base if isinstance(sys, SymmetrizedSystem) else sys
    if base.n is None or not 0 <= ell < base.n:
        raise ValueError("need 0 <= ell < n")
    if ell == 0:
        return Fraction(0)
    msgs = frozenset(sys.message_names)
    worst = Fraction(0)
    for e in combinations(range(1, base.n + 1), ell):
        worst = max(worst, mutual_information(sys, msgs, eavesdropper_names(base.n, e)))
    return worst


def han_average(sys, items: Sequence[Iterable[str]], r: int, given: Iterable[str] = ()) -> Fraction:
    """Average of H(X_A | given) over all r-subsets A of *items*."""
    items = [frozenset(x) for x in items]
    given = frozenset(given)
    total = Fraction(0)
    for sub in combinations(items, r):
        total += cond_entropy(sys, frozenset().union(*sub), given)
    return total / comb(len(items), r)


def han_check(sys, items: Sequence[Iterable[str]], given: Iterable[str] = ()) -> list[tuple[int, Fraction, Fraction]]:
    """Per r: (r, average r-subset entropy, r/N * whole entropy), all given *given*."""
    items = [frozenset(x) for x in items]
    whole = cond_entropy(sys, frozenset().union(*items), given) if items else Fraction(0)
    size = len(items)
    return [(r, han_average(sys, items, r, given), Fraction(r, size) * whole)
            for r in range(1, size + 1)]


def symmetry_deviation(sys: LinearSystem, sets: Iterable[Iterable[str]]) -> Fraction:
    """max over node relabellings and given sets of |H(pi(A)) - H(A)|."""
    worst = Fraction(0)
    perms = list(permutations(range(1, sys.n + 1)))
    for a in sets:
        a = frozenset(a)
        h0 = sys.h(a)
        for p in perms:
            worst = max(worst, abs(sys.h(permute_name(x, p) for x in a) - h0))
    return worst
