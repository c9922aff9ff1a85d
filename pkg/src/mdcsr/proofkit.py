"""Instance-level checks of the converse machinery on registered codes.

All inequality checks run on the node-symmetrized entropy function of a
system with n = d + 1 nodes, so they never rely on the code happening to
be symmetric.  Every quantity is an exact ``Fraction``.

Variable collections (n = d + 1, nodes 1..n):

    S_bar(->j)    packets into j from the higher-indexed nodes j+1..n
    S_under(->j)  packets into j from the lower-indexed nodes 1..j-1
    U(t, s)       W_1..W_t together with S_bar(->j) for j in t+1..s
    M^(m)         messages M_1..M_m
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from .bounds import MessageProfile, RatePoint, bound_line, frac_str, t_coeff
from .codes import (CodeSpec, RegeneratingCode, build_code, build_mdcsr_separate, build_pm_mbr,
                    build_src)
from .entropy import (cond_entropy, han_check, is_deterministic_given,
                      register_system, secrecy_index, symmetry_deviation)


class ProofkitError(ValueError):
    pass


# -- collections ------------------------------------------------------------

def _rng(a: int, b: int) -> range:
    return range(a, b + 1)


def W(nodes: Iterable[int]) -> frozenset:
    return frozenset(f"W{i}" for i in nodes)


def S_from_to(sources: Iterable[int], j: int) -> frozenset:
    return frozenset(f"S[{h}->{j}]" for h in sources if h != j)


def S_from(i: int, targets: Iterable[int]) -> frozenset:
    return frozenset(f"S[{i}->{j}]" for j in targets if j != i)


def S_to(n: int, targets: Iterable[int]) -> frozenset:
    return frozenset().union(*(S_from_to(_rng(1, n), j) for j in targets))


def S_bar(n: int, targets: Iterable[int]) -> frozenset:
    return frozenset().union(*(S_from_to(_rng(j + 1, n), j) for j in targets))


def S_under(targets: Iterable[int]) -> frozenset:
    return frozenset().union(*(S_from_to(_rng(1, j - 1), j) for j in targets))


def U(n: int, t: int, s: int) -> frozenset:
    if not (0 <= s <= n and 0 <= t <= s):
        raise ProofkitError(f"U({t},{s}) needs 0 <= t <= s <= n={n}")
    return W(_rng(1, t)) | S_bar(n, _rng(t + 1, s))


def M_upto(m: int) -> frozenset:
    return frozenset(f"M{j}" for j in _rng(1, m))


def M_range(a: int, b: int) -> frozenset:
    return frozenset(f"M{j}" for j in _rng(a, b))


@dataclass(frozen=True)
class VarSetPattern:
    """Symbolic collection; ``resolve`` turns it into variable names.

    kinds and params:
      U (t, s) | M^ (m,) | W (a, b) | S_bar (targets) | S_under (targets)
      S_to (targets) | S_into (sources, j) | S_from (i, targets) | custom (names)
    """
    kind: str
    params: tuple = ()

    def resolve(self, sys) -> frozenset:
        n = _node_count(sys)
        k, p = self.kind, self.params
        if k == "U":
            return U(n, *p)
        if k == "M^":
            return M_upto(p[0])
        if k == "W":
            _check_nodes(n, _rng(p[0], p[1]))
            return W(_rng(p[0], p[1]))
        if k in ("S_bar", "S_under", "S_to"):
            targets = tuple(p)
            _check_nodes(n, targets)
            return {"S_bar": lambda: S_bar(n, targets), "S_under": lambda: S_under(targets),
                    "S_to": lambda: S_to(n, targets)}[k]()
        if k == "S_into":
            _check_nodes(n, tuple(p[0]) + (p[1],))
            return S_from_to(p[0], p[1])
        if k == "S_from":
            _check_nodes(n, (p[0],) + tuple(p[1]))
            return S_from(p[0], p[1])
        if k == "custom":
            return frozenset(p)
        raise ProofkitError(f"unknown pattern kind {k!r}")


def _node_count(sys) -> int:
    n = getattr(sys, "n", None)
    if n is None:
        raise ProofkitError("system has no node count")
    return n


def _check_nodes(n: int, nodes: Iterable[int]) -> None:
    bad = [i for i in nodes if not 1 <= i <= n]
    if bad:
        raise ProofkitError(f"node index out of range: {bad}")


def resolve_pattern(sys, p: VarSetPattern) -> frozenset:
    if p.kind == "U" and _node_count(sys) != getattr(sys, "d", _node_count(sys) - 1) + 1:
        raise ProofkitError("U patterns need n = d + 1")
    return p.resolve(sys)


# -- reports ----------------------------------------------------------------

@dataclass
class CheckReport:
    tag: str
    params: tuple
    lhs: Fraction
    rhs: Fraction
    relation: str = ">="
    slack: Fraction = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        self.slack = Fraction(self.lhs) - Fraction(self.rhs)
        self.passed = self.slack == 0 if self.relation == "==" else self.slack >= 0

    def line(self) -> str:
        params = ",".join(str(x) for x in self.params)
        return (f"{self.tag} ({params}) lhs={frac_str(self.lhs)} rhs={frac_str(self.rhs)} "
                f"slack={frac_str(self.slack)} {'PASS' if self.passed else 'FAIL'}")

    def as_dict(self) -> dict:
        return {"tag": self.tag, "params": list(self.params), "relation": self.relation,
                "lhs": frac_str(self.lhs), "rhs": frac_str(self.rhs),
                "slack": frac_str(self.slack), "pass": self.passed}


def _sym(sys):
    return sys.symmetrized()


def _require_n_eq_d_plus_1(sys, d: int) -> int:
    n = _node_count(sys)
    if n != d + 1:
        raise ProofkitError(f"proof checks need n = d + 1 (n={n}, d={d})")
    return n


def check_lemma1(sys, d: int, t: int, s: int) -> CheckReport:
    """(S_under(->t+1..s), W_{t+1..s}) is determined by U(t, s)."""
    n = _require_n_eq_d_plus_1(sys, d)
    if not (1 <= s <= n and 0 <= t <= s - 1):
        raise ProofkitError(f"check_lemma1 needs s in [1, {n}] and t in [0, s-1], got t={t}, s={s}")
    target = S_under(_rng(t + 1, s)) | W(_rng(t + 1, s))
    given = U(n, t, s)
    sym = _sym(sys)
    h = cond_entropy(sym, target, given)
    rep = CheckReport("lemma1", (t, s), h, Fraction(0), "==")
    if rep.passed and not is_deterministic_given(sym, target, given):
        rep.passed = False
    return rep


def check_lemma1_monotone(sys, d: int, t1: int, t2: int, s: int) -> CheckReport:
    n = _require_n_eq_d_plus_1(sys, d)
    sym = _sym(sys)
    return CheckReport("lemma1-mono", (t1, t2, s), sym.h(U(n, t1, s)), sym.h(U(n, t2, s)))


@dataclass
class TauPartition:
    d: int
    m: int
    i: int
    i_prime: int
    j: int
    s: int
    r: int
    a: dict[int, int]
    tau: dict[int, frozenset]

    def violations(self) -> list[str]:
        """Which of the partition properties fail (empty when all hold)."""
        out = []
        d, m, i, ip, j = self.d, self.m, self.i, self.i_prime, self.j
        if d + 1 - j != self.s * (d - m) + self.r or not (self.s >= 1 and 1 <= self.r <= d - m):
            out.append("decomposition")
        for q1, q2 in combinations(self.tau, 2):
            if self.tau[q1] & self.tau[q2]:
                out.append(f"overlap {q1},{q2}")
        lower = frozenset().union(*(self.tau[q] for q in range(self.s)))
        if lower != frozenset(_rng(ip + 1, i)) | frozenset(_rng(i + j - ip, m)):
            out.append("lower union")
        if self.tau[self.s] != frozenset(_rng(m + 2, d + 1)):
            out.append("top block")
        ts = sorted(self.a)
        if any(self.a[x] >= self.a[y] for x, y in zip(ts, ts[1:])):
            out.append("a_t not increasing")
        return out


def _check_exchange_range(d: int, m: int, i: int, ip: int, j: int) -> None:
    if not (1 <= m <= d - 1 and 0 <= i <= m - 1 and 0 <= ip <= i and ip + 1 <= j <= m - i + ip + 1):
        raise ProofkitError(f"(m,i,i',j)=({m},{i},{ip},{j}) outside the exchange range for d={d}")


def build_tau(d: int, m: int, i: int, i_prime: int, j: int) -> TauPartition:
    _check_exchange_range(d, m, i, i_prime, j)
    if j > m:
        raise ProofkitError("the partition is only defined for j <= m")
    total = d + 1 - j
    s = (total - 1) // (d - m)
    r = total - s * (d - m)

    def a_t(t: int) -> int:
        if t <= i - i_prime:
            return t + i_prime
        if t <= m - j + 1:
            return t + j - 1
        return t + j

    a = {t: a_t(t) for t in _rng(1, total)}
    tau = {0: frozenset(a[t] for t in _rng(1, r))}
    for q in _rng(1, s):
        tau[q] = frozenset(a[t] for t in _rng(r + 1 + (q - 1) * (d - m), r + q * (d - m)))
    return TauPartition(d, m, i, i_prime, j, s, r, a, tau)


def admissible_tuples(d: int, *, include_equality: bool = True) -> list[tuple[int, int, int, int]]:
    out = []
    for m in _rng(1, d - 1):
        for i in _rng(0, m - 1):
            for ip in _rng(0, i):
                for j in _rng(ip + 1, m - i + ip + 1):
                    if j <= m or include_equality:
                        out.append((m, i, ip, j))
    return out


def check_exchange(sys, d: int, m: int, i: int, i_prime: int, j: int) -> CheckReport:
    n = _require_n_eq_d_plus_1(sys, d)
    _check_exchange_range(d, m, i, i_prime, j)
    sym = _sym(sys)
    mm = M_upto(m)
    c = Fraction(d + 1 - j, d - m)
    lhs = c * cond_entropy(sym, U(n, i, m), mm) + cond_entropy(sym, U(n, i_prime, j), mm)
    rhs = c * cond_entropy(sym, U(n, i, m + 1), mm) + cond_entropy(sym, U(n, i_prime, j - 1), mm)
    return CheckReport("exchange", (m, i, i_prime, j), lhs, rhs, "==" if j == m + 1 else ">=")


def qq_tail(n: int, tau: TauPartition, p: int) -> frozenset:
    """W_{1..i'}, S(->i+1..i+j-i'-1) and the packets from tau_0..tau_{s-p} into m+1."""
    i, ip, j, m = tau.i, tau.i_prime, tau.j, tau.m
    sources = frozenset().union(*(tau.tau[q] for q in _rng(0, tau.s - p)))
    return W(_rng(1, ip)) | S_to(n, _rng(i + 1, i + j - ip - 1)) | S_from_to(sources, m + 1)


def check_qq_induction(sys, d: int, m: int, i: int, i_prime: int, j: int, p: int) -> CheckReport:
    n = _require_n_eq_d_plus_1(sys, d)
    tau = build_tau(d, m, i, i_prime, j)
    if not 1 <= p <= tau.s:
        raise ProofkitError(f"p={p} outside [1, {tau.s}]")
    sym = _sym(sys)
    mm = M_upto(m)
    lhs = p * cond_entropy(sym, U(n, i, m), mm) + cond_entropy(sym, U(n, i_prime, j), mm)
    rhs = p * cond_entropy(sym, U(n, i, m + 1), mm) + cond_entropy(sym, qq_tail(n, tau, p), mm)
    return CheckReport("qq-induction", (m, i, i_prime, j, p), lhs, rhs)


def check_han_step(sys, d: int, m: int, i: int, i_prime: int, j: int) -> list[CheckReport]:
    """Subset inequality on the packets into m+1 from m+2..d+1, given the
    conditioning set used right after the induction."""
    n = _require_n_eq_d_plus_1(sys, d)
    tau = build_tau(d, m, i, i_prime, j)
    given = W(_rng(1, i_prime)) | S_to(n, _rng(i + 1, i + j - i_prime - 1)) | M_upto(m)
    items = [S_from_to([h], m + 1) for h in _rng(m + 2, d + 1)]
    return [CheckReport("han", (m, i, i_prime, j, r), avg, bound)
            for r, avg, bound in han_check(_sym(sys), items, given)]


def check_corollaries(sys, d: int, ell: int, m: int) -> list[CheckReport]:
    n = _require_n_eq_d_plus_1(sys, d)
    if not (0 <= ell <= d - 1 and ell + 1 <= m <= d - 1):
        raise ProofkitError(f"corollaries need ell in [0, d-1] and m in [ell+1, d-1]")
    sym = _sym(sys)
    mm = M_upto(m)
    t_m, t_m1 = t_coeff(d, m, ell), t_coeff(d, m + 1, ell)
    h = lambda a: cond_entropy(sym, a, mm)  # noqa: E731
    c1 = CheckReport(
        "coro1", (ell, m),
        h(U(n, 0, m)) / t_m,
        h(U(n, 0, m + 1)) / t_m1 + (Fraction(1, t_m) - Fraction(1, t_m1)) * h(U(n, 0, ell)))
    w = Fraction(d - m, t_m)
    c2 = CheckReport(
        "coro2", (ell, m),
        h(U(n, 1, m)) + w * h(U(n, 0, m)),
        h(U(n, 1, m + 1)) + w * h(U(n, 0, ell)))
    return [c1, c2]


def _spec_of(spec) -> CodeSpec:
    return spec.spec if isinstance(spec, RegeneratingCode) else spec


def _validate_spec(sys, spec: CodeSpec) -> None:
    _require_n_eq_d_plus_1(sys, spec.d)
    if _node_count(sys) != spec.n:
        raise ProofkitError(f"system has {_node_count(sys)} nodes, spec says {spec.n}")
    sym = _sym(sys)
    for j in _rng(1, spec.d):
        name = f"M{j}"
        size = spec.message_sizes.get(j, 0)
        got = sym.h({name}) if name in sym else Fraction(0)
        if got != size:
            raise ProofkitError(f"H({name}) = {got} but spec says B_{j} = {size}")


def check_propositions(sys, spec) -> list[CheckReport]:
    spec = _spec_of(spec)
    _validate_spec(sys, spec)
    d, ell, beta = spec.d, spec.ell, spec.beta
    n = d + 1
    sym = _sym(sys)
    B = {j: spec.message_sizes.get(j, 0) for j in _rng(1, d)}
    T = {j: t_coeff(d, j, ell) for j in _rng(ell + 1, d)}

    def acc(m: int) -> Fraction:
        return sum((Fraction(B[j], T[j]) for j in _rng(ell + 1, m)), Fraction(0))

    h = sym.h
    u_l, u_l1 = h(U(n, 0, ell)), h(U(n, 0, ell + 1))
    inv = Fraction(1, d - ell)
    out = []
    for m in _rng(ell + 1, d):
        out.append(CheckReport(
            "prop1-chain", (m,), inv * u_l1,
            acc(m) + cond_entropy(sym, U(n, 0, m), M_range(ell + 1, m)) / T[m]
            + (inv - Fraction(1, T[m])) * u_l))
    out.append(CheckReport("prop1", (), inv * u_l1, acc(d) + inv * u_l))

    s_top = h(S_from(d + 1, _rng(1, ell)))
    out.append(CheckReport("prop2-submod", (), s_top + ell * u_l,
                           ell * h(U(n, 0, ell) | S_from(d + 1, [ell + 1]))))
    out.append(CheckReport("prop2", (), s_top + (d * (d - ell) - ell) * beta + d * u_l, d * u_l1))

    for m in _rng(ell + 1, d - 1):
        c = Fraction(d - m, d - ell)
        out.append(CheckReport(
            "prop3-chain", (m,), h(U(n, 1, m)) + c * u_l1,
            (d - m) * acc(m) + h(U(n, 1, m + 1)) + c * u_l))
    t_dd, t_dd1 = t_coeff(d, d, ell), t_coeff(d, d, ell + 1)
    out.append(CheckReport("prop3", (), h(U(n, 1, ell + 1)) + Fraction(t_dd1, d - ell) * u_l1,
                           t_dd * acc(d) + Fraction(t_dd, d - ell) * u_l))
    return out


def check_final_bounds(sys, spec) -> list[CheckReport]:
    """The code's own normalized point against the outer bounds."""
    spec = _spec_of(spec)
    total = spec.total_message
    if total == 0:
        raise ProofkitError("no message: normalized rates undefined")
    d, ell = spec.d, spec.ell
    weights = {j: Fraction(b, total) for j, b in spec.message_sizes.items() if b}
    profile = MessageProfile(d, ell, weights)
    point = RatePoint(Fraction(spec.alpha, total), Fraction(spec.beta, total))
    tags = ["B3", "B4"]
    if profile.is_single_level:
        tags += ["B5", "B6"]
    if ell == 0:
        tags = ["B1", "B2"] + tags + ["B7"]
    out = []
    for tag in tags:
        line = bound_line(tag, d, ell, profile)
        lhs = line.c_alpha * point.alpha_bar + line.c_beta * point.beta_bar
        out.append(CheckReport(tag, (frac_str(point.alpha_bar), frac_str(point.beta_bar)), lhs, line.rhs))
    return out


def check_requirements(sys, spec) -> list[CheckReport]:
    """Message recovery, node regeneration and repair secrecy on the raw system."""
    spec = _spec_of(spec)
    n, d, ell = spec.n, spec.d, spec.ell
    out = []
    for size in _rng(ell + 1, d):
        if not spec.message_sizes.get(size):
            continue
        worst = max(cond_entropy(sys, {f"M{size}"}, W(a)) for a in combinations(_rng(1, n), size))
        out.append(CheckReport("recovery", (size,), worst, Fraction(0), "=="))
    worst = max(cond_entropy(sys, W([i]), S_to(n, [i])) for i in _rng(1, n))
    out.append(CheckReport("regeneration", (), worst, Fraction(0), "=="))
    out.append(CheckReport("secrecy", (ell,), secrecy_index(sys, ell), Fraction(0), "=="))
    return out


@dataclass
class SuiteReport:
    code: str
    spec: dict
    checks: list[CheckReport]
    secrecy_index: Fraction
    symmetry_deviation: Fraction

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckReport]:
        return [c for c in self.checks if not c.passed]

    def text(self) -> str:
        lines = [f"suite {self.code}"]
        lines += [c.line() for c in self.checks]
        lines.append(f"secrecy_index {frac_str(self.secrecy_index)}")
        lines.append(f"symmetry_deviation {frac_str(self.symmetry_deviation)}")
        n_fail = len(self.failures())
        lines.append(f"summary {len(self.checks) - n_fail}/{len(self.checks)} PASS"
                     + ("" if n_fail == 0 else f", {n_fail} FAIL"))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"code": self.code, "spec": self.spec, "passed": self.passed,
                "secrecy_index": frac_str(self.secrecy_index),
                "symmetry_deviation": frac_str(self.symmetry_deviation),
                "checks": [c.as_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def _spec_dict(spec: CodeSpec) -> dict:
    return {"n": spec.n, "d": spec.d, "ell": spec.ell,
            "message_sizes": {str(j): b for j, b in sorted(spec.message_sizes.items())},
            "per_level_beta": {str(j): b for j, b in sorted(spec.per_level_beta.items())}}


def run_suite(spec, seed: int = 0, symmetry_samples: int = 64) -> SuiteReport:
    """Build, register and run every check on one code with n = d + 1."""
    code = spec if isinstance(spec, RegeneratingCode) else build_code(spec)
    cspec = code.spec
    d, ell = cspec.d, cspec.ell
    if cspec.n != d + 1:
        raise ProofkitError(f"proof checks need n = d + 1 (n={cspec.n}, d={d})")
    sys = register_system(code)
    n = cspec.n
    checks: list[CheckReport] = []
    checks += check_requirements(sys, cspec)
    for s in _rng(1, n):
        for t in _rng(0, s - 1):
            checks.append(check_lemma1(sys, d, t, s))
        for t1 in _rng(0, s - 1):
            for t2 in _rng(t1 + 1, s - 1):
                checks.append(check_lemma1_monotone(sys, d, t1, t2, s))
    for m, i, ip, j in admissible_tuples(d):
        checks.append(check_exchange(sys, d, m, i, ip, j))
        if j <= m:
            tau = build_tau(d, m, i, ip, j)
            for p in _rng(1, tau.s):
                checks.append(check_qq_induction(sys, d, m, i, ip, j, p))
            checks += check_han_step(sys, d, m, i, ip, j)
    for m in _rng(ell + 1, d - 1):
        checks += check_corollaries(sys, d, ell, m)
    checks += check_propositions(sys, cspec)
    checks += check_final_bounds(sys, cspec)

    rng = np.random.default_rng(seed)
    names = sorted(sys.names())
    samples = []
    for _ in range(symmetry_samples):
        size = int(rng.integers(1, min(6, len(names)) + 1))
        samples.append(frozenset(rng.choice(names, size=size, replace=False).tolist()))
    return SuiteReport(repr(code), _spec_dict(cspec), checks,
                       secrecy_index(sys, ell), symmetry_deviation(sys, samples))


PRESETS = {
    "mbr-211": lambda: build_pm_mbr(2, 1, 1),
    "mbr-322": lambda: build_pm_mbr(3, 2, 2),
    "mbr-433": lambda: build_pm_mbr(4, 3, 3),
    "src-3221": lambda: build_src(3, 2, 2, 1),
    "src-4331": lambda: build_src(4, 3, 3, 1),
    "mdcsr-4331": lambda: build_mdcsr_separate(4, 3, 1, [Fraction(1, 2), Fraction(1, 2)]),
    "mdcr-430": lambda: build_mdcsr_separate(4, 3, 0, [0, Fraction(1, 3), Fraction(2, 3)]),
}


def preset_code(name: str) -> RegeneratingCode:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ProofkitError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
