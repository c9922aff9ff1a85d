"""Product-matrix regenerating codes: MBR, secure (key-padded) and the
separate-coding multilevel composite.

Every code here is a stack of *stripes*.  A stripe is one copy of the
product-matrix MBR code for a fixed recovery level k: a d x d symmetric
message matrix

    M = [[S, T], [T^T, 0]]      S: k x k symmetric, T: k x (d - k)

node i stores psi_i^T M (d symbols) and helper h sends psi_h^T M psi_f
(one symbol) to repair node f, with psi_i row i of an n x d Vandermonde
matrix.  For secure codes every entry (r, c) with min(r, c) <= ell is a
uniform key symbol.  Level j of a code carries ``beta_j`` stripes.

Node indices are 1-based in the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fieldcore as gf
from .bounds import MessageProfile, RatePoint, t_coeff


class CodeError(ValueError):
    pass


class CorruptSharesError(CodeError):
    def __init__(self, msg: str = "corrupt shares") -> None:
        super().__init__(msg)


@dataclass(frozen=True)
class CodeSpec:
    n: int
    d: int
    ell: int
    message_sizes: Mapping[int, int]
    per_level_beta: Mapping[int, int]
    q: int = gf.ORDER

    @property
    def levels(self) -> list[int]:
        return sorted(j for j, b in self.per_level_beta.items() if b > 0)

    @property
    def beta(self) -> int:
        return sum(self.per_level_beta.values())

    @property
    def alpha(self) -> int:
        return self.d * self.beta

    @property
    def total_message(self) -> int:
        return sum(self.message_sizes.values())


@dataclass(frozen=True)
class Level:
    k: int
    beta: int


@dataclass
class NodeShare:
    node_index: int
    payload: np.ndarray


@dataclass
class RepairPacket:
    helper: int
    target: int
    payload: np.ndarray


@dataclass
class MessageBundle:
    messages: dict[int, np.ndarray]
    key: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def to_source(self) -> np.ndarray:
        """Messages in ascending level order, then the key block."""
        parts = [self.messages[j] for j in sorted(self.messages)] + [self.key]
        return np.concatenate([np.asarray(p, dtype=np.uint8) for p in parts], axis=0)


def _as_2d(a: np.ndarray) -> tuple[np.ndarray, bool]:
    a = np.asarray(a, dtype=np.uint8)
    if a.ndim == 1:
        return a.reshape(-1, 1), True
    return a, False


def _restore(a: np.ndarray, squeeze: bool) -> np.ndarray:
    return a[:, 0] if squeeze else a


@lru_cache(maxsize=None)
def _upper_positions(d: int, k: int) -> tuple[tuple[int, int], ...]:
    """Free entries (r, c), r <= c, of the stripe matrix (0-based, row-major)."""
    return tuple((r, c) for r in range(k) for c in range(r, d))


class RegeneratingCode:
    """An exact-repair linear code over GF(256) built from stripes."""

    def __init__(self, n: int, d: int, ell: int, levels: Sequence[Level], kind: str = "code") -> None:
        levels = tuple(sorted((lv for lv in levels if lv.beta > 0), key=lambda lv: lv.k))
        if not levels:
            raise CodeError("code has no levels")
        if len({lv.k for lv in levels}) != len(levels):
            raise CodeError("duplicate level")
        if not 0 < d < n:
            raise CodeError(f"need 0 < d < n, got n={n}, d={d}")
        if n > gf.ORDER - 1:
            raise CodeError(f"n={n} exceeds the {gf.ORDER - 1} available evaluation points")
        for lv in levels:
            if not 1 <= lv.k <= d:
                raise CodeError(f"level {lv.k} outside [1, {d}]")
            if lv.k < ell:
                raise CodeError("secrecy impossible: need ell < k")
        if ell < 0:
            raise CodeError("ell must be nonnegative")
        self.n, self.d, self.ell = n, d, ell
        self.levels = levels
        self.kind = kind
        self.psi = gf.vandermonde_matrix(n, d, list(range(1, n + 1)))
        self._build_layout()

    def _build_layout(self) -> None:
        d, ell = self.d, self.ell
        self.key_positions: dict[int, list[tuple[int, int]]] = {}
        self.msg_positions: dict[int, list[tuple[int, int]]] = {}
        for lv in self.levels:
            pos = _upper_positions(d, lv.k)
            self.key_positions[lv.k] = [p for p in pos if p[0] < ell]
            self.msg_positions[lv.k] = [p for p in pos if p[0] >= ell]
        # source column of every (level, stripe, position): messages first, then keys
        self._source_map: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
        self._msg_offset: dict[int, int] = {}
        col = 0
        for lv in self.levels:
            self._msg_offset[lv.k] = col
            for s in range(lv.beta):
                m = self._source_map.setdefault((lv.k, s), {})
                for p in self.msg_positions[lv.k]:
                    m[p] = col
                    col += 1
        self.message_dim = col
        for lv in self.levels:
            for s in range(lv.beta):
                m = self._source_map[(lv.k, s)]
                for p in self.key_positions[lv.k]:
                    m[p] = col
                    col += 1
        self.source_dim = col
        self.key_size = col - self.message_dim

    # -- sizes -------------------------------------------------------------

    @property
    def beta(self) -> int:
        return sum(lv.beta for lv in self.levels)

    @property
    def alpha(self) -> int:
        return self.d * self.beta

    def message_size(self, j: int) -> int:
        lv = self.level(j)
        return 0 if lv is None else lv.beta * len(self.msg_positions[j])

    @property
    def message_sizes(self) -> dict[int, int]:
        return {lv.k: self.message_size(lv.k) for lv in self.levels}

    @property
    def total_message(self) -> int:
        return self.message_dim

    def level(self, j: int) -> Level | None:
        return next((lv for lv in self.levels if lv.k == j), None)

    @property
    def spec(self) -> CodeSpec:
        return CodeSpec(self.n, self.d, self.ell, self.message_sizes,
                        {lv.k: lv.beta for lv in self.levels})

    def normalized_point(self) -> RatePoint:
        total = self.total_message
        if total == 0:
            raise CodeError("code carries no message")
        return RatePoint(Fraction(self.alpha, total), Fraction(self.beta, total))

    def source_map(self, j: int, stripe: int) -> dict[tuple[int, int], int]:
        return self._source_map[(j, stripe)]

    def stripes(self) -> Iterable[tuple[Level, int, int]]:
        """(level, stripe index, stripe number across the whole code)."""
        g = 0
        for lv in self.levels:
            for s in range(lv.beta):
                yield lv, s, g
                g += 1

    def __repr__(self) -> str:
        lv = ",".join(f"{x.k}x{x.beta}" for x in self.levels)
        return f"RegeneratingCode({self.kind}, n={self.n}, d={self.d}, ell={self.ell}, levels={lv})"

    # -- bundles -----------------------------------------------------------

    def random_bundle(self, rng: np.random.Generator, batch: int | None = None) -> MessageBundle:
        shape = () if batch is None else (batch,)
        msgs = {lv.k: rng.integers(0, 256, (self.message_size(lv.k),) + shape, dtype=np.uint8)
                for lv in self.levels}
        key = rng.integers(0, 256, (self.key_size,) + shape, dtype=np.uint8)
        return MessageBundle(msgs, key)

    def zero_bundle(self) -> MessageBundle:
        return MessageBundle({lv.k: np.zeros(self.message_size(lv.k), dtype=np.uint8)
                              for lv in self.levels}, np.zeros(self.key_size, dtype=np.uint8))

    def bundle_from_source(self, x: np.ndarray) -> MessageBundle:
        x = np.asarray(x, dtype=np.uint8)
        msgs = {}
        for lv in self.levels:
            off = self._msg_offset[lv.k]
            msgs[lv.k] = x[off: off + self.message_size(lv.k)]
        return MessageBundle(msgs, x[self.message_dim:])

    def _check_bundle(self, bundle: MessageBundle) -> None:
        want = {lv.k for lv in self.levels}
        if set(bundle.messages) != want:
            raise CodeError(f"bundle levels {sorted(bundle.messages)} != code levels {sorted(want)}")
        for j, block in bundle.messages.items():
            if np.shape(block)[0] != self.message_size(j):
                raise CodeError(f"level {j} block has {np.shape(block)[0]} symbols, "
                                f"expected {self.message_size(j)}")
        if np.shape(bundle.key)[0] != self.key_size:
            raise CodeError(f"key has {np.shape(bundle.key)[0]} symbols, expected {self.key_size}")

    # -- encode ------------------------------------------------------------

    def _stripe_matrix(self, x: np.ndarray, j: int, s: int) -> np.ndarray:
        """d x d x N symmetric message matrix of one stripe from source x (dim x N)."""
        d = self.d
        m = np.zeros((d, d, x.shape[1]), dtype=np.uint8)
        for (r, c), col in self._source_map[(j, s)].items():
            m[r, c] = x[col]
            m[c, r] = x[col]
        return m

    def encode(self, bundle: MessageBundle) -> list[NodeShare]:
        self._check_bundle(bundle)
        x, squeeze = _as_2d(bundle.to_source())
        N = x.shape[1]
        d = self.d
        out = np.zeros((self.n, self.alpha, N), dtype=np.uint8)
        for lv, s, g in self.stripes():
            m = self._stripe_matrix(x, lv.k, s)
            w = gf.matmul(self.psi, m.reshape(d, d * N)).reshape(self.n, d, N)
            out[:, g * d:(g + 1) * d] = w
        return [NodeShare(i + 1, _restore(out[i], squeeze)) for i in range(self.n)]

    # -- recovery ----------------------------------------------------------

    def _check_node(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise CodeError(f"node index {i} outside [1, {self.n}]")

    def _decode_stripe(self, k: int, rows: list[int], x: np.ndarray) -> np.ndarray:
        """Solve psi_A M = X for the stripe matrix M given k rows (0-based nodes)."""
        d, N = self.d, x.shape[2]
        psi_a = self.psi[rows]
        phi_inv = _inverse(self.psi[rows, :k].tobytes(), k)
        delta = psi_a[:, k:]
        x1, x2 = x[:, :k], x[:, k:]
        t = gf.matmul(phi_inv, x2.reshape(k, (d - k) * N)).reshape(k, d - k, N)
        tt = t.transpose(1, 0, 2).reshape(d - k, k * N)
        rhs = x1 ^ gf.matmul(delta, tt).reshape(k, k, N)
        s = gf.matmul(phi_inv, rhs.reshape(k, k * N)).reshape(k, k, N)
        if not np.array_equal(s, s.transpose(1, 0, 2)):
            raise CorruptSharesError()
        m = np.zeros((d, d, N), dtype=np.uint8)
        m[:k, :k] = s
        m[:k, k:] = t
        m[k:, :k] = t.transpose(1, 0, 2)
        return m

    def recover(self, level: int, shares: Sequence[NodeShare]) -> np.ndarray:
        """Message block of *level* from at least ``level`` distinct shares.

        Uses the first ``level`` shares to decode and checks every supplied
        share against the decoded stripes.
        """
        lv = self.level(level)
        if lv is None or self.message_size(level) == 0:
            raise CodeError(f"code has no message on level {level}")
        nodes = [s.node_index for s in shares]
        for i in nodes:
            self._check_node(i)
        if len(set(nodes)) != len(nodes):
            raise CodeError("duplicated node in recovery set")
        if len(nodes) < level:
            raise CodeError(f"level {level} needs {level} nodes, got {len(nodes)}")
        payloads = []
        squeeze = False
        for sh in shares:
            p, squeeze = _as_2d(sh.payload)
            if p.shape[0] != self.alpha:
                raise CodeError(f"share of node {sh.node_index} has wrong length")
            payloads.append(p)
        allx = np.stack(payloads)  # |A| x alpha x N
        rows = [i - 1 for i in nodes]
        d = self.d
        blocks = []
        for lv_, s, g in self.stripes():
            if lv_.k != level:
                continue
            xs = allx[:, g * d:(g + 1) * d]
            m = self._decode_stripe(level, rows[:level], xs[:level])
            check = gf.matmul(self.psi[rows], m.reshape(d, d * xs.shape[2])).reshape(xs.shape)
            if not np.array_equal(check, xs):
                raise CorruptSharesError()
            blocks.append(np.stack([m[r, c] for r, c in self.msg_positions[level]]))
        return _restore(np.concatenate(blocks, axis=0), squeeze)

    def recover_all(self, shares: Sequence[NodeShare]) -> dict[int, np.ndarray]:
        return {lv.k: self.recover(lv.k, shares) for lv in self.levels
                if self.message_size(lv.k) > 0 and len(shares) >= lv.k}

    # -- repair ------------------------------------------------------------

    def repair_extract(self, helper_share: NodeShare, target: int) -> RepairPacket:
        h = helper_share.node_index
        self._check_node(h)
        self._check_node(target)
        if h == target:
            raise CodeError("helper and target must differ")
        w, squeeze = _as_2d(helper_share.payload)
        if w.shape[0] != self.alpha:
            raise CodeError(f"share of node {h} has wrong length")
        d = self.d
        psi_f = self.psi[target - 1].reshape(1, d)
        out = np.zeros((self.beta, w.shape[1]), dtype=np.uint8)
        for _, _, g in self.stripes():
            out[g] = gf.matmul(psi_f, w[g * d:(g + 1) * d])[0]
        return RepairPacket(h, target, _restore(out, squeeze))

    def regenerate(self, target: int, packets: Sequence[RepairPacket]) -> NodeShare:
        self._check_node(target)
        if len(packets) != self.d:
            raise CodeError(f"regeneration needs exactly d={self.d} packets, got {len(packets)}")
        helpers = [p.helper for p in packets]
        if len(set(helpers)) != len(helpers):
            raise CodeError("duplicated helper")
        for p in packets:
            self._check_node(p.helper)
            if p.target != target:
                raise CodeError(f"packet from {p.helper} addressed to {p.target}, not {target}")
            if p.helper == target:
                raise CodeError("target cannot help itself")
        payloads = []
        squeeze = False
        for p in packets:
            a, squeeze = _as_2d(p.payload)
            if a.shape[0] != self.beta:
                raise CodeError(f"packet from {p.helper} has wrong length")
            payloads.append(a)
        pk = np.stack(payloads)  # d x beta x N
        rows = [h - 1 for h in helpers]
        binv = _inverse(self.psi[rows].tobytes(), self.d)
        d = self.d
        out = np.zeros((self.alpha, pk.shape[2]), dtype=np.uint8)
        for _, _, g in self.stripes():
            out[g * d:(g + 1) * d] = gf.matmul(binv, pk[:, g])
        return NodeShare(target, _restore(out, squeeze))

    def repair(self, shares: Mapping[int, NodeShare], target: int, helpers: Sequence[int]) -> NodeShare:
        return self.regenerate(target, [self.repair_extract(shares[h], target) for h in helpers])

    # -- secrecy -----------------------------------------------------------

    def eavesdropper_view(self, eaves_set: Iterable[int]) -> list[str]:
        """Names of every repair packet addressed to a node in *eaves_set*.

        Packets depend only on (helper, target), so the union over repair
        groups is the n - 1 packets into each eavesdropped node.
        """
        es = sorted(set(eaves_set))
        if len(es) != self.ell:
            raise CodeError(f"eavesdropper set must have size ell={self.ell}, got {len(es)}")
        for i in es:
            self._check_node(i)
        return [f"S[{h}->{i}]" for i in es for h in range(1, self.n + 1) if h != i]


@lru_cache(maxsize=4096)
def _inverse(raw: bytes, k: int) -> np.ndarray:
    return gf.mat_inv(np.frombuffer(raw, dtype=np.uint8).reshape(k, k))


def _check_params(n: int, k: int, d: int, beta: int) -> None:
    if not 1 <= k <= d < n:
        raise CodeError(f"need 1 <= k <= d < n, got n={n}, k={k}, d={d}")
    if n > gf.ORDER - 1:
        raise CodeError(f"n={n} exceeds {gf.ORDER - 1}")
    if beta < 1:
        raise CodeError("beta must be a positive integer")


def build_pm_mbr(n: int, k: int, d: int, beta: int = 1) -> RegeneratingCode:
    _check_params(n, k, d, beta)
    return RegeneratingCode(n, d, 0, [Level(k, beta)], kind="mbr")


def build_src(n: int, k: int, d: int, ell: int, beta: int = 1) -> RegeneratingCode:
    if ell >= k:
        raise CodeError("secrecy impossible: need ell < k")
    if ell < 0:
        raise CodeError("ell must be nonnegative")
    _check_params(n, k, d, beta)
    return RegeneratingCode(n, d, ell, [Level(k, beta)], kind="src" if ell else "mbr")


def separate_betas(d: int, ell: int, profile: MessageProfile) -> dict[int, int]:
    """Smallest integer per-level stripe counts realizing *profile* exactly.

    With total message L, level j needs beta_j = L * w_j / T(d, j, ell); L is
    the lcm of the reduced denominators of w_j / T(d, j, ell).
    """
    ratios = {j: w / t_coeff(d, j, ell) for j, w in profile.weights.items() if w > 0}
    if not ratios:
        raise CodeError("profile has no positive weight")
    scale = lcm(*(r.denominator for r in ratios.values()))
    return {j: int(r * scale) for j, r in ratios.items()}


def build_mdcsr_separate(n: int, d: int, ell: int, profile: MessageProfile | Sequence) -> RegeneratingCode:
    if not isinstance(profile, MessageProfile):
        profile = MessageProfile.from_sequence(d, ell, profile)
    if (profile.d, profile.ell) != (d, ell):
        raise CodeError("profile does not match (d, ell)")
    if not 0 <= ell < d < n:
        raise CodeError(f"need 0 <= ell < d < n, got n={n}, d={d}, ell={ell}")
    betas = separate_betas(d, ell, profile)
    kind = "mdcsr" if len(betas) > 1 else ("src" if ell else "mbr")
    return RegeneratingCode(n, d, ell, [Level(j, b) for j, b in betas.items()], kind=kind)


def build_code(spec: CodeSpec) -> RegeneratingCode:
    """Build from an explicit spec; message sizes must sit at the SRK point."""
    levels = [Level(j, b) for j, b in spec.per_level_beta.items() if b > 0]
    for lv in levels:
        if lv.k <= spec.ell:
            raise CodeError("secrecy impossible: need ell < k")
        want = t_coeff(spec.d, lv.k, spec.ell) * lv.beta
        if spec.message_sizes.get(lv.k, want) != want:
            raise CodeError(f"level {lv.k}: B_j must equal T(d, j, ell) * beta_j = {want}")
    if spec.q != gf.ORDER:
        raise CodeError("only GF(256) is supported")
    kind = "mdcsr" if len(levels) > 1 else ("src" if spec.ell else "mbr")
    return RegeneratingCode(spec.n, spec.d, spec.ell, levels, kind=kind)


def all_subsets(n: int, size: int) -> list[tuple[int, ...]]:
    return list(combinations(range(1, n + 1), size))
