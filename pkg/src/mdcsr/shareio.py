"""Node share files and file <-> bundle chunking.

Layout (little-endian):

    "RGL1"
    u16 n, u16 d, u16 ell, u16 level_count
    level_count x (u16 j, u16 B_j, u16 beta_j)
    u8  field id (0 = GF(256) modulo 0x11D)
    u16 node index
    u32 payload length
    payload
    u64 seed, u32 pad length          (trailer)

The payload holds N bundles back to back, alpha bytes each.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fieldcore as gf
from .codes import NodeShare, RegeneratingCode

MAGIC = b"RGL1"
_HEAD = struct.Struct("<4sHHHH")
_LEVEL = struct.Struct("<HHH")
_MID = struct.Struct("<BHI")
_TRAILER = struct.Struct("<QI")


class ShareFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ShareHeader:
    n: int
    d: int
    ell: int
    levels: tuple[tuple[int, int, int], ...]  # (j, B_j, beta_j)
    node_index: int
    payload_length: int
    seed: int = 0
    pad: int = 0
    field_id: int = gf.FIELD_ID

    @classmethod
    def for_code(cls, code: RegeneratingCode, node: int, payload_length: int,
                 seed: int = 0, pad: int = 0) -> "ShareHeader":
        levels = tuple((lv.k, code.message_size(lv.k), lv.beta) for lv in code.levels)
        return cls(code.n, code.d, code.ell, levels, node, payload_length, seed, pad)


def pack_share(header: ShareHeader, payload: bytes) -> bytes:
    if len(payload) != header.payload_length:
        raise ShareFormatError(f"payload has {len(payload)} bytes, header says {header.payload_length}")
    try:
        parts = [_HEAD.pack(MAGIC, header.n, header.d, header.ell, len(header.levels))]
        parts += [_LEVEL.pack(*lv) for lv in header.levels]
        parts.append(_MID.pack(header.field_id, header.node_index, header.payload_length))
        parts.append(payload)
        parts.append(_TRAILER.pack(header.seed, header.pad))
    except struct.error as exc:
        raise ShareFormatError(f"header field out of range: {exc}") from exc
    return b"".join(parts)


def unpack_share(blob: bytes) -> tuple[ShareHeader, bytes]:
    try:
        magic, n, d, ell, count = _HEAD.unpack_from(blob, 0)
        if magic != MAGIC:
            raise ShareFormatError(f"bad magic {magic!r}")
        off = _HEAD.size
        levels = []
        for _ in range(count):
            levels.append(_LEVEL.unpack_from(blob, off))
            off += _LEVEL.size
        field_id, node, length = _MID.unpack_from(blob, off)
        off += _MID.size
    except struct.error as exc:
        raise ShareFormatError("truncated share header") from exc
    if field_id != gf.FIELD_ID:
        raise ShareFormatError(f"unsupported field id {field_id}")
    payload = blob[off:off + length]
    if len(payload) != length:
        raise ShareFormatError("truncated payload")
    rest = blob[off + length:]
    if len(rest) != _TRAILER.size:
        raise ShareFormatError(f"trailer has {len(rest)} bytes, expected {_TRAILER.size}")
    seed, pad = _TRAILER.unpack(rest)
    header = ShareHeader(n, d, ell, tuple(tuple(lv) for lv in levels), node, length, seed, pad, field_id)
    return header, payload


def write_share(path: Path | str, header: ShareHeader, payload: bytes) -> None:
    Path(path).write_bytes(pack_share(header, payload))


def read_share(path: Path | str) -> tuple[ShareHeader, bytes]:
    return unpack_share(Path(path).read_bytes())


def share_path(out_dir: Path | str, node: int) -> Path:
    return Path(out_dir) / f"node{node:03d}.rgl"


# -- chunking ---------------------------------------------------------------

def bundle_count(code: RegeneratingCode, size: int) -> tuple[int, int]:
    """(number of bundles, zero padding) for a file of *size* bytes."""
    per = code.total_message
    count = -(-size // per)
    return count, count * per - size


def encode_bytes(code: RegeneratingCode, data: bytes, seed: int = 0) -> list[tuple[ShareHeader, bytes]]:
    """Split *data* into bundles (level order inside each) and encode them."""
    count, pad = bundle_count(code, len(data))
    per = code.total_message
    buf = np.frombuffer(data + bytes(pad), dtype=np.uint8).reshape(count, per)
    rng = np.random.default_rng(seed)
    key = rng.integers(0, 256, (code.key_size, count), dtype=np.uint8)
    if count == 0:
        shares = [NodeShare(i, np.zeros((code.alpha, 0), dtype=np.uint8)) for i in range(1, code.n + 1)]
    else:
        shares = code.encode(code.bundle_from_source(np.concatenate([buf.T, key], axis=0)))
    out = []
    for sh in shares:
        payload = np.ascontiguousarray(sh.payload.T).tobytes()
        out.append((ShareHeader.for_code(code, sh.node_index, len(payload), seed, pad), payload))
    return out


def payload_to_share(code: RegeneratingCode, node: int, payload: bytes) -> NodeShare:
    if len(payload) % code.alpha:
        raise ShareFormatError(f"payload length {len(payload)} is not a multiple of alpha={code.alpha}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(-1, code.alpha).T
    return NodeShare(node, np.ascontiguousarray(arr))


def share_to_payload(share: NodeShare) -> bytes:
    return np.ascontiguousarray(np.asarray(share.payload, dtype=np.uint8).T).tobytes()


def decode_bytes(code: RegeneratingCode, shares: Sequence[NodeShare], size: int) -> bytes:
    """Rebuild the original file from shares covering the top level."""
    count, _ = bundle_count(code, size)
    if count == 0:
        return b""
    blocks = [code.recover(lv.k, shares) for lv in code.levels]
    x = np.concatenate(blocks, axis=0)  # message_dim x N
    return np.ascontiguousarray(x.T).tobytes()[:size]
