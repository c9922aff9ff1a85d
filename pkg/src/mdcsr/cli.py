"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
import tempfile
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import (MessageProfile, BoundsError, bound_line, frac_str, parse_fraction, region_csv,
                     region_report, region_text, report_families)
from .codes import CodeError, CorruptSharesError, Level, RegeneratingCode, build_src, separate_betas
from .entropy import eavesdropper_names, mutual_information, register_system
from .proofkit import PRESETS, ProofkitError, preset_code, run_suite
from .shareio import (ShareFormatError, bundle_count, decode_bytes, encode_bytes, pack_share,
                      payload_to_share, share_path, share_to_payload, unpack_share)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- argument helpers -------------------------------------------------------

def _add_shape(p: argparse.ArgumentParser, *, need_n: bool = True) -> None:
    if need_n:
        p.add_argument("--n", type=int, help="number of storage nodes")
    p.add_argument("--d", type=int, help="number of helpers per repair")
    p.add_argument("--l", type=int, default=0, help="number of eavesdropped nodes (ell)")
    p.add_argument("--k", type=int, help="single message level (instead of --profile)")
    p.add_argument("--profile", help="comma-separated message weights, e.g. 0,1/3,2/3")
    p.add_argument("--normalize", action="store_true", help="rescale --profile to sum to 1")


def _add_code(p: argparse.ArgumentParser) -> None:
    _add_shape(p)
    p.add_argument("--beta", type=int, default=1, help="stripe multiplier")
    p.add_argument("--seed", type=int, default=0)


def _add_format(p: argparse.ArgumentParser, choices: Sequence[str] = ("text", "json")) -> None:
    p.add_argument("--format", choices=list(choices), default="text")


def _require(args, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"missing {' '.join(missing)}")


def parse_profile(text: str, d: int, ell: int, normalize: bool = False) -> MessageProfile:
    values = [parse_fraction(v) for v in text.split(",") if v.strip()]
    if normalize:
        total = sum(values, Fraction(0))
        if total <= 0:
            raise BoundsError("profile has no positive weight")
        values = [v / total for v in values]
    return MessageProfile.from_sequence(d, ell, values)


def _profile(args) -> MessageProfile:
    _require(args, "d")
    if args.profile is not None:
        return parse_profile(args.profile, args.d, args.l, args.normalize)
    if args.k is not None:
        if not args.l < args.k <= args.d:
            raise UsageError(f"need ell < k <= d, got k={args.k}")
        return MessageProfile.single(args.d, args.l, args.k)
    raise UsageError("give --profile or --k")


def _check_seed(seed: int) -> None:
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")


def _code(args) -> RegeneratingCode:
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
        return preset_code(args.preset)
    _require(args, "n", "d")
    if args.beta < 1:
        raise UsageError("--beta must be positive")
    if args.profile is None and args.k is not None:
        return build_src(args.n, args.k, args.d, args.l, args.beta)
    profile = _profile(args)
    if not 0 <= args.l < args.d < args.n:
        raise UsageError(f"need 0 <= ell < d < n, got n={args.n}, d={args.d}, ell={args.l}")
    betas = separate_betas(args.d, args.l, profile)
    levels = [Level(j, b * args.beta) for j, b in betas.items()]
    kind = "mdcsr" if len(levels) > 1 else ("src" if args.l else "mbr")
    return RegeneratingCode(args.n, args.d, args.l, levels, kind=kind)


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _first_diff(a: bytes, b: bytes) -> int | None:
    n = min(len(a), len(b))
    x = np.frombuffer(a, dtype=np.uint8, count=n)
    y = np.frombuffer(b, dtype=np.uint8, count=n)
    idx = np.flatnonzero(x != y)
    if idx.size:
        return int(idx[0])
    return None if len(a) == len(b) else n


# -- commands ---------------------------------------------------------------

def cmd_bounds(args) -> int:
    profile = _profile(args)
    families = [f.upper() for f in args.family] if args.family else report_families(profile)
    lines = [bound_line(f, args.d, args.l, profile) for f in families]
    if args.format == "json":
        _emit(_dump([{"tag": l.tag, "c_alpha": frac_str(l.c_alpha), "c_beta": frac_str(l.c_beta),
                      "rhs": frac_str(l.rhs), "text": l.text()} for l in lines]))
    else:
        _emit("".join(l.text() + "\n" for l in lines))
    return EXIT_OK


def cmd_region(args) -> int:
    _require(args, "n")
    report = region_report(args.n, args.d, args.l, _profile(args))
    if args.format == "json":
        _emit(_dump(report))
    elif args.format == "csv":
        _emit(region_csv(report, args.samples))
    else:
        _emit(region_text(report))
    return EXIT_OK


def _read_input(path: str) -> bytes:
    return Path(path).read_bytes()


def cmd_encode(args) -> int:
    _check_seed(args.seed)
    code = _code(args)
    data = _read_input(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shares = encode_bytes(code, data, args.seed)
    files = []
    for header, payload in shares:
        path = share_path(out_dir, header.node_index)
        path.write_bytes(pack_share(header, payload))
        files.append(str(path))
    count, pad = bundle_count(code, len(data))
    info = {"code": repr(code), "bytes": len(data), "bundles": count, "pad": pad,
            "seed": args.seed, "files": files}
    if args.format == "json":
        _emit(_dump(info))
    else:
        _emit(f"{info['code']}\nencoded {len(data)} bytes into {count} bundles (pad {pad})\n"
              + "".join(f"wrote {f}\n" for f in files))
    return EXIT_OK


def _parse_corruption(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--corrupt expects NODE:OFFSET[:MASK], got {text!r}")
    try:
        node, offset = int(parts[0]), int(parts[1])
        mask = int(parts[2], 0) if len(parts) == 3 else 0xFF
    except ValueError:
        raise UsageError(f"--corrupt expects integers, got {text!r}") from None
    if not 1 <= mask <= 255:
        raise UsageError("corruption mask must be in [1, 255]")
    return node, offset, mask


class _CycleFailure(Exception):
    pass


def _repair_cycle(args, code: RegeneratingCode, data: bytes, out_dir: Path) -> dict:
    n, d = code.n, code.d
    target = args.fail
    if not 1 <= target <= n:
        raise UsageError(f"--fail must be in [1, {n}]")
    helpers = ([int(h) for h in args.helpers.split(",")] if args.helpers
               else [i for i in range(1, n + 1) if i != target][:d])
    if len(helpers) != d or len(set(helpers)) != d or target in helpers or \
            any(not 1 <= h <= n for h in helpers):
        raise UsageError(f"need {d} distinct helpers in [1, {n}] other than node {target}")
    corruptions = [_parse_corruption(c) for c in args.corrupt]

    encoded = encode_bytes(code, data, args.seed)
    expected = {h.node_index: h for h, _ in encoded}
    for header, payload in encoded:
        share_path(out_dir, header.node_index).write_bytes(pack_share(header, payload))

    for node, offset, mask in corruptions:
        if not 1 <= node <= n:
            raise UsageError(f"corrupted node {node} outside [1, {n}]")
        path = share_path(out_dir, node)
        blob = bytearray(path.read_bytes())
        if not 0 <= offset < len(blob):
            raise UsageError(f"offset {offset} outside share {node} ({len(blob)} bytes)")
        blob[offset] ^= mask
        path.write_bytes(bytes(blob))

    shares = {}
    for i in range(1, n + 1):
        try:
            header, payload = unpack_share(share_path(out_dir, i).read_bytes())
        except ShareFormatError as exc:
            raise _CycleFailure(f"share {i}: {exc}") from None
        if header != expected[i]:
            raise _CycleFailure(f"share {i}: header does not match the encoding parameters")
        shares[i] = payload_to_share(code, i, payload)

    target_file = share_path(out_dir, target)
    lost = target_file.read_bytes()
    target_file.unlink()
    rebuilt = code.repair(shares, target, helpers)
    blob = pack_share(expected[target], share_to_payload(rebuilt))
    target_file.write_bytes(blob)
    diff = _first_diff(lost, blob)
    if diff is not None:
        raise _CycleFailure(f"regenerated share {target} differs at offset {diff}")
    shares[target] = rebuilt

    size = len(data)
    top = max(lv.k for lv in code.levels)
    checked = 0
    for subset in combinations(range(1, n + 1), top):
        try:
            got = decode_bytes(code, [shares[i] for i in subset], size)
        except CorruptSharesError:
            raise _CycleFailure(f"recovery from nodes {list(subset)}: inconsistent shares") from None
        diff = _first_diff(data, got)
        if diff is not None:
            raise _CycleFailure(f"recovery from nodes {list(subset)} differs at offset {diff}")
        checked += 1

    # lower levels must come back from fewer nodes
    count, pad = bundle_count(code, size)
    if count:
        source = np.frombuffer(data + bytes(pad), dtype=np.uint8).reshape(count, -1).T
        off = 0
        for lv in code.levels:
            block = source[off:off + code.message_size(lv.k)]
            off += code.message_size(lv.k)
            if lv.k == top:
                continue
            for subset in combinations(range(1, n + 1), lv.k):
                try:
                    got = code.recover(lv.k, [shares[i] for i in subset])
                except CorruptSharesError:
                    raise _CycleFailure(f"level {lv.k} from nodes {list(subset)}: inconsistent shares") from None
                if not np.array_equal(got, block):
                    raise _CycleFailure(f"level {lv.k} from nodes {list(subset)} differs")
                checked += 1
    return {"code": repr(code), "bytes": size, "bundles": count, "pad": pad, "seed": args.seed,
            "target": target, "helpers": helpers, "recovery_sets_checked": checked}


def cmd_repair_cycle(args) -> int:
    _check_seed(args.seed)
    code = _code(args)
    data = _read_input(args.input)
    with tempfile.TemporaryDirectory() as tmp:
        out_dir = Path(args.out_dir or tmp)
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            info = _repair_cycle(args, code, data, out_dir)
            info["status"] = "ok"
        except _CycleFailure as exc:
            info = {"code": repr(code), "status": "mismatch", "error": str(exc)}
    if args.format == "json":
        _emit(_dump(info))
    elif info["status"] == "ok":
        _emit(f"{info['code']}\n{info['bytes']} bytes, {info['bundles']} bundles, pad {info['pad']}\n"
              f"node {info['target']} regenerated from {','.join(map(str, info['helpers']))}: identical\n"
              f"recovery sets checked: {info['recovery_sets_checked']}\nOK\n")
    else:
        _emit(f"{info['code']}\nFAIL: {info['error']}\n")
    return EXIT_OK if info["status"] == "ok" else EXIT_FAIL


def cmd_verify(args) -> int:
    _check_seed(args.seed)
    if not args.preset:
        _require(args, "n", "d")
        if args.n != args.d + 1:
            raise UsageError(f"verify needs n = d + 1 (proof checks use n = d + 1 nodes), "
                             f"got n={args.n}, d={args.d}")
    report = run_suite(_code(args), seed=args.seed)
    _emit(report.to_json() if args.format == "json" else report.text())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_secrecy_check(args) -> int:
    code = _code(args)
    ell = code.ell if args.eavesdroppers is None else args.eavesdroppers
    if not 0 <= ell < code.n:
        raise UsageError(f"--eavesdroppers must be in [0, {code.n - 1}]")
    system = register_system(code)
    msgs = system.message_names
    rows = []
    for e in combinations(range(1, code.n + 1), ell):
        leak = mutual_information(system, msgs, eavesdropper_names(code.n, e))
        rows.append({"eavesdropped": list(e), "leakage": frac_str(leak)})
    index = max((Fraction(r["leakage"]) for r in rows), default=Fraction(0))
    out = {"code": repr(code), "ell": ell, "secrecy_index": frac_str(index), "sets": rows}
    if args.format == "json":
        _emit(_dump(out))
    else:
        _emit(f"{out['code']}\n" + "".join(
            f"E={','.join(map(str, r['eavesdropped']))} leakage={r['leakage']}\n" for r in rows)
              + f"secrecy_index {out['secrecy_index']}\n")
    return EXIT_OK if index == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdcsr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="outer-bound lines for (d, ell, profile)")
    _add_shape(p, need_n=False)
    p.add_argument("--family", action="append", help="B1..B7 (repeatable); default per profile")
    _add_format(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("region", help="bound lines, intersections and the achievable point")
    _add_shape(p)
    p.add_argument("--samples", type=int, default=11, help="points per line in csv output")
    _add_format(p, ("text", "json", "csv"))
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("encode", help="encode a file into n share files")
    p.add_argument("input")
    _add_code(p)
    p.add_argument("--out-dir", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("repair-cycle", help="encode, fail a node, regenerate it, recover the file")
    p.add_argument("input")
    _add_code(p)
    p.add_argument("--fail", type=int, default=1, help="node to delete and regenerate")
    p.add_argument("--helpers", help="comma-separated helper nodes (default: first d others)")
    p.add_argument("--corrupt", action="append", default=[], metavar="NODE:OFFSET[:MASK]",
                   help="flip bits of a share file byte before the cycle (repeatable)")
    p.add_argument("--out-dir", help="keep share files here (default: temporary directory)")
    _add_format(p)
    p.set_defaults(func=cmd_repair_cycle)

    p = sub.add_parser("verify", help="run the converse-inequality suite on a code with n = d + 1")
    p.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
    _add_code(p)
    _add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("secrecy-check", help="leakage of repair traffic into ell nodes")
    p.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
    _add_code(p)
    p.add_argument("--eavesdroppers", type=int, help="eavesdropper count (default: the code's ell)")
    _add_format(p)
    p.set_defaults(func=cmd_secrecy_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, BoundsError, CodeError, ProofkitError, ShareFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
