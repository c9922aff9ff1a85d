"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or
``python3 tests/test_acceptance.py``; the lines are also repeated in the
pytest terminal summary.
"""
from __future__ import annotations

import subprocess
import sys
import time
from fractions import Fraction as F
from itertools import combinations
from pathlib import Path

import numpy as np

from mdcsr.bounds import (MessageProfile, bound_line, intersect_lines, separate_coding_point,
                          srk_point)
from mdcsr.cli import main as cli_main
from mdcsr.codes import build_mdcsr_separate, build_pm_mbr, build_src
from mdcsr.entropy import han_check, register_system, secrecy_index
from mdcsr.proofkit import admissible_tuples, build_tau, preset_code, run_suite
from _oracle import corner_ref


def test_criterion_1_two_level_golden(criterion):
    def body():
        p = MessageProfile.from_sequence(3, 0, [0, F(1, 3), F(2, 3)])
        b1, b2, b7 = (bound_line(t, 3, 0, p) for t in ("B1", "B2", "B7"))
        assert b1.coefficients() == (0, 1, F(8, 45)), b1
        assert b2.coefficients() == (1, 3, F(16, 15)), b2
        assert b7.coefficients() == (1, 9, F(32, 15)), b7
        corner = intersect_lines(b1, b2)
        assert (corner.alpha_bar, corner.beta_bar) == (F(8, 15), F(8, 45)), corner
    criterion(1, "two-level (4,3,0) golden values", body, 1.0)


def test_criterion_2_secure_golden(criterion):
    def body():
        p = MessageProfile.single(6, 1, 6)
        b5, b6 = bound_line("B5", 6, 1, p), bound_line("B6", 6, 1, p)
        assert b5.coefficients() == (0, 1, F(1, 15)), b5
        assert b6.coefficients() == (1, 29, F(7, 3)), b6
        corner = intersect_lines(b5, b6)
        assert (corner.alpha_bar, corner.beta_bar) == (F(2, 5), F(1, 15)), corner
        assert corner == srk_point(6, 1, 6)
    criterion(2, "secure (7,6,6,1) golden values", body, 1.0)


def test_criterion_3_superposition_meets_corner(criterion):
    def body():
        rng = np.random.default_rng(2024)
        for _ in range(200):
            d = int(rng.integers(1, 9))
            ell = int(rng.integers(0, d))
            raw = rng.integers(0, 10, d - ell)
            if raw.sum() == 0:
                raw[int(rng.integers(0, d - ell))] = 1
            total = int(raw.sum())
            p = MessageProfile(d, ell, {ell + 1 + i: F(int(v), total) for i, v in enumerate(raw)})
            corner = intersect_lines(bound_line("B3", d, ell, p), bound_line("B4", d, ell, p))
            point = separate_coding_point(d, ell, p)
            assert point == corner, (d, ell, p.weights)
            assert (corner.alpha_bar, corner.beta_bar) == corner_ref(d, ell, p.weights)
    criterion(3, "separate coding = B3/B4 corner (200 profiles)", body, 10.0)


def test_criterion_4_code_correctness(criterion):
    def body():
        codes = [build_pm_mbr(2, 1, 1), build_pm_mbr(3, 2, 2), build_pm_mbr(4, 3, 3), build_pm_mbr(5, 3, 4),
                 build_src(3, 2, 2, 1), build_src(4, 3, 3, 1)]
        rng = np.random.default_rng(4)
        for code in codes:
            (k,) = [lv.k for lv in code.levels]
            bundle = code.random_bundle(rng, batch=64)
            shares = code.encode(bundle)
            for subset in combinations(shares, k):
                got = code.recover(k, list(subset))
                assert got.tobytes() == bundle.messages[k].tobytes(), (repr(code), subset)
            table = {s.node_index: s for s in shares}
            for f in range(1, code.n + 1):
                others = [i for i in range(1, code.n + 1) if i != f]
                for helpers in combinations(others, code.d):
                    rebuilt = code.repair(table, f, helpers)
                    assert rebuilt.payload.tobytes() == table[f].payload.tobytes(), (repr(code), f, helpers)
    criterion(4, "any-k recovery and exact repair", body, 30.0)


def test_criterion_5_secrecy_certificates(criterion):
    def body():
        secure = [build_src(3, 2, 2, 1), build_src(4, 3, 3, 1), build_src(5, 3, 4, 1),
                  build_mdcsr_separate(4, 3, 1, [F(1, 2), F(1, 2)]),
                  build_mdcsr_separate(7, 6, 1, [0, 0, 0, 0, 1])]
        for code in secure:
            assert secrecy_index(register_system(code), 1) == 0, repr(code)
        baseline = secrecy_index(register_system(build_pm_mbr(3, 2, 2)), 1)
        assert baseline > 0, "plain MBR should leak"
    criterion(5, "secrecy index 0, baseline leaks", body, 10.0)


def test_criterion_6_proof_machinery(criterion):
    def body():
        for name, d in (("src-3221", 2), ("src-4331", 3)):
            rep = run_suite(preset_code(name))
            assert rep.passed, [c.line() for c in rep.failures()][:3]
            tags = {c.tag for c in rep.checks}
            required = {"lemma1", "exchange", "prop1-chain", "prop1", "prop2-submod", "prop2", "prop3",
                        "qq-induction", "B3", "B4"}
            if d >= 3:  # corollaries need m in [ell+1, d-1] with ell = 1
                required |= {"coro1", "coro2", "prop3-chain"}
            assert required <= tags, required - tags
            n_lemma = sum(c.tag == "lemma1" for c in rep.checks)
            assert n_lemma == sum(s for s in range(1, d + 2)), name
            n_exchange = sum(c.tag == "exchange" for c in rep.checks)
            assert n_exchange == len(admissible_tuples(d)), name
            for c in rep.checks:
                if c.tag == "exchange" and c.params[3] == c.params[0] + 1:
                    assert c.slack == 0, c.line()
                if c.tag in ("B3", "B4"):
                    assert c.slack == 0, c.line()
    criterion(6, "proof-machinery suite", body, 120.0)


def test_criterion_7_tau_partition(criterion):
    def body():
        count = 0
        for d in range(2, 7):
            for m, i, ip, j in admissible_tuples(d, include_equality=False):
                t = build_tau(d, m, i, ip, j)
                blocks = [t.tau[q] for q in range(t.s + 1)]
                assert sum(len(b) for b in blocks) == len(set().union(*blocks)), (d, m, i, ip, j)
                lower = set().union(*blocks[:-1])
                assert lower == set(range(ip + 1, i + 1)) | set(range(i + j - ip, m + 1)), (d, m, i, ip, j)
                assert blocks[-1] == set(range(m + 2, d + 2)), (d, m, i, ip, j)
                count += 1
        assert count > 0
    criterion(7, "tau partition bullets, d <= 6", body, 5.0)


def _sample_sets(rng, names, low=0, high=6):
    size = int(rng.integers(low, min(high, len(names)) + 1))
    return frozenset(rng.choice(names, size=size, replace=False).tolist()) if size else frozenset()


def test_criterion_8_oracle_soundness(criterion):
    def body():
        rng = np.random.default_rng(8)
        codes = [preset_code(n) for n in ("mbr-211", "mbr-322", "mbr-433", "src-3221", "src-4331", "mdcsr-4331")]
        codes.append(build_pm_mbr(5, 3, 4))
        for code in codes:
            sys_ = register_system(code)
            systems = [sys_] + ([sys_.symmetrized()] if code.n <= 3 else [])
            names = sorted(sys_.names())
            for s in systems:
                h = s.h
                assert h(frozenset()) == 0
                for _ in range(1000):
                    a, b = _sample_sets(rng, names), _sample_sets(rng, names)
                    assert h(a) <= h(a | b), (repr(code), a, b)
                    assert h(a) + h(b) >= h(a | b) + h(a & b), (repr(code), a, b)
                for _ in range(1000):
                    items = [_sample_sets(rng, names, 1, 2) for _ in range(int(rng.integers(2, 4)))]
                    given = _sample_sets(rng, names, 0, 2)
                    for r, avg, bound in han_check(s, items, given):
                        assert avg >= bound, (repr(code), items, given, r)
    criterion(8, "polymatroid axioms and subset inequality", body, 60.0)


def test_criterion_9_end_to_end_cli(criterion, tmp_path, capsys):
    def body():
        data = tmp_path / "one_mib.bin"
        data.write_bytes(np.random.default_rng(9).integers(0, 256, 1 << 20, dtype=np.uint8).tobytes())
        shape = ["--n", "5", "--d", "4", "--k", "3", "--fail", "2", "--seed", "1"]
        start = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "mdcsr", "repair-cycle", str(data), *shape],
                              capture_output=True, text=True)
        elapsed = time.perf_counter() - start
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert elapsed < 10.0, f"clean cycle took {elapsed:.2f}s"
        # header, level table, payload start/middle/end and trailer of every share
        share_len = 4 + 8 + 6 + 7 + -(-(1 << 20) // 9) * 4 + 12
        offsets = [0, 5, 13, 18, 20, 23, 25, 26, share_len // 2, share_len - 13, share_len - 12, share_len - 1]
        for node in range(1, 6):
            for off in offsets:
                code = cli_main(["repair-cycle", str(data), *shape, "--corrupt", f"{node}:{off}"])
                capsys.readouterr()
                assert code == 1, f"corrupting node {node} byte {off} went unnoticed"
    criterion(9, "1 MiB repair-cycle and fault injection", body, 120.0)


if __name__ == "__main__":
    import pytest

    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider",
                                  "--rootdir", str(Path(__file__).resolve().parent.parent)]))
