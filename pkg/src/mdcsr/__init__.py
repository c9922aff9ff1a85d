"""Secure multilevel regenerating codes over GF(256): construction, outer
bounds and instance-level verification of the converse inequalities."""
from __future__ import annotations

from .bounds import MessageProfile, RatePoint, bound_line, intersect_lines, separate_coding_point, srk_point
from .codes import CodeSpec, RegeneratingCode, build_code, build_mdcsr_separate, build_pm_mbr, build_src
from .entropy import register_system, secrecy_index
from .proofkit import run_suite

__all__ = [
    "MessageProfile", "RatePoint", "bound_line", "intersect_lines", "separate_coding_point",
    "srk_point", "CodeSpec", "RegeneratingCode", "build_code", "build_mdcsr_separate",
    "build_pm_mbr", "build_src", "register_system", "secrecy_index", "run_suite",
]
__version__ = "0.1.0"
