from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdcsr.bounds import (BoundsError, MessageProfile, bound_line, frac_str, intersect_lines,
                          mbr_point, region_csv, region_report, region_text, separate_coding_point,
                          srk_point, t_coeff)
from _oracle import corner_ref, t_ref

TWO_LEVEL = MessageProfile.from_sequence(3, 0, [0, F(1, 3), F(2, 3)])
TOP_LEVEL_6 = MessageProfile.single(6, 1, 6)


def test_t_coeff_values():
    assert t_coeff(6, 6, 1) == 15
    assert t_coeff(3, 3, 0) == 6
    assert t_coeff(3, 2, 0) == 5
    for d in range(1, 9):
        for ell in range(d + 1):
            assert t_coeff(d, ell, ell) == 0
            for k in range(ell, d + 1):
                assert t_coeff(d, k, ell) == t_ref(d, k, ell)


def test_t_coeff_domain():
    with pytest.raises(BoundsError):
        t_coeff(3, 4, 0)
    with pytest.raises(BoundsError):
        t_coeff(3, 1, 2)


def test_telescoping_identity():
    for d in range(1, 13):
        for ell in range(d):
            for m in range(ell + 1, d):
                assert t_coeff(d, m, ell) + (d - m) == t_coeff(d, m + 1, ell)


def test_two_level_lines_and_corner():
    assert bound_line("B1", 3, 0, TWO_LEVEL).coefficients() == (0, 1, F(8, 45))
    assert bound_line("B2", 3, 0, TWO_LEVEL).coefficients() == (1, 3, F(16, 15))
    assert bound_line("B7", 3, 0, TWO_LEVEL).coefficients() == (1, 9, F(32, 15))
    corner = intersect_lines(bound_line("B1", 3, 0, TWO_LEVEL), bound_line("B2", 3, 0, TWO_LEVEL))
    assert (corner.alpha_bar, corner.beta_bar) == (F(8, 15), F(8, 45))
    assert mbr_point(TWO_LEVEL) == corner
    assert separate_coding_point(3, 0, TWO_LEVEL) == corner


def test_secure_top_level_lines_and_corner():
    b5, b6 = bound_line("B5", 6, 1, TOP_LEVEL_6), bound_line("B6", 6, 1, TOP_LEVEL_6)
    assert b5.text() == "b5: beta >= 1/15"
    assert b6.text() == "b6: alpha + 29 beta >= 7/3"
    assert intersect_lines(b5, b6) == srk_point(6, 1, 6)
    assert srk_point(6, 1, 6).as_strings() == ["2/5", "1/15"]


def test_point_examples():
    assert mbr_point(MessageProfile.from_sequence(3, 0, [1, 0, 0])).as_strings() == ["1", "1/3"]
    assert srk_point(2, 1, 2).as_strings() == ["2", "1"]
    for d in range(1, 6):
        for k in range(1, d + 1):
            assert srk_point(d, 0, k) == mbr_point(MessageProfile.single(d, 0, k))
    half = MessageProfile(3, 1, {2: F(1, 2), 3: F(1, 2)})
    assert separate_coding_point(3, 1, half).as_strings() == ["5/4", "5/12"]
    assert separate_coding_point(3, 1, MessageProfile.single(3, 1, 3)) == srk_point(3, 1, 3)


def test_b4_reduces_to_b7_at_ell_zero():
    for d in range(1, 7):
        p = MessageProfile.single(d, 0, d)
        assert bound_line("B4", d, 0, p).coefficients() == bound_line("B7", d, 0, p).coefficients()


def test_family_preconditions():
    with pytest.raises(BoundsError):
        bound_line("B1", 6, 1, TOP_LEVEL_6)
    with pytest.raises(BoundsError):
        bound_line("B5", 3, 0, TWO_LEVEL)
    with pytest.raises(BoundsError):
        bound_line("B9", 3, 0, TWO_LEVEL)
    with pytest.raises(BoundsError):
        srk_point(3, 2, 2)


def test_profile_validation():
    with pytest.raises(BoundsError):
        MessageProfile.from_sequence(3, 0, [1])
    with pytest.raises(BoundsError):
        MessageProfile.from_sequence(3, 0, [F(1, 2), 0, 0])
    with pytest.raises(BoundsError):
        MessageProfile(3, 1, {1: F(1, 2), 3: F(1, 2)})
    with pytest.raises(BoundsError):
        MessageProfile(3, 0, {1: F(-1), 2: F(2)})
    p = MessageProfile.from_sequence(3, 1, [F(1, 2), F(1, 2)])
    assert p.weights == {2: F(1, 2), 3: F(1, 2)}


def test_parallel_lines_rejected():
    with pytest.raises(BoundsError):
        intersect_lines(bound_line("B1", 3, 0, TWO_LEVEL), bound_line("B3", 3, 0, TWO_LEVEL))


@st.composite
def profiles(draw):
    d = draw(st.integers(1, 8))
    ell = draw(st.integers(0, d - 1))
    raw = [draw(st.integers(0, 6)) for _ in range(d - ell)]
    if not any(raw):
        raw[-1] = 1
    total = sum(raw)
    return MessageProfile(d, ell, {ell + 1 + i: F(v, total) for i, v in enumerate(raw)})


@settings(max_examples=50, deadline=None)
@given(profiles())
def test_b3_b4_corner_is_the_superposition_point(p):
    corner = intersect_lines(bound_line("B3", p.d, p.ell, p), bound_line("B4", p.d, p.ell, p))
    assert (corner.alpha_bar, corner.beta_bar) == corner_ref(p.d, p.ell, p.weights)
    assert corner == separate_coding_point(p.d, p.ell, p)


def test_region_report_two_level():
    rep = region_report(4, 3, 0, TWO_LEVEL)
    lines = {(l["c_alpha"], l["c_beta"], l["rhs"]) for l in rep["lines"]}
    assert {("0", "1", "8/45"), ("1", "3", "16/15"), ("1", "9", "32/15")} <= lines
    assert rep["mbr_point"] == ["8/15", "8/45"]
    assert rep["verdict"]["separate_coding_achieves_mbr"]
    assert rep["annotations"]["msr_point_quoted"] == ["7/18", "11/36"]
    assert "annotation msr_point_quoted: (7/18, 11/36)" in region_text(rep)


def test_region_report_secure_and_degenerate():
    rep = region_report(7, 6, 1, TOP_LEVEL_6)
    lines = {(l["c_alpha"], l["c_beta"], l["rhs"]) for l in rep["lines"]}
    assert lines == {("0", "1", "1/15"), ("1", "29", "7/3")}
    assert rep["mbr_point"] == ["2/5", "1/15"]
    assert "annotations" not in rep
    rep = region_report(5, 4, 0, MessageProfile.single(4, 0, 4))
    assert rep["mbr_point"] == [frac_str(F(4, t_ref(4, 4, 0))), frac_str(F(1, t_ref(4, 4, 0)))]


def test_region_csv_rows_lie_on_lines():
    rep = region_report(4, 3, 0, TWO_LEVEL)
    rows = region_csv(rep, samples=5).splitlines()
    assert rows[0] == "tag,alpha_bar,beta_bar"
    assert len(rows) == 1 + 5 * len(rep["lines"])
    coeff = {l["tag"]: tuple(F(l[k]) for k in ("c_alpha", "c_beta", "rhs")) for l in rep["lines"]}
    for row in rows[1:]:
        tag, a, b = row.split(",")
        ca, cb, rhs = coeff[tag]
        assert ca * F(a) + cb * F(b) == rhs


def test_region_needs_d_below_n():
    with pytest.raises(BoundsError):
        region_report(3, 3, 0, MessageProfile.single(3, 0, 3))
