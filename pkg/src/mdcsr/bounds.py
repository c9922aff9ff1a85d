"""Closed-form rate points and outer bounds, in exact rationals.

All quantities are normalized by the total secure message size, so a
point is a pair (alpha_bar, beta_bar) of ``Fraction`` and a bound is a
half-plane ``c_alpha * alpha_bar + c_beta * beta_bar >= rhs``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

TAGS = ("B1", "B2", "B3", "B4", "B5", "B6", "B7")

# MSR corner of the two-level (n=4, d=3) example, quoted from prior work;
# shown as an annotation only since no formula for it is implemented here.
TWO_LEVEL_MSR_ANNOTATION = (Fraction(7, 18), Fraction(11, 36))


class BoundsError(ValueError):
    pass


def frac_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise BoundsError(f"not a rational number: {text!r}") from exc


def t_coeff(d: int, k: int, ell: int) -> int:
    """Sum over t in [ell+1, k] of (d + 1 - t)."""
    if not 0 <= ell <= k <= d:
        raise BoundsError(f"need 0 <= ell <= k <= d, got d={d}, k={k}, ell={ell}")
    return sum(d + 1 - t for t in range(ell + 1, k + 1))


@dataclass(frozen=True)
class MessageProfile:
    d: int
    ell: int
    weights: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 <= self.ell < self.d:
            raise BoundsError(f"need 0 <= ell < d, got d={self.d}, ell={self.ell}")
        w = {int(j): Fraction(v) for j, v in self.weights.items()}
        for j, v in w.items():
            if not self.ell + 1 <= j <= self.d:
                if v != 0:
                    raise BoundsError(f"level {j} outside [{self.ell + 1}, {self.d}] has nonzero weight")
            if v < 0:
                raise BoundsError(f"negative weight on level {j}")
        w = {j: w.get(j, Fraction(0)) for j in range(self.ell + 1, self.d + 1)}
        if sum(w.values()) != 1:
            raise BoundsError(f"weights must sum to 1, got {frac_str(sum(w.values()))}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_sequence(cls, d: int, ell: int, values: Iterable) -> "MessageProfile":
        """Accepts d weights (levels 1..d) or d - ell weights (levels ell+1..d)."""
        vals = [v if isinstance(v, Fraction) else parse_fraction(str(v)) for v in values]
        if len(vals) == d:
            start = 1
        elif len(vals) == d - ell:
            start = ell + 1
        else:
            want = f"{d}" if ell == 0 else f"{d} (or {d - ell})"
            raise BoundsError(f"profile needs {want} weights, got {len(vals)}")
        return cls(d, ell, {start + i: v for i, v in enumerate(vals)})

    @classmethod
    def single(cls, d: int, ell: int, k: int) -> "MessageProfile":
        return cls(d, ell, {k: Fraction(1)})

    @property
    def levels(self) -> list[int]:
        return [j for j, v in self.weights.items() if v > 0]

    @property
    def is_single_level(self) -> bool:
        return len(self.levels) == 1

    def weighted_inverse_sum(self) -> Fraction:
        """Sum over levels of B_bar_j / T(d, j, ell)."""
        return sum((v / t_coeff(self.d, j, self.ell) for j, v in self.weights.items() if v),
                   Fraction(0))


@dataclass(frozen=True)
class RatePoint:
    alpha_bar: Fraction
    beta_bar: Fraction

    def as_strings(self) -> list[str]:
        return [frac_str(self.alpha_bar), frac_str(self.beta_bar)]

    def __str__(self) -> str:
        return f"({frac_str(self.alpha_bar)}, {frac_str(self.beta_bar)})"


@dataclass(frozen=True)
class BoundLine:
    c_alpha: Fraction
    c_beta: Fraction
    rhs: Fraction
    tag: str

    def __post_init__(self) -> None:
        if self.c_alpha == 0 and self.c_beta == 0:
            raise BoundsError("degenerate bound line")

    def slack(self, p: RatePoint) -> Fraction:
        return self.c_alpha * p.alpha_bar + self.c_beta * p.beta_bar - self.rhs

    def holds(self, p: RatePoint) -> bool:
        return self.slack(p) >= 0

    def coefficients(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.c_alpha, self.c_beta, self.rhs)

    def text(self) -> str:
        terms = []
        for coef, name in ((self.c_alpha, "alpha"), (self.c_beta, "beta")):
            if coef == 0:
                continue
            terms.append(name if coef == 1 else f"{frac_str(coef)} {name}")
        return f"{self.tag.lower()}: {' + '.join(terms)} >= {frac_str(self.rhs)}"


def mbr_point(profile: MessageProfile) -> RatePoint:
    if profile.ell != 0:
        raise BoundsError("mbr_point is the ell = 0 formula; use separate_coding_point")
    s = profile.weighted_inverse_sum()
    return RatePoint(profile.d * s, s)


def srk_point(d: int, ell: int, k: int) -> RatePoint:
    if ell >= k:
        raise BoundsError("secrecy impossible: need ell < k")
    t = t_coeff(d, k, ell)
    return RatePoint(Fraction(d, t), Fraction(1, t))


def bound_line(family: str, d: int, ell: int, profile: MessageProfile) -> BoundLine:
    family = family.upper()
    if family not in TAGS:
        raise BoundsError(f"unknown bound family {family!r}")
    if (profile.d, profile.ell) != (d, ell):
        raise BoundsError("profile does not match (d, ell)")
    if family in ("B1", "B2", "B7") and ell != 0:
        raise BoundsError(f"{family} is an ell = 0 bound")
    if family in ("B5", "B6") and not profile.is_single_level:
        raise BoundsError(f"{family} needs a single-level profile")
    s = profile.weighted_inverse_sum()
    one, zero = Fraction(1), Fraction(0)
    if family == "B1":
        return BoundLine(zero, one, s, family)
    if family == "B2":
        return BoundLine(one, Fraction(d * (d - 1), 2), Fraction(d * (d + 1), 2) * s, family)
    if family in ("B3", "B5"):
        return BoundLine(zero, one, s, family)
    if family in ("B4", "B6"):
        return BoundLine(one, Fraction(d * (d - ell) - ell), (d - ell) * (d + 1) * s, family)
    return BoundLine(one, Fraction(d * d), d * (d + 1) * s, family)


def intersect_lines(l1: BoundLine, l2: BoundLine) -> RatePoint:
    det = l1.c_alpha * l2.c_beta - l2.c_alpha * l1.c_beta
    if det == 0:
        raise BoundsError(f"lines {l1.tag} and {l2.tag} are parallel")
    a = (l1.rhs * l2.c_beta - l2.rhs * l1.c_beta) / det
    b = (l1.c_alpha * l2.rhs - l2.c_alpha * l1.rhs) / det
    return RatePoint(a, b)


def separate_coding_point(d: int, ell: int, profile: MessageProfile) -> RatePoint:
    if (profile.d, profile.ell) != (d, ell):
        raise BoundsError("profile does not match (d, ell)")
    a = b = Fraction(0)
    for j, w in profile.weights.items():
        if w:
            p = srk_point(d, ell, j)
            a += w * p.alpha_bar
            b += w * p.beta_bar
    return RatePoint(a, b)


def report_families(profile: MessageProfile) -> list[str]:
    if profile.ell == 0:
        return ["B1", "B2", "B7"]
    if profile.is_single_level:
        return ["B5", "B6"]
    return ["B3", "B4"]


def _is_two_level_example(n: int, profile: MessageProfile) -> bool:
    return (n, profile.d, profile.ell) == (4, 3, 0) and profile.weights == {
        1: Fraction(0), 2: Fraction(1, 3), 3: Fraction(2, 3)}


def region_report(n: int, d: int, ell: int, profile: MessageProfile) -> dict:
    """Bound lines, their intersections and the separate-coding point.

    Values are rendered as "p/q" strings so the report is byte-stable.
    """
    if d >= n:
        raise BoundsError("need d < n")
    families = report_families(profile)
    lines = [bound_line(f, d, ell, profile) for f in sorted(families)]
    intersections = []
    for l1, l2 in combinations(lines, 2):
        try:
            p = intersect_lines(l1, l2)
        except BoundsError:
            continue
        intersections.append({"lines": [l1.tag, l2.tag], "point": p.as_strings()})
    # The MBR point is where the horizontal bound meets the sloped one with
    # the smallest slope (B2 at ell = 0, otherwise B4/B6).
    pair = {"B1": "B2", "B3": "B4", "B5": "B6"}
    flat = lines[0]
    mbr = intersect_lines(flat, next(l for l in lines if l.tag == pair[flat.tag]))
    achieved = separate_coding_point(d, ell, profile)
    slacks = {l.tag: l.slack(achieved) for l in lines}
    report = {
        "n": n,
        "d": d,
        "ell": ell,
        "profile": {str(j): frac_str(w) for j, w in profile.weights.items()},
        "lines": [
            {"tag": l.tag, "c_alpha": frac_str(l.c_alpha), "c_beta": frac_str(l.c_beta),
             "rhs": frac_str(l.rhs), "text": l.text()}
            for l in lines
        ],
        "intersections": intersections,
        "mbr_point": mbr.as_strings(),
        "separate_coding_point": achieved.as_strings(),
        "verdict": {
            "all_bounds_hold": all(s >= 0 for s in slacks.values()),
            "tight": [t for t, s in slacks.items() if s == 0],
            "slack": {t: frac_str(s) for t, s in slacks.items()},
            "separate_coding_achieves_mbr": achieved == mbr,
        },
    }
    if _is_two_level_example(n, profile):
        report["annotations"] = {"msr_point_quoted": [frac_str(x) for x in TWO_LEVEL_MSR_ANNOTATION]}
    return report


def region_text(report: dict) -> str:
    out = [f"region n={report['n']} d={report['d']} ell={report['ell']}"]
    out += [line["text"] for line in report["lines"]]
    for item in report["intersections"]:
        a, b = item["point"]
        out.append(f"intersection {item['lines'][0]} ^ {item['lines'][1]}: ({a}, {b})")
    out.append("mbr_point: ({}, {})".format(*report["mbr_point"]))
    out.append("separate_coding_point: ({}, {})".format(*report["separate_coding_point"]))
    v = report["verdict"]
    out.append(f"verdict: all_bounds_hold={v['all_bounds_hold']} "
               f"separate_coding_achieves_mbr={v['separate_coding_achieves_mbr']} "
               f"tight={','.join(v['tight'])}")
    if "annotations" in report:
        out.append("annotation msr_point_quoted: ({}, {})".format(*report["annotations"]["msr_point_quoted"]))
    return "\n".join(out) + "\n"


def region_csv(report: dict, samples: int = 11) -> str:
    """Polyline samples of each bound line for plotting.

    alpha_bar runs over [0, 2 * alpha_mbr]; every line here has c_beta != 0.
    """
    top = 2 * Fraction(report["mbr_point"][0])
    rows = ["tag,alpha_bar,beta_bar"]
    for line in report["lines"]:
        ca, cb, rhs = (Fraction(line[k]) for k in ("c_alpha", "c_beta", "rhs"))
        for i in range(samples):
            a = top * i / (samples - 1)
            rows.append(f"{line['tag']},{frac_str(a)},{frac_str((rhs - ca * a) / cb)}")
    return "\n".join(rows) + "\n"
