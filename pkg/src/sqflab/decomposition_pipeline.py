"""Exact decomposition of the progression error term and its dyadic majorization.

The error term E factors through the square-part identity into a weighted
sum of interval discrepancies.  This module reproduces that identity
exactly, splits off the small-n tail, enumerates the dyadic boxes that
cover the remaining double sum, and assembles a per-stage report in which
|E| is bounded by fully computed quantities: box counts, the exact tail,
and the exact removed main term.  No implied constants appear anywhere in
the asserted inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sqflab.arith_core import Modulus, NotCoprimeError, mobius_sieve, mod_pow
from sqflab.congruence_count import count_dyadic, evaluate_bounds, BoxQuery, pierce_applicable
from sqflab.progression_stats import (
    Real,
    count_coprime,
    discrepancy,
    error_term,
)


@lru_cache(maxsize=8)
def _mu_prefix(limit: int) -> tuple[int, ...]:
    """mu(1..limit) as a tuple; index i holds mu(i+1)."""
    return tuple(mobius_sieve(limit).mu)


def _decomposition_terms(x: Real, modulus: Modulus, a: int):
    """Yield (n, term) with term = mu(n) * discrepancy(x/n^2, q, a*inv(n)^2)."""
    fx = math.floor(x)
    n_max = isqrt(fx)
    if n_max < 1:
        return
    mu = _mu_prefix(n_max)
    q = modulus.q
    x_exact = Fraction(x)
    for n in range(1, n_max + 1):
        m = mu[n - 1]
        if m == 0 or gcd(n, q) != 1:
            continue
        shifted = a * mod_pow(n, -2, q) % q
        yield n, m * discrepancy(x_exact / (n * n), modulus, shifted)


def decompose_error(x: Real, modulus: Modulus, a: int) -> Fraction:
    """Error term reassembled from the square-part identity, exactly.

    Must equal error_term(x, q, a).error for every input; the equality is
    the central correctness check of the pipeline.
    """
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    a %= modulus.q
    if gcd(a, modulus.q) != 1:
        raise NotCoprimeError(f"residue {a} is not coprime to {modulus.q}")
    total = Fraction(0)
    for _, term in _decomposition_terms(x, modulus, a):
        total += term
    return total


@dataclass(frozen=True)
class TailSplit:
    """Exact split of the decomposed error at the small-n cutoff."""

    head: Fraction
    tail: Fraction

    @property
    def total(self) -> Fraction:
        return self.head + self.tail


def tail_split(x: Real, modulus: Modulus, a: int, n0: Real) -> TailSplit:
    """Split the decomposition into n <= n0 (tail) and n > n0 (head).

    head + tail reassembles the full error term exactly; the tail is the
    part the analysis absorbs into an O(N0) allowance, computed here
    instead of bounded.
    """
    if n0 < 1 or float(n0) > math.sqrt(float(x)):
        raise ValueError(f"n0 must lie in [1, sqrt(x)], got {n0}")
    a %= modulus.q
    if gcd(a, modulus.q) != 1:
        raise NotCoprimeError(f"residue {a} is not coprime to {modulus.q}")
    head = Fraction(0)
    tail = Fraction(0)
    for n, term in _decomposition_terms(x, modulus, a):
        if n <= n0:
            tail += term
        else:
            head += term
    return TailSplit(head=head, tail=tail)


def small_m_estimate(m_bound: Real, n_bound: Real, modulus: Modulus) -> float:
    """Crude per-column estimate M * (N/q + 1) for boxes with small M."""
    return float(m_bound) * (float(n_bound) / modulus.q + 1.0)


def enumerate_boxes(
    x: Real,
    n0: Real,
    m0: Real = 1,
    condition: str = "with-m-floor",
) -> list[tuple[float, float]]:
    """Dyadic (M, N) anchors meeting the selected region conditions.

    Anchors are m0 * 2^i and n0 * 2^j.  condition="pre-cut" keeps the
    N-range cap N <= 2*sqrt(x); condition="with-m-floor" is the region used
    after small-M columns are split off (M >= m0, N >= n0, M*N^2 <= 8x).
    Deterministic ordering by (M, N).
    """
    if condition not in ("pre-cut", "with-m-floor"):
        raise ValueError(f"unknown condition set {condition!r}")
    if n0 < 1 or m0 < 1:
        raise ValueError("anchors must be >= 1")
    xf = float(x)
    boxes: list[tuple[float, float]] = []
    cap = 8 * xf
    n_cap = 2 * math.sqrt(xf)
    m_anchor = float(m0)
    while m_anchor * float(n0) ** 2 <= cap:
        n_anchor = float(n0)
        while m_anchor * n_anchor**2 <= cap:
            if condition == "pre-cut" and n_anchor > n_cap:
                break
            boxes.append((m_anchor, n_anchor))
            n_anchor *= 2
        m_anchor *= 2
    return boxes


@dataclass(frozen=True)
class BoxRow:
    """One dyadic box inside a pipeline report."""

    m_anchor: float
    n_anchor: float
    count: int
    regime: str
    bound: float
    ratio: float
    amplification_applicable: bool

    def as_dict(self) -> dict:
        return {
            "m_anchor": self.m_anchor,
            "n_anchor": self.n_anchor,
            "count": self.count,
            "regime": self.regime,
            "bound": self.bound,
            "ratio": self.ratio,
            "amplification_applicable": self.amplification_applicable,
        }


def covering_boxes(x: Real, n0: Real) -> list[tuple[float, float]]:
    """Dyadic anchors whose boxes cover every (m, n) pair of the head sum.

    m-anchors start at 1/2 so the column m = 1 is covered by (1/2, 1]; the
    analysis region starts at M >= 1, but an exact majorization cannot
    afford to lose that column.  n-anchors start at n0 exactly, matching
    the strict n > n0 cutoff of the head.
    """
    fx = math.floor(x)
    n_max = isqrt(fx)
    boxes: list[tuple[float, float]] = []
    n_anchor = float(n0)
    while n_anchor < n_max:
        m_cap = float(x) / n_anchor**2
        m_anchor = 0.5
        while m_anchor < m_cap:
            boxes.append((m_anchor, n_anchor))
            m_anchor *= 2
        n_anchor *= 2
    return sorted(boxes)


def default_anchor_choices(x: Real, q: int) -> tuple[float, float]:
    """Default (m0, n0): the exponent-optimal anchors, clamped to validity.

    m0 = 2*max(x*q^(-3/2), 1) and n0 = 2*sqrt(x)*q^(-3/8); n0 is clamped
    into [1, sqrt(x)] since tiny q pushes the formula outside the region
    where a tail split makes sense.
    """
    xf = float(x)
    m0 = 2.0 * max(xf * q**-1.5, 1.0)
    n0 = 2.0 * math.sqrt(xf) * q**-0.375
    n0 = min(max(n0, 1.0), math.sqrt(xf))
    return m0, n0


@dataclass(frozen=True)
class PipelineReport:
    """Per-stage record of one full decomposition run.

    The two assertions baked in at construction time are the exact identity
    (e_direct == e_decomposed) and the exact majorization
    |E| <= sum of box counts + |tail| + main_term_removed.
    `esup_reference` is the analysis-shaped right side
    (log x)^2 * sup + m0 + n0 + x/(n0*q) with constant 1, kept as a float
    for ratio monitoring only.
    """

    x: Real
    modulus: Modulus
    residue: int
    m0: float
    n0: float
    alpha: Fraction
    e_direct: Fraction
    e_decomposed: Fraction
    head: Fraction
    tail_small_n: Fraction
    main_term_removed: Fraction
    boxes: tuple[BoxRow, ...]
    sum_box_counts: int
    sup_box_count: int
    majorization_rhs: Fraction
    esup_reference: float

    @property
    def identity_ok(self) -> bool:
        return self.e_direct == self.e_decomposed

    @property
    def majorization_ok(self) -> bool:
        return abs(self.e_direct) <= self.majorization_rhs

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "q": self.modulus.q,
            "a": self.residue,
            "m0": self.m0,
            "n0": self.n0,
            "alpha": str(self.alpha),
            "e_direct": str(self.e_direct),
            "e_decomposed": str(self.e_decomposed),
            "identity_ok": self.identity_ok,
            "head": str(self.head),
            "tail_small_n": str(self.tail_small_n),
            "main_term_removed": str(self.main_term_removed),
            "sum_box_counts": self.sum_box_counts,
            "sup_box_count": self.sup_box_count,
            "majorization_lhs": str(abs(self.e_direct)),
            "majorization_rhs": str(self.majorization_rhs),
            "majorization_ok": self.majorization_ok,
            "esup_reference": self.esup_reference,
            "boxes": [row.as_dict() for row in self.boxes],
        }


def _cross_term(x: Real, modulus: Modulus, n0: Real) -> Fraction:
    """Exact 1/phi(q) part removed from the head: sum of coprime counts."""
    fx = math.floor(x)
    n_max = isqrt(fx)
    mu = _mu_prefix(n_max) if n_max >= 1 else ()
    q = modulus.q
    x_exact = Fraction(x)
    total = Fraction(0)
    for n in range(1, n_max + 1):
        if n <= n0:
            continue
        if mu[n - 1] == 0 or gcd(n, q) != 1:
            continue
        total += Fraction(count_coprime(x_exact / (n * n), modulus), modulus.phi)
    return total


def _box_row(
    m_anchor: float,
    n_anchor: float,
    modulus: Modulus,
    a: int,
    m0: float,
    alpha: Fraction,
) -> BoxRow:
    count = count_dyadic(m_anchor, n_anchor, modulus, a)
    applicable = pierce_applicable(m_anchor, n_anchor, modulus.q)
    if m_anchor < m0:
        regime = "crude"
        bound = small_m_estimate(m_anchor, n_anchor, modulus)
    elif applicable and pierce_applicable(n_anchor, m_anchor, modulus.q):
        regime = "amplified"
        af = float(alpha)
        bound = (m_anchor ** (2 / 3) * n_anchor**0.25) ** af * (
            m_anchor**0.25 * n_anchor ** (2 / 3)
        ) ** (1 - af)
    else:
        regime = "trivial"
        bound = m_anchor * n_anchor / modulus.q + min(m_anchor, n_anchor)
    ratio = count / bound if bound > 0 else float("inf")
    return BoxRow(
        m_anchor=m_anchor,
        n_anchor=n_anchor,
        count=count,
        regime=regime,
        bound=bound,
        ratio=ratio,
        amplification_applicable=applicable,
    )


def pipeline_report(
    x: Real,
    modulus: Modulus,
    a: int,
    m0: float | None = None,
    n0: float | None = None,
    alpha: Fraction = Fraction(2, 15),
) -> PipelineReport:
    """Run the full decomposition once and assemble the per-stage report.

    Raises RuntimeError if either the exact identity or the exact
    majorization fails; both are internal invariants, so a failure means a
    bug, not unlucky inputs.
    """
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    a %= modulus.q
    if gcd(a, modulus.q) != 1:
        raise NotCoprimeError(f"residue {a} is not coprime to {modulus.q}")
    default_m0, default_n0 = default_anchor_choices(x, modulus.q)
    m0 = default_m0 if m0 is None else float(m0)
    n0 = default_n0 if n0 is None else float(n0)

    direct = error_term(x, modulus, a)
    decomposed = decompose_error(x, modulus, a)
    split = tail_split(x, modulus, a, n0)
    cross = _cross_term(x, modulus, n0)

    rows = tuple(
        _box_row(m_anchor, n_anchor, modulus, a, m0, alpha)
        for m_anchor, n_anchor in covering_boxes(x, n0)
    )
    sum_counts = sum(row.count for row in rows)
    sup_count = max((row.count for row in rows), default=0)
    rhs = Fraction(sum_counts) + abs(split.tail) + cross

    xf = float(x)
    esup = (
        math.log(xf) ** 2 * sup_count + m0 + n0 + xf / (n0 * modulus.q)
    )
    report = PipelineReport(
        x=x,
        modulus=modulus,
        residue=a,
        m0=m0,
        n0=n0,
        alpha=alpha,
        e_direct=direct.error,
        e_decomposed=decomposed,
        head=split.head,
        tail_small_n=split.tail,
        main_term_removed=cross,
        boxes=rows,
        sum_box_counts=sum_counts,
        sup_box_count=sup_count,
        majorization_rhs=rhs,
        esup_reference=esup,
    )
    if not report.identity_ok:
        raise RuntimeError(
            f"decomposition identity violated: {report.e_direct} != {report.e_decomposed}"
        )
    if not report.majorization_ok:
        raise RuntimeError(
            f"majorization violated: |{report.e_direct}| > {report.majorization_rhs}"
        )
    return report
