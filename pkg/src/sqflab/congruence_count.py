"""Counting solutions of m^u = a*n^v (mod q) inside boxes, with bound envelopes.

Counts are exact integers obtained by solving for the residue class of m at
each admissible n and counting lattice points by division; the cost is
O(N * roots), never O(M*N).  Negative exponents follow the convention that
n^v means the modular inverse of n raised to |v|.

Bound envelopes (trivial, Weil, Pierce amplification, and the alpha
interpolation between the two Pierce orientations) are evaluated with
implied constant 1; callers get measured count/bound ratios and decide what
to make of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from sqflab.arith_core import Modulus, NotCoprimeError, mod_pow
from sqflab.progression_stats import Real, count_ap


def sqrt_mod_prime(c: int, p: int) -> list[int]:
    """All x in [0, p) with x*x = c (mod p), p prime.

    Tonelli-Shanks in the general case; p = 2 and c = 0 are handled directly,
    and quadratic non-residues return the empty list.
    """
    c %= p
    if p == 2:
        return [c]
    if c == 0:
        return [0]
    ls = pow(c, (p - 1) // 2, p)
    if ls == p - 1:
        return []
    if p % 4 == 3:
        r = pow(c, (p + 1) // 4, p)
        return sorted({r, p - r})
    # Tonelli-Shanks: write p-1 = s * 2^e with s odd.
    s, e = p - 1, 0
    while s % 2 == 0:
        s //= 2
        e += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    base = pow(z, s, p)
    r = pow(c, (s + 1) // 2, p)
    t = pow(c, s, p)
    m = e
    while t != 1:
        i, sq = 0, t
        while sq != 1:
            sq = sq * sq % p
            i += 1
        b = pow(base, 1 << (m - i - 1), p)
        r = r * b % p
        base = b * b % p
        t = t * base % p
        m = i
    return sorted({r, p - r})


def _crt_basis(modulus: Modulus) -> list[int]:
    """e_i with e_i = 1 mod p_i and 0 mod the other prime factors."""
    q = modulus.q
    basis = []
    for p in modulus.prime_factors:
        m = q // p
        basis.append(m * pow(m, -1, p) % q)
    return basis


def power_roots(c: int, modulus: Modulus, u: int) -> list[int]:
    """All residues x mod q with x**u = c (mod q), for u in {1, 2}.

    Squarefree q lets the u = 2 case reduce to one square root per prime
    factor, recombined through the Chinese remainder basis.  Exponents
    u >= 3 are outside the supported surface and raise.
    """
    q = modulus.q
    c %= q
    if u == 1:
        return [c]
    if u != 2:
        raise ValueError(f"unsupported exponent u={u}; only u in {{1, 2}} is implemented")
    if q == 1:
        return [0]
    per_prime = []
    for p in modulus.prime_factors:
        roots = sqrt_mod_prime(c, p)
        if not roots:
            return []
        per_prime.append(roots)
    basis = _crt_basis(modulus)
    combined = [0]
    for roots, e in zip(per_prime, basis):
        combined = [(x + r * e) % q for x in combined for r in roots]
    return sorted(combined)


@dataclass(frozen=True)
class BoxQuery:
    """Parameters of one congruence-box count.

    dyadic=False counts over [1, m_bound] x [1, n_bound]; dyadic=True counts
    over the half-open box (m_bound, 2*m_bound] x (n_bound, 2*n_bound].
    """

    u: int
    v: int
    m_bound: Real
    n_bound: Real
    modulus: Modulus
    residue: int
    dyadic: bool = False

    def __post_init__(self) -> None:
        if self.u <= 0:
            raise ValueError(f"u must be positive, got {self.u}")
        if self.v == 0:
            raise ValueError("v must be nonzero")
        if gcd(self.residue, self.modulus.q) != 1:
            raise NotCoprimeError(
                f"residue {self.residue} is not coprime to {self.modulus.q}"
            )


def _count_in_range(lo: Real, hi: Real, q: int, a: int) -> int:
    """#{lo < m <= hi : m = a (mod q)}, m ranging over positive integers."""
    return count_ap(hi, q, a) - count_ap(lo, q, a)


def class_count(
    u: int,
    v: int,
    m_lo: Real,
    m_hi: Real,
    n_lo: Real,
    n_hi: Real,
    modulus: Modulus,
    a: int,
) -> int:
    """Solutions of m^u = a*n^v (mod q) with m in (m_lo, m_hi], n in (n_lo, n_hi].

    Diagnostic entry point: `a` may be any residue (the sum rule over all
    classes needs the non-unit ones).  For v < 0, n runs over the n coprime
    to q only; other n cannot satisfy the congruence and are skipped.
    """
    q = modulus.q
    a %= q
    total = 0
    # Integers in (n_lo, n_hi] are floor(n_lo)+1 .. floor(n_hi).
    n_first = max(math.floor(n_lo), 0) + 1
    n_last = math.floor(n_hi)
    root_cache: dict[int, list[int]] = {}
    for n in range(n_first, n_last + 1):
        if v < 0 and gcd(n, q) != 1:
            continue
        c = a * mod_pow(n, v, q) % q
        roots = root_cache.get(c)
        if roots is None:
            roots = power_roots(c, modulus, u)
            root_cache[c] = roots
        for r in roots:
            total += _count_in_range(m_lo, m_hi, q, r)
    return total


def _assert_count_caps(query: BoxQuery, count: int) -> None:
    """Hard caps provable without implied constants; violation is a bug."""
    q = query.modulus.q
    if query.dyadic:
        m_span = math.floor(2 * query.m_bound) - math.floor(query.m_bound)
        n_span = math.floor(2 * query.n_bound) - math.floor(query.n_bound)
        m_per_class = m_span // q + 1
        n_per_class = n_span // q + 1
    else:
        m_span = math.floor(query.m_bound)
        n_span = math.floor(query.n_bound)
        m_per_class = m_span // q + 1
        n_per_class = n_span // q + 1
    if (query.u, query.v) == (1, -2):
        cap = m_per_class * n_span
    elif (query.u, query.v) == (2, -1):
        cap = (1 << query.modulus.omega) * n_per_class * m_span
    else:
        return
    if count > max(cap, 0):
        raise AssertionError(
            f"count {count} exceeds its provable cap {cap} for {query}"
        )


def count_box(query: BoxQuery) -> int:
    """Exact solution count for the box described by `query`."""
    if query.dyadic:
        count = class_count(
            query.u,
            query.v,
            query.m_bound,
            2 * query.m_bound,
            query.n_bound,
            2 * query.n_bound,
            query.modulus,
            query.residue,
        )
    else:
        count = class_count(
            query.u,
            query.v,
            0,
            query.m_bound,
            0,
            query.n_bound,
            query.modulus,
            query.residue,
        )
    _assert_count_caps(query, count)
    return count


def count_dyadic(m_anchor: Real, n_anchor: Real, modulus: Modulus, a: int) -> int:
    """Solutions of m*n^2 = a (mod q) with m in (M, 2M], n in (N, 2N]."""
    return count_box(
        BoxQuery(
            u=1,
            v=-2,
            m_bound=m_anchor,
            n_bound=n_anchor,
            modulus=modulus,
            residue=a,
            dyadic=True,
        )
    )


@dataclass(frozen=True)
class SymmetryCheck:
    """Pair of counts related by swapping box orientation and exponents."""

    query: BoxQuery
    mirrored: BoxQuery
    count: int
    mirrored_count: int

    @property
    def equal(self) -> bool:
        return self.count == self.mirrored_count


def check_symmetry(query: BoxQuery) -> SymmetryCheck:
    """Compare a count against its mirror with (u, v) -> (-v, -u) and M, N swapped.

    The mirror only exists for v < 0 (otherwise the mirrored u would not be
    positive).  The two exact counts must always agree; the pair is returned
    for reporting.
    """
    if query.v >= 0:
        raise ValueError("symmetry mirror requires v < 0")
    mirrored = BoxQuery(
        u=-query.v,
        v=-query.u,
        m_bound=query.n_bound,
        n_bound=query.m_bound,
        modulus=query.modulus,
        residue=query.residue,
        dyadic=query.dyadic,
    )
    return SymmetryCheck(
        query=query,
        mirrored=mirrored,
        count=count_box(query),
        mirrored_count=count_box(mirrored),
    )


@dataclass(frozen=True)
class BoundReport:
    """Bound envelopes for one box, all with implied constant 1.

    Inapplicable fields (box outside the amplification range) are None, not
    an exception.  `ratios` maps bound name to count/bound for the bounds
    that apply.
    """

    count: int
    trivial: float
    weil: float
    pierce_mn: float | None
    pierce_nm: float | None
    interpolated: float | None
    alpha: Fraction

    def ratios(self) -> dict[str, float | None]:
        out: dict[str, float | None] = {}
        for name in ("trivial", "weil", "pierce_mn", "pierce_nm", "interpolated"):
            bound = getattr(self, name)
            if bound is None or bound == 0.0:
                out[name] = None
            else:
                out[name] = self.count / bound
        return out


def pierce_applicable(m_bound: float, n_bound: float, q: int) -> bool:
    """Amplification range: 1 <= M <= q^(3/4) and 1 <= N < q/2."""
    return 1 <= m_bound <= q**0.75 and 1 <= n_bound < q / 2


def evaluate_bounds(query: BoxQuery, alpha: Fraction = Fraction(2, 15)) -> BoundReport:
    """Evaluate every bound envelope for a box, plus the measured count.

    alpha interpolates between the two amplification orientations; at the
    endpoints it reproduces them exactly, and alpha = 2/15 turns the product
    into a pure power of M*N^2.
    """
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    m = float(query.m_bound)
    n = float(query.n_bound)
    q = query.modulus.q
    count = count_box(query)
    trivial = m * n / q + min(m, n)
    weil = m * n / q + (m + n) / math.sqrt(q) + math.sqrt(q)
    mn_ok = pierce_applicable(m, n, q)
    nm_ok = pierce_applicable(n, m, q)
    pierce_mn = m ** (2 / 3) * n ** 0.25 if mn_ok else None
    pierce_nm = m ** 0.25 * n ** (2 / 3) if nm_ok else None
    interpolated = None
    if mn_ok and nm_ok:
        af = float(alpha)
        interpolated = pierce_mn**af * pierce_nm ** (1 - af)
    return BoundReport(
        count=count,
        trivial=trivial,
        weil=weil,
        pierce_mn=pierce_mn,
        pierce_nm=pierce_nm,
        interpolated=interpolated,
        alpha=alpha,
    )


def geometric_grid(
    q: int,
    lo_exponent: float = 0.25,
    hi_exponent: float = 0.75,
    ratio: float = 2.0,
) -> list[tuple[float, float]]:
    """(M, N) lattice with both sides running over q^lo..q^hi geometrically."""
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    sides = []
    side = q**lo_exponent
    top = q**hi_exponent
    while side <= top * (1 + 1e-12):
        sides.append(side)
        side *= ratio
    return [(m, n) for m in sides for n in sides]


def scan_boxes(
    modulus: Modulus,
    a: int,
    boxes: Iterable[tuple[Real, Real]],
    u: int = 1,
    v: int = -2,
    alpha: Fraction = Fraction(2, 15),
    dyadic: bool = False,
) -> list[tuple[BoxQuery, BoundReport]]:
    """Evaluate bounds over a grid of boxes, ordered by (M, N)."""
    rows = []
    for m_bound, n_bound in sorted(boxes):
        query = BoxQuery(
            u=u,
            v=v,
            m_bound=m_bound,
            n_bound=n_bound,
            modulus=modulus,
            residue=a,
            dyadic=dyadic,
        )
        rows.append((query, evaluate_bounds(query, alpha)))
    return rows
