"""Box counts against the O(MN) double-loop oracle; bound envelope checks."""

import math
import random
from fractions import Fraction
from math import gcd, isqrt

import pytest

from sqflab.arith_core import (
    Modulus,
    NotCoprimeError,
    factor_modulus,
    mod_pow,
)
from sqflab.congruence_count import (
    BoxQuery,
    check_symmetry,
    class_count,
    count_box,
    count_dyadic,
    evaluate_bounds,
    geometric_grid,
    pierce_applicable,
    power_roots,
    scan_boxes,
    sqrt_mod_prime,
)
from sqflab.progression_stats import squarefree_moduli


def double_loop_oracle(u, v, m_hi, n_hi, q, a, m_lo=0, n_lo=0):
    """Brute force over every (m, n) pair in the box."""
    total = 0
    for n in range(math.floor(n_lo) + 1, math.floor(n_hi) + 1):
        if v < 0 and gcd(n, q) != 1:
            continue
        rhs = a * mod_pow(n, v, q) % q
        for m in range(math.floor(m_lo) + 1, math.floor(m_hi) + 1):
            if pow(m, u, q) == rhs:
                total += 1
    return total


def random_instances(count, seed, q_max=300, side_max=200):
    rng = random.Random(seed)
    moduli = [m for m in squarefree_moduli(q_max) if m.q >= 2]
    out = []
    for _ in range(count):
        m = rng.choice(moduli)
        a = rng.choice([r for r in range(1, m.q) if gcd(r, m.q) == 1])
        mb = rng.randrange(1, side_max + 1) + rng.choice((0, 0.5))
        nb = rng.randrange(1, side_max + 1) + rng.choice((0, 0.5))
        uv = rng.choice(((1, -2), (2, -1)))
        out.append((uv, mb, nb, m, a))
    return out


def test_sqrt_mod_prime_exhaustive():
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]:
        for c in range(p):
            roots = sqrt_mod_prime(c, p)
            expected = sorted(x for x in range(p) if x * x % p == c)
            assert roots == expected, (c, p)


def test_power_roots_against_brute_force():
    for m in squarefree_moduli(100):
        for c in range(min(m.q, 25)):
            assert power_roots(c, m, 1) == [c]
            expected = sorted(x for x in range(m.q) if x * x % m.q == c % m.q)
            assert power_roots(c, m, 2) == expected, (c, m.q)


def test_power_roots_rejects_higher_exponents():
    with pytest.raises(ValueError):
        power_roots(1, factor_modulus(7), 3)


def test_count_box_spec_examples():
    m7 = factor_modulus(7)
    assert count_box(BoxQuery(1, -2, 10, 10, m7, 1)) == 15
    assert count_box(BoxQuery(2, -1, 10, 10, m7, 1)) == 15
    # one m per n over a full period, any residue
    m5 = factor_modulus(5)
    for a in range(1, 5):
        assert count_box(BoxQuery(1, 1, 5, 5, m5, a)) == 5


def test_count_box_validation():
    m7 = factor_modulus(7)
    with pytest.raises(NotCoprimeError):
        BoxQuery(1, -2, 10, 10, m7, 7)
    with pytest.raises(ValueError):
        BoxQuery(0, -2, 10, 10, m7, 1)
    with pytest.raises(ValueError):
        BoxQuery(1, 0, 10, 10, m7, 1)


def test_count_box_oracle_sweep():
    for (u, v), mb, nb, m, a in random_instances(120, seed=6, q_max=200, side_max=60):
        got = count_box(BoxQuery(u, v, mb, nb, m, a))
        want = double_loop_oracle(u, v, mb, nb, m.q, a)
        assert got == want, (u, v, mb, nb, m.q, a)


def test_count_box_positive_v_oracle():
    rng = random.Random(7)
    for _ in range(40):
        m = rng.choice([x for x in squarefree_moduli(80) if x.q >= 2])
        a = rng.choice([r for r in range(1, m.q) if gcd(r, m.q) == 1])
        mb, nb = rng.randrange(1, 50), rng.randrange(1, 50)
        u, v = rng.choice(((1, 1), (1, 2), (2, 1)))
        got = count_box(BoxQuery(u, v, mb, nb, m, a))
        assert got == double_loop_oracle(u, v, mb, nb, m.q, a)


def test_residue_sum_rule():
    # Summed over every residue class, each admissible n contributes one m
    # class, so the total is floor(M) * #{n <= N coprime}.
    rng = random.Random(8)
    for _ in range(25):
        m = rng.choice([x for x in squarefree_moduli(60) if x.q >= 2])
        mb = rng.randrange(1, 40)
        nb = rng.randrange(1, 40)
        v = rng.choice((-1, -2))
        total = sum(
            class_count(1, v, 0, mb, 0, nb, m, a) for a in range(m.q)
        )
        coprime_n = sum(1 for n in range(1, nb + 1) if gcd(n, m.q) == 1)
        assert total == mb * coprime_n


def test_symmetry_examples_and_sweep():
    m7 = factor_modulus(7)
    sym = check_symmetry(BoxQuery(1, -2, 10, 10, m7, 1))
    assert sym.equal and sym.count == 15
    for (u, v), mb, nb, m, a in random_instances(60, seed=9, q_max=150, side_max=80):
        assert check_symmetry(BoxQuery(u, v, mb, nb, m, a)).equal


def test_symmetry_requires_negative_v():
    with pytest.raises(ValueError):
        check_symmetry(BoxQuery(1, 1, 10, 10, factor_modulus(7), 1))


def test_count_dyadic_oracle_and_identity():
    m7 = factor_modulus(7)
    assert count_dyadic(5, 5, m7, 1) == double_loop_oracle(
        1, -2, 10, 10, 7, 1, m_lo=5, n_lo=5
    )
    assert count_dyadic(0.2, 5, m7, 1) == 0  # (0.2, 0.4] holds no integer

    rng = random.Random(10)
    for _ in range(30):
        m = rng.choice([x for x in squarefree_moduli(90) if x.q >= 2])
        a = rng.choice([r for r in range(1, m.q) if gcd(r, m.q) == 1])
        mb = rng.randrange(1, 40) + rng.choice((0, 0.5))
        nb = rng.randrange(1, 40) + rng.choice((0, 0.5))

        def full(mx, nx):
            return count_box(BoxQuery(1, -2, mx, nx, m, a))

        inclusion_exclusion = (
            full(2 * mb, 2 * nb) - full(mb, 2 * nb) - full(2 * mb, nb) + full(mb, nb)
        )
        assert count_dyadic(mb, nb, m, a) == inclusion_exclusion


def test_hard_caps_hold_on_stress_boxes():
    # The caps are asserted inside count_box; these calls must not raise.
    m = factor_modulus(30)
    for mb, nb in ((1, 200), (200, 1), (500, 500), (30, 30)):
        count_box(BoxQuery(1, -2, mb, nb, m, 7))
        count_box(BoxQuery(2, -1, mb, nb, m, 7))


def test_evaluate_bounds_threshold_box():
    # At M = N = sqrt(q) the trivial and Weil envelopes agree in order.
    m = factor_modulus(10007)  # prime, squarefree
    side = math.sqrt(10007)
    rep = evaluate_bounds(BoxQuery(1, -2, side, side, m, 5))
    root = math.sqrt(10007)
    assert root <= rep.trivial <= 3 * root
    assert root <= rep.weil <= 4 * root


def test_evaluate_bounds_alpha_endpoints_and_mn2_power():
    m = factor_modulus(101)
    q = BoxQuery(1, -2, 20, 30, m, 3)
    r1 = evaluate_bounds(q, Fraction(1))
    r0 = evaluate_bounds(q, Fraction(0))
    assert r1.interpolated == r1.pierce_mn
    assert r0.interpolated == r0.pierce_nm
    r = evaluate_bounds(q, Fraction(2, 15))
    assert r.interpolated == pytest.approx((20 * 30**2) ** (11 / 36), rel=1e-12)
    with pytest.raises(ValueError):
        evaluate_bounds(q, Fraction(3, 2))


def test_evaluate_bounds_applicability_flags():
    m = factor_modulus(101)
    # N >= q/2 knocks out the (M, N) orientation.
    rep = evaluate_bounds(BoxQuery(1, -2, 10, 60, m, 1))
    assert rep.pierce_mn is None
    assert rep.interpolated is None
    assert rep.ratios()["pierce_mn"] is None
    # M > q^(3/4) does the same.
    rep2 = evaluate_bounds(BoxQuery(1, -2, 101, 10, m, 1))
    assert rep2.pierce_mn is None and rep2.pierce_nm is None
    assert not pierce_applicable(101, 10, 101)


def test_scan_boxes_consistency():
    m = factor_modulus(10001)  # 73 * 137
    assert scan_boxes(m, 3, []) == []
    single = scan_boxes(m, 3, [(50, 50)])
    assert len(single) == 1
    query, rep = single[0]
    direct = evaluate_bounds(query)
    assert rep.count == direct.count and rep.trivial == direct.trivial

    grid = geometric_grid(10001, ratio=4.0)
    rows = scan_boxes(m, 3, grid)
    assert [(q.m_bound, q.n_bound) for q, _ in rows] == sorted(grid)
    for query, rep in rows:
        assert rep.count >= 0
