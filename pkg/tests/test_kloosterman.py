from __future__ import annotations

import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkit.kloosterman import (
    Envelope,
    ideal_counts,
    kloosterman_sum,
    kloosterman_sum_unit_shift,
    kloosterman_sum_value,
    kloosterman_term,
    max_weil_salie_ratio,
    nrr_factor,
    unit_orbit_sum,
    unit_sum,
    weil_salie_ratio,
)
from kkit.numberfield import (
    FieldElem,
    count_ideals_by_norm,
    enumerate_ideal_elements,
    inverse_different_generator,
    make_field,
    parse_ideal,
)

Q, K2, K5 = make_field(1), make_field(2), make_field(5)
ONE_Q = FieldElem.make(Q.elt(1), 1)
R5 = FieldElem.make(K5.elt(-1, 2), 5)  # 1/sqrt(5)


def s_rational(r: int, c: int) -> complex:
    """Direct S(r,r;c) over Z with pow-based inverses."""
    return sum(cmath.exp(2j * math.pi * r * (d + pow(d, -1, c)) / c)
               for d in range(c) if math.gcd(d, c) == 1) if c > 1 else 1.0


def s_golden_integer_modulus(m: int) -> complex:
    """S(1/sqrt5, 1/sqrt5; m) in Z[w], w^2 = w + 1, by a double loop.

    Tr((u + v w) / sqrt5) = v, so the phase of x + x^-1 is its w-coordinate over m.
    """
    def mul(x, y):
        a, b = x
        c, d = y
        return ((a * c + b * d) % m, (a * d + b * c + b * d) % m)

    elems = [(a, b) for a in range(m) for b in range(m)]
    total = 0j
    for x in elems:
        inv = next((y for y in elems if mul(x, y) == (1 % m, 0)), None)
        if inv is None:
            continue
        total += cmath.exp(2j * math.pi * ((x[1] + inv[1]) % m) / m)
    return total


class TestKloostermanSum:
    def test_named_values(self):
        assert kloosterman_sum_value(Q, ONE_Q, Q.elt(2)) == pytest.approx(1.0, abs=1e-12)
        assert kloosterman_sum_value(Q, ONE_Q, Q.elt(3)) == pytest.approx(-1.0, abs=1e-12)
        assert kloosterman_sum_value(Q, ONE_Q, Q.elt(5)) == pytest.approx(2 + 2 * math.cos(4 * math.pi / 5), abs=1e-12)
        assert kloosterman_sum_value(Q, ONE_Q, Q.elt(5)).real == pytest.approx(0.381966, abs=1e-6)

    @pytest.mark.parametrize("r", [1, 2, 6])
    def test_rational_oracle(self, r):
        rr = FieldElem.make(Q.elt(r), 1)
        for c in range(1, 80):
            assert abs(kloosterman_sum_value(Q, rr, Q.elt(c)) - s_rational(r, c)) < 1e-10

    @pytest.mark.parametrize("m", [2, 3, 4, 6, 7, 11])
    def test_golden_oracle(self, m):
        assert abs(kloosterman_sum_value(K5, R5, K5.elt(m)) - s_golden_integer_modulus(m)) < 1e-10

    def test_term_count_is_phi(self):
        kv = kloosterman_sum(Q, ONE_Q, Q.elt(12))
        assert kv.terms == 4
        assert kloosterman_sum(K5, R5, K5.elt(2)).terms == 3

    def test_errors(self):
        with pytest.raises(ValueError):
            kloosterman_sum(Q, ONE_Q, Q.elt(0))
        with pytest.raises(ValueError):
            kloosterman_sum(K5, FieldElem.make(K5.one, 2), K5.elt(3))
        with pytest.raises(ValueError):
            kloosterman_sum(Q, ONE_Q, Q.elt(10**5 + 1))

    @pytest.mark.parametrize("F,r", [(Q, ONE_Q), (K2, inverse_different_generator(K2)), (K5, R5)])
    def test_real_and_sign_invariant(self, F, r):
        for c in enumerate_ideal_elements(parse_ideal(F, "[1]"), 200):
            kv = kloosterman_sum(F, r, c)
            assert abs(kv.value.imag) <= 1e-9 * kv.terms
            assert abs(kloosterman_sum_value(F, r, -c) - kv.value) < 1e-9

    @pytest.mark.parametrize("F", [K2, K5])
    def test_unit_twist(self, F):
        # S(r,r;eps c) = S(r/eps, r/eps; c); it is not constant on unit orbits
        r = inverse_different_generator(F)
        u, ui = F.unit, F.unit.unit_inverse()
        moved = 0
        for c in enumerate_ideal_elements(parse_ideal(F, "[1]"), 200):
            s0 = kloosterman_sum_value(F, r, c)
            for e, einv in ((u, ui), (ui, u), (-u, -ui)):
                lhs = kloosterman_sum_value(F, r, c * e)
                assert abs(lhs - kloosterman_sum_value(F, r * einv, c)) < 1e-9
                moved += abs(lhs - s0) > 1e-6
            for n in (-3, -1, 2, 5):
                e = u ** n if n > 0 else ui ** (-n)
                assert abs(kloosterman_sum_unit_shift(F, r, c, n) - kloosterman_sum_value(F, r, c * e)) < 1e-9
        assert moved > 0


class TestNrr:
    @pytest.mark.parametrize("p", [2, 3, 5, 7, 97])
    def test_rational_prime(self, p):
        assert nrr_factor(Q, ONE_Q, Q.elt(p)) == 1

    def test_rational_power(self):
        assert nrr_factor(Q, FieldElem.make(Q.elt(4), 1), Q.elt(8)) == 4

    def test_golden_ramified(self):
        assert nrr_factor(K5, R5, K5.elt(-1, 2)) == Fraction(1, 5)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 60), st.integers(1, 500))
    def test_rational_formula(self, r, c):
        # prod_p p^min(v_p(r), v_p(c)) = gcd(r, c)
        assert nrr_factor(Q, FieldElem.make(Q.elt(r), 1), Q.elt(c)) == math.gcd(r, c)


class TestWeilSalie:
    def test_examples(self):
        assert weil_salie_ratio(Q, ONE_Q, Q.elt(3), 0.0) == pytest.approx(1 / math.sqrt(3), rel=1e-12)
        assert weil_salie_ratio(Q, ONE_Q, Q.elt(2), 0.0) == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_zero_sum(self):
        assert abs(s_rational(1, 8)) < 1e-12
        assert weil_salie_ratio(Q, ONE_Q, Q.elt(8), 0.1) == 0.0

    def test_weil_bound_rational(self):
        # |S| <= tau(c) gcd^(1/2) c^(1/2) over Q; with eps = 0.1 the ratio stays small
        assert max_weil_salie_ratio(Q, parse_ideal(Q, "[1]"), ONE_Q, 300) < 2.5

    def test_stability_golden(self):
        q = parse_ideal(K5, "[1]")
        m300 = max_weil_salie_ratio(K5, q, R5, 300)
        m500 = max_weil_salie_ratio(K5, q, R5, 500)
        assert math.isfinite(m500) and m500 <= 1.2 * m300


def tent_min(t: float) -> float:
    return min(1.0, 1.0 / abs(t))


class TestUnitSum:
    def test_rational_two_terms(self):
        f = lambda v: abs(v[0]) ** 0.5 * math.exp(-abs(v[0]))  # noqa: E731
        total, _ = unit_sum(Q, f, (1.0,), (1.0,), 0.5, 0.5, (0.7,))
        assert total == pytest.approx(2 * f((0.7,)), rel=1e-15)

    def test_golden_direct(self):
        f = lambda v: tent_min(v[0]) * tent_min(v[1])  # noqa: E731
        total, bound = unit_sum(K5, f, (1.0, 1.0), (1.0, 1.0), 0.0, 1.0, (1.0, 1.0))
        phi = (1 + math.sqrt(5)) / 2
        direct = 2 * math.fsum(tent_min(phi ** n) * tent_min((-1 / phi) ** n) for n in range(-700, 701))
        assert total == pytest.approx(direct, rel=1e-14)
        assert total <= bound

    def test_orbit_invariance(self):
        f = lambda v: tent_min(v[0]) * tent_min(v[1]) * math.exp(-0.1 * abs(v[0]))  # noqa: E731
        y = (0.3, 2.5)
        e1, e2 = K5.unit.embed()
        a = unit_orbit_sum(K5, f, y, absolute=True).real
        b = unit_orbit_sum(K5, f, (y[0] * e1, y[1] * e2), absolute=True).real
        assert a == pytest.approx(b, rel=1e-13)

    def test_divergent(self):
        with pytest.raises(ValueError):
            unit_sum(K5, lambda v: 1.0, (1, 1), (1, 1), 0.0, 0.0, (1, 1))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 100), st.floats(0.01, 100))
    def test_bound_holds(self, y1, y2):
        f = lambda v: math.prod(min(1.0, abs(t) ** -1.5) for t in v)  # noqa: E731
        total, bound = unit_sum(K2, f, (1.0, 1.0), (1.0, 1.0), 0.0, 1.5, (y1, y2))
        assert total <= bound * (1 + 1e-12)


class TestKloostermanTerm:
    env = Envelope((1.0,), (1.0,), 1.0)

    @staticmethod
    def f(y):
        return min(1.0, y[0])

    def test_zero_function(self):
        rep = kloosterman_term(Q, parse_ideal(Q, "[1]"), ONE_Q, None, self.env, 100)
        assert rep.value == 0 and rep.tail == 0

    def test_direct_sum_over_q(self):
        rep = kloosterman_term(Q, parse_ideal(Q, "[1]"), ONE_Q, self.f, self.env, 1000)
        direct = math.fsum((s_rational(1, c) * 2 * self.f((1 / c**2,)) / c).real for c in range(1, 1001))
        assert abs(rep.value - direct) < 1e-12

    def test_tail_sound_and_monotone(self):
        q = parse_ideal(Q, "[1]")
        r500 = kloosterman_term(Q, q, ONE_Q, self.f, self.env, 500, ws_constant=3.0)
        r1000 = kloosterman_term(Q, q, ONE_Q, self.f, self.env, 1000, ws_constant=3.0)
        assert abs(r1000.value - r500.value) < r500.tail
        assert r1000.tail <= r500.tail

    def test_golden_against_ungrouped_sum(self):
        f = lambda y: math.prod(min(1.0, t) ** 3 for t in y)  # noqa: E731
        rep = kloosterman_term(K5, parse_ideal(K5, "[1]"), R5, f, Envelope((1.0, 1.0), (1.0, 1.0), 3.0), 60)
        assert abs(rep.value - golden_term_bruteforce(f, 60, 100)) < 1e-12

    def test_section_shift_invariance(self):
        q = parse_ideal(K5, "[1]")
        env = Envelope((1.0, 1.0), (1.0, 1.0), 1.0)
        f = lambda y: math.prod(min(1.0, t) for t in y)  # noqa: E731
        a = kloosterman_term(K5, q, R5, f, env, 200)
        b = kloosterman_term(K5, q, R5, f, env, 200, section_shift=1)
        assert abs(a.value - b.value) < 1e-10

    def test_envelope_checks(self):
        q = parse_ideal(Q, "[1]")
        with pytest.raises(ValueError):
            kloosterman_term(Q, q, ONE_Q, self.f, Envelope((1.0,), (1.0,), 0.25), 100)
        with pytest.raises(ValueError):
            kloosterman_term(Q, q, ONE_Q, lambda y: 5.0, self.env, 100)

    def test_threads_bitwise(self):
        q = parse_ideal(K5, "[1]")
        env = Envelope((1.0, 1.0), (1.0, 1.0), 1.0)
        f = lambda y: math.prod(min(1.0, t) for t in y)  # noqa: E731
        a = kloosterman_term(K5, q, R5, f, env, 150, threads=1)
        b = kloosterman_term(K5, q, R5, f, env, 150, threads=2)
        assert a.value == b.value

    def test_ideal_counts_match_enumeration(self):
        counts = ideal_counts(K5, 300)
        assert list(counts[1:]) == list(count_ideals_by_norm(K5, 300)[1:])


def golden_term_bruteforce(f, B: int, H: float) -> float:
    """K_{r,r}(f) over Z[w] for r = 1/sqrt5 by summing every c with |N(c)| <= B in a box.

    No orbit grouping: S(r,r;c) is evaluated at each c separately.
    """
    phi = (1 + math.sqrt(5)) / 2
    psi = 1 - phi
    r1, r2 = R5.embed()
    total = []
    bmax = int(2 * H / math.sqrt(5)) + 1
    for b in range(-bmax, bmax + 1):
        lo = math.ceil(max(-H - b * phi, -H - b * psi))
        hi = math.floor(min(H - b * phi, H - b * psi))
        for a in range(lo, hi + 1):
            if a == 0 and b == 0:
                continue
            c = K5.elt(a, b)
            n = abs(c.norm())
            if n > B:
                continue
            c1, c2 = a + b * phi, a + b * psi
            S = kloosterman_sum_value(K5, R5, c).real
            total.append(S / n * f(((r1 / c1) ** 2, (r2 / c2) ** 2)))
    return math.fsum(total)
