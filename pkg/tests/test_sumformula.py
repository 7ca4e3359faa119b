from __future__ import annotations

import math

import mpmath
import pytest

from kkit.numberfield import FieldElem, inverse_different_generator, make_field, parse_ideal
from kkit.sumformula import (
    Partition,
    delta_asymptotics,
    delta_term,
    dominance_scan,
    geometric_rows,
    kloosterman_bound_shape,
    kloosterman_side,
    place_functions,
    predicted_main_term,
)
from kkit.testfn import ZERO, eta, special_minus, special_plus

Q, K5 = make_field(1), make_field(5)
ONE_Q = FieldElem.make(Q.elt(1), 1)


def eta_plus_oracle(s: float) -> float:
    mpmath.mp.dps = 30
    f = lambda t: mpmath.exp(-s * (0.25 + t * t)) * t * mpmath.tanh(mpmath.pi * t)  # noqa: E731
    return float(mpmath.quad(f, [0, 1, 1 / math.sqrt(s), 10 / math.sqrt(s), mpmath.inf])) + 0.5


class TestPartition:
    def test_parse_round_trip(self):
        p = Partition.parse("E=;Q+=1;Q-=2", 2)
        assert p.Qp == {1} and p.Qm == {2} and not p.E
        assert Partition.parse(str(p), 2) == p

    def test_not_disjoint(self):
        with pytest.raises(ValueError):
            Partition.parse("E=1;Q+=1,2", 2)

    def test_not_covering(self):
        with pytest.raises(ValueError):
            Partition.parse("Q+=1", 2)

    def test_place_functions_need_E(self):
        with pytest.raises(ValueError):
            place_functions(Partition.parse("E=1;Q+=2", 2), {}, 0.1)


class TestDelta:
    def test_rational_plus(self):
        s = 0.01
        d = delta_term(Q, [special_plus(s)])
        assert d == pytest.approx(2 / math.pi * eta_plus_oracle(s), rel=1e-9)
        assert 32.0 < d < 32.1

    def test_zero_factor(self):
        assert delta_term(K5, [special_plus(0.1), ZERO]) == 0

    def test_golden_product(self):
        s = 0.05
        d = delta_term(K5, [special_plus(s), special_minus(s)])
        expected = 2 / math.pi**2 * math.sqrt(5) * eta(special_plus(s)).total.real * eta(special_minus(s)).total.real
        assert d == pytest.approx(expected, rel=1e-12)

    def test_r_does_not_enter(self):
        ks = [special_plus(0.2), special_plus(0.3)]
        assert delta_term(K5, ks) == delta_term(K5, ks, inverse_different_generator(K5))

    def test_rational_limit(self):
        fit = delta_asymptotics(Q, Partition.parse("Q+=1", 1), {}, [1e-3])
        assert fit.predicted == pytest.approx(1 / math.pi, rel=1e-14)
        assert fit.rows[0][3] < 0.01

    def test_golden_limit(self):
        fit = delta_asymptotics(K5, Partition.parse("Q+=1,2", 2), {}, [1e-3])
        const = 2 * math.sqrt(5) / (2 * math.pi) ** 2
        assert fit.predicted == pytest.approx(const, rel=1e-14)
        assert abs(fit.rows[0][2] - const) <= 0.05 * const
        assert const == pytest.approx(0.11328, abs=1e-5)

    def test_residual_exponent_with_minus_place(self):
        fit = delta_asymptotics(K5, Partition.parse("Q+=1;Q-=2", 2), {}, [1e-2, 3e-3, 1e-3, 3e-4])
        assert fit.expected_exponent == 0.5
        assert fit.residual_exponent >= 0.45

    def test_E_factor_main_term(self):
        k = special_plus(1.0)
        p = Partition.parse("E=1;Q+=2", 2)
        pred = predicted_main_term(K5, p, {1: k})
        assert pred == pytest.approx(4 / (2 * math.pi) ** 2 * math.sqrt(5) * eta(k).total.real, rel=1e-12)

    def test_all_E_rejected(self):
        with pytest.raises(ValueError):
            delta_asymptotics(Q, Partition.parse("E=1", 1), {1: special_plus(1.0)}, [0.1])


class TestKloostermanSide:
    def test_rational_bound(self):
        rep = kloosterman_side(Q, parse_ideal(Q, "[1]"), ONE_Q, Partition.parse("Q+=1", 1), {}, 0.1, B=2000)
        assert math.isfinite(abs(rep.value))
        assert rep.tail >= 0
        assert abs(rep.value) <= rep.bound

    def test_zero_inputs(self):
        p = Partition.parse("E=1;Q+=2", 2)
        rep = kloosterman_side(K5, parse_ideal(K5, "[1]"), inverse_different_generator(K5), p, {1: ZERO}, 0.2,
                               B=50, bound_constant=1.0)
        assert rep.value == 0

    def test_bound_scaling(self):
        p = Partition.parse("Q+=1", 1)
        q = parse_ideal(Q, "[1]")
        a, e = kloosterman_bound_shape(Q, q, ONE_Q, p, {}, 0.2, 0.6, 0.1)
        b, _ = kloosterman_bound_shape(Q, q, ONE_Q, p, {}, 0.1, 0.6, 0.1)
        assert e == pytest.approx(-0.85)
        assert b / a == pytest.approx(2 ** 0.85, rel=1e-12)

    def test_parameter_checks(self):
        p = Partition.parse("Q+=1", 1)
        q = parse_ideal(Q, "[1]")
        with pytest.raises(ValueError):
            kloosterman_side(Q, q, ONE_Q, p, {}, 0.1, alpha=0.4)
        with pytest.raises(ValueError):
            kloosterman_side(Q, q, ONE_Q, p, {}, 0.1, eps=0.5)


class TestDominance:
    def test_rational_plus(self):
        rep = dominance_scan(Q, parse_ideal(Q, "[1]"), ONE_Q, Partition.parse("Q+=1", 1),
                             [0.1, 0.07, 0.05, 0.035])
        assert rep.p_delta == pytest.approx(-1.0, abs=0.05)
        assert rep.p_k >= -0.85
        assert rep.passed

    def test_grid_checks(self):
        with pytest.raises(ValueError):
            dominance_scan(Q, parse_ideal(Q, "[1]"), ONE_Q, Partition.parse("Q+=1", 1), [0.1, 0.05, 0.02])
        with pytest.raises(ValueError):
            dominance_scan(Q, parse_ideal(Q, "[1]"), ONE_Q, Partition.parse("Q+=1", 1), [0.9, 0.1, 0.05, 0.02])

    def test_rows_reproducible(self):
        args = (Q, parse_ideal(Q, "[1]"), ONE_Q, Partition.parse("Q+=1", 1), [0.3])
        a = geometric_rows(*args, B=200)
        b = geometric_rows(*args, B=200)
        assert repr(a) == repr(b)
