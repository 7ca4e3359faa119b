from __future__ import annotations

import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkit.testfn import (
    ZERO,
    TestFunction,
    bump,
    discrete_only,
    eta,
    eta_tilde,
    linear_combination,
    mollify,
    ndiscr,
    norms,
    power_profile,
    product_norm,
    random_tent,
    special_minus,
    special_plus,
    tent,
)


def eta_plus_oracle(s: float) -> float:
    mpmath.mp.dps = 30
    cont = mpmath.quad(lambda t: mpmath.exp(-s * (0.25 + t * t)) * t * mpmath.tanh(mpmath.pi * t), [0, 1, 10, mpmath.inf])
    return float(cont) + 0.5


def eta_minus_series(s: float) -> float:
    return math.fsum((m - 0.5) * math.exp(-s * (m * m - m)) for m in range(2, 5000))


class TestFamilies:
    @given(st.floats(1e-4, 50))
    def test_plus_at_half(self, s):
        assert special_plus(s)(0.5) == 1.0

    def test_plus_imaginary(self):
        assert special_plus(1.0)(2j) == pytest.approx(math.exp(-17 / 4), rel=1e-14)

    def test_minus_half_integer(self):
        assert special_minus(1.0).at_half_integer(4) == pytest.approx(math.exp(-2), rel=1e-14)
        assert special_minus(1.0).at_half_integer(2) == 0

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            special_plus(0.0)
        with pytest.raises(ValueError):
            TestFunction(lambda nu: 0 * nu, lambda b: 0.0, decay=2.0)
        with pytest.raises(ValueError):
            special_minus(1.0).at_half_integer(3)


class TestEta:
    def test_plus_one(self):
        v = eta(special_plus(1.0))
        assert v.total.real == pytest.approx(eta_plus_oracle(1.0), abs=1e-9)
        assert abs(v.total - 0.862) < 0.005
        assert v.discrete == 0.5

    def test_minus_one(self):
        v = eta(special_minus(1.0))
        assert v.total.real == pytest.approx(eta_minus_series(1.0), rel=1e-13)
        assert v.total.real == pytest.approx(0.20922, abs=5e-6)

    def test_zero(self):
        assert eta(ZERO).total == 0

    @pytest.mark.parametrize("s", [1e-2, 1e-3, 1e-4])
    def test_plus_small_s(self, s):
        H = eta(special_plus(s)).total.real
        assert abs(s * H - 0.5 - s / 2) <= 2 * s

    def test_minus_small_s_envelope(self):
        s0 = 1e-2
        C = abs(eta(special_minus(s0)).total.real - 0.5 / s0) / s0 ** -0.5
        for s in (3e-3, 1e-3, 3e-4, 1e-4, 1e-5):
            H = eta(special_minus(s)).total.real
            assert abs(H - 0.5 / s) <= C * s ** -0.5

    def test_discrete_only(self):
        v = eta(discrete_only({4: 1.0, 6: 2.0}))
        assert v.total.real == pytest.approx(1.5 + 2 * 2.5)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_linear(self, a, b):
        k1, k2 = special_plus(0.7), special_minus(0.9)
        lin = eta(linear_combination([(a, k1), (b, k2)])).total
        assert abs(lin - (a * eta(k1).total + b * eta(k2).total)) < 1e-8 * (1 + abs(a) + abs(b))


def analytic_pair(g):
    """TestFunction k(nu) = g(1/4 - nu^2), with the half-integer values read off g."""
    return TestFunction(lambda nu: g(0.25 - nu * nu), lambda b: g((b / 2) * (1 - b / 2)).real,
                        decay=1e6, holo_width=1.4)


GS = [
    lambda lam: np.exp(-0.5 * lam * lam),
    lambda lam: np.exp(-(lam - 1) ** 2),
    lambda lam: (1 + lam) * np.exp(-lam * lam),
    lambda lam: np.exp(-0.1 * lam * lam) * np.cos(lam),
    lambda lam: 1 / (1 + lam * lam) ** 3 * np.exp(-0.2 * lam * lam),
]


class TestEtaTilde:
    def test_interval(self):
        g = lambda y: 1.0 if 0.25 <= y <= 1.25 else 0.0  # noqa: E731
        v = eta_tilde(g, upper=1.25)
        oracle = 0.5 * mpmath.quad(lambda u: mpmath.tanh(mpmath.pi * mpmath.sqrt(u)), [0, 1])
        assert v.continuous.real == pytest.approx(float(oracle), abs=1e-10)
        assert v.discrete == 0

    def test_gap_has_no_mass(self):
        g = lambda y: 1.0 if 0.05 <= y <= 0.2 else 0.0  # noqa: E731
        assert eta_tilde(g).total == 0

    def test_point_minus_two(self):
        g = lambda y: 1.0 if abs(y + 2) < 0.1 else 0.0  # noqa: E731
        assert eta_tilde(g).total == 1.5

    @pytest.mark.parametrize("i", range(5))
    def test_change_of_variables(self, i):
        g = GS[i]
        H = eta(analytic_pair(g)).total
        Ht = eta_tilde(lambda y: complex(g(y)), upper=400).total
        assert abs(H - Ht) < 1e-8


class TestNorms:
    def test_power_profile(self):
        k = power_profile(4.0)
        n = norms(k, 0.0, 4.0)
        assert abs(k(0)) == 1.0
        assert n.n_0_b == pytest.approx(4.0, rel=1e-6)  # attained at t = 1

    def test_ndiscr_minus(self):
        assert ndiscr(special_minus(1.0)) == pytest.approx(eta_minus_series(1.0), rel=1e-13)

    def test_empty_product(self):
        assert product_norm([], 0.3, 4.0) == 1.0

    def test_bad_alpha(self):
        with pytest.raises(ValueError):
            norms(special_plus(1.0), 0.7, 4.0)


class TestMollifier:
    def test_tent_large_u(self):
        f, sup, bp = tent(0.0, 1.0)
        h = mollify(f, sup, 1e4, bp)
        assert abs(h(0.5) - f(0.5)) < 0.05

    def test_sup_bound_random_tents(self):
        rng = random.Random(7)
        for _ in range(100):
            f, sup, bp = random_tent(rng)
            peak = f((sup[0] + sup[1]) / 2)
            for u in (1.0, 10.0, 100.0):
                h = mollify(f, sup, u, bp)
                for lam in np.linspace(sup[0] - 1, sup[1] + 1, 9):
                    assert h(lam) <= peak * (1 + 1e-9)

    def test_zero_target(self):
        h = mollify(lambda x: 0.0, (0.0, 1.0), 5.0)
        assert h(0.3) == 0.0

    def test_gaussian_oracle(self):
        f, sup, bp = tent(-1.0, 1.0)
        u = 3.0
        h = mollify(f, sup, u, bp)
        oracle = math.sqrt(u / math.pi) * mpmath.quad(lambda x: mpmath.exp(-u * (0.2 - x) ** 2) * f(float(x)), [-1, 0, 1])
        assert h(0.2) == pytest.approx(float(oracle), rel=1e-10)

    def test_approximation_and_bump(self):
        A = 6.0
        b = bump(A)
        f, sup, bp = tent(-1.0, 2.0)
        eps = 0.05
        h = mollify(f, sup, 2e3, bp)
        inner = np.linspace(-(A - 1), A - 1, 121)
        assert max(abs(h(x) - f(x)) for x in inner) < eps
        for lam in (A, A + 1, 10.0, 40.0, -A, -12.0):
            assert abs(h(lam)) <= eps * b(lam)


class TestBump:
    def test_values(self):
        assert bump(3.0)(3.0) == 1.0
        assert bump(3.0)(0.0) == 16.0
        assert bump(3.0)(-2.0) == pytest.approx(16 / 9)

    @given(st.floats(1.01, 50), st.floats(0, 1))
    def test_at_least_one_inside(self, A, frac):
        b = bump(A)
        assert b(frac * A) >= 1 - 1e-12
        assert b(-frac * A) >= 1 - 1e-12

    def test_small_A(self):
        with pytest.raises(ValueError):
            bump(1.0)
