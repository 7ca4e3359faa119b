from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkit.bessel import (
    bessel_j,
    bessel_j_integers,
    bessel_transform_plus,
    cross_method_grid,
    bessel_envelope,
    mellin_barnes_j,
    verify_bessel_bounds,
)
from kkit.testfn import ZERO, discrete_only, linear_combination, special_minus, special_plus


def mp_j(w: complex, t: float) -> complex:
    mpmath.mp.dps = 40
    return complex(mpmath.besselj(mpmath.mpc(w.real, w.imag), t))


class TestBesselJ:
    def test_small_argument(self):
        assert bessel_j(0, 1e-12).value == pytest.approx(1.0, abs=1e-15)
        assert bessel_j(1, 1e-4).value.real / 0.5e-4 == pytest.approx(1.0, abs=1e-8)

    def test_series_vs_mellin_barnes(self):
        w = 0.6 + 0.3j
        a = bessel_j(w, 2.0, "series").value
        b = mellin_barnes_j(w, 2.0)
        assert abs(a - b) <= 1e-8 * abs(a)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-3.9, 3.9), st.floats(-4, 4), st.floats(0.01, 2000))
    def test_against_mpmath(self, re, im, t):
        w = complex(re, im)
        ref = mp_j(w, t)
        assert abs(bessel_j(w, t).value - ref) <= 1e-9 * abs(ref) + 1e-300

    def test_cross_method_grid(self):
        rows = cross_method_grid()
        assert len(rows) == 400
        assert {r[4] for r in rows} == {"mellin-barnes", "series-mp"}
        assert max(r[5] for r in rows) <= 1e-8

    @pytest.mark.parametrize("w", [0.0, 0.5, 1.3, -2.7, 3.0])
    def test_real_order_is_real(self, w):
        for t in (0.1, 3.0, 40.0, 900.0):
            v = bessel_j(w, t).value
            assert abs(v.imag) <= 1e-12 * abs(v) + 1e-300

    def test_negative_integer_order(self):
        assert bessel_j(-3, 2.5).value == pytest.approx(-bessel_j(3, 2.5).value, rel=1e-14)

    def test_landau_bound(self):
        # |J_u(t)| <= 0.675 u^(-1/3) for real u > 0
        for u in (2.0, 3.0, 4.0):
            ts = np.linspace(0.05, 60, 3000)
            m = max(abs(bessel_j(u, float(t)).value) for t in ts)
            assert m <= 0.675 * u ** (-1 / 3)
        m2 = max(abs(bessel_j(2.0, float(t)).value) for t in np.linspace(0.05, 60, 3000))
        assert m2 * 2.0 <= 1.05

    def test_envelope_errors(self):
        with pytest.raises(ValueError):
            bessel_j(4.5, 1.0)
        with pytest.raises(ValueError):
            bessel_j(1.0, 2e4)

    def test_integer_orders(self):
        vals = bessel_j_integers(12, 7.5)
        for n in range(13):
            assert vals[n] == pytest.approx(float(mpmath.besselj(n, 7.5)), abs=1e-14)


class TestTransform:
    @pytest.mark.parametrize("y", [1e-3, 0.05, 1.0, 20.0])
    def test_single_discrete_point(self, y):
        k = discrete_only({4: 1.0})
        t = 4 * math.pi * math.sqrt(y)
        v = bessel_transform_plus(k, y).value
        assert v == pytest.approx(3 * float(mpmath.besselj(3, t)), abs=1e-13)

    def test_zero(self):
        assert bessel_transform_plus(ZERO, 1.0).value == 0

    def test_contour_shift(self):
        k = special_plus(0.5)
        a = bessel_transform_plus(k, 1.0, 0.0, method="contour").value
        b = bessel_transform_plus(k, 1.0, 0.6).value
        assert abs(a - b) < 1e-6

    @pytest.mark.parametrize("y", [0.01, 0.3, 5.0])
    def test_routes_agree(self, y):
        k = special_plus(0.3)
        a = bessel_transform_plus(k, y).value
        b = bessel_transform_plus(k, y, 0.0, method="contour").value
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))

    def test_plus_direct_quadrature(self):
        # the defining Re nu = 0 integral with nu = iu, evaluated by mpmath
        s, y = 0.8, 0.5
        t = 4 * math.pi * math.sqrt(y)
        mpmath.mp.dps = 25

        def integrand(u):
            kv = mpmath.exp(-s * (0.25 + u * u))
            return kv * u * (mpmath.besselj(-2j * u, t) - mpmath.besselj(2j * u, t)) / mpmath.cosh(mpmath.pi * u)

        cont = complex(-1j * mpmath.quad(integrand, [0, 2, 6, 12]))
        disc = 2 * (-1) * 0.5 * float(mpmath.besselj(1, t))  # b = 2, k(1/2) = 1
        v = bessel_transform_plus(special_plus(s), y, 0.0, method="contour").value
        assert abs(v - (cont + disc)) < 1e-9 * max(1.0, abs(v))

    def test_linearity(self):
        k1, k2 = special_plus(0.4), special_minus(0.6)
        for y in (0.02, 1.5):
            lin = bessel_transform_plus(linear_combination([(2.0, k1), (-0.5, k2)]), y).value
            sep = 2.0 * bessel_transform_plus(k1, y).value - 0.5 * bessel_transform_plus(k2, y).value
            assert abs(lin - sep) < 1e-8

    def test_bad_contour(self):
        with pytest.raises(ValueError):
            bessel_transform_plus(special_plus(1.0), 1.0, 0.3)


class TestBounds:
    def test_minus_small_y(self):
        rep = verify_bessel_bounds("minus", [0.1], [1e-4], 0.6)
        assert math.isfinite(rep.constant)
        s, y, v, env, ratio = rep.rows[0]
        assert env == pytest.approx(y ** 0.6 * s ** -0.4)
        assert abs(v) <= rep.constant * env

    def test_plus_large_y(self):
        rep = verify_bessel_bounds("plus", [0.1], [1e3], 0.6)
        assert math.isfinite(rep.constant)
        assert bessel_envelope("plus", 0.1, 1e3, 0.6) == pytest.approx(10.0)

    @pytest.mark.parametrize("family", ["plus", "minus"])
    def test_small_y_power_law(self, family):
        k = special_plus(0.2) if family == "plus" else special_minus(0.2)
        ys = [1e-6, 1e-7]
        vals = [abs(bessel_transform_plus(k, y).value) for y in ys]
        slope = math.log(vals[1] / vals[0]) / math.log(ys[1] / ys[0])
        assert slope >= 0.6 - 0.05
