"""Periodic Bernoulli machinery and the monomial error expansions."""

import math
from fractions import Fraction

import numpy as np
import pytest

from boxproj import (
    error_expansion,
    hyperplane_classes,
    monomial_error_series,
    preset,
)
from boxproj.bernoulli import (
    BernoulliSplineTerm,
    bernoulli_interior_roots,
    bernoulli_l2_norm_sq,
    bernoulli_l2_norm_sq_series,
    bernoulli_numbers,
    bernoulli_periodic,
    bernoulli_poly_coeffs,
    periodic_lp_power,
    ridge_lp_power,
    spline_term,
)
from boxproj.quadrature import sample_grid


class TestBernoulliBasics:
    def test_number_table(self):
        nums = bernoulli_numbers(12)
        assert nums[0] == 1
        assert nums[1] == Fraction(-1, 2)
        assert nums[2] == Fraction(1, 6)
        assert nums[4] == Fraction(-1, 30)
        assert nums[12] == Fraction(-691, 2730)
        assert all(nums[k] == 0 for k in (3, 5, 7, 9, 11))

    def test_quadratic_coeffs(self):
        # b_2(t) = t^2 - t + 1/6, stored lowest degree first
        assert bernoulli_poly_coeffs(2) == (Fraction(1, 6), Fraction(-1), Fraction(1))

    def test_periodic_values(self):
        assert bernoulli_periodic(1, 0.0) == 0.0
        assert bernoulli_periodic(1, 5.0) == 0.0
        assert abs(bernoulli_periodic(1, 0.25) - 0.25) < 1e-15
        assert abs(bernoulli_periodic(1, 0.75) + 0.25) < 1e-15
        assert abs(bernoulli_periodic(2, 0.0) + 1 / 12) < 1e-15
        assert abs(bernoulli_periodic(2, 0.5) - 1 / 24) < 1e-15

    def test_periodicity_and_vectorization(self):
        t = np.linspace(0.05, 0.95, 19)
        for k in (1, 2, 3):
            a = bernoulli_periodic(k, t)
            b = bernoulli_periodic(k, t + 7.0)
            c = bernoulli_periodic(k, t - 3.0)
            assert np.abs(a - b).max() < 1e-14
            assert np.abs(a - c).max() < 1e-14

    def test_matches_defining_fourier_series(self):
        # B^k(t) = sum_{n != 0} e^{2 pi i n t} / (2 pi i n)^k
        n = np.arange(1, 200001)
        for k, tol in ((1, 1e-5), (2, 1e-10), (3, 1e-14)):
            for t in (0.21, 0.5, 0.83):
                phases = np.exp(2j * np.pi * n * t) / (2j * np.pi * n) ** k
                partial = 2 * phases.sum().real if k != 1 else 2 * np.real(phases.sum())
                assert abs(partial - bernoulli_periodic(k, t)) < tol, (k, t)

    def test_continuity_at_integers_above_degree_one(self):
        eps = 1e-9
        for k in (2, 3, 4):
            left = bernoulli_periodic(k, 1.0 - eps)
            right = bernoulli_periodic(k, 1.0 + eps)
            assert abs(left - right) < 1e-7


class TestParseval:
    def test_closed_form_values(self):
        assert bernoulli_l2_norm_sq(1) == Fraction(1, 12)
        assert bernoulli_l2_norm_sq(2) == Fraction(1, 720)
        assert bernoulli_l2_norm_sq(3) == Fraction(1, 30240)

    def test_closed_form_is_bernoulli_ratio(self):
        for k in (1, 2, 3, 4):
            want = (-1) ** (k - 1) * bernoulli_numbers(2 * k)[2 * k] / math.factorial(2 * k)
            assert bernoulli_l2_norm_sq(k) == want

    def test_series_route(self):
        for k in (1, 2, 3):
            exact = float(bernoulli_l2_norm_sq(k))
            assert abs(bernoulli_l2_norm_sq_series(k) - exact) < 1e-12

    def test_quadrature_route(self):
        from boxproj.quadrature import cell_rule
        pts, wts = cell_rule([0.0], [1.0], (), order=16)
        for k in (1, 2):
            val = float(np.dot(wts, bernoulli_periodic(k, pts[:, 0]) ** 2))
            assert abs(val - float(bernoulli_l2_norm_sq(k))) < 1e-15

    def test_interior_roots(self):
        roots = bernoulli_interior_roots(2)
        want = sorted(((3 - math.sqrt(3)) / 6, (3 + math.sqrt(3)) / 6))
        assert np.abs(np.array(roots) - np.array(want)).max() < 1e-12


class TestLpPowers:
    def test_frozen_exact_norms(self):
        # exact values from symbolic integration of |b_2(t)/2| pieces
        assert abs(periodic_lp_power(1, 1.0) - 0.25) < 1e-14
        assert abs(periodic_lp_power(1, 3.0) - 1 / 32) < 1e-14
        assert abs(periodic_lp_power(2, 1.0) - math.sqrt(3) / 54) < 1e-14
        assert abs(periodic_lp_power(2, 3.0) - (1 / 30240 + math.sqrt(3) / 45360)) < 1e-16

    def test_p2_matches_parseval(self):
        for k in (1, 2, 3):
            assert abs(periodic_lp_power(k, 2.0) - float(bernoulli_l2_norm_sq(k))) < 1e-15

    def test_ridge_power_factorizes(self):
        # unit-cell integral of a composed ridge equals the 1-D integral
        V = preset("courant")
        for cls in hyperplane_classes(V):
            term = spline_term(V, cls)
            for p in (1.0, 2.0, 3.0):
                a = ridge_lp_power(term, p)
                b = abs(float(cls.scale)) ** p * periodic_lp_power(2, p)
                assert abs(a - b) < 1e-12, (cls.alpha, p)


class TestErrorExpansion:
    def test_haar_first_order(self):
        exp = error_expansion(preset("haar"), (1,))
        x = np.array([[0.1], [0.5], [0.9], [1.3], [-0.2]])
        want = 0.5 - np.mod(x[:, 0], 1.0)
        assert np.abs(exp.evaluate(x) - want).max() < 1e-15

    def test_below_critical_order_is_zero(self):
        exp = error_expansion(preset("courant"), (1, 0))
        x = sample_grid(2, 4)
        assert np.abs(exp.evaluate(x)).max() == 0.0

    def test_courant_frozen_point_values(self):
        # hand-computed: at (1/2, 1/2) the three ridge terms give
        # 1/24 + 1/12 + 1/24 = 1/6; along (1/4, y) the (1,0) ridge of
        # the pure-x index gives 2 * (1/96)
        exp = error_expansion(preset("courant"), (1, 1))
        assert abs(exp.evaluate(np.array([[0.5, 0.5]]))[0] - 1 / 6) < 1e-15
        exp20 = error_expansion(preset("courant"), (2, 0))
        got = exp20.evaluate(np.array([[0.25, 0.13], [0.25, 0.71]]))
        assert np.abs(got - 1 / 48).max() < 1e-15

    def test_periodicity(self):
        exp = error_expansion(preset("courant"), (1, 1))
        x = sample_grid(2, 5)
        shift = np.array([3.0, -2.0])
        assert np.abs(exp.evaluate(x) - exp.evaluate(x + shift)).max() < 1e-12

    def test_over_critical_order_rejected(self):
        with pytest.raises(ValueError):
            error_expansion(preset("courant"), (2, 1))

    def test_zp_rejected(self):
        from boxproj import NonUnimodularError
        with pytest.raises(NonUnimodularError):
            error_expansion(preset("zp"), (3, 0))


class TestMonomialErrorSeries:
    def test_cube_and_lines_agree(self):
        V = preset("courant")
        x = sample_grid(2, 4)
        a = monomial_error_series(V, (1, 1), x, 40, mode="cube")
        b = monomial_error_series(V, (1, 1), x, 40, mode="lines")
        assert np.abs(a - b).max() < 1e-14

    def test_series_tail_shrinks(self):
        V = preset("courant")
        x = sample_grid(2, 4)
        closed = error_expansion(V, (1, 1)).evaluate(x)
        errs = []
        for radius in (50, 100, 200, 400):
            s = monomial_error_series(V, (1, 1), x, radius, mode="lines").real
            errs.append(np.abs(s - closed).max())
        assert errs[-1] < errs[0] / 8
        assert errs[-1] < 1e-6

    def test_haar_discontinuity_midpoint_value(self):
        # at the jump the symmetric partial sums converge to the average
        V = preset("haar")
        val = monomial_error_series(V, (1,), np.array([[0.0]]), 5000, mode="lines")
        assert abs(val[0]) < 1e-12

    def test_imaginary_part_vanishes(self):
        V = preset("tensor(2,2)")
        x = sample_grid(2, 4)
        s = monomial_error_series(V, (1, 1), x, 100, mode="lines")
        assert np.abs(s.imag).max() < 1e-12


class TestSplineTermSeries:
    def test_term_series_matches_direct(self):
        V = preset("courant")
        classes = hyperplane_classes(V)
        x = sample_grid(2, 4)
        for cls in classes:
            term = spline_term(V, cls)
            direct = term.evaluate(x)
            series = term.series(x, 400)
            assert np.abs(direct - np.real(series)).max() < 5e-7
