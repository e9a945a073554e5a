"""
Unit tests for tree functions and kernel roots.
"""
import math
import unittest

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.testing import assert_allclose

from src.errors import (
    BeyondRadius,
    DegenerateBoundary,
    DegenerateLinear,
    InvalidProbability,
    NeverEmpty,
    NoPoleSingularity,
    Unstable,
)
from src.kernel import (
    build_tree_function,
    composite_tree_root,
    empty_probability_series,
    geometric_kernel_root,
    second_fixed_point,
    tree_compose_series,
    tree_deriv,
    tree_eval,
    tree_series,
)
from src.pgf import bimodal, finite, product
from src.series import TruncatedSeries, divide


class TestTreeFunction(unittest.TestCase):
    def setUp(self):
        """Reference offspring A = D_{2/30,6} and the affine 0.6 + 0.4u."""
        self.a = bimodal(2 / 30, 6)
        self.t = build_tree_function(self.a)
        self.affine = build_tree_function(bimodal(0.4, 1))

    def test_tangency(self):
        """tau^6 = 2.8 for the bimodal offspring, rho = tau / A(tau)."""
        tau, rho = self.t.tangency()
        self.assertAlmostEqual(tau, 2.8 ** (1 / 6), delta=1e-10)
        self.assertAlmostEqual(rho, tau / 1.12, delta=1e-10)
        self.assertLess(abs(self.a.evaluate(tau) - tau * self.a.deriv(tau)), 1e-10)
        self.assertGreater(tau, 1.0)
        self.assertGreater(rho, 1.0)

    def test_eval_at_radius(self):
        """T_A(rho) = tau."""
        self.assertAlmostEqual(tree_eval(self.t, self.t.rho), self.t.tau, delta=1e-8)

    def test_eval_basic_points(self):
        """T_A(0) = 0 and T_A(1) = 1 for stable offspring."""
        self.assertEqual(tree_eval(self.t, 0.0), 0.0)
        self.assertAlmostEqual(tree_eval(self.t, 1.0), 1.0, delta=1e-12)

    def test_eval_residual_and_monotonicity(self):
        """|T - zA(T)| < 1e-12 and T strictly increasing on [0, rho]."""
        zs = np.linspace(0.0, self.t.rho, 41)
        values = np.array([tree_eval(self.t, z) for z in zs])
        residuals = np.abs(values - zs * np.array([self.a.evaluate(x) for x in values]))
        self.assertLess(residuals.max(), 1e-12)
        self.assertTrue(np.all(np.diff(values) > 0.0))

    def test_beyond_radius(self):
        """Arguments past rho are refused."""
        with self.assertRaises(BeyondRadius):
            tree_eval(self.t, self.t.rho * 1.01)
        with self.assertRaises(BeyondRadius):
            tree_deriv(self.t, self.t.rho)

    def test_affine_closed_form(self):
        """Affine offspring gives T(z) = 0.6z / (1 - 0.4z)."""
        for z in (0.3, 0.8, 1.0, 2.0):
            self.assertAlmostEqual(tree_eval(self.affine, z), 0.6 * z / (1 - 0.4 * z), places=14)
        self.assertTrue(math.isinf(self.affine.rho))
        with self.assertRaises(DegenerateLinear):
            self.affine.tangency()
        with self.assertRaises(BeyondRadius):
            tree_eval(self.affine, 2.5)

    def test_derivative(self):
        """T'(1) = 1/(1 - lambda), T'(0) = A(0), and finite differences at 0.9."""
        self.assertAlmostEqual(tree_deriv(self.t, 1.0), 1 / 0.6, delta=1e-10)
        self.assertAlmostEqual(tree_deriv(self.t, 0.0), 14 / 15, places=14)
        h = 1e-6
        numeric = (tree_eval(self.t, 0.9 + h) - tree_eval(self.t, 0.9 - h)) / (2 * h)
        self.assertAlmostEqual(tree_deriv(self.t, 0.9), numeric, delta=1e-5 * numeric)

    def test_preconditions(self):
        """NeverEmpty before Unstable."""
        with self.assertRaises(NeverEmpty):
            build_tree_function(finite([0.0, 1.0]))
        with self.assertRaises(Unstable):
            build_tree_function(finite([0.3, 0.2, 0.5]))


class TestTreeSeries(unittest.TestCase):
    def test_affine_coefficients(self):
        """[z^n] 0.6z/(1-0.4z) = 0.6 * 0.4^(n-1)."""
        coeffs = tree_series(build_tree_function(bimodal(0.4, 1)), 12).coeffs
        n = np.arange(1, 13)
        self.assertEqual(coeffs[0], 0.0)
        assert_allclose(coeffs[1:], 0.6 * 0.4 ** (n - 1), rtol=1e-13)

    def test_lagrange_inversion(self):
        """[z^n] T = (1/n) [x^(n-1)] A(x)^n for n <= 30."""
        a = bimodal(2 / 30, 6)
        coeffs = tree_series(build_tree_function(a), 30).coeffs
        for n in range(1, 31):
            lagrange = P.polypow(a.probs, n)[n - 1] / n
            self.assertAlmostEqual(coeffs[n], lagrange, delta=1e-12)

    def test_first_coefficient(self):
        """A tree of size 1 is a childless root."""
        for d in (bimodal(2 / 30, 6), finite([0.5, 0.2, 0.2, 0.1])):
            self.assertAlmostEqual(tree_series(build_tree_function(d), 5)[1], d.p0, places=15)

    def test_coefficients_form_a_distribution(self):
        """Coefficients are non-negative and sum to at most 1."""
        coeffs = tree_series(build_tree_function(bimodal(2 / 30, 6)), 128).coeffs
        self.assertGreaterEqual(coeffs.min(), 0.0)
        self.assertLessEqual(coeffs.sum(), 1.0 + 1e-12)
        self.assertGreater(coeffs.sum(), 0.99)


class TestEmptyProbabilities(unittest.TestCase):
    def test_entries(self):
        """P(X_t = 0) from the tree function: 1, A(0), ..., tending to 1 - lambda."""
        entries = empty_probability_series(build_tree_function(bimodal(2 / 30, 6)), 300).coeffs
        self.assertAlmostEqual(entries[0], 1.0, places=15)
        self.assertAlmostEqual(entries[1], 14 / 15, places=15)
        self.assertTrue(np.all((entries > 0.0) & (entries <= 1.0 + 1e-15)))
        self.assertLess(np.abs(entries[200:] - 0.6).max(), 0.01)


class TestRoots(unittest.TestCase):
    def setUp(self):
        """Reference arrivals."""
        self.a = bimodal(2 / 30, 6)
        self.b = bimodal(2 / 5, 1)

    def test_second_fixed_point(self):
        """A(beta) = beta with beta in (1.36, 1.37)."""
        beta = second_fixed_point(self.a)
        self.assertLess(abs(self.a.evaluate(beta) - beta), 1e-12)
        self.assertTrue(1.36 < beta < 1.37)

    def test_second_fixed_point_quadratic(self):
        """0.9 + 0.1u^2 = u has roots 1 and 9."""
        self.assertAlmostEqual(second_fixed_point(bimodal(0.1, 2)), 9.0, delta=1e-9)

    def test_second_fixed_point_errors(self):
        """Affine arrivals have beta = +inf; unstable arrivals have no stationary regime."""
        with self.assertRaises(DegenerateLinear):
            second_fixed_point(bimodal(0.4, 1))
        with self.assertRaises(Unstable):
            second_fixed_point(bimodal(0.2, 6))

    def test_geometric_kernel_root(self):
        """gamma = beta for p = 1, and gamma in (1, beta) for p = 0.9."""
        beta = second_fixed_point(self.a)
        self.assertAlmostEqual(geometric_kernel_root(self.a, 1.0), beta, delta=1e-12)
        p = 0.9
        gamma = geometric_kernel_root(self.a, p)
        self.assertTrue(1.0 < gamma < beta)
        self.assertLess(abs(self.a.evaluate(gamma) * (1 - p + p / gamma) - 1.0), 1e-12)

    def test_geometric_kernel_root_errors(self):
        """lambda >= p is unstable; p must be a probability."""
        with self.assertRaises(Unstable):
            geometric_kernel_root(self.a, 0.39)
        with self.assertRaises(InvalidProbability):
            geometric_kernel_root(self.a, 0.0)
        with self.assertRaises(DegenerateLinear):
            geometric_kernel_root(bimodal(0.4, 1), 0.9)

    def test_composite_root(self):
        """T_A(B(delta)) = delta; delta is also the second fixed point of AB."""
        delta = composite_tree_root(self.a, self.b)
        t = build_tree_function(self.a)
        self.assertGreater(delta, 1.0)
        self.assertLess(abs(tree_eval(t, self.b.evaluate(delta)) - delta), 1e-10)
        self.assertAlmostEqual(delta, second_fixed_point(product(self.a, self.b)), delta=1e-9)

    def test_composite_root_affine(self):
        """Affine A: 4v^2 - 13v + 9 = 0, largest root 2.25."""
        self.assertAlmostEqual(composite_tree_root(bimodal(0.4, 1), self.b), 2.25, delta=1e-10)

    def test_composite_root_errors(self):
        """Unstable load, a degenerate flow 2, and a crossing past the radius."""
        with self.assertRaises(Unstable):
            composite_tree_root(bimodal(0.2, 6), self.b)
        with self.assertRaises(DegenerateBoundary):
            composite_tree_root(self.a, finite([0.0, 1.0]))
        with self.assertRaises(NoPoleSingularity):
            composite_tree_root(self.a, bimodal(0.01, 1))


class TestTreeComposeSeries(unittest.TestCase):
    def test_point_mass_flow(self):
        """B = 1 gives the constant W = T_A(1) = 1."""
        w = tree_compose_series(bimodal(2 / 30, 6), finite([1.0]), 10)
        assert_allclose(w.coeffs, np.eye(11)[0], atol=1e-12)

    def test_affine_closed_form(self):
        """W = 0.6B / (1 - 0.4B) for the affine offspring."""
        order = 30
        b = bimodal(2 / 5, 1)
        w = tree_compose_series(bimodal(0.4, 1), b, order)
        bv = b.as_series(order)
        expected = divide(0.6 * bv, 1.0 - 0.4 * bv)
        assert_allclose(w.coeffs, expected.coeffs, atol=1e-12)

    def test_defining_equation_residual(self):
        """W - B A(W) vanishes at order 128 for the reference parameters."""
        a, b = bimodal(2 / 30, 6), bimodal(2 / 5, 1)
        w = tree_compose_series(a, b, 128)
        residual = w - b.as_series(128) * a.compose_series(w)
        self.assertLess(np.abs(residual.coeffs).max(), 1e-12)

    def test_constant_term(self):
        """W(0) = T_A(B(0))."""
        a, b = bimodal(2 / 30, 6), bimodal(2 / 5, 1)
        w = tree_compose_series(a, b, 16)
        self.assertAlmostEqual(w[0], tree_eval(build_tree_function(a), 0.6), delta=1e-12)
        self.assertIsInstance(w, TruncatedSeries)


if __name__ == '__main__':
    unittest.main()
