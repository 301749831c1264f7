from unittest import TestCase

import numpy as np
from hypothesis import given, strategies as st

from layerfem.analysis.norms import Difference, sup_norm
from layerfem.analysis.operators import interpolate
from layerfem.exceptions import LayerFemError, TooFewPoints, UnsupportedOrder
from layerfem.fem.basis import HermiteBasis, LagrangeGLBasis, hermite_transition_norms, make_basis
from layerfem.fem.quadrature import default_rule, gauss_legendre, gauss_lobatto
from layerfem.fem.space import FunctionSpace
from layerfem.meshes import uniform_mesh
from layerfem.problems.fields import Field1D, PolynomialField, Sinusoid, SumField


class ExpField(Field1D):
    def derivative(self, x, order):
        return np.exp(x)


class GaussLobattoTests(TestCase):
    def test_two_points(self):
        rule = gauss_lobatto(2)
        np.testing.assert_allclose(rule.points, [-1.0, 1.0])
        np.testing.assert_allclose(rule.weights, [1.0, 1.0])

    def test_three_points(self):
        rule = gauss_lobatto(3)
        np.testing.assert_allclose(rule.points, [-1.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(rule.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-13)

    def test_four_points(self):
        rule = gauss_lobatto(4)
        s = 1 / np.sqrt(5)
        np.testing.assert_allclose(rule.points, [-1.0, -s, s, 1.0], rtol=1e-13)
        np.testing.assert_allclose(rule.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], rtol=1e-13)

    def test_five_points(self):
        rule = gauss_lobatto(5)
        s = np.sqrt(3 / 7)
        np.testing.assert_allclose(rule.points, [-1.0, -s, 0.0, s, 1.0], rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(rule.weights, [1 / 10, 49 / 90, 32 / 45, 49 / 90, 1 / 10], rtol=1e-13)

    def test_symmetry(self):
        for n in range(2, 15):
            rule = gauss_lobatto(n)
            np.testing.assert_array_equal(rule.points, -rule.points[::-1])
            np.testing.assert_array_equal(rule.weights, rule.weights[::-1])
            self.assertTrue(np.all(np.diff(rule.points) > 0))

    def test_exactness(self):
        for n in range(2, 12):
            rule = gauss_lobatto(n)
            for degree in range(rule.exactness_degree + 1):
                exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
                self.assertAlmostEqual(rule.integrate(lambda x: x**degree), exact, places=13)

    def test_too_few_points(self):
        with self.assertRaises(TooFewPoints):
            gauss_lobatto(1)


class GaussLegendreTests(TestCase):
    def test_exactness(self):
        for n in range(1, 12):
            rule = gauss_legendre(n)
            self.assertEqual(rule.exactness_degree, 2 * n - 1)
            for degree in range(2 * n):
                exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
                self.assertAlmostEqual(rule.integrate(lambda x: x**degree), exact, places=13)

    def test_mapped(self):
        points, weights = gauss_legendre(3).mapped(0.0, 2.0)
        self.assertAlmostEqual(float(np.sum(weights)), 2.0, places=14)
        self.assertAlmostEqual(float(np.dot(weights, points**2)), 8.0 / 3.0, places=13)

    def test_default_rule(self):
        self.assertEqual(len(default_rule(1)), 6)
        self.assertEqual(len(default_rule(6)), 8)

    def test_too_few_points(self):
        with self.assertRaises(TooFewPoints):
            gauss_legendre(0)

    def test_read_only(self):
        with self.assertRaises(ValueError):
            gauss_legendre(3).points[0] = 0.0


class LagrangeBasisTests(TestCase):
    def test_kronecker(self):
        for p in range(1, 8):
            basis = LagrangeGLBasis(p)
            np.testing.assert_allclose(basis.tabulate(basis.local_nodes), np.eye(p + 1), atol=1e-12)

    @given(st.integers(min_value=1, max_value=7), st.floats(min_value=-1.0, max_value=1.0))
    def test_partition_of_unity(self, p, xi):
        basis = LagrangeGLBasis(p)
        self.assertAlmostEqual(float(basis.tabulate(np.array([xi])).sum()), 1.0, places=12)
        self.assertAlmostEqual(float(basis.tabulate(np.array([xi]), 1).sum()), 0.0, places=10)

    def test_derivative_matches_difference_quotient(self):
        basis = LagrangeGLBasis(4)
        xi, step = np.linspace(-0.9, 0.9, 7), 1e-6
        quotient = (basis.tabulate(xi + step) - basis.tabulate(xi - step)) / (2 * step)
        np.testing.assert_allclose(basis.tabulate(xi, 1), quotient, atol=1e-7)

    def test_bad_degree(self):
        with self.assertRaises(UnsupportedOrder):
            LagrangeGLBasis(0)

    def test_interpolation_convergence(self):
        for p in (1, 2, 3):
            errors = []
            for N in (8, 16):
                space = FunctionSpace(uniform_mesh(N, 0.1), LagrangeGLBasis(p))
                u = ExpField()
                errors.append(sup_norm(Difference(u, interpolate(u, space)), space, space.all_cells()))
            self.assertGreater(np.log2(errors[0] / errors[1]), p + 0.8)


class HermiteBasisTests(TestCase):
    def test_dof_conditions(self):
        for m in (1, 2):
            basis = HermiteBasis(m)
            for i, (node, order) in enumerate(zip(basis.local_nodes, basis.local_orders)):
                values = basis.tabulate(np.array([node]), order)[:, 0]
                expected = np.zeros(2 * m)
                expected[i] = 1.0
                np.testing.assert_allclose(values, expected, atol=1e-12)

    def test_make_basis(self):
        self.assertIsInstance(make_basis("hermite", 3), HermiteBasis)
        self.assertEqual(make_basis("hermite", 3).m, 2)
        self.assertEqual(make_basis("lagrange-gl", 2).p, 2)
        with self.assertRaises(UnsupportedOrder):
            make_basis("hermite", 2)
        with self.assertRaises(UnsupportedOrder):
            HermiteBasis(3)

    def test_c1_gluing(self):
        space = FunctionSpace(uniform_mesh(8, 0.1), HermiteBasis(2))
        u = SumField([Sinusoid(1.0, np.pi), PolynomialField([0.0, 0.0, 0.0, 1.0])])
        uI = interpolate(u, space)
        interior = space.mesh.nodes_x[1:-1]
        for order in (0, 1):
            left = uI.evaluate((interior,), (order,), side="left")
            right = uI.evaluate((interior,), (order,), side="right")
            np.testing.assert_allclose(left, right, atol=1e-12)
            np.testing.assert_allclose(right, u.evaluate((interior,), (order,)), atol=1e-12)

    def test_cubic_reproduction(self):
        space = FunctionSpace(uniform_mesh(4, 0.1), HermiteBasis(2))
        cubic = PolynomialField([0.3, -1.0, 2.0, 0.7])
        uI = interpolate(cubic, space)
        x = np.linspace(0.0, 1.0, 41)
        for order in (0, 1, 2, 3):
            np.testing.assert_allclose(uI.evaluate((x,), (order,)), cubic.evaluate((x,), (order,)), atol=1e-11)

    def test_transition_norms(self):
        norms = hermite_transition_norms(2, 1, 0.01)
        self.assertAlmostEqual(norms[0], 150.0, places=9)
        self.assertAlmostEqual(norms[1], 1.0, places=12)
        self.assertAlmostEqual(hermite_transition_norms(2, 2, 0.01)[0], 1.0, places=12)

    def test_transition_norms_errors(self):
        with self.assertRaises(UnsupportedOrder):
            hermite_transition_norms(3, 1, 0.1)
        with self.assertRaises(LayerFemError):
            hermite_transition_norms(2, 1, 0.0)
