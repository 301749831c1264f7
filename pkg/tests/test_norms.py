from unittest import TestCase

import numpy as np
from hypothesis import given, settings, strategies as st

from layerfem.analysis.norms import Difference, NormReport, bilinear_value, norm_of_difference, region_cells
from layerfem.analysis.operators import interpolate
from layerfem.analysis.rates import rate_fit, rate_table, scale_factors
from layerfem.exceptions import ConfigError, NonPositiveError, NotEnoughPoints, RegionMeshMismatch
from layerfem.fem.basis import LagrangeGLBasis
from layerfem.fem.discrete import DiscreteFunction
from layerfem.fem.quadrature import default_rule, gauss_legendre
from layerfem.fem.solver import galerkin_solve
from layerfem.fem.space import FunctionSpace
from layerfem.meshes import build_stype_mesh, uniform_mesh
from layerfem.problems.catalog import get_problem
from layerfem.problems.fields import ConstantField, ExponentialLayer, PolynomialField, TensorField

IDENTITY = PolynomialField([0.0, 1.0])


class NormTests(TestCase):
    def test_equal_functions(self):
        space = FunctionSpace(build_stype_mesh("shishkin", 16, 2.0, 1e-4), LagrangeGLBasis(2))
        uI = interpolate(ExponentialLayer(1.0, 1.0, 1e-4), space)
        report = norm_of_difference(uI, uI, space, "all", 1, 1, 1e-4)
        self.assertEqual((report.l2, report.h_semi, report.linf), (0.0, (0.0,), 0.0))

    def test_identity_on_unit_interval(self):
        space = FunctionSpace(uniform_mesh(8, 0.1), LagrangeGLBasis(1))
        report = norm_of_difference(IDENTITY, None, space, "all", 1, 1, 0.25)
        self.assertAlmostEqual(report.l2, 1 / np.sqrt(3), places=13)
        self.assertAlmostEqual(report.h_semi[0], 1.0, places=13)
        self.assertAlmostEqual(report.linf, 1.0, places=14)
        self.assertAlmostEqual(report.energy, 0.25 + 1 / np.sqrt(3), places=13)
        self.assertAlmostEqual(report.balanced, 0.5 + 1 / np.sqrt(3), places=13)
        self.assertAlmostEqual(report.sobolev(1), np.sqrt(4 / 3), places=13)

    def test_exponential_layer_closed_forms(self):
        eps = 1e-2
        space = FunctionSpace(build_stype_mesh("shishkin", 64, 3.0, eps), LagrangeGLBasis(3))
        report = norm_of_difference(ExponentialLayer(1.0, 1.0, eps), None, space, "all", 1, 1, eps)
        decay = 1.0 - np.exp(-2.0 / eps)
        self.assertAlmostEqual(report.l2 / np.sqrt(eps / 2 * decay), 1.0, places=9)
        self.assertAlmostEqual(report.h_semi[0] / np.sqrt(decay / (2 * eps)), 1.0, places=9)
        self.assertEqual(report.linf, 1.0)
        # both terms of the balanced norm are of order one
        self.assertAlmostEqual(report.balanced, np.sqrt(0.5) + np.sqrt(eps / 2), places=7)

    def test_layer_energy_scales_with_sqrt_eps(self):
        energies = []
        for eps in (1e-4, 1e-6, 1e-8):
            _, decomposition = get_problem("rd1d-const", eps)
            space = FunctionSpace(build_stype_mesh("shishkin", 64, 3.0, eps), LagrangeGLBasis(3))
            report = norm_of_difference(decomposition.w[0], None, space, "all", 1, 1, eps)
            # eps |w|_1 and ||w|| are both sqrt(eps / 2) for w = exp(-x / eps)
            self.assertAlmostEqual(report.energy / np.sqrt(2 * eps), 1.0, places=6)
            energies.append(report.energy)
            self.assertAlmostEqual(report.balanced / (np.sqrt(0.5) + np.sqrt(eps / 2)), 1.0, places=6)
        np.testing.assert_allclose(np.array(energies[1:]) / energies[:-1], 0.1, rtol=1e-6)

    def test_two_dimensional_product(self):
        space = FunctionSpace(build_stype_mesh("shishkin", 8, 2.0, 1e-2, dim=2), LagrangeGLBasis(1))
        report = norm_of_difference(TensorField(IDENTITY, IDENTITY), None, space, "all", 1, 1, 1e-2)
        self.assertAlmostEqual(report.l2, 1 / 3, places=13)
        self.assertAlmostEqual(report.h_semi[0], np.sqrt(2 / 3), places=13)

    def test_region_additivity(self):
        eps = 1e-3
        space = FunctionSpace(build_stype_mesh("bakhvalov-s", 32, 2.0, eps), LagrangeGLBasis(2))
        w = ExponentialLayer(1.0, 1.0, eps)
        regions = ("all", "coarse", "complement")
        parts = {region: norm_of_difference(w, None, space, region, 1, 1, eps) for region in regions}
        for order in (0, 1):
            total = parts["all"].seminorm(order) ** 2
            split = parts["coarse"].seminorm(order) ** 2 + parts["complement"].seminorm(order) ** 2
            self.assertAlmostEqual(split / total, 1.0, places=12)
        self.assertEqual(len(region_cells(space, "ply")), 2)
        self.assertLessEqual(set(region_cells(space, "ply")), set(region_cells(space, "complement")))

    def test_quadrature_order_doubling(self):
        eps = 1e-6
        problem, decomposition = get_problem("rd1d-const", eps)
        uN = galerkin_solve(problem, build_stype_mesh("shishkin", 64, 3.0, eps), LagrangeGLBasis(2))
        base = default_rule(2)
        doubled = gauss_legendre(2 * len(base))
        for region in ("all", "coarse", "complement"):
            coarse, fine = (
                norm_of_difference(decomposition.u_exact, uN, uN.space, region, 1, 1, eps, rule).as_dict()
                for rule in (base, doubled)
            )
            # L-infinity is sampled, not integrated
            for kind in ("l2", "h1", "energy", "balanced"):
                self.assertLess(abs(fine[kind] / coarse[kind] - 1.0), 5e-3, (region, kind))

    def test_unknown_region(self):
        space = FunctionSpace(uniform_mesh(8, 0.1), LagrangeGLBasis(1))
        with self.assertRaises(RegionMeshMismatch):
            norm_of_difference(IDENTITY, None, space, "boundary", 1, 1, 0.1)

    def test_difference_dimension_mismatch(self):
        with self.assertRaises(RegionMeshMismatch):
            Difference(IDENTITY, ConstantField(1.0, dim=2))

    def test_bilinear_value(self):
        space = FunctionSpace(uniform_mesh(8, 0.1), LagrangeGLBasis(1))
        self.assertAlmostEqual(bilinear_value(IDENTITY, IDENTITY, space, 0), 1 / 3, places=13)
        self.assertAlmostEqual(bilinear_value(IDENTITY, IDENTITY, space, 1, ConstantField(2.0)), 2.0, places=13)

    def test_as_dict(self):
        report = NormReport("all", 2, 1, 0.01, l2=1.0, h_semi=(2.0, 3.0), linf=4.0)
        self.assertEqual(sorted(report.as_dict()), ["balanced", "energy", "h1", "h2", "l2", "linf"])
        self.assertAlmostEqual(report.energy, 0.01 * 3.0 + np.sqrt(5.0))
        self.assertAlmostEqual(report.balanced, 0.1 * 3.0 + np.sqrt(5.0))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**16), st.floats(min_value=1e-8, max_value=0.25))
    def test_triangle_inequality(self, seed, eps):
        space = FunctionSpace(build_stype_mesh("shishkin", 16, 2.0, 1e-3), LagrangeGLBasis(2))
        rng = np.random.default_rng(seed)
        a = DiscreteFunction(space, rng.normal(size=space.n_dofs))
        b = DiscreteFunction(space, rng.normal(size=space.n_dofs))

        def norms(e):
            report = norm_of_difference(e, None, space, "all", 1, 1, eps)
            return report.energy, report.balanced

        for total, left, right in zip(norms(a + b), norms(a), norms(b)):
            self.assertLessEqual(total, (left + right) * (1 + 1e-9))
        energy, balanced = norms(a)
        self.assertGreaterEqual(balanced, energy)


class RateTests(TestCase):
    Ns = [16, 32, 64, 128]

    def test_exact_power_law(self):
        errors = [3.0 * N**-2.0 for N in self.Ns]
        fit = rate_fit(self.Ns, errors)
        self.assertAlmostEqual(fit.exponent, 2.0, places=10)
        np.testing.assert_allclose(fit.pairwise, 2.0, rtol=1e-10)
        self.assertEqual(fit.scale, "N_inv")

    def test_log_scale(self):
        errors = [(np.log(N) / N) ** 1.5 for N in self.Ns]
        fit = rate_fit(self.Ns, errors, "N_inv_logN")
        self.assertAlmostEqual(fit.exponent, 1.5, places=10)
        self.assertAlmostEqual(fit.last_pairwise, 1.5, places=10)

    def test_mesh_factors(self):
        factors = [0.1, 0.05, 0.02, 0.01]
        errors = [f**3 for f in factors]
        fits = rate_table(self.Ns, errors, factors)
        self.assertEqual([fit.scale for fit in fits], ["N_inv", "N_inv_logN", "mesh"])
        self.assertAlmostEqual(fits[2].exponent, 3.0, places=10)
        self.assertIsInstance(fits[2].to_dict()["pairwise"], list)

    def test_errors(self):
        with self.assertRaises(NotEnoughPoints):
            rate_fit([16], [0.1])
        with self.assertRaises(NonPositiveError):
            rate_fit([16, 32], [0.1, 0.0])
        with self.assertRaises(NonPositiveError):
            rate_fit([16, 32], [0.1, float("nan")])
        with self.assertRaises(ConfigError):
            rate_fit([16, 32], [0.1])
        with self.assertRaises(ConfigError):
            scale_factors([16, 32], "N_inv_sqrt")
        with self.assertRaises(ConfigError):
            scale_factors([16, 32], [0.1])
