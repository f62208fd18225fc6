import unittest
import numpy as np

from wgfem.mesh import structured_unit_square
from wgfem.weak_gradient import WgSpace, project_exact
from wgfem.assembly import assemble, solve
from wgfem.postprocess import error_norms, flux_report, normal_fluxes, conservation_residuals, conservation_residual
from wgfem.postprocess import patch_conservation_residual, flux_jumps, numerical_flux, galerkin_orthogonality
from wgfem.problem import ProblemSpec, builtin_problem
from wgfem.diagnostic import estimate_rates, ErrorReport
from wgfem.exceptions import WGException, ConfigError

class TestErrorNorms(unittest.TestCase):
    """
    Class to test the error norms
    """
    def test_projection(self):
        problem = builtin_problem('sinsin')
        mesh    = structured_unit_square(4)
        space   = WgSpace(1)
        row     = error_norms(project_exact(problem.u, mesh, space), problem.u, problem.grad_u)
        self.assertLess(row['eH1'], 1e-12)
        self.assertLess(row['eL2proj'], 1e-12)
        self.assertGreater(row['eL2'], 0.)
        self.assertEqual(row['dofs'], mesh.n_triangles*3 + mesh.n_edges*3)
        self.assertAlmostEqual(row['h'], mesh.h)

    def test_linear(self):
        problem = builtin_problem('linear')
        for family in ('full', 'rt'):
            u_h = solve(assemble(problem, structured_unit_square(3), WgSpace(0, family)))
            row = error_norms(u_h, problem.u, problem.grad_u)
            self.assertLess(row['eH1'], 1e-9)
            self.assertLess(row['eL2proj'], 1e-9)
            self.assertLess(row['eGrad'], 1e-9)

    def test_missing_exact(self):
        u_h = solve(assemble(ProblemSpec(f = '1'), structured_unit_square(2), WgSpace(0)))
        with self.assertRaises(ConfigError):
            error_norms(u_h, None)

    def test_convergence(self):
        problem = builtin_problem('sinsin')
        rows    = []
        for n in (4, 8, 16):
            u_h = solve(assemble(problem, structured_unit_square(n), WgSpace(0)))
            rows.append(error_norms(u_h, problem.u, problem.grad_u))
        report = ErrorReport(rows)
        self.assertGreater(report.finest_rate('eH1'), 0.9)
        self.assertGreater(report.finest_rate('eL2proj'), 1.8)
        self.assertGreater(report.finest_rate('eL2'), 0.9)
        self.assertIn('eGrad', report.rates)
        self.assertTrue(rows[0]['eH1'] > rows[1]['eH1'] > rows[2]['eH1'])

    def test_scaling(self):
        problem = builtin_problem('sinsin')
        mesh    = structured_unit_square(4)
        u_h     = solve(assemble(problem, mesh, WgSpace(0)))
        row     = error_norms(u_h, problem.u, problem.grad_u)
        scaled  = ProblemSpec(f = '5*pi^2*sin(pi*x)*sin(pi*y)')
        v_h     = solve(assemble(scaled, mesh, WgSpace(0)))
        for alpha, w_h in ((2.5, v_h), (-1.5, -1.5*u_h)):
            u          = lambda x, y: alpha*problem.u(x, y)
            grad_u     = lambda x, y: alpha*problem.grad_u(x, y)
            scaled_row = error_norms(w_h, u, grad_u)
            for key in ('eH1', 'eL2proj', 'eL2', 'eGrad'):
                self.assertAlmostEqual(scaled_row[key], abs(alpha)*row[key], delta = 1e-10*abs(alpha)*row[key])

class TestConvergenceRates(unittest.TestCase):
    """
    Class to test the observed convergence rates of the manufactured problems
    """
    def _report(self, name, space, levels):
        problem = builtin_problem(name)
        rows    = []
        for n in levels:
            u_h = solve(assemble(problem, structured_unit_square(n), space))
            rows.append(error_norms(u_h, problem.u, problem.grad_u))
        return ErrorReport(rows)

    def test_full_j0(self):
        report = self._report('sinsin', WgSpace(0), (8, 16, 32, 64))
        self.assertGreaterEqual(report.finest_rate('eL2proj'), 1.8)
        self.assertGreaterEqual(report.finest_rate('eH1'), 0.9)

    def test_full_j1(self):
        report = self._report('sinsin', WgSpace(1), (4, 8, 16, 32))
        self.assertGreaterEqual(report.finest_rate('eL2proj'), 2.8)
        self.assertGreaterEqual(report.finest_rate('eH1'), 1.85)

    def test_convection(self):
        report = self._report('convection', WgSpace(0), (8, 16, 32, 64))
        self.assertGreaterEqual(report.finest_rate('eL2proj'), 1.8)
        self.assertGreaterEqual(report.finest_rate('eH1'), 0.9)

    def test_raviart_thomas_j0(self):
        report = self._report('sinsin', WgSpace(0, 'rt'), (8, 16, 32, 64))
        self.assertGreaterEqual(report.finest_rate('eL2proj'), 1.8)
        self.assertGreaterEqual(report.finest_rate('eH1'), 0.9)

class TestFluxes(unittest.TestCase):
    """
    Class to test mass conservation and flux continuity
    """
    def _solution(self, name, space, n = 4, perturb = None):
        problem = builtin_problem(name)
        return solve(assemble(problem, structured_unit_square(n), space, perturb = perturb)), problem

    def test_conservation(self):
        for name in ('sinsin', 'convection'):
            for space in (WgSpace(0, 'full'), WgSpace(1, 'rt')):
                u_h, problem = self._solution(name, space)
                report = flux_report(u_h, problem)
                self.assertTrue(report.conservation_passed)
                self.assertTrue(report.continuity_passed)
                self.assertTrue(report.passed)
                self.assertEqual(len(report.residuals), u_h.mesh.n_triangles)
                self.assertEqual(len(report.edges), len(u_h.mesh.interior_edges))

    def test_patch(self):
        u_h, problem = self._solution('convection', WgSpace(0))
        fluxes = normal_fluxes(u_h, problem)
        self.assertEqual(fluxes.shape, (u_h.mesh.n_triangles, 3, 2))
        self.assertLess(patch_conservation_residual(u_h, problem, [0, 1, 2, 3], fluxes), 1e-9)
        self.assertLess(patch_conservation_residual(u_h, problem, np.arange(u_h.mesh.n_triangles), fluxes), 1e-9)
        self.assertAlmostEqual(conservation_residual(u_h, problem, 5), conservation_residuals(u_h, problem, fluxes)[5])
        np.testing.assert_allclose(numerical_flux(u_h, problem, 2, 1), fluxes[2, 1])

    def test_jumps(self):
        u_h, problem = self._solution('sinsin', WgSpace(1, 'full'))
        edges, jumps, scales = flux_jumps(u_h, problem)
        self.assertTrue(np.all(~u_h.mesh.boundary[edges]))
        self.assertTrue(np.all(jumps <= 1e-9*scales))

    def test_negative_control(self):
        u_h, problem = self._solution('sinsin', WgSpace(0), perturb = (5, 1.5))
        report = flux_report(u_h, problem)
        self.assertFalse(report.conservation_passed)
        self.assertFalse(report.passed)

    def test_galerkin_orthogonality(self):
        u_h, problem = self._solution('convection', WgSpace(1))
        orth, scale = galerkin_orthogonality(u_h, problem)
        self.assertLessEqual(orth, 1e-9*scale)

class TestRates(unittest.TestCase):
    """
    Class to test observed convergence rates
    """
    def test_rates(self):
        rates, slope = estimate_rates([(1., 1.), (0.5, 0.25), (0.25, 0.0625)])
        np.testing.assert_allclose(rates, [2., 2.])
        self.assertAlmostEqual(slope, 2.)
        rates, slope = estimate_rates([(0.5, 0.1), (0.25, 0.05)])
        self.assertAlmostEqual(rates[0], 1.)

    def test_exact(self):
        rates, slope = estimate_rates([(0.5, 1e-14), (0.25, 1e-15)], threshold = 1e-10)
        self.assertEqual(rates, [None])
        self.assertIsNone(slope)
        rows = [{'h': 0.5, 'dofs': 10, 'eH1': 1e-14, 'eL2proj': 1e-15, 'eL2': 1e-2},
                {'h': 0.25, 'dofs': 40, 'eH1': 2e-14, 'eL2proj': 1e-15, 'eL2': 2.5e-3}]
        report = ErrorReport(rows)
        self.assertEqual(report.finest_rate('eH1'), 'exact')
        self.assertTrue(report.exact('eL2proj'))
        self.assertAlmostEqual(report.finest_rate('eL2'), 2.)
        table = report.table()
        self.assertEqual(table[0][-2:], ['', ''])
        self.assertEqual(table[1][-2:], ['exact', 'exact'])

    def test_errors(self):
        with self.assertRaises(WGException):
            estimate_rates([(1., 1.)])
        with self.assertRaises(WGException):
            ErrorReport([{'h': 1., 'dofs': 1, 'eH1': 1., 'eL2proj': 1., 'eL2': 1.}])

if __name__ == '__main__':
    unittest.main()
