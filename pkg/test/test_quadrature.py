import unittest
import numpy as np

from wgfem.quadrature import triangle_rule, edge_rule, max_triangle_exactness, max_edge_exactness
from wgfem.basis import reference_monomial_integral
from wgfem.exceptions import WGException

class TestQuadrature(unittest.TestCase):
    """
    Class to test triangle and edge rules against exact monomial integrals
    """
    def test_triangle_exactness(self):
        for d in (1, 2, 5, 10, 17, max_triangle_exactness):
            rule = triangle_rule(d)
            self.assertAlmostEqual(rule.weights.sum(), 0.5, places = 14)
            x, y = rule.points.T
            self.assertTrue(np.all(x >= 0.) and np.all(y >= 0.) and np.all(x + y <= 1.))
            for p in range(d+1):
                q = d - p
                exact = reference_monomial_integral(p, q)
                self.assertLess(abs(rule.integrate(x**p * y**q) - exact), 1e-13*max(1., exact))

    def test_centroid_rule(self):
        rule = triangle_rule(1)
        self.assertEqual(len(rule), 1)
        np.testing.assert_allclose(rule.points[0], [1./3., 1./3.])

    def test_edge_exactness(self):
        for d in (0, 1, 4, 15, max_edge_exactness):
            rule = edge_rule(d)
            self.assertAlmostEqual(rule.weights.sum(), 1., places = 14)
            for p in range(d+1):
                self.assertAlmostEqual(rule.integrate(rule.points**p), 1./(p+1), places = 12)

    def test_cache(self):
        self.assertIs(triangle_rule(6), triangle_rule(6))
        self.assertIs(edge_rule(6), edge_rule(6))

    def test_unsupported(self):
        with self.assertRaises(WGException):
            triangle_rule(max_triangle_exactness + 1)
        with self.assertRaises(WGException):
            edge_rule(max_edge_exactness + 1)
        with self.assertRaises(WGException):
            triangle_rule(-1)

if __name__ == '__main__':
    unittest.main()
