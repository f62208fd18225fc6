import unittest
import numpy as np

from wgfem.diagnostic import kernel_suite, commutation_suite, conservation_suite, quadrature_suite, parser_suite
from wgfem.utils import random_triangles, recursive_grid

class TestSuites(unittest.TestCase):
    """
    Class to test the invariant suites on reduced samples
    """
    def test_kernel(self):
        result = kernel_suite(js = (0, 1), n_triangles = 20)
        self.assertTrue(result['passed'])
        self.assertTrue(result['hard'])
        self.assertEqual(result['details']['j=1']['kernel_dimensions'], [1]*20)

    def test_kernel_without_one_dimensional_kernel(self):
        result = kernel_suite(js = (0,), n_triangles = 5, tol = 2.)
        self.assertFalse(result['passed'])
        self.assertIsNone(result['details']['j=0']['min_alignment'])
        self.assertIsNone(result['details']['j=0']['min_gap'])

    def test_kernel_rt_report_only(self):
        result = kernel_suite(js = (0,), n_triangles = 10, family = 'rt')
        self.assertFalse(result['hard'])
        self.assertEqual(result['suite'], 'kernel_rt')

    def test_commutation(self):
        for family in ('full', 'rt'):
            result = commutation_suite(js = (0, 1), n = 3, n_polynomials = 5, n_smooth = 3, family = family)
            self.assertTrue(result['passed'])

    def test_conservation(self):
        cons, cont = conservation_suite(problems = ('variable-coeff',), n = 4)
        self.assertTrue(cons['passed'] and cont['passed'])
        cons, _ = conservation_suite(problems = ('sinsin',), n = 4, inject_bug = True)
        self.assertFalse(cons['passed'])

    def test_quadrature(self):
        self.assertTrue(quadrature_suite()['passed'])

    def test_parser(self):
        result = parser_suite()
        self.assertTrue(result['passed'], result['details']['failures'])

class TestUtils(unittest.TestCase):
    """
    Class to test sampling helpers
    """
    def test_random_triangles(self):
        coords = random_triangles(50, rng = np.random.default_rng(seed = 42), min_angle = 25.)
        self.assertEqual(coords.shape, (50, 3, 2))
        e1 = coords[:, 1] - coords[:, 0]
        e2 = coords[:, 2] - coords[:, 0]
        self.assertTrue(np.all(e1[:, 0]*e2[:, 1] - e1[:, 1]*e2[:, 0] > 0.))
        for tri in coords:
            for k in range(3):
                a = tri[(k+1)%3] - tri[k]
                b = tri[(k+2)%3] - tri[k]
                angle = np.degrees(np.arccos(a @ b/(np.linalg.norm(a)*np.linalg.norm(b))))
                self.assertGreater(angle, 25. - 1e-9)

    def test_grid(self):
        grid, diff = recursive_grid([[0., 1.], [0., 2.]], 3)
        self.assertEqual(grid.shape, (9, 2))
        np.testing.assert_allclose(diff, [0.5, 1.])
        np.testing.assert_allclose(grid[-1], [1., 2.])

if __name__ == '__main__':
    unittest.main()
