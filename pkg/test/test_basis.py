import unittest
import numpy as np

from wgfem.basis import scalar_basis, edge_basis, vector_basis, monomial_index
from wgfem.quadrature import triangle_rule, edge_rule
from wgfem.transform import reference_triangle, local_scaling, to_local, from_reference, to_reference, edge_points
from wgfem.exceptions import WGException

class TestBasis(unittest.TestCase):
    """
    Class to test the local polynomial bases
    """
    def test_scalar_orthonormal(self):
        rule = triangle_rule(12)
        for j in range(5):
            basis = scalar_basis(j)
            self.assertEqual(basis.dim, (j+1)*(j+2)//2)
            phi   = basis.evaluate(rule.points)
            gram  = np.einsum('q,qi,qk->ik', rule.weights, phi, phi)
            np.testing.assert_allclose(gram, np.identity(basis.dim), atol = 1e-11)

    def test_scalar_gradient(self):
        basis = scalar_basis(3)
        xi    = np.array([[0.2, 0.3], [0.5, 0.1]])
        eps   = 1e-6
        grad  = basis.gradient(xi)
        dx    = (basis.evaluate(xi + [eps, 0.]) - basis.evaluate(xi - [eps, 0.]))/(2*eps)
        dy    = (basis.evaluate(xi + [0., eps]) - basis.evaluate(xi - [0., eps]))/(2*eps)
        np.testing.assert_allclose(grad[..., 0], dx, atol = 1e-6)
        np.testing.assert_allclose(grad[..., 1], dy, atol = 1e-6)

    def test_edge_orthonormal(self):
        rule = edge_rule(20)
        for ell in range(6):
            psi  = edge_basis(ell).evaluate(rule.points)
            gram = np.einsum('q,qi,qk->ik', rule.weights, psi, psi)
            np.testing.assert_allclose(gram, np.identity(ell+1), atol = 1e-12)

    def test_vector_dimensions(self):
        for j in range(4):
            self.assertEqual(vector_basis('full', j).dim, (j+2)*(j+3))
            self.assertEqual(vector_basis('rt', j).dim, (j+1)*(j+3))

    def test_vector_orthonormal(self):
        rule = triangle_rule(12)
        c, h = local_scaling(reference_triangle)
        y    = to_local(rule.points, c, h)
        for family in ('full', 'rt'):
            for j in range(3):
                V    = vector_basis(family, j).evaluate(y)
                gram = np.einsum('q,qic,qkc->ik', rule.weights, V, V)
                np.testing.assert_allclose(gram, np.identity(len(V[0])), atol = 1e-10)

    def test_rt_normal_trace(self):
        # Normal traces of RT_j fields are polynomials of degree j on straight edges
        j     = 1
        basis = vector_basis('rt', j)
        t     = np.linspace(0., 1., 7)
        a, b  = np.array([0.3, -0.2]), np.array([-0.1, 0.4])
        y     = a + t[:, None]*(b - a)
        n     = np.array([b[1]-a[1], a[0]-b[0]])/np.linalg.norm(b-a)
        vals  = basis.normal_trace(y, n)
        for i in range(basis.dim):
            fit = np.polyfit(t, vals[:, i], j)
            np.testing.assert_allclose(np.polyval(fit, t), vals[:, i], atol = 1e-12)

    def test_divergence(self):
        basis = vector_basis('full', 2)
        y     = np.array([[0.1, -0.2], [0.3, 0.05]])
        eps   = 1e-6
        div   = basis.divergence(y)
        fd    = (basis.evaluate(y + [eps, 0.])[..., 0] - basis.evaluate(y - [eps, 0.])[..., 0])/(2*eps) \
              + (basis.evaluate(y + [0., eps])[..., 1] - basis.evaluate(y - [0., eps])[..., 1])/(2*eps)
        np.testing.assert_allclose(div, fd, atol = 1e-6)

    def test_monomial_index(self):
        self.assertEqual(monomial_index(0, 0), 0)
        self.assertEqual(monomial_index(1, 0), 1)
        self.assertEqual(monomial_index(0, 1), 2)
        self.assertEqual(monomial_index(0, 2), 5)

    def test_errors(self):
        with self.assertRaises(WGException):
            vector_basis('bdm', 1)
        with self.assertRaises(WGException):
            scalar_basis(-1)

class TestTransform(unittest.TestCase):
    """
    Class to test the affine maps
    """
    def test_round_trip(self):
        coords = np.array([[0.2, 0.1], [1.3, 0.4], [0.5, 1.7]])
        xi     = np.array([[0.1, 0.2], [0.6, 0.3], [0., 0.]])
        x      = from_reference(xi, coords)
        np.testing.assert_allclose(x[-1], coords[0])
        np.testing.assert_allclose(to_reference(x, coords), xi, atol = 1e-14)

    def test_edge_points(self):
        coords = np.array([[0., 0.], [1., 0.], [0., 1.]])
        t      = np.array([0., 1.])
        pts    = edge_points(coords, np.array([1, 1, -1]), t)
        np.testing.assert_allclose(pts[0], [[0., 0.], [1., 0.]])
        np.testing.assert_allclose(pts[1], [[1., 0.], [0., 1.]])
        # Reversed edge: traversed from vertex 0 to vertex 2
        np.testing.assert_allclose(pts[2], [[0., 0.], [0., 1.]])

if __name__ == '__main__':
    unittest.main()
