import unittest
import numpy as np

from wgfem.mesh import Mesh, build_edges, structured_unit_square, uniform_refine
from wgfem.exceptions import MeshError

class TestMesh(unittest.TestCase):
    """
    Class to test mesh topology and geometry
    """
    def test_unit_square_counts(self):
        for n in (1, 2, 5):
            mesh = structured_unit_square(n)
            self.assertEqual(mesh.n_triangles, 2*n**2)
            self.assertEqual(mesh.n_vertices, (n+1)**2)
            self.assertEqual(mesh.n_edges, 3*n**2 + 2*n)
            self.assertEqual(int(mesh.boundary.sum()), 4*n)
            self.assertEqual(mesh.euler_characteristic(), 1)
            self.assertAlmostEqual(mesh.area, 1.)
            self.assertAlmostEqual(mesh.h, np.sqrt(2.)/n)

    def test_counterclockwise(self):
        mesh = structured_unit_square(3)
        self.assertTrue(np.all(mesh.areas > 0.))

    def test_edges(self):
        mesh = structured_unit_square(2)
        self.assertTrue(np.all(mesh.edges[:, 0] < mesh.edges[:, 1]))
        # Boundary edges have one adjacent triangle, interior edges two
        self.assertTrue(np.all(mesh.edge_triangles[mesh.boundary, 1] == -1))
        self.assertTrue(np.all(mesh.edge_triangles[~mesh.boundary, 1] >= 0))
        # Local edge k joins local vertices k and k+1
        for t in range(mesh.n_triangles):
            for k in range(3):
                e    = mesh.triangle_edges[t, k]
                a, b = mesh.triangles[t, k], mesh.triangles[t, (k+1)%3]
                self.assertEqual(sorted((a, b)), list(mesh.edges[e]))
                self.assertEqual(mesh.triangle_edge_signs[t, k], 1 if a < b else -1)
                self.assertIn(t, mesh.edge_triangles[e])

    def test_normals(self):
        mesh = structured_unit_square(2)
        coords = mesh.triangle_coordinates()
        for t in range(mesh.n_triangles):
            for k in range(3):
                n   = mesh.normals[t, k]
                mid = 0.5*(coords[t, k] + coords[t, (k+1)%3])
                self.assertAlmostEqual(np.linalg.norm(n), 1.)
                # Outward: pointing away from the centroid
                self.assertGreater(np.dot(n, mid - mesh.centroids[t]), 0.)
        # Opposite normals on interior edges
        for e in mesh.interior_edges:
            t0, t1 = mesh.edge_triangles[e]
            k0 = list(mesh.triangle_edges[t0]).index(e)
            k1 = list(mesh.triangle_edges[t1]).index(e)
            np.testing.assert_allclose(mesh.normals[t0, k0], -mesh.normals[t1, k1], atol = 1e-14)

    def test_immutable(self):
        mesh = structured_unit_square(1)
        with self.assertRaises(ValueError):
            mesh.vertices[0, 0] = 3.

    def test_boundary_vertices(self):
        mesh = structured_unit_square(3)
        b    = mesh.boundary_vertices
        x    = mesh.vertices[b]
        self.assertEqual(len(b), 12)
        self.assertTrue(np.all(np.any(np.isclose(x, 0.) | np.isclose(x, 1.), axis = -1)))

    def test_refine(self):
        mesh    = structured_unit_square(2)
        refined = uniform_refine(mesh)
        self.assertEqual(refined.n_triangles, 4*mesh.n_triangles)
        self.assertEqual(refined.n_vertices, mesh.n_vertices + mesh.n_edges)
        self.assertAlmostEqual(refined.h, mesh.h/2.)
        self.assertAlmostEqual(refined.area, mesh.area)
        np.testing.assert_allclose(refined.areas.reshape(-1, 4).sum(axis = 1), mesh.areas)
        self.assertEqual(refined.euler_characteristic(), 1)
        self.assertAlmostEqual(refined.shape_regularity, mesh.shape_regularity)

    def test_errors(self):
        with self.assertRaises(MeshError):
            structured_unit_square(0)
        with self.assertRaises(MeshError):
            Mesh([[0., 0.], [1., 0.], [0., 1.]], [[0, 2, 1]])
        with self.assertRaises(MeshError):
            Mesh([[0., 0.], [1., 0.], [2., 0.]], [[0, 1, 2]])
        with self.assertRaises(MeshError):
            Mesh([[0., 0.], [1., 0.], [0., 1.]], [[0, 1, 3]])
        # Three triangles on one edge
        vertices  = [[0., 0.], [1., 0.], [0.5, 1.], [0.5, 2.], [0.5, 3.]]
        with self.assertRaises(MeshError):
            build_edges(np.array(vertices), np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]]))

if __name__ == '__main__':
    unittest.main()
