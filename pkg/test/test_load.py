import unittest
import tempfile
import numpy as np

from pathlib import Path

from wgfem.load import load_mesh, read_mesh, write_mesh, save_solution, load_solution, save_csv, save_json
from wgfem.mesh import structured_unit_square
from wgfem.weak_gradient import WgSpace, project_exact
from wgfem.exceptions import MeshError, WGException

square_node = """# unit square
4 2 0 1
1 0.0 0.0 1
2 1.0 0.0 1
3 1.0 1.0 1
4 0.0 1.0 1
"""
square_ele = """2 3 0
1 1 2 3
2 1 3 4
"""

class TestMeshFiles(unittest.TestCase):
    """
    Class to test node/ele parsing
    """
    def test_one_based(self):
        mesh = load_mesh(square_node, square_ele)
        self.assertEqual(mesh.n_triangles, 2)
        self.assertEqual(mesh.n_edges, 5)
        np.testing.assert_array_equal(mesh.triangles, [[0, 1, 2], [0, 2, 3]])

    def test_zero_based_single_stream(self):
        text = "3 2 0 0 0\n0 0 0\n1 1 0\n2 0 1\n1 3\n0 0 1 2\n"
        mesh = load_mesh(text)
        self.assertEqual(mesh.n_triangles, 1)

    def test_clockwise_repair(self):
        mesh = load_mesh(square_node, "2 3 0\n1 1 3 2\n2 1 4 3\n")
        self.assertTrue(np.all(mesh.areas > 0.))
        self.assertAlmostEqual(mesh.area, 1.)

    def test_errors(self):
        cases = [("2 3 0\n1 1 2 5\n2 1 3 4\n", 2, 'Dangling'),
                 ("2 3 0\n1 1 2 3\n2 3 2 1\n", 3, 'Duplicate'),
                 ("2 3 0\n1 1 2 2\n2 1 3 4\n", 2, 'repeated'),
                 ("2 3 0\n1 1 2 x\n2 1 3 4\n", 2, 'parse'),
                 ("2 3 0\n1 1 2 3\n", None, 'Expected'),
                 ]
        for ele, line, word in cases:
            with self.assertRaises(MeshError) as cm:
                load_mesh(square_node, ele, name = 'sq.node', ele_name = 'sq.ele')
            self.assertEqual(cm.exception.line, line)
            self.assertIn(word, str(cm.exception))
            if line is not None:
                self.assertIn('sq.ele, line {0}'.format(line), str(cm.exception))
        with self.assertRaises(MeshError) as cm:
            load_mesh("4 2 0 1\n1 0 0 1\n3 1 0 1\n", square_ele)
        self.assertEqual(cm.exception.line, 3)
        with self.assertRaises(MeshError):
            load_mesh("4 3 0 0\n", square_ele)
        with self.assertRaises(MeshError):
            load_mesh(square_node, square_ele, fmt = 'gmsh')
        with self.assertRaises(MeshError):
            read_mesh('/nonexistent/mesh')

    def test_invalid_bytes(self):
        with self.assertRaises(MeshError) as cm:
            load_mesh(square_node.encode() + b'5 0.5 0.5 \xff\n', square_ele, name = 'sq.node')
        self.assertEqual(cm.exception.line, 7)
        self.assertIn('sq.node, line 7', str(cm.exception))
        with tempfile.TemporaryDirectory() as folder:
            Path(folder, 'bad.node').write_bytes(square_node.encode())
            Path(folder, 'bad.ele').write_bytes(b'2 3 0\n1 1 2 3\n\xfe 1 3 4\n')
            with self.assertRaises(MeshError) as cm:
                read_mesh(Path(folder, 'bad'))
            self.assertEqual(cm.exception.line, 3)

    def test_write_read(self):
        mesh = structured_unit_square(3)
        with tempfile.TemporaryDirectory() as folder:
            write_mesh(mesh, Path(folder, 'square'))
            copy = read_mesh(Path(folder, 'square.node'))
        np.testing.assert_array_equal(copy.vertices, mesh.vertices)
        np.testing.assert_array_equal(copy.triangles, mesh.triangles)
        np.testing.assert_array_equal(copy.edges, mesh.edges)

class TestSolutionFiles(unittest.TestCase):
    """
    Class to test solution export
    """
    def test_formats(self):
        mesh  = structured_unit_square(2)
        space = WgSpace(1, 'rt')
        u_h   = project_exact(lambda x, y: x*y, mesh, space)
        u_h.residual = 1e-13
        with tempfile.TemporaryDirectory() as folder:
            for ext in ('json', 'pkl', 'h5'):
                file = save_solution(u_h, folder, name = 'u_'+ext, ext = ext)
                self.assertEqual(file.suffix, '.'+ext)
                copy = load_solution(file)
                np.testing.assert_array_equal(copy.coefficients, u_h.coefficients)
                self.assertEqual(copy.space, space)
                self.assertEqual(copy.residual, 1e-13)
            # Missing extension falls back to the files that exist
            self.assertEqual(load_solution(Path(folder, 'u_h5.json')).n_dofs, u_h.n_dofs)
            with self.assertRaises(WGException):
                load_solution(Path(folder, 'missing.json'))
            with self.assertRaises(WGException):
                save_solution(u_h, folder, ext = 'txt')

    def test_deterministic(self):
        with tempfile.TemporaryDirectory() as folder:
            data = {'b': np.float64(1.5), 'a': np.arange(3), 'ok': np.bool_(True)}
            save_json(data, Path(folder, 'one.json'))
            save_json(data, Path(folder, 'two.json'))
            self.assertEqual(Path(folder, 'one.json').read_text(), Path(folder, 'two.json').read_text())
            save_csv(['h', 'e'], [['0.5', '1e-3']], Path(folder, 'table.csv'))
            self.assertEqual(Path(folder, 'table.csv').read_text(), 'h,e\n0.5,1e-3\n')

if __name__ == '__main__':
    unittest.main()
