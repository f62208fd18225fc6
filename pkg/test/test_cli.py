import os
import json
import unittest
import tempfile
import importlib.util

from pathlib import Path
from unittest import mock

from wgfem._pipelines.main import main, error_document
from wgfem.load import load_solution
from wgfem.exceptions import ExpressionError

class TestCLI(unittest.TestCase):
    """
    Class to test the wgfem command line (exit codes and output files)
    """
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _read(self, *parts):
        return Path(self.out, *parts).read_text()

    def test_solve(self):
        code = main(['solve', '--problem', 'linear', '--unit-square', '2', '-o', str(Path(self.out, 'a')), '--quiet'])
        self.assertEqual(code, 0)
        for name in ('solution.json', 'summary.json', 'options.ini', 'metadata.json'):
            self.assertTrue(Path(self.out, 'a', name).is_file())
        summary = json.loads(self._read('a', 'summary.json'))
        self.assertLess(summary['errors']['eH1'], 1e-9)
        self.assertEqual(summary['dof_map']['dofs'], 8 + 16*2)
        u_h = load_solution(Path(self.out, 'a', 'solution.json'))
        self.assertEqual(u_h.n_dofs, 40)

    def test_deterministic(self):
        for name in ('a', 'b'):
            main(['solve', '--problem', 'sinsin', '--unit-square', '3', '--j', '1', '-o', str(Path(self.out, name)), '--quiet'])
        for file in ('solution.json', 'summary.json', 'options.ini'):
            self.assertEqual(self._read('a', file).replace(str(Path(self.out, 'a')), ''), self._read('b', file).replace(str(Path(self.out, 'b')), ''))

    def test_rerun_from_options(self):
        main(['solve', '--problem', 'sinsin', '--unit-square', '3', '--family', 'rt', '-o', str(Path(self.out, 'a')), '--quiet'])
        code = main(['solve', '--options', str(Path(self.out, 'a', 'options.ini')), '-o', str(Path(self.out, 'b')), '--quiet'])
        self.assertEqual(code, 0)
        self.assertEqual(self._read('a', 'summary.json'), self._read('b', 'summary.json'))

    def test_convergence(self):
        code = main(['convergence', '--problem', 'sinsin', '--levels', '2,4,8', '--threads', '1', '-o', str(self.out), '--quiet'])
        self.assertEqual(code, 0)
        lines = self._read('convergence.csv').splitlines()
        self.assertEqual(lines[0], 'h,dofs,eH1,eL2proj,eL2,rate_eH1,rate_eL2proj')
        self.assertEqual(len(lines), 4)
        report = json.loads(self._read('convergence.json'))['report']
        self.assertEqual(len(report['levels']), 3)

    @unittest.skipUnless(importlib.util.find_spec('ray') is not None, 'ray not available')
    def test_convergence_threads(self):
        for name, threads in (('serial', '1'), ('parallel', '8')):
            code = main(['convergence', '--problem', 'sinsin', '--levels', '8,16,32,64', '--threads', threads, '-o', str(Path(self.out, name)), '--quiet'])
            self.assertEqual(code, 0)
        self.assertEqual(Path(self.out, 'serial', 'convergence.csv').read_bytes(), Path(self.out, 'parallel', 'convergence.csv').read_bytes())

    def test_convergence_refinements(self):
        code = main(['convergence', '--problem', 'linear', '--unit-square', '2', '--refinements', '2', '--threads', '1', '-o', str(self.out), '--quiet'])
        self.assertEqual(code, 0)
        report = json.loads(self._read('convergence.json'))['report']
        self.assertEqual(report['finest']['eH1'], 'exact')

    def test_flux_report(self):
        code = main(['flux-report', '--problem', 'convection', '--unit-square', '4', '-o', str(self.out), '--quiet'])
        self.assertEqual(code, 0)
        report = json.loads(self._read('flux_report.json'))
        self.assertTrue(report['summary']['conservation_passed'])
        self.assertEqual(len(self._read('conservation.csv').splitlines()), 32 + 1)

    def test_verify(self):
        self.assertEqual(main(['verify', '-o', str(Path(self.out, 'ok')), '--quiet']), 0)
        self.assertEqual(main(['verify', '--inject-bug', '-o', str(Path(self.out, 'bug')), '--quiet']), 1)
        report = json.loads(self._read('bug', 'verify.json'))
        self.assertIn('conservation', report['failed'])

    def test_usage_errors(self):
        self.assertEqual(main([]), 2)
        self.assertEqual(main(['interpolate']), 2)
        self.assertEqual(main(['solve', '--j', 'one']), 2)
        self.assertEqual(main(['solve', '--config', str(Path(self.out, 'missing.ini')), '-o', str(self.out), '--quiet']), 2)
        self.assertTrue(Path(self.out, 'error.json').is_file())

    def test_expression_error(self):
        config = Path(self.out, 'problem.ini')
        config.write_text('[DEFAULT]\nf = sin(x\n')
        code = main(['solve', '--config', str(config), '-o', str(self.out), '--quiet'])
        self.assertEqual(code, 2)
        error = json.loads(self._read('error.json'))['error']
        self.assertEqual(error['type'], 'ExpressionError')
        self.assertEqual(error['offset'], 6)
        self.assertEqual(error['command'], 'solve')
        self.assertEqual(error['exit_code'], 2)

    def test_solver_error(self):
        with mock.patch.dict(os.environ, {'WGFEM_REL_RESIDUAL': '1e-300'}):
            code = main(['solve', '--problem', 'sinsin', '--unit-square', '4', '-o', str(self.out), '--quiet'])
        self.assertEqual(code, 3)
        error = json.loads(self._read('error.json'))['error']
        self.assertEqual(error['type'], 'SolverError')
        self.assertIn('residual', error)

    def test_error_document(self):
        doc = error_document(ExpressionError('Unexpected end of input', offset = 4, expected = ['number']), 'solve')
        self.assertEqual(doc['error']['expected'], ['number'])
        self.assertEqual(doc['error']['offset'], 4)

if __name__ == '__main__':
    unittest.main()
