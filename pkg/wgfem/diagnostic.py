import numpy as np
import warnings

from numba import njit
from tqdm import tqdm

from wgfem.mesh import structured_unit_square
from wgfem.quadrature import triangle_rule, edge_rule, max_triangle_exactness, max_edge_exactness
from wgfem.basis import reference_monomial_integral
from wgfem.weak_gradient import WgSpace, WeakGradient, weak_gradient, project_exact
from wgfem.assembly import assemble, solve
from wgfem.postprocess import flux_report, galerkin_orthogonality
from wgfem.problem import builtin_problem
from wgfem.expression import parse_expr, to_string, eval_expr
from wgfem.utils import random_triangles
from wgfem.exceptions import WGException, ExpressionError, EvaluationError

# Errors below this value are treated as round-off: the corresponding rates are reported as exact
exact_threshold = 1e-10

@njit
def angular_coefficient(x, y):
    """
    Angular coefficient obtained from linear regression.

    Arguments:
        np.ndarray x: independent variables
        np.ndarray y: dependent variables

    Returns:
        double: angular coefficient
    """
    return np.sum((x - np.mean(x))*(y - np.mean(y)))/np.sum((x - np.mean(x))**2)

def estimate_rates(levels, threshold = 0.):
    """
    Observed convergence rates of a sequence of (h, error) pairs.
    A step whose errors are not above threshold has no rate (reported as exact).

    Arguments:
        iterable levels:  (h, error) pairs, coarse to fine
        double threshold: errors at or below this value count as exact

    Returns:
        list: per-step rates log(e_k/e_k+1)/log(h_k/h_k+1), None for exact steps
        double: least-squares slope of log(e) against log(h) over the levels above threshold (None if fewer than 2)
    """
    levels = np.atleast_2d(np.asarray(levels, dtype = np.float64))
    if len(levels) < 2:
        raise WGException("At least two levels are required to estimate convergence rates")
    h, e  = levels[:, 0], levels[:, 1]
    rates = []
    for k in range(len(levels)-1):
        if e[k] > threshold and e[k+1] > threshold:
            rates.append(float(np.log(e[k]/e[k+1])/np.log(h[k]/h[k+1])))
        else:
            rates.append(None)
    valid = e > threshold
    slope = None
    if np.sum(valid) >= 2:
        slope = float(angular_coefficient(np.log(h[valid]), np.log(e[valid])))
    return rates, slope

class ErrorReport:
    """
    Convergence study: one row of error norms per level, with per-step rates and least-squares slopes.

    Arguments:
        list rows:        dictionaries from postprocess.error_norms, coarse to fine
        double threshold: errors at or below this value count as exact

    Returns:
        ErrorReport: instance of the ErrorReport class
    """
    norms   = ['eH1', 'eL2proj', 'eL2']
    columns = ['h', 'dofs', 'eH1', 'eL2proj', 'eL2', 'rate_eH1', 'rate_eL2proj']

    def __init__(self, rows, threshold = exact_threshold):
        if len(rows) < 2:
            raise WGException("A convergence study needs at least two levels, got {0}".format(len(rows)))
        self.rows      = list(rows)
        self.threshold = threshold
        self.rates     = {}
        self.slopes    = {}
        norms = self.norms + (['eGrad'] if all('eGrad' in r for r in self.rows) else [])
        for key in norms:
            self.rates[key], self.slopes[key] = estimate_rates([(r['h'], r[key]) for r in self.rows], threshold = threshold)

    def finest_rate(self, key):
        """
        Rate of the last refinement step ('exact' if undefined).
        """
        rate = self.rates[key][-1]
        return 'exact' if rate is None else rate

    def exact(self, key):
        return all(r[key] <= self.threshold for r in self.rows)

    def table(self):
        """
        Rows of the CSV report; the first level has no rates, undefined rates are 'exact'.
        """
        table = []
        for i, r in enumerate(self.rows):
            row = [repr(float(r['h'])), str(int(r['dofs'])), repr(float(r['eH1'])), repr(float(r['eL2proj'])), repr(float(r['eL2']))]
            for key in ('eH1', 'eL2proj'):
                if i == 0:
                    row.append('')
                else:
                    rate = self.rates[key][i-1]
                    row.append('exact' if rate is None else repr(rate))
            table.append(row)
        return table

    def to_dict(self):
        return {'levels':  self.rows,
                'rates':   {key: ['exact' if r is None else r for r in val] for key, val in self.rates.items()},
                'slopes':  {key: ('exact' if val is None else val) for key, val in self.slopes.items()},
                'finest':  {key: self.finest_rate(key) for key in self.rates.keys()},
                'threshold': self.threshold,
                }

#-----------------#
# Invariant suites #
#-----------------#

def _result(suite, passed, hard, details):
    return {'suite': suite, 'passed': bool(passed), 'hard': bool(hard), 'details': details}

def kernel_suite(js = (0, 1, 2), n_triangles = 200, family = 'full', tol = 1e-10, rng = None):
    """
    Kernel of the local weak-gradient maps on random well-shaped triangles: for the full family the kernel must be
    one-dimensional and spanned by the constant weak function. For the Raviart-Thomas family the dimensions are reported only.

    Returns:
        dict: suite result
    """
    if rng is None:
        rng = np.random.default_rng(1)
    coords  = random_triangles(n_triangles, rng = rng)
    signs   = np.tile([1, 1, -1], (n_triangles, 1))
    details = {}
    passed  = True
    for j in js:
        space = WgSpace(j, family)
        wg    = WeakGradient(coords, signs, space)
        const = space.constant_dofs()
        dims, alignment, gaps = [], [], []
        for t in range(n_triangles):
            G        = wg.local(t)
            s, _     = G.singular_values()
            dim, ker = G.kernel(tol)
            dims.append(dim)
            c_hat    = G.dof_scale*const
            c_hat   /= np.linalg.norm(c_hat)
            if dim == 1:
                alignment.append(float(np.abs((G.dof_scale*ker[:, 0]) @ c_hat)))
                gaps.append(float(s[-2]/s[0]))
        details['j={0}'.format(j)] = {'kernel_dimensions': dims,
                                      'min_alignment':     min(alignment, default = None),
                                      'min_gap':           min(gaps, default = None),
                                      }
        ok = all(d == 1 for d in dims) and min(alignment, default = 0.) >= 1. - 1e-9 and min(gaps, default = 0.) > 1e-8 if family == 'full' else True
        if family == 'rt' and any(d != 1 for d in dims):
            warnings.warn("Raviart-Thomas family, j = {0}: kernel dimension above one on {1} triangles".format(j, sum(d != 1 for d in dims)))
        passed = passed and ok
    return _result('kernel_{0}'.format(family), passed, family == 'full', details)

def _random_polynomial(degree, rng):
    exps   = [(i-l, l) for i in range(degree+1) for l in range(i+1)]
    coeffs = rng.normal(size = len(exps))
    def u(x, y):
        return sum(c*x**p*y**q for c, (p, q) in zip(coeffs, exps))
    def grad_u(x, y):
        gx = sum(c*p*x**max(p-1, 0)*y**q for c, (p, q) in zip(coeffs, exps))
        gy = sum(c*q*x**p*y**max(q-1, 0) for c, (p, q) in zip(coeffs, exps))
        return np.stack(np.broadcast_arrays(gx, gy), axis = -1)
    return u, grad_u

def _random_smooth(rng):
    a, b = rng.uniform(-3., 3., size = 2)
    c    = rng.uniform(0., 2*np.pi)
    d    = rng.uniform(-1., 1.)
    def u(x, y):
        return np.sin(a*x + b*y + c) + np.exp(d*x*y)
    def grad_u(x, y):
        return np.stack((a*np.cos(a*x + b*y + c) + d*y*np.exp(d*x*y), b*np.cos(a*x + b*y + c) + d*x*np.exp(d*x*y)), axis = -1)
    return u, grad_u

def commutation_defects(mesh, space, u, grad_u):
    """
    Elementwise ||grad_d(Q_h u) - R_h(grad u)|| and ||grad u|| on every triangle.
    """
    wg   = weak_gradient(mesh, space)
    lhs  = wg.apply(project_exact(u, mesh, space).local_dofs())
    rhs  = wg.project(grad_u(wg.points[..., 0], wg.points[..., 1]))
    grad = np.sqrt(np.sum(wg.weights*np.sum(grad_u(wg.points[..., 0], wg.points[..., 1])**2, axis = -1), axis = 1))
    return wg.norms(lhs - rhs), grad

def commutation_suite(js = (0, 1), n = 8, n_polynomials = 100, n_smooth = 20, family = 'full', q_boost = 16, rng = None, progress = False):
    """
    Commutation of the weak gradient with the projections, grad_d(Q_h u) = R_h(grad u), for random polynomials of
    degree j+1 and smooth non-polynomial fields, on every triangle of a structured mesh.

    Returns:
        dict: suite result
    """
    if rng is None:
        rng = np.random.default_rng(2)
    mesh    = structured_unit_square(n)
    details = {}
    passed  = True
    for j in js:
        space  = WgSpace(j, family, q_boost = q_boost)
        fields = [_random_polynomial(j+1, rng) for _ in range(n_polynomials)] + [_random_smooth(rng) for _ in range(n_smooth)]
        worst  = 0.
        for u, grad_u in tqdm(fields, desc = 'Commutation j={0}'.format(j), disable = not progress):
            defect, grad = commutation_defects(mesh, space, u, grad_u)
            worst = max(worst, float(np.max(defect/(1. + grad))))
        details['j={0}'.format(j)] = {'max_relative_defect': worst}
        passed = passed and worst <= 1e-10
    return _result('commutation_{0}'.format(family), passed, True, details)

def conservation_suite(problems = ('sinsin', 'convection'), n = 8, j = 0, family = 'full', inject_bug = False):
    """
    Solves builtin problems and checks elementwise mass balance, flux continuity and Galerkin orthogonality.
    With inject_bug one element matrix is scaled during assembly, which must break the mass balance.

    Returns:
        list: conservation and flux continuity results
    """
    mesh    = structured_unit_square(n)
    space   = WgSpace(j, family)
    cons, cont = {}, {}
    c_ok, f_ok = True, True
    for name in problems:
        problem = builtin_problem(name)
        perturb = (mesh.n_triangles//2, 1.5) if inject_bug else None
        u_h     = solve(assemble(problem, mesh, space, perturb = perturb))
        report  = flux_report(u_h, problem)
        summary = report.summary()
        orth, scale = galerkin_orthogonality(u_h, problem)
        cons[name] = {'max_residual': summary['max_residual'], 'max_relative_residual': summary['max_relative_residual'], 'worst_triangle': summary['worst_triangle'],
                      'galerkin_orthogonality': orth, 'galerkin_scale': scale, 'passed': report.conservation_passed}
        cont[name] = {'max_jump': summary['max_jump'], 'max_relative_jump': summary['max_relative_jump'], 'passed': report.continuity_passed}
        c_ok = c_ok and report.conservation_passed and (inject_bug or orth <= 1e-9*scale)
        f_ok = f_ok and report.continuity_passed
    return [_result('conservation', c_ok, True, cons), _result('flux_continuity', f_ok, True, cont)]

def quadrature_suite():
    """
    Every triangle and edge rule integrates all monomials up to its exactness (closed forms p!q!/(p+q+2)! and 1/(k+1)).

    Returns:
        dict: suite result
    """
    worst_t = 0.
    for d in range(max_triangle_exactness+1):
        rule = triangle_rule(d)
        x, y = rule.points[:, 0], rule.points[:, 1]
        for p in range(d+1):
            for q in range(d+1-p):
                exact   = reference_monomial_integral(p, q)
                worst_t = max(worst_t, abs(rule.integrate(x**p*y**q) - exact)/exact)
    worst_e = 0.
    for d in range(max_edge_exactness+1):
        rule = edge_rule(d)
        for k in range(d+1):
            worst_e = max(worst_e, abs(rule.integrate(rule.points**k) - 1./(k+1))*(k+1))
    details = {'triangle_max_relative_error': worst_t, 'edge_max_relative_error': worst_e}
    return _result('quadrature', worst_t <= 1e-12 and worst_e <= 1e-12, True, details)

parser_corpus = ['1', '2.5', '.5', '1e-3', '3.0E+2', 'x', 'y', 'pi', '-x', '--x',
                 'x + y', 'x - y', 'x*y', 'x/y', 'x^2', '2^3^2', '-2^2', '(-2)^2', '2^-1', 'x^y^2',
                 '1 + 2*3', '(1 + 2)*3', '1 - 2 - 3', '1/2/3', '2*x + 3*y - 1', 'x*(y + 1)', '-(x + y)', 'x - -y', '2*-x', '((x))',
                 'sin(x)', 'cos(y)', 'exp(x*y)', 'sqrt(x^2 + y^2)', 'sin(pi*x)*sin(pi*y)', '2*pi^2*sin(pi*x)*sin(pi*y)',
                 'exp(-x)*cos(2*pi*y)', '1 + x^2', '1 + y^2', '1 + x*y', 'sin(cos(exp(x)))', 'sqrt(sqrt(x + 2))',
                 '-sin(x)^2', 'x^2 - y^2 + x*y', '1 + 2*x - 3*y', 'pi*cos(pi*x)*sin(pi*y)', '(x + 1)/(y + 2)',
                 'x*y*x*y/4', '3 - x/2 + y^3', 'exp(sin(pi*x) - 1)*(1 + y)',
                 ]

parser_errors = [('x*y +', 6), ('1e999*x', 1), ('x + 2e400', 5), ('(x + 1', 7), ('x y', 3), ('sin x', 5), ('foo(x)', 1), ('2 # 3', 3), ('', 1), (')', 1), ('x^', 3), ('1 + * 2', 5)]

parser_values = [('sin(pi*x)*sin(pi*y)', 0.5, 0.5, 1.), ('2^3^2', 0., 0., 512.), ('-2^2', 0., 0., -4.), ('x - y', 3., 1., 2.), ('exp(0)', 0., 0., 1.), ('1 - 2 - 3', 0., 0., -4.), ('8/4/2', 0., 0., 1.)]

def parser_suite():
    """
    Grammar round-trip on a corpus, precedence cases and error paths of the expression language.

    Returns:
        dict: suite result
    """
    failures = []
    for text in parser_corpus:
        try:
            tree = parse_expr(text)
            if parse_expr(to_string(tree)) != tree:
                failures.append(text)
        except WGException:
            failures.append(text)
    for text, x, y, val in parser_values:
        if abs(eval_expr(text, x, y) - val) > 1e-15*max(1., abs(val)):
            failures.append(text)
    for text, offset in parser_errors:
        try:
            parse_expr(text)
            failures.append(text)
        except ExpressionError as e:
            if e.offset != offset:
                failures.append(text)
    try:
        eval_expr('1/(x-x)', 0.3, 0.7)
        failures.append('1/(x-x)')
    except EvaluationError:
        pass
    details = {'corpus': len(parser_corpus), 'errors': len(parser_errors), 'failures': failures}
    return _result('parser', len(failures) == 0, True, details)

def run_verification(inject_bug = False, progress = True):
    """
    Runs the invariant suites.

    Arguments:
        bool inject_bug: scale one element matrix in the conservation suite (negative control)
        bool progress:   show progress bars

    Returns:
        list: suite results
    """
    suites = [lambda: [kernel_suite(family = 'full')],
              lambda: [kernel_suite(js = (0, 1), family = 'rt')],
              lambda: [commutation_suite(progress = progress)],
              lambda: conservation_suite(inject_bug = inject_bug),
              lambda: [quadrature_suite()],
              lambda: [parser_suite()],
              ]
    results = []
    for suite in tqdm(suites, desc = 'Verification', disable = not progress):
        results += suite()
    return results
