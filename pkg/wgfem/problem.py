import os
import numpy as np
import configparser

from dataclasses import dataclass, field, asdict
from pathlib import Path

from wgfem.expression import parse_expr, evaluate, is_zero, to_string, Num, Var, Const, Unary, Binary, Call
from wgfem.decorators import scalar_field, vector_field, symmetric_matrix_field
from wgfem.exceptions import ConfigError, ExpressionError, EllipticityError
from wgfem.utils import recursive_grid

field_keys    = ('a11', 'a12', 'a22', 'b1', 'b2', 'c', 'f', 'g', 'u', 'ux', 'uy')
setting_keys  = ('problem', 'mesh', 'unit_square', 'j', 'family', 'q_boost', 'rel_residual', 'solver', 'levels', 'refinements', 'threads', 'alpha', 'ext')
key_aliases   = {'solver.rel_residual': 'rel_residual'}
env_overrides = {'WGFEM_REL_RESIDUAL': 'rel_residual', 'WGFEM_THREADS': 'threads'}

default_fields = {'a11': '1', 'a12': '0', 'a22': '1', 'b1': '0', 'b2': '0', 'c': '0', 'g': '0'}
default_alpha  = 1e-8

_sinsin = 'sin(pi*x)*sin(pi*y)'
_variable_coeff_f = 'pi^2*(2 + x^2 + y^2)*sin(pi*x)*sin(pi*y) - 2*pi*x*cos(pi*x)*sin(pi*y) - 2*pi*y*sin(pi*x)*cos(pi*y)'

# Manufactured problems on the unit square, g is the trace of u
builtin_problems = {
    'sinsin':         {'f': '2*pi^2*sin(pi*x)*sin(pi*y)',
                       'u': _sinsin, 'ux': 'pi*cos(pi*x)*sin(pi*y)', 'uy': 'pi*sin(pi*x)*cos(pi*y)',
                       },
    'linear':         {'f': '0',
                       'u': '1 + 2*x - 3*y', 'ux': '2', 'uy': '-3',
                       },
    'quadratic':      {'f': '0',
                       'u': 'x^2 - y^2 + x*y', 'ux': '2*x + y', 'uy': 'x - 2*y',
                       },
    'variable-coeff': {'a11': '1 + x^2', 'a22': '1 + y^2',
                       'f': _variable_coeff_f,
                       'u': _sinsin, 'ux': 'pi*cos(pi*x)*sin(pi*y)', 'uy': 'pi*sin(pi*x)*cos(pi*y)',
                       },
    'convection':     {'a11': '1 + x^2', 'a22': '1 + y^2', 'b1': '1', 'b2': '-1', 'c': '1 + x*y',
                       'f': _variable_coeff_f + ' + pi*cos(pi*x)*sin(pi*y) - pi*sin(pi*x)*cos(pi*y) + (1 + x*y)*sin(pi*x)*sin(pi*y)',
                       'u': _sinsin, 'ux': 'pi*cos(pi*x)*sin(pi*y)', 'uy': 'pi*sin(pi*x)*cos(pi*y)',
                       },
    }

_nodes = (Num, Var, Const, Unary, Binary, Call)

def _as_field(value, key):
    """
    Turns a field definition (expression text, parsed expression, number or callable f(x, y)) into an expression or a callable.
    """
    if value is None:
        return None
    if isinstance(value, _nodes) or callable(value):
        return value
    if isinstance(value, (int, float, np.number)):
        return Num(float(value))
    if isinstance(value, str):
        try:
            return parse_expr(value)
        except ExpressionError as e:
            err          = ExpressionError("Invalid expression for '{0}': {1}".format(key, e))
            err.offset   = e.offset
            err.expected = e.expected
            err.text     = value
            raise err from e
    raise ConfigError("Field '{0}' must be an expression, a number or a callable, got {1}".format(key, type(value).__name__))

def _evaluate_field(fld, x, y):
    if isinstance(fld, _nodes):
        return evaluate(fld, x, y)
    return fld(x, y)

def _is_zero_field(fld):
    return isinstance(fld, _nodes) and is_zero(fld)

class ProblemSpec:
    """
    Data of the elliptic problem
        -div(a grad u) + div(b u) + c u = f in the domain,   u = g on the boundary,
    with a symmetric matrix field given by its entries a11, a12, a22 (a12 stored once).
    Each field can be given as expression text, parsed expression, number or vectorised callable f(x, y).

    Arguments:
        f:           source term
        a11, a12, a22: diffusion entries (default identity)
        b1, b2:      convection field (default 0)
        c:           reaction coefficient (default 0)
        g:           Dirichlet data (default 0)
        u, ux, uy:   exact solution and its gradient (optional, for error studies)
        str name:    problem name
        double alpha: ellipticity constant, the smallest eigenvalue of a must not go below it

    Returns:
        ProblemSpec: instance of the ProblemSpec class
    """
    def __init__(self, f, a11 = '1', a12 = '0', a22 = '1', b1 = '0', b2 = '0', c = '0', g = '0', u = None, ux = None, uy = None, name = None, alpha = default_alpha):
        if f is None:
            raise ConfigError("The source term f is required")
        given       = {'a11': a11, 'a12': a12, 'a22': a22, 'b1': b1, 'b2': b2, 'c': c, 'f': f, 'g': g, 'u': u, 'ux': ux, 'uy': uy}
        self.fields = {key: _as_field(val, key) for key, val in given.items()}
        self.name   = name
        self.alpha  = float(alpha)
        if not self.alpha > 0.:
            raise ConfigError("The ellipticity constant alpha must be positive, got {0}".format(alpha))

    @property
    def symmetric(self):
        """
        True iff b vanishes identically (the bilinear form is then symmetric)
        """
        return _is_zero_field(self.fields['b1']) and _is_zero_field(self.fields['b2'])

    @property
    def has_exact(self):
        return self.fields['u'] is not None

    @property
    def has_gradient(self):
        return self.fields['ux'] is not None and self.fields['uy'] is not None

    def _get(self, key, x, y):
        fld = self.fields[key]
        if fld is None:
            raise ConfigError("Problem {0} has no field '{1}'".format(self.name if self.name is not None else '', key))
        return _evaluate_field(fld, x, y)

    @symmetric_matrix_field
    def a(self, x, y):
        return self._get('a11', x, y), self._get('a12', x, y), self._get('a22', x, y)

    @vector_field
    def b(self, x, y):
        return self._get('b1', x, y), self._get('b2', x, y)

    @scalar_field
    def c(self, x, y):
        return self._get('c', x, y)

    @scalar_field
    def f(self, x, y):
        return self._get('f', x, y)

    @scalar_field
    def g(self, x, y):
        return self._get('g', x, y)

    @scalar_field
    def u(self, x, y):
        return self._get('u', x, y)

    @vector_field
    def grad_u(self, x, y):
        return self._get('ux', x, y), self._get('uy', x, y)

    def min_eigenvalue(self, x, y):
        """
        Smallest eigenvalue of a at the given points (closed form for symmetric 2x2 matrices).
        """
        A    = self.a(x, y)
        half = 0.5*(A[..., 0, 0] + A[..., 1, 1])
        dev  = np.sqrt((0.5*(A[..., 0, 0] - A[..., 1, 1]))**2 + A[..., 0, 1]**2)
        return half - dev

    def check_ellipticity(self, x, y):
        """
        Raises EllipticityError at the first point where the smallest eigenvalue of a is below alpha.

        Arguments:
            np.ndarray x: first coordinates
            np.ndarray y: second coordinates
        """
        x, y = np.broadcast_arrays(np.asarray(x, dtype = np.float64), np.asarray(y, dtype = np.float64))
        lam  = self.min_eigenvalue(x, y)
        bad  = ~(lam >= self.alpha)
        if np.any(bad):
            i  = np.flatnonzero(bad.ravel())[0]
            pt = (float(x.ravel()[i]), float(y.ravel()[i]))
            raise EllipticityError("The diffusion matrix a must be uniformly positive definite (smallest eigenvalue >= alpha = {0:.1e}): found {1:.6e} at ({2:.6g}, {3:.6g})".format(self.alpha, lam.ravel()[i], *pt), point = pt)

    def spot_check(self, bounds = [[0., 1.], [0., 1.]], n_pts = 10):
        """
        Ellipticity check of a on an n_pts x n_pts sampling grid.
        """
        grid, _ = recursive_grid(bounds, n_pts)
        self.check_ellipticity(grid[:, 0], grid[:, 1])

    def expressions(self):
        """
        Text of the fields given as expressions (callables are reported as None).
        """
        return {key: (to_string(fld) if isinstance(fld, _nodes) else None) for key, fld in self.fields.items() if fld is not None}

def builtin_problem(name, alpha = default_alpha):
    """
    Manufactured problem from the registry: 'sinsin', 'linear', 'quadratic', 'variable-coeff', 'convection'.

    Arguments:
        str name: problem name

    Returns:
        ProblemSpec: problem with g = u
    """
    if name not in builtin_problems:
        raise ConfigError("Unknown problem {0}. Please choose from: {1}".format(name, ', '.join(builtin_problems.keys())))
    exprs = dict(default_fields)
    exprs.update(builtin_problems[name])
    exprs['g'] = exprs['u']
    return ProblemSpec(name = name, alpha = alpha, **exprs)

@dataclass
class ProblemConfig:
    """
    Resolved run settings: mesh source, space, solver and study parameters, field expressions.
    """
    problem:      str   = None
    mesh:         str   = None
    unit_square:  int   = 8
    j:            int   = 0
    family:       str   = 'full'
    q_boost:      int   = 3
    rel_residual: float = 1e-10
    solver:       str   = 'direct'
    levels:       list  = None
    refinements:  int   = None
    threads:      int   = None
    alpha:        float = default_alpha
    ext:          str   = 'json'
    expressions:  dict  = field(default_factory = dict)

    def to_dict(self):
        return asdict(self)

def _unquote(val):
    val = val.strip()
    if len(val) >= 2 and val[0] == val[-1] and val[0] in ('"', "'"):
        return val[1:-1]
    return val

def _to_int(key, val, minimum):
    try:
        v = int(str(val).strip())
    except ValueError:
        raise ConfigError("Option '{0}' must be an integer, got {1}".format(key, val))
    if v < minimum:
        raise ConfigError("Option '{0}' must be >= {1}, got {2}".format(key, minimum, v))
    return v

def _to_float(key, val):
    try:
        v = float(str(val).strip())
    except ValueError:
        raise ConfigError("Option '{0}' must be a number, got {1}".format(key, val))
    if not v > 0.:
        raise ConfigError("Option '{0}' must be positive, got {1}".format(key, v))
    return v

def _to_levels(val):
    if isinstance(val, (list, tuple)):
        items = list(val)
    else:
        items = [s for s in str(val).replace('[', '').replace(']', '').split(',') if s.strip() != '']
    levels = [_to_int('levels', s, 1) for s in items]
    if len(levels) == 0:
        raise ConfigError("Option 'levels' is empty")
    return levels

def _convert(key, val):
    if val is None or (isinstance(val, str) and val.strip() in ('', 'None')):
        return None
    if key in ('unit_square', 'threads'):
        return _to_int(key, val, 1)
    if key in ('j', 'q_boost', 'refinements'):
        return _to_int(key, val, 0)
    if key in ('rel_residual', 'alpha'):
        return _to_float(key, val)
    if key == 'levels':
        return _to_levels(val)
    val = str(val).strip()
    if key == 'family':
        val = val.lower()
        if val not in ('full', 'rt'):
            raise ConfigError("Option 'family' must be 'full' or 'rt', got {0}".format(val))
    if key == 'solver' and val not in ('direct', 'iterative'):
        raise ConfigError("Option 'solver' must be 'direct' or 'iterative', got {0}".format(val))
    if key == 'ext' and val not in ('json', 'pkl', 'h5'):
        raise ConfigError("Option 'ext' must be 'json', 'pkl' or 'h5', got {0}".format(val))
    return val

def read_config(text, source = None):
    """
    Reads a flat key = value configuration (ini syntax, the [DEFAULT] header may be omitted).

    Arguments:
        str text:   configuration text
        str source: name of the configuration, for error messages

    Returns:
        dict: raw values by canonical key
    """
    if not text.lstrip().startswith('['):
        text = '[DEFAULT]\n' + text
    parser = configparser.ConfigParser(interpolation = None)
    try:
        parser.read_string(text, source = source if source is not None else '<config>')
    except configparser.Error as e:
        raise ConfigError("Malformed configuration: {0}".format(e))
    items = dict(parser.defaults())
    for section in parser.sections():
        items.update({key: val for key, val in parser.items(section, raw = True)})
    values = {}
    for key, val in items.items():
        key = key_aliases.get(key, key)
        if key not in field_keys and key not in setting_keys:
            raise ConfigError("Unknown configuration key '{0}'".format(key))
        values[key] = _unquote(val)
    return values

def load_problem(text = '', overrides = None, environ = None, source = None):
    """
    Builds run settings and problem from a configuration.
    Precedence: overrides (command line) > environment (WGFEM_REL_RESIDUAL, WGFEM_THREADS) > configuration > defaults.

    Arguments:
        str text:         configuration text
        dict overrides:   command line values (None entries are ignored)
        dict environ:     environment (default os.environ)
        str source:       name of the configuration, for error messages

    Returns:
        ProblemConfig: resolved settings
        ProblemSpec:   problem
    """
    values  = read_config(text, source = source)
    environ = os.environ if environ is None else environ
    for var, key in env_overrides.items():
        if environ.get(var) is not None:
            values[key] = environ[var]
    if overrides is not None:
        for key, val in overrides.items():
            key = key_aliases.get(key, key)
            if key not in field_keys and key not in setting_keys:
                raise ConfigError("Unknown option '{0}'".format(key))
            if val is not None:
                values[key] = val
    settings = {key: _convert(key, values[key]) for key in setting_keys if key in values}
    settings = {key: val for key, val in settings.items() if val is not None}
    config   = ProblemConfig(**settings)
    # Field expressions: defaults < builtin problem < configuration
    exprs = dict(default_fields)
    if config.problem is not None:
        if config.problem not in builtin_problems:
            raise ConfigError("Unknown problem {0}. Please choose from: {1}".format(config.problem, ', '.join(builtin_problems.keys())))
        exprs.update(builtin_problems[config.problem])
        exprs['g'] = exprs['u']
    exprs.update({key: str(values[key]) for key in field_keys if key in values})
    if 'f' not in exprs:
        raise ConfigError("The source term f is missing: please provide f or a builtin problem ({0})".format(', '.join(builtin_problems.keys())))
    config.expressions = exprs
    problem = ProblemSpec(name = config.problem, alpha = config.alpha, **exprs)
    problem.spot_check()
    return config, problem

def load_problem_file(path, overrides = None, environ = None):
    """
    Reads a configuration file and builds settings and problem (see load_problem).
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("Configuration file {0} not found".format(path))
    with open(path, 'r') as f:
        text = f.read()
    return load_problem(text, overrides = overrides, environ = environ, source = str(path))
