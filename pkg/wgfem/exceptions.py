import traceback as tb
import numpy
import sys

class WGException(Exception):
    exit_code = 2

class MeshError(WGException):
    """
    Invalid mesh input: bad arguments, malformed node/ele files, duplicate or degenerate triangles, non-manifold edges.
    """
    def __init__(self, message, line = None, source = None):
        self.line   = line
        self.source = source
        if line is not None:
            where = 'line {0}'.format(line)
            if source is not None:
                where = '{0}, {1}'.format(source, where)
            message = '{0} ({1})'.format(message, where)
        super().__init__(message)

class DegenerateElementError(WGException):
    exit_code = 3
    def __init__(self, message, triangle = None, condition = None):
        self.triangle  = triangle
        self.condition = condition
        super().__init__(message)

class EllipticityError(WGException):
    def __init__(self, message, point = None):
        self.point = point
        super().__init__(message)

class ExpressionError(WGException):
    """
    Syntax error in a coefficient expression. Offsets count characters from 1; the end of the input sits at len(text)+1.
    """
    def __init__(self, message, offset = None, expected = None, text = None):
        self.offset   = offset
        self.expected = tuple(expected) if expected is not None else ()
        self.text     = text
        if offset is not None:
            message = '{0} at offset {1}'.format(message, offset)
        if self.expected:
            message = '{0} (expected one of: {1})'.format(message, ', '.join(self.expected))
        super().__init__(message)

class EvaluationError(WGException):
    def __init__(self, message, subexpression = None):
        self.subexpression = subexpression
        if subexpression is not None:
            message = '{0} in "{1}"'.format(message, subexpression)
        super().__init__(message)

class ConfigError(WGException):
    pass

class SolverError(WGException):
    exit_code = 3
    def __init__(self, message, condition = None, residual = None):
        self.condition = condition
        self.residual  = residual
        super().__init__(message)

class CheckFailure(WGException):
    exit_code = 1

def exit_code(exc):
    """
    Exit code associated with an exception (0 success, 1 numerical-check failure, 2 usage/config error, 3 solver failure).

    Arguments:
        Exception exc: exception instance

    Returns:
        int: exit code
    """
    if isinstance(exc, WGException):
        return exc.exit_code
    if isinstance(exc, (numpy.linalg.LinAlgError, RuntimeError)):
        return 3
    return 2

def except_hook(exctype, value, traceback):
    try:
        tb_last = list(tb.walk_tb(traceback))[-1][0] # Get last call from traceback (function that raised the exception)
        name    = tb_last.f_code.co_name
    except IndexError:
        name    = ""
    # Check if error is due to some known failure of the discretisation
    #-----------#
    # Singular global matrix from the sparse LU
    if exctype == RuntimeError and 'singular' in str(value).lower():
        sys.__excepthook__(exctype, value, traceback)
        print("\nWGException: the global system is singular. With convection or reaction terms the discrete problem is uniquely solvable only for sufficiently small h: try a finer mesh.\n")
    # Local V-mass matrix
    elif exctype == numpy.linalg.LinAlgError and name in ('solve', 'cholesky', '_raise_linalgerror_singular'):
        sys.__excepthook__(exctype, value, traceback)
        print("\nWGException: a local mass matrix could not be factorised: you probably have a degenerate (zero-area or needle-like) triangle in the mesh.\n")
    else:
        sys.__excepthook__(exctype, value, traceback)
