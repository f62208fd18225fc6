import re
import numpy as np

from dataclasses import dataclass

from wgfem.exceptions import ExpressionError, EvaluationError

"""
Coefficient expression language.

Grammar (whitespace is ignored):
    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
    func  := 'sin' | 'cos' | 'exp' | 'sqrt'

'^' is right-associative and binds tighter than unary minus: -2^2 = -4, 2^3^2 = 512.
Offsets in error messages count characters from 1, the end of the input is at len(text)+1.
"""

functions = {'sin': np.sin, 'cos': np.cos, 'exp': np.exp, 'sqrt': np.sqrt}
constants = {'pi': np.pi}
variables = ('x', 'y')

_number = re.compile(r'(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?')
_name   = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_ops    = '+-*/^()'

_atom_start = ('number', 'x', 'y', 'pi', 'sin', 'cos', 'exp', 'sqrt', "'('", "'-'")

@dataclass(frozen = True)
class Num:
    value: float

@dataclass(frozen = True)
class Var:
    name: str

@dataclass(frozen = True)
class Const:
    name: str

@dataclass(frozen = True)
class Unary:
    op: str
    operand: object

@dataclass(frozen = True)
class Binary:
    op: str
    left: object
    right: object

@dataclass(frozen = True)
class Call:
    name: str
    arg: object

@dataclass(frozen = True)
class Token:
    kind: str
    text: str
    offset: int

def tokenize(text):
    """
    Splits an expression into tokens.

    Arguments:
        str text: expression

    Returns:
        list: tokens, terminated by an 'end' token at offset len(text)+1
    """
    tokens = []
    i      = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _ops:
            tokens.append(Token('op', ch, i+1))
            i += 1
            continue
        m = _number.match(text, i)
        if m is not None:
            tokens.append(Token('number', m.group(0), i+1))
            i = m.end()
            continue
        m = _name.match(text, i)
        if m is not None:
            tokens.append(Token('name', m.group(0), i+1))
            i = m.end()
            continue
        raise ExpressionError("Unexpected character '{0}'".format(ch), offset = i+1, text = text)
    tokens.append(Token('end', '', len(text)+1))
    return tokens

class _Parser:
    def __init__(self, text):
        self.text   = text
        self.tokens = tokenize(text)
        self.pos    = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def _is(self, *ops):
        return self.current.kind == 'op' and self.current.text in ops

    def _advance(self):
        tok = self.current
        self.pos += 1
        return tok

    def _fail(self, expected, token = None):
        token = self.current if token is None else token
        found = 'end of input' if token.kind == 'end' else "'{0}'".format(token.text)
        raise ExpressionError("Unexpected {0}".format(found), offset = token.offset, expected = expected, text = self.text)

    def parse(self):
        node = self.expr()
        if self.current.kind != 'end':
            self._fail(("'+'", "'-'", "'*'", "'/'", "'^'", 'end of input'))
        return node

    def expr(self):
        node = self.term()
        while self._is('+', '-'):
            op   = self._advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self._is('*', '/'):
            op   = self._advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self._is('-'):
            self._advance()
            return Unary('-', self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self._is('^'):
            self._advance()
            return Binary('^', node, self.unary())
        return node

    def atom(self):
        tok = self.current
        if tok.kind == 'number':
            self._advance()
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExpressionError("Number out of range", offset = tok.offset, text = self.text)
            return Num(value)
        if tok.kind == 'name':
            self._advance()
            if tok.text in variables:
                return Var(tok.text)
            if tok.text in constants:
                return Const(tok.text)
            if tok.text in functions:
                if not self._is('('):
                    self._fail(("'('",))
                self._advance()
                arg = self.expr()
                if not self._is(')'):
                    self._fail(("')'", "'+'", "'-'", "'*'", "'/'", "'^'"))
                self._advance()
                return Call(tok.text, arg)
            raise ExpressionError("Unknown identifier '{0}'".format(tok.text), offset = tok.offset, expected = _atom_start, text = self.text)
        if self._is('('):
            self._advance()
            node = self.expr()
            if not self._is(')'):
                self._fail(("')'", "'+'", "'-'", "'*'", "'/'", "'^'"))
            self._advance()
            return node
        self._fail(_atom_start)

def parse_expr(text):
    """
    Parses a coefficient expression.

    Arguments:
        str text: expression, e.g. 'sin(pi*x)*sin(pi*y)'

    Returns:
        Num, Var, Const, Unary, Binary or Call: abstract syntax tree
    """
    if not isinstance(text, str):
        raise ExpressionError("Expressions must be strings, got {0}".format(type(text).__name__))
    return _Parser(text).parse()

def to_string(node):
    """
    Fully parenthesised text of an expression; parse_expr(to_string(e)) == e.
    """
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Unary):
        return '({0}{1})'.format(node.op, to_string(node.operand))
    if isinstance(node, Binary):
        return '({0} {1} {2})'.format(to_string(node.left), node.op, to_string(node.right))
    if isinstance(node, Call):
        return '{0}({1})'.format(node.name, to_string(node.arg))
    raise ExpressionError("Not an expression node: {0}".format(node))

def _evaluate(node, x, y):
    if isinstance(node, Num):
        return np.full(x.shape, node.value)
    if isinstance(node, Var):
        return x if node.name == 'x' else y
    if isinstance(node, Const):
        return np.full(x.shape, constants[node.name])
    if isinstance(node, Unary):
        return -_evaluate(node.operand, x, y)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, x, y)
        if node.name == 'sqrt' and np.any(arg < 0.):
            raise EvaluationError("Square root of a negative number", subexpression = to_string(node))
        with np.errstate(over = 'ignore'):
            return functions[node.name](arg)
    if isinstance(node, Binary):
        left  = _evaluate(node.left, x, y)
        right = _evaluate(node.right, x, y)
        if node.op == '+':
            return left + right
        if node.op == '-':
            return left - right
        if node.op == '*':
            return left*right
        if node.op == '/':
            if np.any(right == 0.):
                raise EvaluationError("Division by zero", subexpression = to_string(node))
            return left/right
        with np.errstate(invalid = 'ignore', divide = 'ignore', over = 'ignore'):
            value = np.power(left, right)
        if np.any(np.isnan(value) & ~np.isnan(left) & ~np.isnan(right)) or np.any((left == 0.) & (right < 0.)):
            raise EvaluationError("Undefined power", subexpression = to_string(node))
        return value
    raise ExpressionError("Not an expression node: {0}".format(node))

def evaluate(node, x, y):
    """
    Vectorised evaluation of an expression.

    Arguments:
        Expr node:              expression
        float or np.ndarray x:  first coordinate
        float or np.ndarray y:  second coordinate

    Returns:
        np.ndarray: values with the broadcast shape of x and y
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype = np.float64), np.asarray(y, dtype = np.float64))
    return np.asarray(_evaluate(node, x, y), dtype = np.float64)

def eval_expr(node, x, y):
    """
    Evaluates an expression (or its text) at one point or at arrays of points.

    Arguments:
        Expr or str node:       expression
        float or np.ndarray x:  first coordinate
        float or np.ndarray y:  second coordinate

    Returns:
        float or np.ndarray: value(s)
    """
    if isinstance(node, str):
        node = parse_expr(node)
    value = evaluate(node, x, y)
    if value.ndim == 0:
        return float(value)
    return value

def is_constant(node):
    """
    True if the expression does not depend on x or y.
    """
    if isinstance(node, Var):
        return False
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, Unary):
        return is_constant(node.operand)
    if isinstance(node, Call):
        return is_constant(node.arg)
    return is_constant(node.left) and is_constant(node.right)

def is_zero(node):
    """
    True if the expression is constant and evaluates to 0.
    """
    return is_constant(node) and float(evaluate(node, 0., 0.)) == 0.
