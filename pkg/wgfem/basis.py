import numpy as np

from math import factorial
from scipy.linalg import cholesky, solve_triangular

from wgfem._numba_functions import monomials, legendre, n_monomials
from wgfem.quadrature import triangle_rule
from wgfem.transform import reference_triangle, local_scaling, to_local
from wgfem.exceptions import WGException

supported_variants = ['full', 'rt']

def monomial_index(p, q):
    """
    Position of x^p y^q in the degree-graded monomial ordering used by _numba_functions.monomials.
    """
    i = p + q
    return i*(i+1)//2 + q

def reference_monomial_integral(p, q):
    """
    Exact integral of x^p y^q over the reference triangle: p! q!/(p+q+2)!
    """
    return factorial(p)*factorial(q)/factorial(p+q+2)

def _orthonormalise(gram, coefficients):
    """
    Gram-Schmidt (through the Cholesky factor of the Gram matrix) of a set of functions given by their coefficients.

    Arguments:
        np.ndarray gram:         Gram matrix of the functions (n, n)
        np.ndarray coefficients: coefficients of the functions, first axis runs over the functions

    Returns:
        np.ndarray: coefficients of the orthonormal functions
    """
    L    = cholesky(gram, lower = True)
    flat = coefficients.reshape(len(coefficients), -1)
    return solve_triangular(L, flat, lower = True).reshape(coefficients.shape)

class ScalarBasis:
    """
    Orthonormal basis of P_j on the reference triangle (0,0), (1,0), (0,1), built from the monomials against their exact integrals.
    On a physical triangle T the basis is pulled back through the affine map, so its Gram matrix is 2|T| I.

    Arguments:
        int j: polynomial degree

    Returns:
        ScalarBasis: instance of the ScalarBasis class
    """
    def __init__(self, j):
        if int(j) != j or j < 0:
            raise WGException("Polynomial degree must be a non-negative integer, got {0}".format(j))
        self.degree    = int(j)
        self.dim       = n_monomials(self.degree)
        self.exponents = [(i-l, l) for i in range(self.degree+1) for l in range(i+1)]
        gram = np.array([[reference_monomial_integral(pm+pn, qm+qn) for (pn, qn) in self.exponents] for (pm, qm) in self.exponents])
        self.coefficients = _orthonormalise(gram, np.identity(self.dim))
        self.coefficients.setflags(write = False)

    def __len__(self):
        return self.dim

    def evaluate(self, xi):
        """
        Arguments:
            np.ndarray xi: reference points (n_pts, 2)

        Returns:
            np.ndarray: values (n_pts, dim)
        """
        xi   = np.atleast_2d(np.asarray(xi, dtype = np.float64))
        V, _, _ = monomials(self.degree, np.ascontiguousarray(xi[:, 0]), np.ascontiguousarray(xi[:, 1]))
        return V @ self.coefficients.T

    def gradient(self, xi):
        """
        Gradient with respect to the reference coordinates.

        Arguments:
            np.ndarray xi: reference points (n_pts, 2)

        Returns:
            np.ndarray: gradients (n_pts, dim, 2)
        """
        xi = np.atleast_2d(np.asarray(xi, dtype = np.float64))
        _, Vx, Vy = monomials(self.degree, np.ascontiguousarray(xi[:, 0]), np.ascontiguousarray(xi[:, 1]))
        return np.stack((Vx @ self.coefficients.T, Vy @ self.coefficients.T), axis = -1)

class EdgeBasis:
    """
    Orthonormal Legendre basis of P_l on an edge parametrised by t in [0,1] in the global edge direction.
    On an edge of length L the Gram matrix is L I.

    Arguments:
        int ell: polynomial degree

    Returns:
        EdgeBasis: instance of the EdgeBasis class
    """
    def __init__(self, ell):
        if int(ell) != ell or ell < 0:
            raise WGException("Polynomial degree must be a non-negative integer, got {0}".format(ell))
        self.degree = int(ell)
        self.dim    = self.degree + 1

    def __len__(self):
        return self.dim

    def evaluate(self, t):
        """
        Arguments:
            np.ndarray t: edge parameters in [0,1] (n_pts,)

        Returns:
            np.ndarray: values (n_pts, dim)
        """
        return legendre(self.degree, np.ascontiguousarray(np.atleast_1d(t), dtype = np.float64))

class VectorBasis:
    """
    Basis of the gradient space V(T,r) in scaled coordinates y = (x - x_c)/h_T:
        * 'full': [P_{j+1}]^2, dimension (j+2)(j+3);
        * 'rt':   [P_j]^2 + y P^_j (Raviart-Thomas of order j), dimension (j+1)(j+3).
    Generators are monomial fields, orthonormalised under the vector L^2 product of the reference triangle.

    Arguments:
        str variant: 'full' or 'rt'
        int j:       interior degree

    Returns:
        VectorBasis: instance of the VectorBasis class
    """
    def __init__(self, variant, j):
        variant = str(variant).lower()
        if variant not in supported_variants:
            raise WGException("Unknown gradient space {0}. Please use 'full' or 'rt'".format(variant))
        if int(j) != j or j < 0:
            raise WGException("Polynomial degree must be a non-negative integer, got {0}".format(j))
        self.variant = variant
        self.j       = int(j)
        self.degree  = self.j + 1
        n_mono       = n_monomials(self.degree)
        generators   = []
        if variant == 'full':
            for c in range(2):
                for i in range(n_mono):
                    g = np.zeros((2, n_mono))
                    g[c, i] = 1.
                    generators.append(g)
        else:
            for c in range(2):
                for i in range(n_monomials(self.j)):
                    g = np.zeros((2, n_mono))
                    g[c, i] = 1.
                    generators.append(g)
            for l in range(self.j+1):
                p, q = self.j - l, l
                g = np.zeros((2, n_mono))
                g[0, monomial_index(p+1, q)] = 1.
                g[1, monomial_index(p, q+1)] = 1.
                generators.append(g)
        self.generators = np.array(generators)
        self.dim        = len(self.generators)
        # Orthonormalisation on the reference triangle
        rule   = triangle_rule(2*self.degree)
        c, h   = local_scaling(reference_triangle)
        y      = to_local(rule.points, c, h)
        values = self.evaluate(y, orthonormal = False)
        gram   = np.einsum('q,qic,qkc->ik', rule.weights, values, values)
        self.coefficients = _orthonormalise(gram, self.generators)
        self.generators.setflags(write = False)
        self.coefficients.setflags(write = False)

    def __len__(self):
        return self.dim

    def _coefficients(self, orthonormal):
        if orthonormal:
            return self.coefficients
        return self.generators

    def evaluate(self, y, orthonormal = True):
        """
        Arguments:
            np.ndarray y:     scaled points (n_pts, 2)
            bool orthonormal: orthonormalised basis (True) or raw monomial generators (False)

        Returns:
            np.ndarray: values (n_pts, dim, 2)
        """
        y = np.atleast_2d(np.asarray(y, dtype = np.float64))
        V, _, _ = monomials(self.degree, np.ascontiguousarray(y[:, 0]), np.ascontiguousarray(y[:, 1]))
        return np.einsum('qm,icm->qic', V, self._coefficients(orthonormal))

    def divergence(self, y, orthonormal = True):
        """
        Divergence with respect to y (divide by h_T for the physical divergence).

        Arguments:
            np.ndarray y:     scaled points (n_pts, 2)
            bool orthonormal: orthonormalised basis (True) or raw monomial generators (False)

        Returns:
            np.ndarray: divergence values (n_pts, dim)
        """
        y = np.atleast_2d(np.asarray(y, dtype = np.float64))
        _, Vx, Vy = monomials(self.degree, np.ascontiguousarray(y[:, 0]), np.ascontiguousarray(y[:, 1]))
        A = self._coefficients(orthonormal)
        return Vx @ A[:, 0, :].T + Vy @ A[:, 1, :].T

    def normal_trace(self, y, normal, orthonormal = True):
        """
        Arguments:
            np.ndarray y:      scaled points (n_pts, 2)
            np.ndarray normal: unit normal (2,)
            bool orthonormal:  orthonormalised basis (True) or raw monomial generators (False)

        Returns:
            np.ndarray: normal components (n_pts, dim)
        """
        return self.evaluate(y, orthonormal) @ np.asarray(normal, dtype = np.float64)

def scalar_basis(j):
    return ScalarBasis(j)

def edge_basis(ell):
    return EdgeBasis(ell)

def vector_basis(variant, j):
    return VectorBasis(variant, j)
