import numpy as np

from functools import lru_cache
from scipy.special import roots_jacobi, roots_legendre

from wgfem.exceptions import WGException

max_triangle_exactness = 30
max_edge_exactness     = 61

class QuadratureRule:
    """
    Quadrature rule on a reference domain.

    Arguments:
        np.ndarray points:  reference points, (n, 2) on the reference triangle or (n,) edge parameters in [0,1]
        np.ndarray weights: weights (n,)
        int exactness:      polynomial degree integrated exactly

    Returns:
        QuadratureRule: instance of the QuadratureRule class
    """
    def __init__(self, points, weights, exactness):
        self.points    = np.asarray(points, dtype = np.float64)
        self.weights   = np.asarray(weights, dtype = np.float64)
        self.exactness = int(exactness)
        self.points.setflags(write = False)
        self.weights.setflags(write = False)

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        """
        Applies the rule to values sampled at the rule points (last axis).
        """
        return np.dot(np.asarray(values), self.weights)

def _check_exactness(exactness, maximum, kind):
    if int(exactness) != exactness or exactness < 0:
        raise WGException("Quadrature exactness must be a non-negative integer, got {0}".format(exactness))
    if exactness > maximum:
        raise WGException("{0} quadrature of exactness {1} is not supported (maximum {2})".format(kind, exactness, maximum))

@lru_cache(maxsize = None)
def triangle_rule(exactness):
    """
    Collapsed (Duffy) Gauss rule on the reference triangle (0,0), (1,0), (0,1).
    Gauss-Jacobi points (weight 1-u) in the collapsed direction times Gauss-Legendre points in the other, k = ceil((exactness+1)/2) per direction.
    Exactness 1 reduces to the centroid rule.

    Arguments:
        int exactness: polynomial degree to be integrated exactly

    Returns:
        QuadratureRule: rule with weights summing to 1/2
    """
    _check_exactness(exactness, max_triangle_exactness, 'Triangle')
    k      = max(1, (int(exactness) + 2)//2)
    su, wu = roots_jacobi(k, 1., 0.)
    sv, wv = roots_legendre(k)
    u      = 0.5*(1. + su)
    v      = 0.5*(1. + sv)
    wu     = wu/4.
    wv     = wv/2.
    U, V   = np.meshgrid(u, v, indexing = 'ij')
    WU, WV = np.meshgrid(wu, wv, indexing = 'ij')
    points  = np.column_stack((U.ravel(), ((1. - U)*V).ravel()))
    weights = (WU*WV).ravel()
    return QuadratureRule(points, weights, exactness)

@lru_cache(maxsize = None)
def edge_rule(exactness):
    """
    Gauss-Legendre rule on [0,1] with k = exactness//2 + 1 points (exact to degree 2k-1).

    Arguments:
        int exactness: polynomial degree to be integrated exactly

    Returns:
        QuadratureRule: rule with weights summing to 1
    """
    _check_exactness(exactness, max_edge_exactness, 'Edge')
    k    = int(exactness)//2 + 1
    s, w = roots_legendre(k)
    return QuadratureRule(0.5*(1. + s), w/2., exactness)
