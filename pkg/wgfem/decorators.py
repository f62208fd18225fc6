import numpy as np

"""
Coefficient fields are evaluated at arbitrarily shaped arrays of points (a triangle's quadrature points, all the
quadrature points of a mesh, a sampling grid...). These decorators broadcast the coordinates and guarantee that the
returned values have the shape of the points, followed by the shape of the field value.
"""

def scalar_field(func):
    """
    Evaluate a scalar field at broadcast coordinates x, y: returns an array with their shape (constants are expanded)
    """
    def f_transf(ref, x, y, *args, **kwargs):
        x, y = np.broadcast_arrays(np.asarray(x, dtype = np.float64), np.asarray(y, dtype = np.float64))
        val  = np.asarray(func(ref, x, y, *args, **kwargs), dtype = np.float64)
        return np.array(np.broadcast_to(val, x.shape))
    return f_transf

def vector_field(func):
    """
    Evaluate a vector field given by its components (a list of arrays) at broadcast coordinates x, y: returns an array of shape x.shape + (2,)
    """
    def f_transf(ref, x, y, *args, **kwargs):
        x, y = np.broadcast_arrays(np.asarray(x, dtype = np.float64), np.asarray(y, dtype = np.float64))
        comp = [np.broadcast_to(np.asarray(v, dtype = np.float64), x.shape) for v in func(ref, x, y, *args, **kwargs)]
        return np.stack(comp, axis = -1)
    return f_transf

def symmetric_matrix_field(func):
    """
    Evaluate a symmetric matrix field given by its entries (a11, a12, a22) at broadcast coordinates x, y: returns an array of shape x.shape + (2, 2)
    """
    def f_transf(ref, x, y, *args, **kwargs):
        x, y = np.broadcast_arrays(np.asarray(x, dtype = np.float64), np.asarray(y, dtype = np.float64))
        a11, a12, a22 = [np.broadcast_to(np.asarray(v, dtype = np.float64), x.shape) for v in func(ref, x, y, *args, **kwargs)]
        return np.stack((np.stack((a11, a12), axis = -1), np.stack((a12, a22), axis = -1)), axis = -2)
    return f_transf
