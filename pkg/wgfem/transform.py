import numpy as np

"""
Coordinate changes used by every basis evaluation.

Scalar interior bases live on the reference triangle (0,0), (1,0), (0,1) and are pulled back through the affine map
    x(xi) = v0 + J xi,    J = [v1 - v0, v2 - v0].
Vector (gradient-space) bases are written in centred, isotropically scaled coordinates
    y(x) = (x - x_c)/h_T,
which keep the Raviart-Thomas space [P_j]^2 + x P^_j invariant (an anisotropic affine map would not).
"""

reference_triangle = np.array([[0., 0.], [1., 0.], [0., 1.]])

def jacobians(coords):
    """
    Jacobian matrices of the affine reference maps.

    Arguments:
        np.ndarray coords: triangle vertices (..., 3, 2)

    Returns:
        np.ndarray: Jacobians (..., 2, 2), columns v1-v0 and v2-v0
    """
    coords = np.asarray(coords, dtype = np.float64)
    return np.stack((coords[..., 1, :] - coords[..., 0, :], coords[..., 2, :] - coords[..., 0, :]), axis = -1)

def from_reference(xi, coords):
    """
    Maps reference points to physical points.

    Arguments:
        np.ndarray xi:     reference points (n_pts, 2)
        np.ndarray coords: triangle vertices (..., 3, 2)

    Returns:
        np.ndarray: physical points (..., n_pts, 2)
    """
    coords = np.asarray(coords, dtype = np.float64)
    J      = jacobians(coords)
    return coords[..., None, 0, :] + np.einsum('...cd,qd->...qc', J, xi)

def to_reference(x, coords):
    """
    Maps physical points back to the reference triangle.

    Arguments:
        np.ndarray x:      physical points (..., n_pts, 2)
        np.ndarray coords: triangle vertices (..., 3, 2)

    Returns:
        np.ndarray: reference points (..., n_pts, 2)
    """
    coords = np.asarray(coords, dtype = np.float64)
    J      = jacobians(coords)
    return np.einsum('...cd,...qd->...qc', np.linalg.inv(J), x - coords[..., None, 0, :])

def local_scaling(coords):
    """
    Centroid and diameter of the triangles, i.e. the parameters of the scaled coordinates y = (x - x_c)/h_T.

    Arguments:
        np.ndarray coords: triangle vertices (..., 3, 2)

    Returns:
        np.ndarray: centroids (..., 2)
        np.ndarray: diameters (...)
    """
    coords    = np.asarray(coords, dtype = np.float64)
    centroids = coords.mean(axis = -2)
    sides     = coords - np.roll(coords, -1, axis = -2)
    diameters = np.linalg.norm(sides, axis = -1).max(axis = -1)
    return centroids, diameters

def to_local(x, centroids, diameters):
    """
    Scaled coordinates y = (x - x_c)/h_T.

    Arguments:
        np.ndarray x:         physical points (..., n_pts, 2)
        np.ndarray centroids: centroids (..., 2)
        np.ndarray diameters: diameters (...)

    Returns:
        np.ndarray: scaled points (..., n_pts, 2)
    """
    return (x - centroids[..., None, :])/np.asarray(diameters)[..., None, None]

def edge_points(coords, signs, t):
    """
    Points on the three local edges, parametrised in the global edge direction (low -> high vertex index).

    Arguments:
        np.ndarray coords: triangle vertices (..., 3, 2)
        np.ndarray signs:  orientation of local edges with respect to the global direction (..., 3)
        np.ndarray t:      edge parameters in [0,1] (n_pts,)

    Returns:
        np.ndarray: points (..., 3, n_pts, 2)
    """
    coords = np.asarray(coords, dtype = np.float64)
    a      = coords
    b      = np.roll(coords, -1, axis = -2)
    forward = (np.asarray(signs) > 0)[..., None]
    start  = np.where(forward, a, b)
    end    = np.where(forward, b, a)
    return start[..., None, :] + t[:, None]*(end - start)[..., None, :]
