import numpy as np
from numba import njit

@njit
def n_monomials(k):
    return (k+1)*(k+2)//2

@njit
def monomials(k, x, y):
    """
    Values and first derivatives of the monomials x^(i-l) y^l, 0 <= l <= i <= k, ordered by total degree.

    Arguments:
        int k:        maximum degree
        np.ndarray x: first coordinate of the points (1d array)
        np.ndarray y: second coordinate of the points (1d array)

    Returns:
        np.ndarray: values (n_pts, n_mono)
        np.ndarray: x-derivatives (n_pts, n_mono)
        np.ndarray: y-derivatives (n_pts, n_mono)
    """
    n   = x.shape[0]
    dim = n_monomials(k)
    V   = np.zeros((n, dim))
    Vx  = np.zeros((n, dim))
    Vy  = np.zeros((n, dim))
    for q in range(n):
        ii = 0
        for i in range(k+1):
            for l in range(i+1):
                p = i - l
                V[q, ii] = x[q]**p * y[q]**l
                if p > 0:
                    Vx[q, ii] = p * x[q]**(p-1) * y[q]**l
                if l > 0:
                    Vy[q, ii] = l * x[q]**p * y[q]**(l-1)
                ii += 1
    return V, Vx, Vy

@njit
def legendre(k, t):
    """
    Shifted Legendre polynomials on [0,1], normalised so that int_0^1 L_m L_n dt = delta_mn.

    Arguments:
        int k:        maximum degree
        np.ndarray t: points in [0,1] (1d array)

    Returns:
        np.ndarray: values (n_pts, k+1)
    """
    n = t.shape[0]
    P = np.zeros((n, k+1))
    s = 2.*t - 1.
    for q in range(n):
        P[q, 0] = 1.
        if k > 0:
            P[q, 1] = s[q]
        for m in range(1, k):
            P[q, m+1] = ((2*m+1)*s[q]*P[q, m] - m*P[q, m-1])/(m+1)
    for m in range(k+1):
        P[:, m] *= np.sqrt(2.*m + 1.)
    return P

@njit
def triangle_geometry(vertices, triangles):
    """
    Per-triangle geometric quantities.

    Arguments:
        np.ndarray vertices:  vertex coordinates (n_vertices, 2)
        np.ndarray triangles: vertex indices (n_triangles, 3)

    Returns:
        np.ndarray: signed areas (n_triangles,)
        np.ndarray: diameters (n_triangles,)
        np.ndarray: inradii (n_triangles,)
        np.ndarray: local edge lengths (n_triangles, 3), edge k goes from vertex k to vertex k+1
        np.ndarray: outward unit normals (n_triangles, 3, 2)
    """
    nt       = triangles.shape[0]
    areas    = np.zeros(nt)
    diam     = np.zeros(nt)
    inradius = np.zeros(nt)
    lengths  = np.zeros((nt, 3))
    normals  = np.zeros((nt, 3, 2))
    for t in range(nt):
        p0 = vertices[triangles[t, 0]]
        p1 = vertices[triangles[t, 1]]
        p2 = vertices[triangles[t, 2]]
        areas[t] = 0.5*((p1[0]-p0[0])*(p2[1]-p0[1]) - (p2[0]-p0[0])*(p1[1]-p0[1]))
        for k in range(3):
            a  = vertices[triangles[t, k]]
            b  = vertices[triangles[t, (k+1) % 3]]
            dx = b[0] - a[0]
            dy = b[1] - a[1]
            L  = np.sqrt(dx*dx + dy*dy)
            lengths[t, k] = L
            if L > 0.:
                normals[t, k, 0] = dy/L
                normals[t, k, 1] = -dx/L
        diam[t] = np.max(lengths[t])
        perimeter = np.sum(lengths[t])
        if perimeter > 0.:
            inradius[t] = 2.*np.abs(areas[t])/perimeter
    return areas, diam, inradius, lengths, normals
