import numpy as np
import warnings

from wgfem.exceptions import MeshError
from wgfem._numba_functions import triangle_geometry

# Above this ratio h_T/rho_T the mesh is reported as poorly shaped (never rejected)
shape_warning_threshold = 1e3

def build_edges(vertices, triangles):
    """
    Derives the edge table of a triangulation.
    Local edge k of triangle t joins triangles[t,k] and triangles[t,(k+1)%3]; every global edge is stored with the lower
    vertex index first (global edge direction). Edges are sorted by (low, high) vertex index.

    Arguments:
        np.ndarray vertices:  vertex coordinates (n_vertices, 2)
        np.ndarray triangles: vertex indices (n_triangles, 3)

    Returns:
        np.ndarray: edge endpoints, low index first (n_edges, 2)
        np.ndarray: adjacent triangles (n_edges, 2), second entry is -1 on boundary edges
        np.ndarray: boundary flag (n_edges,)
        np.ndarray: local-to-global edge map (n_triangles, 3)
        np.ndarray: orientation sign of each local edge with respect to the global direction (n_triangles, 3)
    """
    triangles = np.asarray(triangles, dtype = np.int64)
    nt        = len(triangles)
    local     = np.stack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis = 1)
    signs     = np.where(local[:, :, 0] < local[:, :, 1], 1, -1)
    pairs     = np.sort(local.reshape(-1, 2), axis = 1)
    edges, inverse, counts = np.unique(pairs, axis = 0, return_inverse = True, return_counts = True)
    inverse   = inverse.reshape(-1)
    if np.any(counts > 2):
        bad = edges[np.argmax(counts > 2)]
        raise MeshError("Non-manifold edge ({0}, {1}) shared by {2} triangles".format(bad[0], bad[1], counts.max()))
    owners         = np.repeat(np.arange(nt), 3)
    edge_triangles = -np.ones((len(edges), 2), dtype = np.int64)
    # Stable sort: the first adjacent triangle is the one with the lowest index
    order = np.argsort(inverse, kind = 'stable')
    first = np.ones(len(order), dtype = bool)
    first[1:] = inverse[order][1:] != inverse[order][:-1]
    edge_triangles[inverse[order][first], 0]  = owners[order][first]
    edge_triangles[inverse[order][~first], 1] = owners[order][~first]
    boundary = counts == 1
    return edges.astype(np.int64), edge_triangles, boundary, inverse.reshape(nt, 3), signs.astype(np.int64)

class Mesh:
    """
    Immutable conforming triangular mesh.
    Triangles are stored counter-clockwise; edges are derived from the triangles (see build_edges).

    Arguments:
        np.ndarray vertices:  vertex coordinates (n_vertices, 2)
        np.ndarray triangles: vertex indices (n_triangles, 3), counter-clockwise

    Returns:
        Mesh: instance of the Mesh class
    """
    def __init__(self, vertices, triangles):
        vertices  = np.array(vertices, dtype = np.float64)
        triangles = np.array(triangles, dtype = np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("Vertices must be an (n, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise MeshError("Triangles must be a non-empty (n, 3) array")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("Triangle vertex index out of range")
        areas, diam, inradius, lengths, normals = triangle_geometry(vertices, triangles)
        if np.any(areas <= 0.):
            t = int(np.argmin(areas))
            if areas[t] == 0.:
                raise MeshError("Triangle {0} is degenerate (zero area)".format(t))
            raise MeshError("Triangle {0} is clockwise".format(t))
        edges, edge_triangles, boundary, triangle_edges, signs = build_edges(vertices, triangles)

        self.vertices                 = vertices
        self.triangles                = triangles
        self.edges                    = edges
        self.edge_triangles           = edge_triangles
        self.boundary                 = boundary
        self.triangle_edges           = triangle_edges
        self.triangle_edge_signs      = signs
        self.areas                    = areas
        self.diameters                = diam
        self.inradii                  = inradius
        self.local_edge_lengths       = lengths
        self.normals                  = normals
        self.edge_lengths             = np.linalg.norm(vertices[edges[:, 1]] - vertices[edges[:, 0]], axis = -1)
        self.centroids                = vertices[triangles].mean(axis = 1)
        for value in self.__dict__.values():
            value.setflags(write = False)
        if self.shape_regularity > shape_warning_threshold:
            warnings.warn("Shape-regularity ratio max(h_T/rho_T) = {0:.3e}".format(self.shape_regularity))

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def h(self):
        """
        Mesh size (largest triangle diameter)
        """
        return float(self.diameters.max())

    @property
    def shape_regularity(self):
        """
        max_T h_T/rho_T
        """
        return float(np.max(self.diameters/self.inradii))

    @property
    def area(self):
        return float(np.sum(self.areas))

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.boundary)

    @property
    def interior_edges(self):
        return np.flatnonzero(~self.boundary)

    @property
    def boundary_vertices(self):
        return np.unique(self.edges[self.boundary])

    def triangle_coordinates(self, t = None):
        """
        Vertex coordinates of the triangles.

        Arguments:
            int or np.ndarray t: triangle index (or indices). If None, all triangles are returned

        Returns:
            np.ndarray: coordinates (3, 2) or (n, 3, 2)
        """
        if t is None:
            return self.vertices[self.triangles]
        return self.vertices[self.triangles[t]]

    def euler_characteristic(self):
        """
        V - E + F with F the number of triangles (1 for simply connected domains).
        """
        return self.n_vertices - self.n_edges + self.n_triangles

    def summary(self):
        return {'vertices':         self.n_vertices,
                'triangles':        self.n_triangles,
                'edges':            self.n_edges,
                'boundary_edges':   int(self.boundary.sum()),
                'h':                self.h,
                'shape_regularity': self.shape_regularity,
                }

def structured_unit_square(n):
    """
    Structured triangulation of the unit square: n x n cells, each split by the diagonal from (i/n, k/n) to ((i+1)/n, (k+1)/n).

    Arguments:
        int n: number of cells per side

    Returns:
        Mesh: mesh with 2n^2 triangles and (n+1)^2 vertices
    """
    if int(n) != n or n < 1:
        raise MeshError("The number of cells per side must be a positive integer, got {0}".format(n))
    n     = int(n)
    g     = np.linspace(0., 1., n+1)
    X, Y  = np.meshgrid(g, g)
    vertices = np.column_stack((X.ravel(), Y.ravel()))
    i, k  = np.meshgrid(np.arange(n), np.arange(n))
    i, k  = i.ravel(), k.ravel()
    a     = i + (n+1)*k
    b     = a + 1
    c     = a + n + 2
    d     = a + n + 1
    lower = np.column_stack((a, b, c))
    upper = np.column_stack((a, c, d))
    triangles = np.stack((lower, upper), axis = 1).reshape(-1, 3)
    return Mesh(vertices, triangles)

def uniform_refine(mesh):
    """
    Splits every triangle into 4 congruent children through its edge midpoints.
    New vertices are appended after the parent vertices, one per parent edge in edge order; children of triangle t are 4t, ..., 4t+3.

    Arguments:
        Mesh mesh: parent mesh

    Returns:
        Mesh: refined mesh
    """
    nv        = mesh.n_vertices
    midpoints = 0.5*(mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    vertices  = np.concatenate((mesh.vertices, midpoints))
    v         = mesh.triangles
    m         = nv + mesh.triangle_edges
    children  = np.stack([np.column_stack((v[:, 0], m[:, 0], m[:, 2])),
                          np.column_stack((m[:, 0], v[:, 1], m[:, 1])),
                          np.column_stack((m[:, 2], m[:, 1], v[:, 2])),
                          np.column_stack((m[:, 0], m[:, 1], m[:, 2])),
                          ], axis = 1).reshape(-1, 3)
    return Mesh(vertices, children)
