import numpy as np

from functools import lru_cache
from scipy.linalg import cholesky

from wgfem.basis import ScalarBasis, EdgeBasis, VectorBasis, supported_variants
from wgfem.quadrature import triangle_rule, edge_rule
from wgfem.transform import from_reference, local_scaling, to_local, edge_points
from wgfem._numba_functions import triangle_geometry
from wgfem.exceptions import WGException, DegenerateElementError

# Local V-mass matrices with a larger condition number are rejected
max_mass_condition = 1e12
# Relative singular value below which a direction belongs to the numerical kernel
kernel_tolerance   = 1e-10

class WgSpace:
    """
    Weak finite element space S_h(j, l) with its gradient space V(T, r). Only the two pairings are available:
        * family 'full': l = j+1, V = [P_{j+1}]^2;
        * family 'rt':   l = j,   V = RT_j = [P_j]^2 + x P^_j.
    Local degrees of freedom are ordered as [interior | local edge 0 | local edge 1 | local edge 2], edge coefficients
    refer to the Legendre basis in the global edge direction.

    Arguments:
        int j:        interior degree
        str family:   'full' or 'rt'
        int ell:      edge degree (optional, must match the family)
        int q_boost:  extra quadrature degree on top of 2(j+1), absorbs non-polynomial coefficients

    Returns:
        WgSpace: instance of the WgSpace class
    """
    def __init__(self, j, family = 'full', ell = None, q_boost = 3):
        family = str(family).lower()
        if family not in supported_variants:
            raise WGException("Unknown element family {0}. Please use 'full' or 'rt'".format(family))
        if int(j) != j or j < 0:
            raise WGException("Interior degree must be a non-negative integer, got {0}".format(j))
        if int(q_boost) != q_boost or q_boost < 0:
            raise WGException("Quadrature boost must be a non-negative integer, got {0}".format(q_boost))
        self.j       = int(j)
        self.family  = family
        paired_ell   = self.j + 1 if family == 'full' else self.j
        if ell is not None and ell != paired_ell:
            raise WGException("Edge degree {0} does not match family '{1}' with j = {2} (expected {3})".format(ell, family, self.j, paired_ell))
        self.ell     = paired_ell
        self.q_boost = int(q_boost)
        self.scalar  = ScalarBasis(self.j)
        self.edge    = EdgeBasis(self.ell)
        self.vector  = VectorBasis(family, self.j)

    @property
    def n_interior(self):
        return self.scalar.dim

    @property
    def n_edge(self):
        return self.edge.dim

    @property
    def n_local(self):
        return self.n_interior + 3*self.n_edge

    @property
    def n_gradient(self):
        return self.vector.dim

    @property
    def exactness(self):
        return 2*(self.j+1) + self.q_boost

    def triangle_rule(self, exactness = None):
        return triangle_rule(self.exactness if exactness is None else exactness)

    def edge_rule(self, exactness = None):
        return edge_rule(self.exactness if exactness is None else exactness)

    def constant_dofs(self, value = 1.):
        """
        Local degrees of freedom of the constant weak function v_0 = v_b = value.
        """
        rule     = triangle_rule(2*self.j)
        interior = value*(rule.weights @ self.scalar.evaluate(rule.points))
        edge     = np.zeros(self.n_edge)
        edge[0]  = value
        return np.concatenate((interior, edge, edge, edge))

    def _key(self):
        return (self.j, self.ell, self.family, self.q_boost)

    def __eq__(self, other):
        return isinstance(other, WgSpace) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "WgSpace(j = {0}, ell = {1}, family = '{2}', q_boost = {3})".format(*self._key())

    def summary(self):
        return {'j':          self.j,
                'ell':        self.ell,
                'family':     self.family,
                'q_boost':    self.q_boost,
                'n_interior': self.n_interior,
                'n_edge':     self.n_edge,
                'n_gradient': self.n_gradient,
                }

class WeakFunction:
    """
    Discrete weak function v = {v_0, v_b}: one interior block per triangle followed by one edge block per global edge.
    Edge blocks are single-valued, shared by the two triangles adjacent to an interior edge.

    Arguments:
        WgSpace space:           weak finite element space
        Mesh mesh:               mesh
        np.ndarray coefficients: global coefficient vector (optional, zeros by default)

    Returns:
        WeakFunction: instance of the WeakFunction class
    """
    # Relative residual of the linear solve that produced the function, if any
    residual = None

    def __init__(self, space, mesh, coefficients = None):
        self.space = space
        self.mesh  = mesh
        n = mesh.n_triangles*space.n_interior + mesh.n_edges*space.n_edge
        if coefficients is None:
            coefficients = np.zeros(n)
        coefficients = np.array(coefficients, dtype = np.float64)
        if coefficients.shape != (n,):
            raise WGException("Coefficient vector has shape {0}, expected ({1},)".format(coefficients.shape, n))
        self.coefficients = coefficients

    @property
    def n_dofs(self):
        return len(self.coefficients)

    @property
    def interior(self):
        """
        Interior blocks (n_triangles, n_interior), a view on the coefficients
        """
        return self.coefficients[:self.mesh.n_triangles*self.space.n_interior].reshape(self.mesh.n_triangles, self.space.n_interior)

    @property
    def edges(self):
        """
        Edge blocks (n_edges, n_edge), a view on the coefficients
        """
        return self.coefficients[self.mesh.n_triangles*self.space.n_interior:].reshape(self.mesh.n_edges, self.space.n_edge)

    def local_dofs(self):
        """
        Local degrees of freedom of every triangle (n_triangles, n_local)
        """
        edge_blocks = self.edges[self.mesh.triangle_edges].reshape(self.mesh.n_triangles, -1)
        return np.concatenate((self.interior, edge_blocks), axis = 1)

    def _check(self, other):
        if not isinstance(other, WeakFunction) or other.space != self.space or other.mesh is not self.mesh:
            raise WGException("Weak functions live in different spaces")

    def __add__(self, other):
        self._check(other)
        return WeakFunction(self.space, self.mesh, self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check(other)
        return WeakFunction(self.space, self.mesh, self.coefficients - other.coefficients)

    def __neg__(self):
        return WeakFunction(self.space, self.mesh, -self.coefficients)

    def __mul__(self, alpha):
        return WeakFunction(self.space, self.mesh, alpha*self.coefficients)

    __rmul__ = __mul__

    def dot(self, other):
        self._check(other)
        return float(self.coefficients @ other.coefficients)

    def copy(self):
        return WeakFunction(self.space, self.mesh, self.coefficients.copy())

class LocalWeakGradient:
    """
    Discrete weak gradient map of one triangle: G_T = M^-1 B maps the local weak degrees of freedom to the coefficients
    of grad_d v in the basis of V(T, r).

    Arguments:
        int triangle:         triangle index
        np.ndarray matrix:    G_T (n_gradient, n_local)
        np.ndarray mass:      V-mass matrix M (n_gradient, n_gradient)
        double condition:     condition number of M
        np.ndarray dof_scale: L^2 scale of each local degree of freedom (sqrt(2|T|) interior, sqrt(|e|) edges)

    Returns:
        LocalWeakGradient: instance of the LocalWeakGradient class
    """
    def __init__(self, triangle, matrix, mass, condition, dof_scale):
        self.triangle  = triangle
        self.matrix    = matrix
        self.mass      = mass
        self.condition = float(condition)
        self.dof_scale = dof_scale

    def apply(self, dofs):
        return self.matrix @ np.asarray(dofs, dtype = np.float64)

    def norm(self, dofs):
        """
        ||grad_d v||_{L^2(T)}
        """
        g = self.apply(dofs)
        return float(np.sqrt(max(g @ self.mass @ g, 0.)))

    def singular_values(self):
        """
        Singular values of G_T measured in L^2 norms on both sides, padded with zeros up to n_local, and the right singular vectors.
        """
        L       = cholesky(self.mass, lower = True)
        K       = (L.T @ self.matrix)/self.dof_scale[None, :]
        _, s, Vt = np.linalg.svd(K)
        s = np.concatenate((s, np.zeros(K.shape[1] - len(s))))
        return s, Vt

    def kernel(self, tol = kernel_tolerance):
        """
        Numerical kernel of G_T.

        Arguments:
            double tol: relative singular value threshold

        Returns:
            int:        kernel dimension
            np.ndarray: kernel basis in local degrees of freedom (n_local, dim), columns have unit L^2 norm
        """
        s, Vt = self.singular_values()
        rank  = int(np.sum(s > tol*s[0]))
        basis = (Vt[rank:]/self.dof_scale[None, :]).T
        return basis.shape[1], basis

class WeakGradient:
    """
    Local weak-gradient maps of a set of triangles, computed in one vectorised pass.
    Stores the quadrature data shared by assembly and post-processing (same rules everywhere).

    Arguments:
        np.ndarray coords: triangle vertices (n_triangles, 3, 2), counter-clockwise
        np.ndarray signs:  orientation of the local edges with respect to the global edge direction (n_triangles, 3)
        WgSpace space:     weak finite element space

    Returns:
        WeakGradient: instance of the WeakGradient class
    """
    def __init__(self, coords, signs, space):
        coords = np.ascontiguousarray(coords, dtype = np.float64).reshape(-1, 3, 2)
        signs  = np.asarray(signs, dtype = np.int64).reshape(-1, 3)
        nt     = len(coords)
        areas, _, _, lengths, normals = triangle_geometry(coords.reshape(-1, 2), np.arange(3*nt, dtype = np.int64).reshape(nt, 3))
        if np.any(areas <= 0.):
            t = int(np.argmin(areas))
            raise DegenerateElementError("Triangle {0} is degenerate or clockwise (signed area {1:.3e})".format(t, areas[t]), triangle = t)
        self.space     = space
        self.coords    = coords
        self.signs     = signs
        self.areas     = areas
        self.lengths   = lengths
        self.normals   = normals
        self.centroids, self.diameters = local_scaling(coords)
        # Interior quadrature
        rule           = space.triangle_rule()
        self.rule      = rule
        self.points    = from_reference(rule.points, coords)
        self.weights   = 2.*areas[:, None]*rule.weights[None, :]
        self.phi0      = space.scalar.evaluate(rule.points)
        y              = to_local(self.points, self.centroids, self.diameters).reshape(-1, 2)
        nq             = len(rule)
        nv             = space.n_gradient
        self.V         = space.vector.evaluate(y).reshape(nt, nq, nv, 2)
        self.divV      = space.vector.divergence(y).reshape(nt, nq, nv)/self.diameters[:, None, None]
        # Edge quadrature, parametrised in the global edge direction
        erule          = space.edge_rule()
        self.edge_rule = erule
        self.psi       = space.edge.evaluate(erule.points)
        self.edge_pts  = edge_points(coords, signs, erule.points)
        ye             = to_local(self.edge_pts.reshape(nt, -1, 2), self.centroids, self.diameters).reshape(-1, 2)
        Ve             = space.vector.evaluate(ye).reshape(nt, 3, len(erule), nv, 2)
        self.Vn        = np.einsum('tesvc,tec->tesv', Ve, normals)
        # M, B and G = M^-1 B
        self.mass      = np.einsum('tq,tqic,tqkc->tik', self.weights, self.V, self.V)
        B0             = -np.einsum('tq,tqi,qk->tik', self.weights, self.divV, self.phi0)
        Bb             = np.einsum('te,s,tesi,sm->tiem', lengths, erule.weights, self.Vn, self.psi).reshape(nt, nv, -1)
        self.B         = np.concatenate((B0, Bb), axis = -1)
        self.condition = np.linalg.cond(self.mass)
        if np.any(~np.isfinite(self.condition)) or np.any(self.condition > max_mass_condition):
            t = int(np.nanargmax(np.where(np.isfinite(self.condition), self.condition, np.inf)))
            raise DegenerateElementError("Local V-mass matrix of triangle {0} is ill-conditioned (condition number {1:.3e})".format(t, self.condition[t]), triangle = t, condition = self.condition[t])
        self.matrices  = np.linalg.solve(self.mass, self.B)
        self.dof_scale = np.concatenate((np.repeat(np.sqrt(2.*areas)[:, None], space.n_interior, axis = 1),
                                         np.repeat(np.sqrt(lengths), space.n_edge, axis = 1)), axis = 1)

    def __len__(self):
        return len(self.coords)

    def local(self, t):
        """
        Local weak-gradient map of triangle t.
        """
        return LocalWeakGradient(t, self.matrices[t], self.mass[t], self.condition[t], self.dof_scale[t])

    def apply(self, local_dofs):
        """
        Coefficients of grad_d v on every triangle.

        Arguments:
            np.ndarray local_dofs: local degrees of freedom (n_triangles, n_local)

        Returns:
            np.ndarray: V-coefficients (n_triangles, n_gradient)
        """
        return np.einsum('tvl,tl->tv', self.matrices, local_dofs)

    def values(self, coefficients):
        """
        Values at the interior quadrature points of fields given by V-coefficients (n_triangles, n_gradient).
        """
        return np.einsum('tqvc,tv->tqc', self.V, coefficients)

    def interior_values(self, interior):
        """
        Values of v_0 at the interior quadrature points, from interior blocks (n_triangles, n_interior).
        """
        return interior @ self.phi0.T

    def basis_gradients(self):
        """
        grad_d of every local basis function at the interior quadrature points (n_triangles, n_q, n_local, 2).
        """
        return np.einsum('tqvc,tvl->tqlc', self.V, self.matrices)

    def norms(self, coefficients):
        """
        ||q||_{L^2(T)} of fields given by V-coefficients, per triangle.
        """
        return np.sqrt(np.maximum(np.einsum('tv,tvw,tw->t', coefficients, self.mass, coefficients), 0.))

    def project(self, q):
        """
        Local L^2 projection R_h onto V(T, r) of a vector field sampled at the interior quadrature points.

        Arguments:
            np.ndarray q: field values (n_triangles, n_q, 2)

        Returns:
            np.ndarray: V-coefficients (n_triangles, n_gradient)
        """
        rhs = np.einsum('tq,tqvc,tqc->tv', self.weights, self.V, q)
        return np.linalg.solve(self.mass, rhs[..., None])[..., 0]

@lru_cache(maxsize = 16)
def weak_gradient(mesh, space):
    """
    Local weak-gradient maps of all triangles of a mesh (cached, meshes are immutable).

    Arguments:
        Mesh mesh:     mesh
        WgSpace space: weak finite element space

    Returns:
        WeakGradient: batched local maps
    """
    return WeakGradient(mesh.triangle_coordinates(), mesh.triangle_edge_signs, space)

def _default_signs():
    # A lone triangle is numbered 0, 1, 2: local edge 2 runs from vertex 2 to vertex 0, against the global direction
    return np.array([1, 1, -1])

def local_weak_gradient(coords, space, signs = None):
    """
    Discrete weak gradient map of a single triangle.

    Arguments:
        np.ndarray coords: triangle vertices (3, 2), counter-clockwise
        WgSpace space:     weak finite element space
        np.ndarray signs:  orientation of the local edges (default: vertices numbered 0, 1, 2)

    Returns:
        LocalWeakGradient: G_T and the factorisation data of its mass matrix
    """
    if signs is None:
        signs = _default_signs()
    return WeakGradient(np.asarray(coords)[None], np.asarray(signs)[None], space).local(0)

def weak_gradient_kernel(coords, space, signs = None, tol = kernel_tolerance):
    """
    Numerical kernel of the local weak-gradient map of a triangle.

    Arguments:
        np.ndarray coords: triangle vertices (3, 2)
        WgSpace space:     weak finite element space
        np.ndarray signs:  orientation of the local edges
        double tol:        relative singular value threshold

    Returns:
        int:        kernel dimension
        np.ndarray: kernel basis (n_local, dim)
    """
    return local_weak_gradient(coords, space, signs).kernel(tol)

#-------------#
# Projections #
#-------------#

def project_q0(u, coords, j, exactness = None):
    """
    L^2 projection onto P_j(T) in the orthonormal interior basis.

    Arguments:
        callable u:        scalar field u(x, y), vectorised
        np.ndarray coords: triangle vertices (3, 2) or (n, 3, 2)
        int j:             degree
        int exactness:     quadrature exactness (default 2j + 3 + 2)

    Returns:
        np.ndarray: coefficients (dim,) or (n, dim)
    """
    coords = np.asarray(coords, dtype = np.float64)
    single = coords.ndim == 2
    coords = coords.reshape(-1, 3, 2)
    basis  = ScalarBasis(j)
    rule   = triangle_rule(2*j + 5 if exactness is None else exactness)
    x      = from_reference(rule.points, coords)
    values = np.asarray(u(x[..., 0], x[..., 1]), dtype = np.float64)*np.ones(x.shape[:-1])
    # Gram matrix of the basis on T is 2|T| I, the Jacobian cancels
    coeffs = np.einsum('q,tq,qi->ti', rule.weights, values, basis.evaluate(rule.points))
    return coeffs[0] if single else coeffs

def project_qb(g, endpoints, ell, exactness = None):
    """
    L^2 projection onto P_l(e) in the Legendre basis of the edge (parametrised from the first to the second endpoint).

    Arguments:
        callable g:           scalar field g(x, y), vectorised
        np.ndarray endpoints: edge endpoints (2, 2) or (n, 2, 2), in global edge direction
        int ell:              degree
        int exactness:        quadrature exactness (default 2l + 5)

    Returns:
        np.ndarray: coefficients (ell+1,) or (n, ell+1)
    """
    endpoints = np.asarray(endpoints, dtype = np.float64)
    single    = endpoints.ndim == 2
    endpoints = endpoints.reshape(-1, 2, 2)
    rule      = edge_rule(2*ell + 5 if exactness is None else exactness)
    x         = endpoints[:, None, 0, :] + rule.points[None, :, None]*(endpoints[:, None, 1, :] - endpoints[:, None, 0, :])
    values    = np.asarray(g(x[..., 0], x[..., 1]), dtype = np.float64)*np.ones(x.shape[:-1])
    # Gram matrix of the Legendre basis on e is |e| I, the length cancels
    coeffs    = np.einsum('s,ts,sm->tm', rule.weights, values, EdgeBasis(ell).evaluate(rule.points))
    return coeffs[0] if single else coeffs

def project_rh(q, coords, space, exactness = None):
    """
    L^2 projection R_h onto the gradient space V(T, r) of the space.

    Arguments:
        callable q:        vector field q(x, y) returning (..., 2), vectorised
        np.ndarray coords: triangle vertices (3, 2) or (n, 3, 2)
        WgSpace space:     weak finite element space (provides V and the default quadrature)
        int exactness:     quadrature exactness (default: the space's)

    Returns:
        np.ndarray: V-coefficients (n_gradient,) or (n, n_gradient), in the same basis as the local weak-gradient maps
    """
    coords = np.asarray(coords, dtype = np.float64)
    single = coords.ndim == 2
    coords = coords.reshape(-1, 3, 2)
    rule   = space.triangle_rule(exactness)
    x      = from_reference(rule.points, coords)
    c, h   = local_scaling(coords)
    nt, nq = x.shape[:2]
    V      = space.vector.evaluate(to_local(x, c, h).reshape(-1, 2)).reshape(nt, nq, space.n_gradient, 2)
    area   = 0.5*np.abs(np.linalg.det(np.stack((coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]), axis = -1)))
    w      = 2.*area[:, None]*rule.weights[None, :]
    values = np.asarray(q(x[..., 0], x[..., 1]), dtype = np.float64)*np.ones(x.shape)
    M      = np.einsum('tq,tqic,tqkc->tik', w, V, V)
    rhs    = np.einsum('tq,tqic,tqc->ti', w, V, values)
    coeffs = np.linalg.solve(M, rhs[..., None])[..., 0]
    return coeffs[0] if single else coeffs

def project_exact(u, mesh, space, exactness = None):
    """
    Q_h u = {Q_0 u, Q_b u}: interior and edge L^2 projections of a single-valued field.

    Arguments:
        callable u:     scalar field u(x, y), vectorised
        Mesh mesh:      mesh
        WgSpace space:  weak finite element space
        int exactness:  quadrature exactness (default: the space's)

    Returns:
        WeakFunction: projection of u
    """
    exactness = space.exactness if exactness is None else exactness
    interior  = project_q0(u, mesh.triangle_coordinates(), space.j, exactness = exactness)
    edges     = project_qb(u, mesh.vertices[mesh.edges], space.ell, exactness = exactness)
    return WeakFunction(space, mesh, np.concatenate((interior.ravel(), edges.ravel())))
