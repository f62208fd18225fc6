import numpy as np
import warnings

from scipy.sparse import coo_matrix, csc_matrix, csr_matrix
from scipy.sparse.linalg import splu, spilu, cg, gmres, onenormest, LinearOperator

from wgfem.weak_gradient import WeakFunction, weak_gradient, project_qb
from wgfem.exceptions import SolverError

default_rel_residual = 1e-10
supported_solvers    = ['direct', 'iterative']

_small_h_hint = "With convection or reaction terms the discrete problem is uniquely solvable only for sufficiently small h: try refining the mesh"

class DofMap:
    """
    Global numbering of the weak degrees of freedom: interior blocks by triangle first, then edge blocks by global edge.
    Local degrees of freedom of triangle t are [interior | edge of local edge 0 | 1 | 2].

    Arguments:
        Mesh mesh:     mesh
        WgSpace space: weak finite element space

    Returns:
        DofMap: instance of the DofMap class
    """
    def __init__(self, mesh, space):
        n0, nb             = space.n_interior, space.n_edge
        self.n_triangles   = mesh.n_triangles
        self.n_edges       = mesh.n_edges
        self.n_interior    = mesh.n_triangles*n0
        self.n_edge_dofs   = mesh.n_edges*nb
        self.n_dofs        = self.n_interior + self.n_edge_dofs
        interior           = np.arange(self.n_interior).reshape(mesh.n_triangles, n0)
        edges              = self.n_interior + mesh.triangle_edges[:, :, None]*nb + np.arange(nb)[None, None, :]
        self.local_to_global = np.concatenate((interior, edges.reshape(mesh.n_triangles, -1)), axis = 1)
        self.is_boundary   = np.zeros(self.n_dofs, dtype = bool)
        self.is_boundary[self.n_interior:] = np.repeat(mesh.boundary, nb)
        self.boundary_dofs = np.flatnonzero(self.is_boundary)
        self.free_dofs     = np.flatnonzero(~self.is_boundary)
        for value in (self.local_to_global, self.is_boundary, self.boundary_dofs, self.free_dofs):
            value.setflags(write = False)

    def interior_dofs(self, t):
        n0 = self.n_interior//self.n_triangles
        return np.arange(t*n0, (t+1)*n0)

    def edge_dofs(self, e):
        nb = self.n_edge_dofs//self.n_edges
        return self.n_interior + np.arange(e*nb, (e+1)*nb)

    @property
    def n_free(self):
        return len(self.free_dofs)

    @property
    def n_boundary(self):
        return len(self.boundary_dofs)

    def summary(self):
        return {'dofs':          self.n_dofs,
                'interior_dofs': self.n_interior,
                'edge_dofs':     self.n_edge_dofs,
                'boundary_dofs': self.n_boundary,
                'free_dofs':     self.n_free,
                }

def build_dof_map(mesh, space):
    return DofMap(mesh, space)

class AssembledSystem:
    """
    Linear system of the weak Galerkin scheme after Dirichlet elimination: A x = F on the free degrees of freedom.

    Arguments:
        csr_matrix matrix:      A (n_free, n_free)
        np.ndarray rhs:         F (n_free,)
        np.ndarray lift:        values of the boundary degrees of freedom (Q_b g)
        bool symmetric:         True iff b vanishes
        DofMap dof_map:         numbering
        csr_matrix full_matrix: matrix over all degrees of freedom
        np.ndarray load:        (f, v_0) over all degrees of freedom
    """
    def __init__(self, mesh, space, problem, dof_map, matrix, rhs, lift, symmetric, full_matrix, load):
        self.mesh        = mesh
        self.space       = space
        self.problem     = problem
        self.dof_map     = dof_map
        self.matrix      = matrix
        self.rhs         = rhs
        self.lift        = lift
        self.symmetric   = bool(symmetric)
        self.full_matrix = full_matrix
        self.load        = load

    @property
    def n_free(self):
        return self.matrix.shape[0]

    def lifted(self, x):
        """
        Global coefficient vector from free values x and the Dirichlet lift.
        """
        coefficients = np.zeros(self.dof_map.n_dofs)
        coefficients[self.dof_map.free_dofs]     = x
        coefficients[self.dof_map.boundary_dofs] = self.lift
        return coefficients

def apply_dirichlet(g, mesh, space, exactness = None):
    """
    Boundary values u_b = Q_b g on the boundary edges.

    Arguments:
        callable g:     Dirichlet data g(x, y), vectorised
        Mesh mesh:      mesh
        WgSpace space:  weak finite element space
        int exactness:  quadrature exactness (default: the space's)

    Returns:
        np.ndarray: values of the boundary degrees of freedom, in DofMap.boundary_dofs order
    """
    edges = mesh.edges[mesh.boundary]
    if len(edges) == 0:
        return np.zeros(0)
    coeffs = project_qb(g, mesh.vertices[edges], space.ell, exactness = space.exactness if exactness is None else exactness)
    return coeffs.ravel()

def local_systems(problem, mesh, space):
    """
    Element matrices of a(w, v) = (a grad_d w, grad_d v) - (b w_0, grad_d v) + (c w_0, v_0) and element loads (f, v_0).
    Rows are test functions, columns trial functions, both in local layout.

    Arguments:
        ProblemSpec problem: problem data
        Mesh mesh:           mesh
        WgSpace space:       weak finite element space

    Returns:
        np.ndarray: element matrices (n_triangles, n_local, n_local)
        np.ndarray: element loads (n_triangles, n_local)
    """
    wg    = weak_gradient(mesh, space)
    W     = wg.weights
    x, y  = wg.points[..., 0], wg.points[..., 1]
    problem.check_ellipticity(x, y)
    grads = wg.basis_gradients()
    phi0  = wg.phi0
    n0    = space.n_interior
    K     = np.einsum('tq,tqcd,tqld,tqmc->tml', W, problem.a(x, y), grads, grads)
    if not problem.symmetric:
        K[:, :, :n0] -= np.einsum('tq,tqc,tqmc,qk->tmk', W, problem.b(x, y), grads, phi0)
    K[:, :n0, :n0] += np.einsum('tq,tq,qm,qk->tmk', W, problem.c(x, y), phi0, phi0)
    load          = np.zeros((len(W), space.n_local))
    load[:, :n0]  = np.einsum('tq,tq,qm->tm', W, problem.f(x, y), phi0)
    return K, load

def assemble(problem, mesh, space, perturb = None):
    """
    Assembles the weak Galerkin system and eliminates the Dirichlet degrees of freedom.
    The global scatter follows the element order, so the result does not depend on how element work is split.

    Arguments:
        ProblemSpec problem: problem data
        Mesh mesh:           mesh
        WgSpace space:       weak finite element space
        tuple perturb:       (triangle, factor) scales one element matrix (negative control for the conservation check)

    Returns:
        AssembledSystem: system on the free degrees of freedom
    """
    dof_map    = build_dof_map(mesh, space)
    K, load_el = local_systems(problem, mesh, space)
    if perturb is not None:
        t, factor = perturb
        K[int(t)] *= factor
    l2g   = dof_map.local_to_global
    nloc  = space.n_local
    rows  = np.repeat(l2g, nloc, axis = 1).ravel()
    cols  = np.tile(l2g, (1, nloc)).ravel()
    full  = coo_matrix((K.ravel(), (rows, cols)), shape = (dof_map.n_dofs, dof_map.n_dofs)).tocsr()
    load  = np.bincount(l2g.ravel(), weights = load_el.ravel(), minlength = dof_map.n_dofs)
    lift  = apply_dirichlet(problem.g, mesh, space)
    free  = dof_map.free_dofs
    bnd   = dof_map.boundary_dofs
    A     = full[free][:, free].tocsr()
    F     = load[free] - full[free][:, bnd] @ lift
    return AssembledSystem(mesh, space, problem, dof_map, A, F, lift, problem.symmetric, full, load)

def condition_estimate(matrix, lu = None):
    """
    1-norm condition number estimate ||A||_1 ||A^-1||_1 (inf if A cannot be factorised).
    """
    matrix = csc_matrix(matrix)
    if lu is None:
        try:
            lu = splu(matrix)
        except RuntimeError:
            return np.inf
    n     = matrix.shape[0]
    inv   = LinearOperator((n, n), matvec = lambda v: lu.solve(np.asarray(v, dtype = np.float64).ravel()),
                                   rmatvec = lambda v: lu.solve(np.asarray(v, dtype = np.float64).ravel(), trans = 'T'),
                                   dtype = np.float64)
    return float(onenormest(matrix)*onenormest(inv))

def _direct(matrix, rhs, symmetric):
    if symmetric:
        lu = splu(csc_matrix(matrix), permc_spec = 'MMD_AT_PLUS_A', diag_pivot_thresh = 0., options = {'SymmetricMode': True})
    else:
        lu = splu(csc_matrix(matrix), permc_spec = 'COLAMD')
    return lu.solve(rhs), lu

def _iterative(matrix, rhs, symmetric, rel_residual):
    if symmetric:
        x, info = cg(matrix, rhs, rtol = 0.1*rel_residual, maxiter = 10*matrix.shape[0])
    else:
        ilu = spilu(csc_matrix(matrix))
        M   = LinearOperator(matrix.shape, matvec = ilu.solve, dtype = np.float64)
        x, info = gmres(matrix, rhs, rtol = 0.1*rel_residual, M = M, restart = 100, maxiter = 10*matrix.shape[0])
    return x, info

def solve_linear_system(matrix, rhs, symmetric = False, method = 'direct', rel_residual = default_rel_residual):
    """
    Solves A x = F and checks the relative residual ||A x - F||/||F||.

    Arguments:
        sparse or np.ndarray matrix: A
        np.ndarray rhs:              F
        bool symmetric:              A symmetric (selects the factorisation or CG)
        str method:                  'direct' (sparse LU) or 'iterative' (CG/GMRES, falls back to direct if not converged)
        double rel_residual:         residual tolerance

    Returns:
        np.ndarray: solution
        double: relative residual
    """
    if method not in supported_solvers:
        raise SolverError("Unknown solver {0}. Please use 'direct' or 'iterative'".format(method))
    matrix = csr_matrix(matrix, dtype = np.float64)
    rhs    = np.asarray(rhs, dtype = np.float64)
    if matrix.shape[0] == 0:
        return np.zeros(0), 0.
    lu = None
    try:
        if method == 'iterative':
            x, info = _iterative(matrix, rhs, symmetric, rel_residual)
            if info != 0:
                warnings.warn("Iterative solver did not converge (info = {0}), falling back to the direct solver".format(info))
                x, lu = _direct(matrix, rhs, symmetric)
        else:
            x, lu = _direct(matrix, rhs, symmetric)
    except RuntimeError as e:
        raise SolverError("The global matrix is singular ({0}). {1}".format(e, _small_h_hint), condition = np.inf)
    norm_F   = np.linalg.norm(rhs)
    residual = np.linalg.norm(matrix @ x - rhs)
    if norm_F > 0.:
        residual /= norm_F
    if not np.all(np.isfinite(x)) or not residual <= rel_residual:
        cond = condition_estimate(matrix, lu)
        raise SolverError("Relative residual {0:.3e} above tolerance {1:.1e} (condition number estimate {2:.3e}). {3}".format(residual, rel_residual, cond, _small_h_hint), condition = cond, residual = residual)
    return x, float(residual)

def solve(system, method = 'direct', rel_residual = default_rel_residual):
    """
    Solves an assembled system and puts the Dirichlet lift back.

    Arguments:
        AssembledSystem system: assembled system
        str method:             'direct' or 'iterative'
        double rel_residual:    residual tolerance

    Returns:
        WeakFunction: u_h, with the relative residual stored in u_h.residual
    """
    x, residual = solve_linear_system(system.matrix, system.rhs, symmetric = system.symmetric, method = method, rel_residual = rel_residual)
    u_h = WeakFunction(system.space, system.mesh, system.lifted(x))
    u_h.residual = residual
    return u_h
