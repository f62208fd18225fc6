import numpy as np

from wgfem.weak_gradient import weak_gradient, project_exact
from wgfem.assembly import build_dof_map, local_systems
from wgfem.exceptions import ConfigError

# Conservation and flux continuity hold to round-off: residuals are compared with tolerance*scale
flux_tolerance = 1e-9

#--------------#
# Error norms  #
#--------------#

def error_norms(u_h, u, grad_u = None):
    """
    Errors of a discrete solution against an exact solution u:
        * eH1     = ||grad_d(u_h - Q_h u)||       (discrete H^1 seminorm, through the local weak-gradient maps);
        * eL2proj = ||u_0 - Q_0 u||               (superconvergent L^2 error);
        * eL2     = ||u_0 - u||                   (plain L^2 error, by quadrature);
        * eGrad   = ||grad_d u_h - grad u||       (only if grad_u is given).

    Arguments:
        WeakFunction u_h: discrete solution
        callable u:       exact solution u(x, y), vectorised
        callable grad_u:  exact gradient, returning (..., 2)

    Returns:
        dict: h, dofs and the error norms
    """
    if u is None:
        raise ConfigError("Error norms require an exact solution u")
    mesh, space = u_h.mesh, u_h.space
    wg   = weak_gradient(mesh, space)
    diff = u_h - project_exact(u, mesh, space)
    eH1  = np.sqrt(np.sum(wg.norms(wg.apply(diff.local_dofs()))**2))
    # Interior basis Gram matrix on T is 2|T| I
    eL2proj = np.sqrt(np.sum(2.*wg.areas*np.sum(diff.interior**2, axis = 1)))
    x, y = wg.points[..., 0], wg.points[..., 1]
    u0   = wg.interior_values(u_h.interior)
    eL2  = np.sqrt(np.sum(wg.weights*(u0 - u(x, y))**2))
    row  = {'h':       mesh.h,
            'dofs':    u_h.n_dofs,
            'eH1':     float(eH1),
            'eL2proj': float(eL2proj),
            'eL2':     float(eL2),
            }
    if grad_u is not None:
        grad_h = wg.values(wg.apply(u_h.local_dofs()))
        row['eGrad'] = float(np.sqrt(np.sum(wg.weights*np.sum((grad_h - grad_u(x, y))**2, axis = -1))))
    return row

#--------------#
#    Fluxes    #
#--------------#

def flux_coefficients(u_h, problem):
    """
    Numerical flux q_h = R_h(-a grad_d u_h + b u_0) on every triangle, with the quadrature used by the assembly.

    Arguments:
        WeakFunction u_h:    discrete solution
        ProblemSpec problem: problem data

    Returns:
        np.ndarray: V-coefficients (n_triangles, n_gradient)
    """
    wg   = weak_gradient(u_h.mesh, u_h.space)
    x, y = wg.points[..., 0], wg.points[..., 1]
    grad = wg.values(wg.apply(u_h.local_dofs()))
    q    = -np.einsum('tqcd,tqd->tqc', problem.a(x, y), grad)
    if not problem.symmetric:
        q += problem.b(x, y)*wg.interior_values(u_h.interior)[..., None]
    return wg.project(q)

def normal_fluxes(u_h, problem, coefficients = None):
    """
    Outward normal traces q_h.n on the three local edges of every triangle, as Legendre coefficients in the global edge
    direction (the traces lie in P_l, the edge space).

    Arguments:
        WeakFunction u_h:        discrete solution
        ProblemSpec problem:     problem data
        np.ndarray coefficients: flux V-coefficients (optional, see flux_coefficients)

    Returns:
        np.ndarray: coefficients (n_triangles, 3, l+1)
    """
    wg = weak_gradient(u_h.mesh, u_h.space)
    if coefficients is None:
        coefficients = flux_coefficients(u_h, problem)
    qn = np.einsum('tesv,tv->tes', wg.Vn, coefficients)
    return np.einsum('s,tes,sm->tem', wg.edge_rule.weights, qn, wg.psi)

def numerical_flux(u_h, problem, t, k):
    """
    Normal flux q_h.n on local edge k of triangle t, computed on t (outward normal of t, global edge direction).

    Returns:
        np.ndarray: Legendre coefficients (l+1,)
    """
    return normal_fluxes(u_h, problem)[t, k]

def _balance(u_h, problem, fluxes):
    wg   = weak_gradient(u_h.mesh, u_h.space)
    x, y = wg.points[..., 0], wg.points[..., 1]
    u0   = wg.interior_values(u_h.interior)
    # psi_0 = 1, so the integral of q_h.n over a local edge is its length times the first coefficient
    outflow = np.sum(wg.lengths*fluxes[:, :, 0], axis = 1)
    return outflow + np.sum(wg.weights*problem.c(x, y)*u0, axis = 1) - np.sum(wg.weights*problem.f(x, y), axis = 1)

def conservation_scales(u_h, problem):
    """
    |T| ||f||_inf + 1 per triangle (||f||_inf over the quadrature points of T).
    """
    wg   = weak_gradient(u_h.mesh, u_h.space)
    x, y = wg.points[..., 0], wg.points[..., 1]
    return wg.areas*np.max(np.abs(problem.f(x, y)), axis = 1) + 1.

def conservation_residuals(u_h, problem, fluxes = None):
    """
    |int_dT q_h.n ds + int_T c u_0 dT - int_T f dT| for every triangle.
    """
    if fluxes is None:
        fluxes = normal_fluxes(u_h, problem)
    return np.abs(_balance(u_h, problem, fluxes))

def conservation_residual(u_h, problem, t):
    """
    Mass balance residual of triangle t.
    """
    return float(conservation_residuals(u_h, problem)[t])

def patch_conservation_residual(u_h, problem, triangles, fluxes = None):
    """
    Mass balance of a control volume made of several triangles: fluxes through interior edges of the patch cancel, so
    the residual is the sum of the elementwise balances.

    Arguments:
        WeakFunction u_h:    discrete solution
        ProblemSpec problem: problem data
        iterable triangles:  triangle indices

    Returns:
        double: |flux through the patch boundary + int c u_0 - int f|
    """
    if fluxes is None:
        fluxes = normal_fluxes(u_h, problem)
    triangles = np.unique(np.atleast_1d(triangles))
    return float(np.abs(np.sum(_balance(u_h, problem, fluxes)[triangles])))

def flux_jumps(u_h, problem, fluxes = None):
    """
    L^2 norms of the normal-flux jump across every interior edge.

    Returns:
        np.ndarray: interior edge indices
        np.ndarray: jumps
        np.ndarray: scales (1 + the larger of the two one-sided flux norms)
    """
    if fluxes is None:
        fluxes = normal_fluxes(u_h, problem)
    mesh  = u_h.mesh
    edges = mesh.interior_edges
    t1, t2 = mesh.edge_triangles[edges, 0], mesh.edge_triangles[edges, 1]
    k1    = np.argmax(mesh.triangle_edges[t1] == edges[:, None], axis = 1)
    k2    = np.argmax(mesh.triangle_edges[t2] == edges[:, None], axis = 1)
    c1, c2 = fluxes[t1, k1], fluxes[t2, k2]
    # Outward normals are opposite, coefficients share the global direction: the sum is the jump
    L     = np.sqrt(mesh.edge_lengths[edges])
    jumps = L*np.linalg.norm(c1 + c2, axis = 1)
    scale = 1. + L*np.maximum(np.linalg.norm(c1, axis = 1), np.linalg.norm(c2, axis = 1))
    return edges, jumps, scale

class FluxReport:
    """
    Elementwise mass balance and interior-edge flux continuity of a discrete solution.

    Arguments:
        np.ndarray residuals:    conservation residual per triangle
        np.ndarray scales:       residual scale per triangle
        np.ndarray edges:        interior edge indices
        np.ndarray jumps:        flux jump per interior edge
        np.ndarray jump_scales:  jump scale per interior edge
        double tolerance:        relative tolerance

    Returns:
        FluxReport: instance of the FluxReport class
    """
    def __init__(self, residuals, scales, edges, jumps, jump_scales, tolerance = flux_tolerance):
        self.residuals   = residuals
        self.scales      = scales
        self.edges       = edges
        self.jumps       = jumps
        self.jump_scales = jump_scales
        self.tolerance   = tolerance

    @property
    def max_residual(self):
        return float(np.max(self.residuals))

    @property
    def max_jump(self):
        return float(np.max(self.jumps)) if len(self.jumps) > 0 else 0.

    @property
    def conservation_passed(self):
        return bool(np.all(self.residuals <= self.tolerance*self.scales))

    @property
    def continuity_passed(self):
        return bool(np.all(self.jumps <= self.tolerance*self.jump_scales))

    @property
    def passed(self):
        return self.conservation_passed and self.continuity_passed

    def worst_triangle(self):
        return int(np.argmax(self.residuals/self.scales))

    def summary(self):
        return {'max_residual':          self.max_residual,
                'mean_residual':         float(np.mean(self.residuals)),
                'max_relative_residual': float(np.max(self.residuals/self.scales)),
                'worst_triangle':        self.worst_triangle(),
                'max_jump':              self.max_jump,
                'mean_jump':             float(np.mean(self.jumps)) if len(self.jumps) > 0 else 0.,
                'max_relative_jump':     float(np.max(self.jumps/self.jump_scales)) if len(self.jumps) > 0 else 0.,
                'tolerance':             self.tolerance,
                'conservation_passed':   self.conservation_passed,
                'continuity_passed':     self.continuity_passed,
                }

def flux_report(u_h, problem, tolerance = flux_tolerance):
    """
    Builds the FluxReport of a discrete solution.
    """
    fluxes = normal_fluxes(u_h, problem)
    residuals = conservation_residuals(u_h, problem, fluxes)
    edges, jumps, jump_scales = flux_jumps(u_h, problem, fluxes)
    return FluxReport(residuals, conservation_scales(u_h, problem), edges, jumps, jump_scales, tolerance = tolerance)

#------------------------#
# Direct-quadrature form #
#------------------------#

def bilinear_form(problem, w, v):
    """
    a(w, v) = (a grad_d w, grad_d v) - (b w_0, grad_d v) + (c w_0, v_0), elementwise quadrature without assembled matrices.

    Arguments:
        ProblemSpec problem: problem data
        WeakFunction w:      trial function
        WeakFunction v:      test function

    Returns:
        double: a(w, v)
    """
    wg     = weak_gradient(w.mesh, w.space)
    x, y   = wg.points[..., 0], wg.points[..., 1]
    grad_w = wg.values(wg.apply(w.local_dofs()))
    grad_v = wg.values(wg.apply(v.local_dofs()))
    w0     = wg.interior_values(w.interior)
    v0     = wg.interior_values(v.interior)
    flux   = np.einsum('tqcd,tqd->tqc', problem.a(x, y), grad_w) - problem.b(x, y)*w0[..., None]
    value  = np.sum(wg.weights*np.sum(flux*grad_v, axis = -1)) + np.sum(wg.weights*problem.c(x, y)*w0*v0)
    return float(value)

def galerkin_orthogonality(u_h, problem):
    """
    max |a(u_h, v) - (f, v_0)| over the basis functions v of the space with vanishing boundary values, by elementwise
    quadrature (the assembled matrix is not used).

    Arguments:
        WeakFunction u_h:    discrete solution
        ProblemSpec problem: problem data

    Returns:
        double: largest residual
        double: scale ||F|| + max|A| ||x||
    """
    mesh, space = u_h.mesh, u_h.space
    wg    = weak_gradient(mesh, space)
    x, y  = wg.points[..., 0], wg.points[..., 1]
    grads = wg.basis_gradients()
    grad  = wg.values(wg.apply(u_h.local_dofs()))
    u0    = wg.interior_values(u_h.interior)
    flux  = np.einsum('tqcd,tqd->tqc', problem.a(x, y), grad) - problem.b(x, y)*u0[..., None]
    local = np.einsum('tq,tqc,tqlc->tl', wg.weights, flux, grads)
    local[:, :space.n_interior] += np.einsum('tq,tq,qm->tm', wg.weights, problem.c(x, y)*u0 - problem.f(x, y), wg.phi0)
    dof_map  = build_dof_map(mesh, space)
    residual = np.bincount(dof_map.local_to_global.ravel(), weights = local.ravel(), minlength = dof_map.n_dofs)
    K, load  = local_systems(problem, mesh, space)
    loads    = np.bincount(dof_map.local_to_global.ravel(), weights = load.ravel(), minlength = dof_map.n_dofs)
    free     = dof_map.free_dofs
    scale    = np.linalg.norm(loads[free]) + np.max(np.abs(K))*np.linalg.norm(u_h.coefficients[free])
    return float(np.max(np.abs(residual[free]))) if len(free) > 0 else 0., float(scale)
