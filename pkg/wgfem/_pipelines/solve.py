import time

from pathlib import Path

from wgfem.weak_gradient import WgSpace
from wgfem.assembly import assemble, solve
from wgfem.postprocess import error_norms
from wgfem.load import save_solution, save_json
from wgfem._pipelines._options import base_parser, parse, output_folder, resolve, base_mesh, store_run

def run_solve(config, problem, mesh):
    """
    Assembles and solves one problem.

    Returns:
        WeakFunction: solution
        AssembledSystem: system
    """
    space  = WgSpace(config.j, config.family, q_boost = config.q_boost)
    system = assemble(problem, mesh, space)
    u_h    = solve(system, method = config.solver, rel_residual = config.rel_residual)
    return u_h, system

def main(args = None):

    parser  = base_parser(prog = 'wgfem solve', description = 'Weak Galerkin solution of an elliptic Dirichlet problem')
    options = parse(parser, args)
    started = time.time()

    config, problem = resolve(options)
    out    = output_folder(options)
    mesh   = base_mesh(config)
    u_h, system = run_solve(config, problem, mesh)

    summary = {'command':   'solve',
               'problem':   config.problem,
               'fields':    config.expressions,
               'mesh':      mesh.summary(),
               'space':     u_h.space.summary(),
               'dof_map':   system.dof_map.summary(),
               'symmetric': system.symmetric,
               'solver':    config.solver,
               'residual':  u_h.residual,
               }
    if problem.has_exact:
        summary['errors'] = error_norms(u_h, problem.u, problem.grad_u if problem.has_gradient else None)
    save_solution(u_h, folder = out, name = 'solution', ext = config.ext)
    save_json(summary, Path(out, 'summary.json'))
    store_run(options, config, out, 'solve', started)
    if not options.quiet:
        print("Solved {0} dofs ({1} free), relative residual {2:.3e}".format(system.dof_map.n_dofs, system.n_free, u_h.residual))
        if 'errors' in summary:
            print("eH1 = {eH1:.6e}, eL2proj = {eL2proj:.6e}, eL2 = {eL2:.6e}".format(**summary['errors']))
    return 0

if __name__ == '__main__':
    main()
