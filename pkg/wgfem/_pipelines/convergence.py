import time
import ray

from pathlib import Path
from tqdm import tqdm
from ray.util import ActorPool

from wgfem.problem import ProblemSpec
from wgfem.postprocess import error_norms
from wgfem.diagnostic import ErrorReport
from wgfem.load import save_json, save_csv
from wgfem.exceptions import ConfigError
from wgfem._pipelines.solve import run_solve
from wgfem._pipelines._options import base_parser, parse, output_folder, resolve, level_meshes, build_level, n_threads, store_run

def level_errors(config, problem, level):
    """
    Solves one level of a convergence study and measures its errors.

    Returns:
        dict: error norms, with the solver residual
    """
    mesh     = build_level(config, level)
    u_h, _   = run_solve(config, problem, mesh)
    row      = error_norms(u_h, problem.u, problem.grad_u if problem.has_gradient else None)
    row['residual'] = u_h.residual
    return row

@ray.remote
class worker:
    def __init__(self, config):
        self.config  = config
        self.problem = ProblemSpec(name = config.problem, alpha = config.alpha, **config.expressions)

    def run_level(self, index, level):
        return index, level_errors(self.config, self.problem, level)

def run_convergence(config, problem, threads = 1, progress = True):
    """
    Convergence study over the levels of a configuration. With more than one thread the levels are distributed over
    ray actors; rows are put back in level order, so the report does not depend on the number of workers.

    Returns:
        ErrorReport: report
    """
    if not problem.has_exact:
        raise ConfigError("A convergence study requires the exact solution u (and preferably ux, uy)")
    levels = level_meshes(config)
    rows   = [None]*len(levels)
    if threads > 1:
        ray.init(num_cpus = min(threads, len(levels)))
        try:
            pool = ActorPool([worker.remote(config) for _ in range(min(threads, len(levels)))])
            for index, row in tqdm(pool.map_unordered(lambda a, v: a.run_level.remote(*v), list(enumerate(levels))), total = len(levels), desc = 'Levels', disable = not progress):
                rows[index] = row
        finally:
            ray.shutdown()
    else:
        for index, level in enumerate(tqdm(levels, desc = 'Levels', disable = not progress)):
            rows[index] = level_errors(config, problem, level)
    return ErrorReport(rows)

def main(args = None):

    parser = base_parser(prog = 'wgfem convergence', description = 'Convergence study against a manufactured solution')
    parser.add_option("--levels", type = "string", dest = "levels", help = "Comma-separated unit-square resolutions, e.g. '8,16,32,64'", default = None)
    parser.add_option("--refinements", type = "int", dest = "refinements", help = "Number of uniform refinements of the base mesh", default = None)
    options = parse(parser, args)
    started = time.time()

    config, problem = resolve(options)
    out    = output_folder(options)
    report = run_convergence(config, problem, threads = n_threads(config), progress = not options.quiet)

    save_csv(ErrorReport.columns, report.table(), Path(out, 'convergence.csv'))
    save_json({'command': 'convergence',
               'problem': config.problem,
               'fields':  config.expressions,
               'space':   {'j': config.j, 'family': config.family, 'q_boost': config.q_boost},
               'report':  report.to_dict(),
               }, Path(out, 'convergence.json'))
    store_run(options, config, out, 'convergence', started)
    if not options.quiet:
        for key in ('eH1', 'eL2proj', 'eL2'):
            rate = report.finest_rate(key)
            print("{0}: finest-step rate {1}".format(key, rate if rate == 'exact' else '{0:.3f}'.format(rate)))
    return 0

if __name__ == '__main__':
    main()
