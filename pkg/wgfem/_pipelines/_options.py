import os
import time
import platform
import optparse

from pathlib import Path

from wgfem.mesh import structured_unit_square, uniform_refine
from wgfem.load import read_mesh, save_json
from wgfem.problem import load_problem, load_problem_file, field_keys
from wgfem.utils import save_options, load_options
from wgfem.exceptions import ConfigError

# Command line options forwarded to the configuration (command line > environment > file > defaults)
forwarded = ['problem', 'mesh', 'unit_square', 'j', 'family', 'q_boost', 'solver', 'levels', 'refinements', 'threads', 'ext']

def base_parser(prog, description):
    """
    Options shared by all the wgfem subcommands. Defaults are None so that configuration values are not overridden.
    """
    parser = optparse.OptionParser(prog = prog, description = description)
    # Input/output
    parser.add_option("--config", type = "string", dest = "config", help = "Config file. Warning: command line options override config options", default = None)
    parser.add_option("--options", type = "string", dest = "options", help = "options.ini written by a previous run, to reproduce it", default = None)
    parser.add_option("-o", "--out", type = "string", dest = "out", help = "Output folder. Default: current directory", default = '.')
    parser.add_option("--ext", dest = "ext", type = "choice", choices = ['json', 'pkl', 'h5'], help = "Format of the solution file", default = None)
    # Problem and discretisation
    parser.add_option("--problem", type = "string", dest = "problem", help = "Builtin problem: sinsin, linear, quadratic, variable-coeff, convection", default = None)
    parser.add_option("--mesh", type = "string", dest = "mesh", help = "Mesh file stem (<stem>.node and <stem>.ele)", default = None)
    parser.add_option("--unit-square", type = "int", dest = "unit_square", help = "Structured unit-square mesh with n x n cells", default = None)
    parser.add_option("--j", type = "int", dest = "j", help = "Interior polynomial degree", default = None)
    parser.add_option("--family", type = "choice", dest = "family", choices = ['full', 'rt'], help = "Element family: 'full' ([P_j+1]^2 gradients) or 'rt' (Raviart-Thomas)", default = None)
    parser.add_option("--q-boost", type = "int", dest = "q_boost", help = "Extra quadrature degree", default = None)
    # Settings
    parser.add_option("--solver", type = "choice", dest = "solver", choices = ['direct', 'iterative'], help = "Linear solver", default = None)
    parser.add_option("--threads", type = "int", dest = "threads", help = "Maximum number of parallel workers. Default: machine parallelism", default = None)
    parser.add_option("--quiet", dest = "quiet", action = 'store_true', help = "Disable progress bars and status lines", default = False)
    return parser

def parse(parser, args):
    (options, _) = parser.parse_args(args)
    if options.options is not None:
        options = load_options(options, parser, args)
    return options

def output_folder(options):
    out = Path(options.out).resolve()
    if not out.exists():
        out.mkdir(parents = True)
    return out

def resolve(options, environ = None):
    """
    Reads the configuration (if any) and applies the command line overrides.

    Returns:
        ProblemConfig: run settings
        ProblemSpec:   problem
    """
    # Field expressions, alpha and rel_residual only appear as attributes when re-running from a saved options.ini
    keys      = forwarded + list(field_keys) + ['alpha', 'rel_residual']
    overrides = {key: getattr(options, key, None) for key in keys}
    if options.config is not None:
        return load_problem_file(options.config, overrides = overrides, environ = environ)
    return load_problem('', overrides = overrides, environ = environ)

def base_mesh(config):
    if config.mesh is not None:
        return read_mesh(config.mesh)
    return structured_unit_square(config.unit_square)

def level_meshes(config):
    """
    Mesh descriptions of a convergence study: ('unit_square', n) per entry of levels, or ('refine', k) for the k-th
    uniform refinement of the base mesh.
    """
    if config.levels is not None:
        if config.mesh is not None:
            raise ConfigError("'levels' lists unit-square resolutions and cannot be combined with a mesh file: use 'refinements'")
        levels = [('unit_square', n) for n in config.levels]
    else:
        refinements = 3 if config.refinements is None else config.refinements
        levels = [('refine', k) for k in range(refinements+1)]
    if len(levels) < 2:
        raise ConfigError("A convergence study needs at least two levels, got {0}".format(len(levels)))
    return levels

def build_level(config, level):
    kind, value = level
    if kind == 'unit_square':
        return structured_unit_square(value)
    mesh = base_mesh(config)
    for _ in range(value):
        mesh = uniform_refine(mesh)
    return mesh

def n_threads(config):
    if config.threads is not None:
        return config.threads
    return os.cpu_count() or 1

def store_run(options, config, out, command, started):
    """
    Saves the resolved options (reproducibility) and the run metadata. Timestamps only go to metadata.json.
    """
    opts = dict(vars(options))
    if config is not None:
        opts.update({key: getattr(config, key) for key in forwarded})
        opts.update(config.expressions)
        opts['rel_residual'] = config.rel_residual
        opts['alpha']        = config.alpha
    opts['options']      = None
    save_options(opts, out)
    finished = time.time()
    save_json({'command':  command,
               'started':  time.strftime('%Y-%m-%dT%H:%M:%S', time.localtime(started)),
               'finished': time.strftime('%Y-%m-%dT%H:%M:%S', time.localtime(finished)),
               'elapsed':  finished - started,
               'host':     platform.node(),
               'python':   platform.python_version(),
               }, Path(out, 'metadata.json'))
