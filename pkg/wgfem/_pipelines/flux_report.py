import time

from pathlib import Path

from wgfem.postprocess import flux_report, galerkin_orthogonality
from wgfem.load import save_json, save_csv
from wgfem._pipelines.solve import run_solve
from wgfem._pipelines._options import base_parser, parse, output_folder, resolve, base_mesh, store_run

def main(args = None):

    parser  = base_parser(prog = 'wgfem flux-report', description = 'Elementwise mass conservation and flux continuity of the weak Galerkin solution')
    options = parse(parser, args)
    started = time.time()

    config, problem = resolve(options)
    out    = output_folder(options)
    mesh   = base_mesh(config)
    u_h, _ = run_solve(config, problem, mesh)
    report = flux_report(u_h, problem)
    orth, scale = galerkin_orthogonality(u_h, problem)

    save_csv(['triangle', 'residual', 'scale'],
             [[t, repr(float(r)), repr(float(s))] for t, (r, s) in enumerate(zip(report.residuals, report.scales))],
             Path(out, 'conservation.csv'))
    save_csv(['edge', 'jump', 'scale'],
             [[int(e), repr(float(j)), repr(float(s))] for e, j, s in zip(report.edges, report.jumps, report.jump_scales)],
             Path(out, 'flux_jumps.csv'))
    save_json({'command':                'flux-report',
               'problem':                config.problem,
               'fields':                 config.expressions,
               'mesh':                   mesh.summary(),
               'space':                  u_h.space.summary(),
               'residual':               u_h.residual,
               'galerkin_orthogonality': {'max': orth, 'scale': scale},
               'summary':                report.summary(),
               'residuals':              report.residuals,
               'jumps':                  {'edges': report.edges, 'values': report.jumps},
               }, Path(out, 'flux_report.json'))
    store_run(options, config, out, 'flux-report', started)
    if not options.quiet:
        s = report.summary()
        print("Max conservation residual {0:.3e} (relative {1:.3e}), max flux jump {2:.3e}".format(s['max_residual'], s['max_relative_residual'], s['max_jump']))
    return 0 if report.passed else 1

if __name__ == '__main__':
    main()
