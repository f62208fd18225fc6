import time

from pathlib import Path

from wgfem.diagnostic import run_verification
from wgfem.load import save_json
from wgfem._pipelines._options import base_parser, parse, output_folder, store_run

def main(args = None):

    parser = base_parser(prog = 'wgfem verify', description = 'Invariant suites: kernel, commutation, conservation, flux continuity, quadrature, parser')
    parser.add_option("--inject-bug", dest = "inject_bug", action = 'store_true', help = "Scale one element matrix during assembly (negative control: the conservation check must fail)", default = False)
    options = parse(parser, args)
    started = time.time()

    out     = output_folder(options)
    results = run_verification(inject_bug = options.inject_bug, progress = not options.quiet)
    failed  = [r['suite'] for r in results if r['hard'] and not r['passed']]
    save_json({'command':    'verify',
               'inject_bug': options.inject_bug,
               'passed':     len(failed) == 0,
               'failed':     failed,
               'suites':     results,
               }, Path(out, 'verify.json'))
    store_run(options, None, out, 'verify', started)
    if not options.quiet:
        for r in results:
            status = 'pass' if r['passed'] else ('FAIL' if r['hard'] else 'report')
            print("{0:<20} {1}".format(r['suite'], status))
    return 1 if len(failed) > 0 else 0

if __name__ == '__main__':
    main()
