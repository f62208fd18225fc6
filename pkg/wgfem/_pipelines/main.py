import sys
import json
import warnings

from pathlib import Path

from wgfem.exceptions import except_hook, exit_code, WGException
from wgfem.load import save_json, to_builtin
from wgfem._pipelines import solve, convergence, verify, flux_report

commands = {'solve':       solve.main,
            'convergence': convergence.main,
            'verify':      verify.main,
            'flux-report': flux_report.main,
            }

usage = """usage: wgfem <command> [options]

Commands:
    solve        solve one problem, write solution and summary
    convergence  convergence study against a manufactured solution
    verify       run the invariant suites
    flux-report  elementwise mass conservation and flux continuity

Run 'wgfem <command> --help' for the options of a command."""

# Attributes of the package exceptions copied into the error document
_error_fields = ['line', 'source', 'offset', 'expected', 'point', 'triangle', 'condition', 'residual', 'subexpression']

def error_document(exc, command):
    """
    Machine-readable description of a failure.

    Arguments:
        Exception exc: exception
        str command:   subcommand

    Returns:
        dict: {'error': {'type', 'message', 'exit_code', 'command', ...}}
    """
    err = {'type':      type(exc).__name__,
           'message':   str(exc),
           'exit_code': exit_code(exc),
           'command':   command,
           }
    for key in _error_fields:
        val = getattr(exc, key, None)
        if val is not None:
            err[key] = val
    return {'error': to_builtin(err)}

def _out_folder(args):
    for i, arg in enumerate(args):
        if arg in ('-o', '--out') and i+1 < len(args):
            return Path(args[i+1])
        if arg.startswith('--out='):
            return Path(arg.split('=', 1)[1])
    return None

def main(argv = None):
    """
    Dispatches 'wgfem <command>' and maps failures to exit codes:
    0 success, 1 numerical-check failure, 2 usage/config error, 3 solver failure.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) == 0 or argv[0] in ('-h', '--help'):
        print(usage)
        return 0 if len(argv) > 0 else 2
    command, args = argv[0], argv[1:]
    if command not in commands:
        exc = WGException("Unknown command '{0}'. Please choose from: {1}".format(command, ', '.join(commands.keys())))
        print(json.dumps(error_document(exc, command)))
        return exc.exit_code
    sys.excepthook = except_hook
    try:
        with warnings.catch_warnings():
            if '--quiet' in args:
                warnings.simplefilter('ignore')
            return commands[command](args)
    except SystemExit as e:
        # optparse usage errors
        return e.code if isinstance(e.code, int) else 2
    except Exception as exc:
        doc = error_document(exc, command)
        print(json.dumps(doc))
        out = _out_folder(args)
        if out is not None:
            try:
                out.mkdir(parents = True, exist_ok = True)
                save_json(doc, Path(out, 'error.json'))
            except OSError:
                pass
        return exit_code(exc)

def run():
    sys.exit(main())

if __name__ == '__main__':
    run()
