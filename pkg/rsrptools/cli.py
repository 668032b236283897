"""
Command line entry point: `rsrp solve|lowerbound|graph|validate|gen`.

Exit codes: 0 success, 1 error, 2 infeasible, 3 time limit without a
primal solution, 4 alignment failure (validate only).
"""
import os
import sys
import json
import argparse

from rsrptools.interface import Interface
from rsrptools.config import ConfigError
from rsrptools.instance import InstanceError, load_instance
from rsrptools.health import HealthModelError, get_model
from rsrptools.discretization import DiscretizationError, build_discretization
from rsrptools.seeg import GraphError
from rsrptools.flow import SolverError, DecompositionError
from rsrptools.refinement import AlignmentError
from rsrptools.generator import generate_document

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_TIME_LIMIT = 3
EXIT_NOT_ALIGNED = 4

ERRORS = (ConfigError, InstanceError, HealthModelError, DiscretizationError, GraphError, SolverError,
          DecompositionError, AlignmentError, IOError, ValueError)


def _add_solver_flags(parser):
    parser.add_argument('instance', help='Instance JSON file')
    parser.add_argument('--k', type=int, help='Subdivision factor of the grid (default 2)')
    parser.add_argument('--max-iter', dest='max_iterations', type=int, help='Maximum refinement levels')
    parser.add_argument('--time-limit', dest='time_limit', type=float, help='Wall-clock limit in seconds')
    parser.add_argument('--solver', help='Solver backend: cbc or highs')
    parser.add_argument('--seed', type=int, help='Seed for sampling checks and the solver')
    parser.add_argument('--report', help='Refinement report JSON file')


def build_parser():
    parser = argparse.ArgumentParser(prog='rsrp', description='''
        Rotation planning with predictive maintenance on state-expanded event graphs.
        ''', formatter_class=argparse.RawTextHelpFormatter)
    parser.add_argument('--config', help='Ini file with an [rsrp] section (default ~/.rsrp-config)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Log at DEBUG level')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    solve = commands.add_parser('solve', help='Refine until the bounds meet and write the best rotations')
    _add_solver_flags(solve)
    solve.add_argument('--mode', choices=('dual', 'lp'), help='dual: ILP with primal solutions, lp: bounds only')
    solve.add_argument('--out', help='Solution JSON file')

    lowerbound = commands.add_parser('lowerbound', help='LP relaxation lower bounds per level')
    _add_solver_flags(lowerbound)
    lowerbound.add_argument('--mode', choices=('lp', 'dual'), default='lp',
                            help='lp: LP relaxation (default), dual: integer bounds')
    lowerbound.add_argument('--out', help='Refinement report JSON file')

    graph = commands.add_parser('graph', help='Write the event graph of one level as DOT')
    graph.add_argument('instance', help='Instance JSON file')
    graph.add_argument('--level', type=int, default=0, help='Refinement level (default 0)')
    graph.add_argument('--k', type=int, help='Subdivision factor of the grid (default 2)')
    graph.add_argument('--no-prune', dest='prune', action='store_false', help='Keep dead-end nodes and arcs')
    graph.add_argument('--out', help='DOT file (default stdout)')

    validate = commands.add_parser('validate', help='Load an instance and check its degradations')
    validate.add_argument('instance', help='Instance JSON file')
    validate.add_argument('--seed', type=int, help='Sampling seed')

    gen = commands.add_parser('gen', help='Write a random instance')
    gen.add_argument('--seed', type=int, default=0, help='Generator seed (default 0)')
    gen.add_argument('--trips', type=int, default=5, help='Maximum number of trips')
    gen.add_argument('--vehicles', type=int, default=2, help='Maximum number of vehicles')
    gen.add_argument('--locations', type=int, default=3, help='Maximum number of locations')
    gen.add_argument('--family', choices=('normal', 'weibull', 'gamma'), default='normal')
    gen.add_argument('--horizon', type=int, default=600, help='Planning horizon in minutes')
    gen.add_argument('--unaligned', dest='aligned', action='store_false',
                     help='Use degradations that fail the alignment check')
    gen.add_argument('--out', help='Instance JSON file (default stdout)')
    return parser


def _interface(args, **overrides):
    fields = ('k', 'max_iterations', 'time_limit', 'mode', 'solver', 'seed')
    for name in fields:
        if name not in overrides:
            overrides[name] = getattr(args, name, None)
    if args.verbose:
        overrides['log_level'] = 'DEBUG'
    return Interface(config_file=args.config, **overrides)


def _progress(out):
    def callback(record):
        out.write('iteration %s\n' % ' '.join('%s=%s' % item for item in record.items()))
        out.flush()
    return callback


def _report_path(args):
    if args.report:
        return args.report
    if getattr(args, 'out', None):
        return os.path.splitext(args.out)[0] + '_report.json'
    return None


def cmd_solve(args, out=sys.stdout):
    rsrp = _interface(args)
    instance = load_instance(args.instance)
    report = rsrp.solve(instance, callback=_progress(out))
    rsrp.save(report, instance, args.out, _report_path(args))
    out.write('status=%s lb=%s ub=%s gap=%s\n' % (report.status, report.lb, report.ub, report.gap))
    out.write(report.to_json() + '\n')
    if report.status == 'infeasible':
        return EXIT_INFEASIBLE
    if report.status == 'time_limit' and report.best_plan is None:
        if rsrp.config.mode == 'dual' or not report.lower_bounds:
            return EXIT_TIME_LIMIT
    return EXIT_OK


def cmd_lowerbound(args, out=sys.stdout):
    rsrp = _interface(args)
    instance = load_instance(args.instance)
    report = rsrp.solve(instance, callback=_progress(out))
    rsrp.save(report, instance, report_path=args.out or args.report)
    out.write('status=%s lower_bounds=%s\n' % (report.status, json.dumps(report.lower_bounds)))
    out.write(report.to_json() + '\n')
    if report.status == 'infeasible':
        return EXIT_INFEASIBLE
    if report.status == 'time_limit' and not report.lower_bounds:
        return EXIT_TIME_LIMIT
    return EXIT_OK


def cmd_graph(args, out=sys.stdout):
    rsrp = _interface(args)
    instance = load_instance(args.instance)
    model = get_model(instance.family)
    discretization = build_discretization(args.level, rsrp.config.k, model, instance.alphas,
                                          instance.parameter_space, instance.anchor_points)
    seeg = rsrp.graphs.build_seeg(instance, discretization, model, prune_graph=args.prune)
    if args.out:
        rsrp.graphs.export_dot(seeg, args.out)
    else:
        out.write(rsrp.graphs.to_dot(seeg))
    out.write(json.dumps(rsrp.graphs.statistics(seeg), indent=2) + '\n')
    return EXIT_OK


def cmd_validate(args, out=sys.stdout):
    rsrp = _interface(args)
    instance = load_instance(args.instance)
    failures = rsrp.refinement.check_alignment(instance)
    summary = {'instance': args.instance, 'trips': len(instance.trips), 'vehicles': len(instance.vehicles),
               'locations': len(instance.locations), 'family': instance.family,
               'alignment_failures': failures}
    out.write(json.dumps(summary, indent=2, sort_keys=True) + '\n')
    return EXIT_NOT_ALIGNED if failures else EXIT_OK


def cmd_gen(args, out=sys.stdout):
    document = generate_document(args.seed, max_trips=args.trips, max_vehicles=args.vehicles,
                                 max_locations=args.locations, family=args.family, horizon=args.horizon,
                                 aligned=args.aligned)
    text = json.dumps(document, indent=2, sort_keys=True) + '\n'
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text)
    else:
        out.write(text)
    return EXIT_OK


COMMANDS = {
    'solve': cmd_solve,
    'lowerbound': cmd_lowerbound,
    'graph': cmd_graph,
    'validate': cmd_validate,
    'gen': cmd_gen,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ERRORS as e:
        err.write('rsrp %s: %s\n' % (args.command, e))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
