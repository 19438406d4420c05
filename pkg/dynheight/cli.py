"""Command-line front end

Exit status 0 on success, 2 when a computation is mathematically refused
(for example the canonical height of an inequality-only system), 1 on any
other error."""
from dynheight.arith import Place
from dynheight.canonical import (canonical_height, check_functional_equation,
        compute_discrepancy_bound, sample_anchor)
from dynheight.config import DEPTH_CAP, DIGIT_BUDGET, GRID_RESOLUTION, NODE_BUDGET, TARGET_ERROR
from dynheight.description import load_system, parse_point
from dynheight.errors import DynHeightError, SchemaError
from dynheight.export import write_gnuplot_script, write_measure, write_potential
from dynheight.local import decompose_height, local_green
from dynheight.measures import (SILVERMAN_LAMBDA, P1System, binomial_current_claim,
        equidistribution_table, iterate_potential, measure_from_potential, verify_binomial_identity)
from dynheight.orbits import (closed_sub_orbit, find_periodic_points, forward_orbit,
        henon_inequality_check, henon_sample, orbit_verdict)

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

COMMANDS = ('height', 'orbit', 'periodic', 'local', 'decompose', 'measure', 'equi', 'claim', 'check')
FORMATS = ('json', 'csv', 'text')

@dataclass
class RunConfig:
    command: str
    system_file: str = None
    point: str = None
    target_error: float = TARGET_ERROR
    node_budget: int = NODE_BUDGET
    depth_cap: int = DEPTH_CAP
    digit_budget: int = DIGIT_BUDGET
    threads: int = 1
    seed: int = 0
    out: str = None
    format: str = 'json'
    bound: float = 0.0
    place: str = 'inf'
    lift: str = None
    iterations: int = 30
    resolution: int = GRID_RESOLUTION
    init: str = 'zero'
    base_point: str = '1'
    depths: list = field(default_factory=lambda: [4, 6, 8])
    exceptional: list = field(default_factory=list)
    sequence: str = 'one'
    n_max: int = 40
    lam: float = SILVERMAN_LAMBDA
    verify: int = 20
    samples: int = 10**4
    grid_prefix: str = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError('unknown command {!r}'.format(self.command))
        if self.format not in FORMATS:
            raise ValueError('unknown format {!r}'.format(self.format))
        if not self.target_error > 0:
            raise ValueError('target error must be positive')
        for name in ('node_budget', 'depth_cap', 'digit_budget', 'threads', 'iterations', 'samples'):
            if getattr(self, name) < 1:
                raise ValueError('{} must be positive'.format(name.replace('_', ' ')))
        if self.command not in ('claim',) and self.system_file is None:
            raise ValueError('{} needs --system'.format(self.command))

    @property
    def budgets(self):
        return {'node_budget': self.node_budget, 'depth_cap': self.depth_cap,
                'digit_budget': self.digit_budget}

def _point(config, system):
    if config.point is None:
        raise SchemaError('missing', field='point')
    return parse_point(config.point, system.dims)

def _height(config, system):
    x = _point(config, system)
    estimate = canonical_height(system, x, config.target_error, **config.budgets)
    result = {'point': str(x)}
    result.update(estimate.as_dict())
    return result, None

def _orbit(config, system):
    x = _point(config, system)
    report = forward_orbit(system, x, config.node_budget, digit_budget=config.digit_budget,
                           threads=config.threads)
    result = report.as_dict()
    result['verdict'] = orbit_verdict(report).value
    if report.closed:
        witness = closed_sub_orbit(report)
        result['closed_sub_orbit'] = None if witness is None else [str(y) for y in witness]
    table = (['index', 'point'], [(j, str(y)) for j, y in enumerate(report.nodes)])
    return result, table

def _periodic(config, system):
    points = find_periodic_points(system, config.bound, config.node_budget,
                                  digit_budget=config.digit_budget, threads=config.threads)
    return {'bound': config.bound, 'orbits': [str(x) for x in points]}, \
        (['representative'], [(str(x),) for x in points])

def _parse_lift(text):
    try:
        return tuple(int(c) for c in text.strip('()').replace(':', ',').split(','))
    except ValueError:
        raise SchemaError('expected comma-separated integers, got {!r}'.format(text), field='lift')

def _local(config, system):
    if config.lift is None:
        raise SchemaError('missing', field='lift')
    place = Place.infinite() if config.place == 'inf' else Place.finite(int(config.place))
    estimate = local_green(system, _parse_lift(config.lift), place, config.target_error, **config.budgets)
    return estimate.as_dict(), None

def _decompose(config, system):
    x = _point(config, system)
    decomposition = decompose_height(system, x, config.target_error, threads=config.threads,
                                     **config.budgets)
    result = decomposition.as_dict()
    result['point'] = str(x)
    rows = [(e['place'], e['value'], e['error_radius']) for e in result['local']]
    return result, (['place', 'value', 'error_radius'], rows)

def _reference_measure(config, system):
    p1 = P1System.from_system(system)
    potential = iterate_potential(p1, config.iterations, config.init, config.resolution)
    return p1, potential, measure_from_potential(potential)

def _measure(config, system):
    _, potential, measure = _reference_measure(config, system)
    if config.grid_prefix:
        for name, writer, args in (('potential', write_potential, (potential,)),
                                   ('measure', write_measure, (measure, potential.spacing))):
            path = '{}_{}.csv'.format(config.grid_prefix, name)
            writer(path, *args)
            write_gnuplot_script(path, name)
    result = {'iterations': potential.iterations, 'resolution': potential.resolution,
              'contraction': potential.contraction, 'contraction_ok': potential.contraction_ok,
              'overlap_disagreement': potential.disagreement, 'raw_mass': measure.raw_mass,
              'clipped_mass': measure.clipped_mass}
    return result, (['step', 'sup_difference'], list(enumerate(potential.contraction)))

def _equi(config, system):
    p1, _, measure = _reference_measure(config, system)
    try:
        a = complex(config.base_point)
        exceptional = [complex(e) for e in config.exceptional]
    except ValueError as e:
        raise SchemaError(str(e), field='base_point')
    rows = equidistribution_table(p1, a, config.depths, measure, exceptional)
    return {'base_point': config.base_point, 'statistics': [list(r) for r in rows]}, \
        (['depth', 'statistic'], rows)

def _claim(config, system):
    rows = binomial_current_claim(config.sequence, None, config.n_max, config.lam)
    result = {'lambda': config.lam, 'sequence': config.sequence,
              'table': [list(r) for r in rows],
              'identity_verified': all(verify_binomial_identity(n) for n in range(config.verify + 1))}
    return result, (['n', 't_2n', 'residual'], rows)

def _check(config, system):
    if system.line_bundle:
        x = _point(config, system)
        bound = compute_discrepancy_bound(system, around=sample_anchor(system, x))
        residual = check_functional_equation(system, x, config.target_error, bound=bound, **config.budgets)
        return {'point': str(x), 'residual': residual,
                'allowance': (system.k + system.degree) * config.target_error,
                'discrepancy_C': bound.C, 'certified': bound.certified}, None
    report = henon_inequality_check(system, henon_sample(config.samples, seed=config.seed))
    return report.as_dict(), (['low', 'high', 'count', 'min', 'mean'], report.buckets)

HANDLERS = {'height': _height, 'orbit': _orbit, 'periodic': _periodic, 'local': _local,
            'decompose': _decompose, 'measure': _measure, 'equi': _equi, 'claim': _claim,
            'check': _check}

def render(result, table, fmt):
    if fmt == 'json':
        return json.dumps(result, indent=2, sort_keys=True) + '\n'
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        if table is None:
            table = (['key', 'value'], sorted(result.items()))
        writer.writerow(table[0])
        writer.writerows(table[1])
        return buffer.getvalue()
    return ''.join('{}: {}\n'.format(key, value) for key, value in sorted(result.items()))

def run(config):
    """Execute one command and return the exit status"""
    logger.info('%s on %s', config.command, config.system_file)
    try:
        system = load_system(config.system_file) if config.system_file else None
        result, table = HANDLERS[config.command](config, system)
        if system is not None:
            result['system_id'] = system.fingerprint()
        output = render(result, table, config.format)
        if config.out:
            with open(config.out, 'w') as f:
                f.write(output)
        else:
            sys.stdout.write(output)
    except DynHeightError as e:
        print('{}: {}'.format(type(e).__name__, e), file=sys.stderr)
        return 2 if e.refusal else 1
    except (OSError, ValueError) as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 1
    return 0

def _list_of(kind):
    def parse(text):
        return [kind(v) for v in text.split(',') if v.strip()]
    return parse

def build_parser():
    parser = argparse.ArgumentParser(description='Canonical heights of dynamical systems')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    commands = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument('--system', dest='system_file')
        sub.add_argument('--point')
        sub.add_argument('--target-error', type=float, default=TARGET_ERROR)
        sub.add_argument('--node-budget', type=int, default=NODE_BUDGET)
        sub.add_argument('--depth-cap', type=int, default=DEPTH_CAP)
        sub.add_argument('--digit-budget', type=int, default=DIGIT_BUDGET)
        sub.add_argument('--threads', type=int, default=1)
        sub.add_argument('--seed', type=int, default=0)
        sub.add_argument('--out')
        sub.add_argument('--format', choices=FORMATS, default='json')
        if name == 'periodic':
            sub.add_argument('--bound', type=float, default=0.0)
        if name == 'local':
            sub.add_argument('--place', default='inf')
            sub.add_argument('--lift')
        if name in ('measure', 'equi'):
            sub.add_argument('--iterations', type=int, default=30)
            sub.add_argument('--resolution', type=int, default=GRID_RESOLUTION)
            sub.add_argument('--init', choices=('zero', 'fubini_study'), default='zero')
        if name == 'measure':
            sub.add_argument('--grid-prefix')
        if name == 'equi':
            sub.add_argument('--base-point', default='1')
            sub.add_argument('--depths', type=_list_of(int), default=[4, 6, 8])
            sub.add_argument('--exceptional', type=_list_of(str), default=[])
        if name == 'claim':
            sub.add_argument('--sequence', choices=('one', 'harmonic', 'alternating'), default='one')
            sub.add_argument('--n-max', type=int, default=40)
            group = sub.add_mutually_exclusive_group()
            group.add_argument('--lambda', dest='lam', type=float, default=SILVERMAN_LAMBDA)
            group.add_argument('--lambda-default', dest='lam', action='store_const', const=SILVERMAN_LAMBDA)
            sub.add_argument('--verify', type=int, default=20)
        if name == 'check':
            sub.add_argument('--samples', type=int, default=10**4)
    return parser

def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    verbosity = args.pop('verbose')
    logging.basicConfig(stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s',
                        level={0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG))
    try:
        config = RunConfig(**args)
    except ValueError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 1
    return run(config)
