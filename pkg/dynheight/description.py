"""Module for system description files and point literals

A description is a JSON object with a "type" among poly_pn, lattes, henon,
k3_222, k3_wheeler, k3_12_21 and composite.  Integers and rationals are
decimal strings so that no precision is lost; see README.md for the schema
of each type."""
from dynheight.arith import normalize, point_from_affine
from dynheight.errors import OffSurfaceError, SchemaError, SingularCurveError
from dynheight.k3 import K3TrilinearSystem, K3WheelerSystem
from dynheight.systems import (CompositeSystem, HenonSystem, LattesSystem, PolyMapPN,
        PolynomialSystem)

import json
import re
from fractions import Fraction

_INTEGER = re.compile(r'^-?\d+$')
_RATIONAL = re.compile(r'^-?\d+(/\d+)?$')
_FACTOR = re.compile(r'\(([^()]*)\)')

def _get(data, key, path):
    if not isinstance(data, dict):
        raise SchemaError('expected an object', field=path or None)
    if key not in data:
        raise SchemaError('missing', field=_join(path, key))
    return data[key]

def _join(path, key):
    if isinstance(key, int):
        return '{}[{}]'.format(path, key)
    return '{}.{}'.format(path, key) if path else key

def _list(value, path):
    if not isinstance(value, list):
        raise SchemaError('expected a list', field=path)
    return value

def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, (str, int)) or \
            (isinstance(value, str) and not _INTEGER.match(value.strip())):
        raise SchemaError('expected an integer as a decimal string, got {!r}'.format(value), field=path)
    return int(value)

def _rational(value, path):
    if isinstance(value, bool) or not isinstance(value, (str, int)) or \
            (isinstance(value, str) and not _RATIONAL.match(value.strip())):
        raise SchemaError('expected a rational as a decimal string, got {!r}'.format(value), field=path)
    try:
        return Fraction(value)
    except ZeroDivisionError:
        raise SchemaError('zero denominator', field=path)

def _exponents(value, path, length=None):
    value = _list(value, path)
    if length is not None and len(value) != length:
        raise SchemaError('expected {} exponents'.format(length), field=path)
    if not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in value):
        raise SchemaError('exponents must be nonnegative integers', field=path)
    return tuple(value)

def _weights(data, count, path=''):
    if 'weights' not in data:
        return (1.0,) * count
    weights = _list(data['weights'], _join(path, 'weights'))
    if len(weights) != count or not all(isinstance(r, (int, float)) and not isinstance(r, bool) for r in weights):
        raise SchemaError('expected {} numbers'.format(count), field=_join(path, 'weights'))
    return tuple(float(r) for r in weights)

def _points(data, dims, path):
    literals = _list(data.get('base_points', []), _join(path, 'base_points'))
    points = []
    for j, literal in enumerate(literals):
        field = _join(_join(path, 'base_points'), j)
        if not isinstance(literal, str):
            raise SchemaError('expected a point literal', field=field)
        points.append(parse_point(literal, dims, field=field))
    return points

def _poly_map(data, path, N):
    polys = []
    for j, poly in enumerate(_list(_get(data, 'polys', path), _join(path, 'polys'))):
        poly_path = _join(_join(path, 'polys'), j)
        terms = []
        for t, term in enumerate(_list(poly, poly_path)):
            term_path = _join(poly_path, t)
            terms.append((_integer(_get(term, 'c', term_path), _join(term_path, 'c')),
                          _exponents(_get(term, 'e', term_path), _join(term_path, 'e'), N + 1)))
        polys.append(terms)
    if len(polys) != N + 1:
        raise SchemaError('expected {} polynomials'.format(N + 1), field=_join(path, 'polys'))
    morphism = data.get('morphism', True)
    if not isinstance(morphism, bool):
        raise SchemaError('expected true or false', field=_join(path, 'morphism'))
    try:
        return PolyMapPN(polys, morphism=morphism)
    except ValueError as e:
        raise SchemaError(str(e), field=path)

def _forms(data, path):
    forms = []
    for j, form in enumerate(_list(_get(data, 'forms', path), _join(path, 'forms'))):
        form_path = _join(_join(path, 'forms'), j)
        terms = {}
        for t, term in enumerate(_list(form, form_path)):
            term_path = _join(form_path, t)
            key = (_exponents(_get(term, 'ex', term_path), _join(term_path, 'ex'), 3),
                   _exponents(_get(term, 'ey', term_path), _join(term_path, 'ey'), 3))
            terms[key] = terms.get(key, 0) + _integer(_get(term, 'c', term_path), _join(term_path, 'c'))
        forms.append(terms)
    return forms

def system_from_description(data, path=''):
    """Dynamical system of a parsed JSON description"""
    kind = _get(data, 'type', path)
    try:
        if kind == 'poly_pn':
            N = _get(data, 'dimension', path)
            if not isinstance(N, int) or isinstance(N, bool) or N < 1:
                raise SchemaError('expected a positive integer', field=_join(path, 'dimension'))
            maps = [_poly_map(m, _join(_join(path, 'maps'), j), N)
                    for j, m in enumerate(_list(_get(data, 'maps', path), _join(path, 'maps')))]
            return PolynomialSystem(maps, weight=_weights(data, 1, path)[0])
        if kind == 'lattes':
            return LattesSystem(_rational(_get(data, 'a', path), _join(path, 'a')),
                                _rational(_get(data, 'b', path), _join(path, 'b')),
                                weight=_weights(data, 1, path)[0])
        if kind == 'henon':
            return HenonSystem(_rational(_get(data, 'a', path), _join(path, 'a')),
                               _rational(_get(data, 'b', path), _join(path, 'b')))
        if kind == 'k3_222':
            equation = _get(data, 'equation', path)
            if not isinstance(equation, str):
                raise SchemaError('expected a string', field=_join(path, 'equation'))
            return K3TrilinearSystem.from_affine(equation, _points(data, (1, 1, 1), path),
                                                 _weights(data, 3, path))
        if kind in ('k3_wheeler', 'k3_12_21'):
            system = K3WheelerSystem(_forms(data, path), _points(data, (2, 2), path), _weights(data, 2, path))
            if system.kind != kind:
                raise SchemaError('forms have bidegrees {} which is not {}'.format(system.bidegrees, kind),
                                  field=_join(path, 'forms'))
            return system
        if kind == 'composite':
            base = system_from_description(_get(data, 'base', path), _join(path, 'base'))
            words = [_exponents(w, _join(_join(path, 'words'), j))
                     for j, w in enumerate(_list(_get(data, 'words', path), _join(path, 'words')))]
            degree = _get(data, 'degree', path)
            if not isinstance(degree, (int, float)) or isinstance(degree, bool):
                raise SchemaError('expected a number', field=_join(path, 'degree'))
            return CompositeSystem(base, words, _weights(data, len(base.dims), path), degree)
    except (OffSurfaceError, SingularCurveError) as e:
        raise SchemaError(str(e), field=path or None)
    except SchemaError:
        raise
    except ValueError as e:
        raise SchemaError(str(e), field=path or None)
    raise SchemaError('unknown system type {!r}'.format(kind), field=_join(path, 'type'))

def load_system(path):
    """System of a description file; SchemaError carries line or field diagnostics"""
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(e.msg, line=e.lineno)
    return system_from_description(data)

def dump_description(system):
    return json.dumps(system.describe(), indent=2, sort_keys=True) + '\n'

def dump_system(system, path):
    with open(path, 'w') as f:
        f.write(dump_description(system))

def parse_point(text, dims=None, field='point'):
    """Point of a point literal

    Either per-factor colon-separated rationals, ((2:3),(1:5)) or (2:3), or
    comma-separated affine coordinates 0,3/5,6/5, which need dims."""
    text = text.strip()
    try:
        if ':' in text:
            groups = _FACTOR.findall(text) or [text]
            raw = [[Fraction(c.strip()) for c in group.split(':')] for group in groups]
            if any(len(factor) < 2 for factor in raw):
                raise ValueError('a factor needs at least two coordinates')
            point = normalize(raw)
        else:
            if dims is None:
                raise SchemaError('affine coordinates need a known state space', field=field)
            values = [Fraction(c.strip()) for c in text.strip('()').split(',')]
            point = point_from_affine(values, dims)
    except SchemaError:
        raise
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError('cannot parse {!r}: {}'.format(text, e), field=field)
    if dims is not None and point.dims != tuple(dims):
        raise SchemaError('{} does not lie in a space of dimensions {}'.format(text, tuple(dims)), field=field)
    return point
