'''
JSON codecs for the inputs and outputs of the CLI.

Algebra: {"dim": n, "labels": [...], "brackets": [{"i": 0, "j": 1,
"coeffs": {"2": "1/2"}}]}, indices 0-based. Only i < j entries are needed;
the rest follows by antisymmetry. An entry with i > j is accepted when it
agrees with its mirror, and diagonal entries must be zero.

Operator: {"dim": n, "matrix": [["p/q", ...], ...]}, row-major, acting on
columns. Subspace: a list of length-n rational vectors.

Every decoding failure is a `MalformedInput` whose witness `pointer` names
the offending field, e.g. "/brackets/3/coeffs/2".
'''

import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .common import (
    Rational,
    parse_rational,
    rat,
    rational_str,
    to_jsonable,
)
from .errors import MalformedInput
from .exact import Matrix, to_rows, zeros
from .integrals import FamilyMember, IntegralFamily
from .lie import StructureConstants
from .nijenhuis import BracketPencil
from .poly import MultiPoly


def _fail(pointer: str, message: str, **witness):
    raise MalformedInput(
        f'{pointer or "/"}: {message}', pointer=pointer, **witness
    )


def _get(d, key: str, pointer: str):
    if not isinstance(d, dict):
        _fail(pointer, f'expected an object, got {type(d).__name__}')
    if key not in d:
        _fail(f'{pointer}/{key}', 'missing field')
    return d[key]


def _int(x, pointer: str, lo: int = 0, hi: Optional[int] = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        _fail(pointer, f'expected an integer, got {x!r}')
    if x < lo or (hi is not None and x >= hi):
        _fail(pointer, f'{x} out of range [{lo}, {hi})')
    return x


def _rational(x, pointer: str) -> Rational:
    try:
        return parse_rational(x)
    except (ValueError, ZeroDivisionError):
        _fail(pointer, f'not a rational: {x!r}')


def _list(x, pointer: str, length: Optional[int] = None) -> list:
    if not isinstance(x, list):
        _fail(pointer, f'expected a list, got {type(x).__name__}')
    if length is not None and len(x) != length:
        _fail(pointer, f'expected {length} entries, got {len(x)}')
    return x


def load_json(path) -> object:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as ex:
        raise MalformedInput(
            f'{path}: invalid JSON: {ex.msg}',
            pointer='',
            file=str(path),
            line=ex.lineno,
            column=ex.colno,
        ) from ex
    except OSError as ex:
        raise MalformedInput(f'{path}: {ex.strerror}', file=str(path)) from ex


def algebra_to_json(c: StructureConstants):
    brackets = []
    by_pair: Dict[Tuple[int, int], Dict[str, str]] = {}
    for i, j, k, v in c.nonzero_brackets():
        by_pair.setdefault((i, j), {})[str(k)] = rational_str(v)
    for (i, j), coeffs in sorted(by_pair.items()):
        brackets.append({'i': i, 'j': j, 'coeffs': coeffs})
    return {'dim': c.dim, 'labels': list(c.labels), 'brackets': brackets}


def algebra_from_json(d, pointer: str = '') -> StructureConstants:
    n = _int(_get(d, 'dim', pointer), f'{pointer}/dim', lo=1)
    labels = d.get('labels', [])
    _list(labels, f'{pointer}/labels')
    if labels and len(labels) != n:
        _fail(f'{pointer}/labels', f'{len(labels)} labels for dimension {n}')
    if not all(isinstance(x, str) for x in labels):
        _fail(f'{pointer}/labels', 'labels must be strings')
    c = zeros(n, n, n)
    seen: Dict[Tuple[int, int], str] = {}
    entries = _list(_get(d, 'brackets', pointer), f'{pointer}/brackets')
    for idx, entry in enumerate(entries):
        ptr = f'{pointer}/brackets/{idx}'
        i = _int(_get(entry, 'i', ptr), f'{ptr}/i', hi=n)
        j = _int(_get(entry, 'j', ptr), f'{ptr}/j', hi=n)
        coeffs = _get(entry, 'coeffs', ptr)
        if not isinstance(coeffs, dict):
            _fail(f'{ptr}/coeffs', 'expected an object')
        vec = [0] * n
        for key, raw in coeffs.items():
            try:
                k = int(key)
            except ValueError:
                _fail(f'{ptr}/coeffs/{key}', 'keys are basis indices')
            _int(k, f'{ptr}/coeffs/{key}', hi=n)
            vec[k] = _rational(raw, f'{ptr}/coeffs/{key}')
        if i == j and any(vec):
            _fail(ptr, f'antisymmetry: [e{i}, e{i}] != 0', pair=[i, j])
        pair = (min(i, j), max(i, j))
        sign = 1 if i < j else -1
        if pair in seen:
            old = [rat(sign * x) for x in c[pair[0], pair[1]]]
            if old != vec:
                _fail(
                    ptr,
                    f'antisymmetry: contradicts {seen[pair]}',
                    pair=[i, j],
                )
            continue
        seen[pair] = ptr
        c[i, j] = vec
        c[j, i] = [rat(-x) for x in vec]
    return StructureConstants(c, tuple(labels))


def operator_to_json(N):
    rows = to_rows(N)
    return {
        'dim': len(rows),
        'matrix': [[rational_str(x) for x in row] for row in rows],
    }


def matrix_from_json(m, pointer: str, n: int) -> Matrix:
    rows = _list(m, pointer, n)
    return [
        [
            _rational(x, f'{pointer}/{i}/{j}')
            for j, x in enumerate(_list(row, f'{pointer}/{i}', n))
        ]
        for i, row in enumerate(rows)
    ]


def operator_from_json(
    d, dim: Optional[int] = None, pointer: str = ''
) -> Matrix:
    n = _int(_get(d, 'dim', pointer), f'{pointer}/dim', lo=1)
    if dim is not None and n != dim:
        _fail(f'{pointer}/dim', f'operator of dim {n} on an algebra of {dim}')
    return matrix_from_json(_get(d, 'matrix', pointer), f'{pointer}/matrix', n)


def vector_from_json(v, n: int, pointer: str = '') -> List[Rational]:
    return [
        _rational(x, f'{pointer}/{i}')
        for i, x in enumerate(_list(v, pointer, n))
    ]


def subspace_from_json(d, n: int, pointer: str = '') -> Matrix:
    return [
        vector_from_json(v, n, f'{pointer}/{i}')
        for i, v in enumerate(_list(d, pointer))
    ]


def pencil_to_json(p: BracketPencil):
    d = {
        'c1': algebra_to_json(p.c1),
        'c2': algebra_to_json(p.c2),
        'exceptional': [rational_str(x) for x in p.exceptional],
        'origin': p.origin,
    }
    if p.operator is not None:
        d['operator'] = operator_to_json(p.operator)
    return d


def pencil_from_json(d, pointer: str = '') -> BracketPencil:
    c1 = algebra_from_json(_get(d, 'c1', pointer), f'{pointer}/c1')
    c2 = algebra_from_json(_get(d, 'c2', pointer), f'{pointer}/c2')
    if c1.dim != c2.dim:
        _fail(f'{pointer}/c2/dim', f'{c2.dim} != {c1.dim}')
    exceptional = tuple(
        sorted(
            _rational(x, f'{pointer}/exceptional/{i}')
            for i, x in enumerate(
                _list(d.get('exceptional', []), f'{pointer}/exceptional')
            )
        )
    )
    op = None
    if 'operator' in d:
        ptr = f'{pointer}/operator'
        op = tuple(map(tuple, operator_from_json(d['operator'], c1.dim, ptr)))
    origin = d.get('origin', 'manual')
    if not isinstance(origin, str):
        _fail(f'{pointer}/origin', 'expected a string')
    return BracketPencil(c1, c2, exceptional, origin, op)


def family_to_json(F: IntegralFamily):
    return to_jsonable(F)


def family_from_json(d, pointer: str = '') -> IntegralFamily:
    nvars = _int(_get(d, 'nvars', pointer), f'{pointer}/nvars')
    members = []
    entries = _list(_get(d, 'members', pointer), f'{pointer}/members')
    for idx, m in enumerate(entries):
        ptr = f'{pointer}/members/{idx}'
        name = _get(m, 'name', ptr)
        if not isinstance(name, str):
            _fail(f'{ptr}/name', 'expected a string')
        poly = MultiPoly.from_json(m, ptr)
        if poly.nvars != nvars:
            _fail(f'{ptr}/nvars', f'{poly.nvars} != family nvars {nvars}')
        members.append(
            FamilyMember(
                name,
                poly,
                _int(m.get('k', 0), f'{ptr}/k'),
                _int(m.get('l', 0), f'{ptr}/l'),
            )
        )
    notes = tuple(str(x) for x in d.get('notes', []))
    provenance = d.get('provenance', 'manual')
    extended = bool(d.get('extended', False))
    return IntegralFamily(provenance, nvars, tuple(members), notes, extended)


def read_algebra(path: Path) -> StructureConstants:
    return algebra_from_json(load_json(path))


def read_operator(path: Path, dim: int) -> Matrix:
    return operator_from_json(load_json(path), dim)


def test_algebra_codec():
    from .catalog import gl, sl

    for c in [sl(2).algebra, gl(3).algebra]:
        assert algebra_from_json(algebra_to_json(c)) == c
    d = {
        'dim': 3,
        'brackets': [
            {'i': 0, 'j': 2, 'coeffs': {'1': '1'}},
            {'i': 2, 'j': 0, 'coeffs': {'1': -1}},
            {'i': 1, 'j': 0, 'coeffs': {'0': '-2'}},
        ],
    }
    c = algebra_from_json(d)
    assert c.c[0, 1, 0] == 2 and c.c[1, 0, 0] == -2
    assert c.label(0) == 'e1'


def _algebra(*entries, dim=2, **extra):
    brackets = [{'i': i, 'j': j, 'coeffs': co} for i, j, co in entries]
    return {'dim': dim, 'brackets': brackets, **extra}


def test_algebra_codec_errors():
    cases = [
        ({'brackets': []}, '/dim'),
        (_algebra((0, 5, {})), '/brackets/0/j'),
        (_algebra((0, 1, {'0': 'x'})), '/brackets/0/coeffs/0'),
        (_algebra((0, 1, {'0': '1/0'})), '/brackets/0/coeffs/0'),
        (_algebra((1, 1, {'0': 1})), '/brackets/0'),
        (_algebra((0, 1, {'0': 1}), (1, 0, {'0': 1})), '/brackets/1'),
        (_algebra(labels=['a']), '/labels'),
    ]
    for d, pointer in cases:
        try:
            algebra_from_json(d)
        except MalformedInput as ex:
            assert ex.witness['pointer'] == pointer, (d, ex.witness)
        else:
            raise AssertionError(f'accepted {d}')


def test_operator_pencil_family_codecs():
    from .catalog import borel_projector
    from .integrals import manakov_family

    N = [[1, 0], [0, '1/2']]
    d = operator_to_json([[1, 0], [0, rat('1/2')]])
    assert d == {'dim': 2, 'matrix': [['1', '0'], ['0', '1/2']]}
    assert operator_from_json(d) == [[1, 0], [0, rat('1/2')]]
    try:
        operator_from_json({'dim': 2, 'matrix': N}, dim=3)
    except MalformedInput as ex:
        assert ex.witness['pointer'] == '/dim'
    else:
        raise AssertionError('dimension mismatch accepted')
    try:
        operator_from_json({'dim': 2, 'matrix': [[1, 0], [0]]})
    except MalformedInput as ex:
        assert ex.witness['pointer'] == '/matrix/1'
    else:
        raise AssertionError('ragged matrix accepted')
    p = borel_projector(2).pencil
    back = pencil_from_json(pencil_to_json(p))
    assert back.c1 == p.c1 and back.c2 == p.c2
    assert back.exceptional == p.exceptional and back.operator == p.operator
    h = manakov_family(2, (1, 2))
    again = family_from_json(json.loads(json.dumps(family_to_json(h))))
    assert again.names == h.names and again.polys == h.polys
    assert subspace_from_json([['1', 0]], 2) == [[1, 0]]
