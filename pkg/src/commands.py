'''
Subcommand handlers behind `pforge.py`. A handler gets the parsed arguments
and a `RunConfig` and returns `(report, ok)`. `run` writes the report and
turns it into an exit code:

    0  positive verdict (certified, holds, involutive, ...)
    1  negative or undecided verdict, or a failed mathematical precondition
    2  malformed input or invalid parameters
'''

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .catalog import NAMES, build
from .cli import RunConfig, init_cli
from .common import (
    dump_canonical,
    get_logger,
    parse_rational,
    temp_dir,
    to_jsonable,
)
from .errors import (
    InputError,
    InvalidParams,
    IrrationalSpectrum,
    TorsionNonzero,
    VerificationError,
)
from .integrals import (
    borel_family,
    casimir_resolvent_family,
    completeness_rank,
    family_span_equivalence,
    involutivity_check,
    lenard_check,
    manakov_family,
    resolvent_family,
)
from .lie import (
    check_jacobi,
    rais_check,
    stable_index,
    subalgebra_restrict,
    twilled_truncate,
)
from .nijenhuis import (
    BracketPencil,
    pencil_of,
    require_nijenhuis,
    spectrum_and_eigenspaces,
)
from .pencil import (
    corollary_condition,
    cross_check,
    kronecker_certify,
    pencil_rank_at,
    theorem_criterion,
)
from .serialize import (
    algebra_to_json,
    family_from_json,
    family_to_json,
    load_json,
    matrix_from_json,
    operator_to_json,
    pencil_from_json,
    pencil_to_json,
    read_algebra,
    read_operator,
    subspace_from_json,
)

log = get_logger()

Report = Tuple[object, bool]


def _rationals(s: str) -> list:
    'argparse type: "1,2,-1/2"'
    try:
        return [parse_rational(x) for x in s.split(',')]
    except ValueError as ex:
        raise argparse.ArgumentTypeError(str(ex)) from ex


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ', '.join('--' + n.replace('_', '-') for n in missing)
        raise InvalidParams(f'{args.command} needs {flags}')


def _algebra_and_operator(args):
    if getattr(args, 'pencil', None) is not None:
        p = pencil_from_json(load_json(args.pencil))
        if p.operator is None:
            raise InvalidParams(f'{args.pencil} carries no operator')
        return p.c1, [list(r) for r in p.operator]
    _need(args, 'input', 'operator')
    c = read_algebra(args.input)
    return c, read_operator(args.operator, c.dim)


def _pencil(args) -> BracketPencil:
    if args.pencil is not None:
        return pencil_from_json(load_json(args.pencil))
    return pencil_of(*_algebra_and_operator(args))


def _family(path: Path):
    return family_from_json(load_json(path))


def cmd_validate(args, cfg: RunConfig) -> Report:
    c = read_algebra(args.input)
    violations = check_jacobi(c)
    report = {
        'dim': c.dim,
        'jacobi': 'FAILS' if violations else 'OK',
        'jacobi_violations': violations,
    }
    ok = not violations
    if args.operator is not None:
        N = read_operator(args.operator, c.dim)
        try:
            require_nijenhuis(c, N)
        except TorsionNonzero as ex:
            report['torsion'] = 'NONZERO'
            report['torsion_witness'] = ex.witness
            ok = False
        else:
            report['torsion'] = 'ZERO'
            try:
                report['spectrum'] = spectrum_and_eigenspaces(N)
            except IrrationalSpectrum as ex:
                report['spectrum_factors'] = ex.witness['factors']
    report['verdict'] = 'VALID' if ok else 'INVALID'
    return report, ok


def cmd_pencil(args, cfg: RunConfig) -> Report:
    p = _pencil(args)  # Jacobi on three members is checked on construction
    if args.save is not None:
        args.save.write_text(dump_canonical(pencil_to_json(p)))
        log.info(f'Wrote pencil to {args.save}')
    return {'verdict': 'COMPATIBLE', 'pencil': p}, True


def cmd_rank_profile(args, cfg: RunConfig) -> Report:
    p = _pencil(args)
    if args.s is not None or args.xi is not None:
        _need(args, 's', 'xi')
        if len(args.s) != 2:
            raise InvalidParams('--s takes two values', s=args.s)
        r = pencil_rank_at(p, args.s, args.xi)
        return {'s': args.s, 'xi': args.xi, 'rank': r}, True
    # The profile is informational here; `kronecker` turns it into a verdict
    return kronecker_certify(p, cfg.sampler, cfg.threads), True


def cmd_kronecker(args, cfg: RunConfig) -> Report:
    profile = kronecker_certify(_pencil(args), cfg.sampler, cfg.threads)
    return profile, profile.certified


def cmd_corollary(args, cfg: RunConfig) -> Report:
    report = corollary_condition(*_algebra_and_operator(args), cfg.sampler)
    return report, report.holds


def cmd_criterion(args, cfg: RunConfig) -> Report:
    c, N = _algebra_and_operator(args)
    report = theorem_criterion(c, N, cfg.sampler, cfg.search_budget)
    return report, report.holds


def cmd_cross_check(args, cfg: RunConfig) -> Report:
    c, N = _algebra_and_operator(args)
    report = cross_check(c, N, cfg.sampler, cfg.search_budget)
    return report, report.agree


def cmd_integrals(args, cfg: RunConfig) -> Report:
    if args.family == 'casimir-expansion':
        _need(args, 'casimirs')
        c, N = _algebra_and_operator(args)
        max_l = c.dim if args.max_l is None else args.max_l
        F = casimir_resolvent_family(c, N, _family(args.casimirs).polys, max_l)
    else:
        _need(args, 'n')
        if args.family == 'manakov':
            F = manakov_family(args.n, args.a)
        elif args.family == 'resolvent':
            F = resolvent_family(args.n, args.a, args.max_l, args.extended)
        else:
            F = borel_family(args.n)
    return family_to_json(F), True


def cmd_involution(args, cfg: RunConfig) -> Report:
    report = involutivity_check(_family(args.family), _pencil(args))
    return report, report.holds


def cmd_completeness(args, cfg: RunConfig) -> Report:
    report = completeness_rank(_family(args.family), _pencil(args), cfg.sampler)
    return report, report.complete


def cmd_equivalence(args, cfg: RunConfig) -> Report:
    report = family_span_equivalence(
        _family(args.family), _family(args.other), cfg.sampler
    )
    return report, report.equivalent


def cmd_lenard(args, cfg: RunConfig) -> Report:
    report = lenard_check(args.n, args.a)
    return report, report.holds


def cmd_rais(args, cfg: RunConfig) -> Report:
    c = read_algebra(args.input)
    if args.action is not None:
        d = load_json(args.action)
        dim_v = d.get('dim_v') if isinstance(d, dict) else None
        if not isinstance(dim_v, int) or isinstance(dim_v, bool) or dim_v < 0:
            raise InvalidParams(f'{args.action}: dim_v must be an integer')
        mats = d.get('matrices')
        if not isinstance(mats, list):
            raise InvalidParams(f'{args.action}: matrices must be a list')
        action = [
            matrix_from_json(m, f'/matrices/{i}', dim_v)
            for i, m in enumerate(mats)
        ]
        mode = 'semidirect'
    else:
        _need(args, 'b1', 'b2')
        B1 = subspace_from_json(load_json(args.b1), c.dim)
        B2 = subspace_from_json(load_json(args.b2), c.dim)
        tw = twilled_truncate(c, B1, B2)
        c, action, dim_v = subalgebra_restrict(c, B1), tw.a1, len(B2)
        mode = 'twilled-truncation'
    report = rais_check(c, action, dim_v, cfg.sampler)
    return {'mode': mode, 'check': report}, report.holds


def cmd_index(args, cfg: RunConfig) -> Report:
    res, rounds = stable_index(read_algebra(args.input), cfg.sampler)
    return {'index': res, 'rounds': rounds}, True


def _catalog_param(s: str):
    'key=value, where value is a rational, a comma list, or JSON'
    key, sep, value = s.partition('=')
    if not sep or not key:
        raise InvalidParams(f'Expected key=value, got {s!r}')
    try:
        if ',' in value and not value.lstrip().startswith('['):
            return key, [parse_rational(x) for x in value.split(',')]
        return key, parse_rational(value)
    except ValueError:
        pass
    try:
        return key, json.loads(value)
    except json.JSONDecodeError as ex:
        raise InvalidParams(f'Cannot parse {key}={value!r}') from ex


def cmd_catalog(args, cfg: RunConfig) -> Report:
    if args.action == 'list':
        return {'entries': {k: p for k, (_, p) in NAMES.items()}}, True
    _need(args, 'name')
    entry = build(args.name, **dict(map(_catalog_param, args.params)))
    if args.action == 'show':
        return entry, True
    if args.operator_out is not None:
        if entry.operator is None:
            raise InvalidParams(f'{args.name} has no operator to emit')
        args.operator_out.write_text(
            dump_canonical(operator_to_json(entry.operator))
        )
    if args.pencil_out is not None:
        if entry.pencil is None:
            raise InvalidParams(f'{args.name} has no pencil to emit')
        args.pencil_out.write_text(dump_canonical(pencil_to_json(entry.pencil)))
    return algebra_to_json(entry.algebra), True


def _input_args(sp: argparse.ArgumentParser):
    sp.add_argument('-i', '--input', type=Path, help='Algebra JSON')
    sp.add_argument('-N', '--operator', type=Path, help='Operator JSON')
    sp.add_argument('--pencil', type=Path, help='Pencil JSON')


def _family_args(sp: argparse.ArgumentParser):
    sp.add_argument('--family', type=Path, required=True)
    _input_args(sp)


def _n_and_a(sp: argparse.ArgumentParser, required: bool):
    sp.add_argument('--n', type=int, required=required)
    sp.add_argument('--a', type=_rationals, help='Diagonal of A, e.g. 1,2,3')


def _add_validate(sp):
    sp.add_argument('-i', '--input', type=Path, required=True)
    sp.add_argument('-N', '--operator', type=Path, help='Operator JSON')


def _add_pencil(sp):
    _input_args(sp)
    sp.add_argument('--save', type=Path, help='Write the pencil JSON here')


def _add_rank_profile(sp):
    _input_args(sp)
    sp.add_argument('--s', type=_rationals, help='Member, e.g. --s=-1,1')
    sp.add_argument('--xi', type=_rationals, help='Point of g*')


def _add_integrals(sp):
    sp.add_argument(
        'family', choices=['manakov', 'resolvent', 'borel', 'casimir-expansion']
    )
    _n_and_a(sp, required=False)
    sp.add_argument('--max-l', type=int)
    sp.add_argument('--extended', action='store_true')
    sp.add_argument('--casimirs', type=Path, help='Family JSON of Casimirs')
    _input_args(sp)


def _add_equivalence(sp):
    sp.add_argument('--family', type=Path, required=True)
    sp.add_argument('--other', type=Path, required=True)


def _add_lenard(sp):
    _n_and_a(sp, required=True)


def _add_rais(sp):
    sp.add_argument('-i', '--input', type=Path, required=True)
    sp.add_argument('--action', type=Path, help='{"dim_v", "matrices"} JSON')
    sp.add_argument('--b1', type=Path, help='Subspace JSON')
    sp.add_argument('--b2', type=Path, help='Subspace JSON')


def _add_index(sp):
    sp.add_argument('-i', '--input', type=Path, required=True)


def _add_catalog(sp):
    sp.add_argument('action', choices=['list', 'show', 'emit'])
    sp.add_argument('name', nargs='?')
    sp.add_argument('params', nargs='*', help='key=value')
    sp.add_argument('-N', dest='operator_out', type=Path)
    sp.add_argument('--pencil-out', type=Path)


# name -> (handler, argument setup, help)
COMMANDS: Dict[str, Tuple[Callable[..., Report], Callable, str]] = {
    'validate': (cmd_validate, _add_validate, 'Jacobi identity and torsion'),
    'pencil': (cmd_pencil, _add_pencil, 'Build and validate a pencil'),
    'rank-profile': (
        cmd_rank_profile,
        _add_rank_profile,
        'Ranks of the pencil members',
    ),
    'kronecker': (cmd_kronecker, _input_args, 'Certify a Kronecker pencil'),
    'corollary': (cmd_corollary, _input_args, 'ind + codim of each image'),
    'criterion': (cmd_criterion, _input_args, 'Search coisotropy covectors'),
    'cross-check': (
        cmd_cross_check,
        _input_args,
        'Rank certificate against the covector criterion',
    ),
    'integrals': (cmd_integrals, _add_integrals, 'Emit a family as JSON'),
    'involution': (cmd_involution, _family_args, 'Pairwise brackets'),
    'completeness': (cmd_completeness, _family_args, 'Differential rank'),
    'equivalence': (cmd_equivalence, _add_equivalence, 'Same span?'),
    'lenard': (cmd_lenard, _add_lenard, 'Recursion relations on gl(n)'),
    'rais': (cmd_rais, _add_rais, 'Index of a semidirect product'),
    'index': (cmd_index, _add_index, 'Index with doubling coord bound'),
    'catalog': (cmd_catalog, _add_catalog, 'Standard algebras and pencils'),
}


def _render_text(report) -> str:
    data = to_jsonable(report)
    if not isinstance(data, dict):
        return json.dumps(data, sort_keys=True) + '\n'
    lines = []
    for key in sorted(data):
        v = data[key]
        if isinstance(v, (dict, list)):
            v = json.dumps(v, sort_keys=True)
        lines.append(f'{key}: {v}')
    return '\n'.join(lines) + '\n'


def _write(report, output: Optional[Path], fmt: str):
    text = _render_text(report) if fmt == 'text' else dump_canonical(report)
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def run(argv: Optional[List[str]] = None, description: str = __doc__) -> int:
    try:
        with init_cli(description, argv) as cli:
            sub = cli.parser.add_subparsers(dest='command', required=True)
            for name, (handler, setup, text) in COMMANDS.items():
                sp = sub.add_parser(name, help=text, parents=[cli.common])
                setup(sp)
                sp.set_defaults(handler=handler)
    except SystemExit as ex:  # argparse usage errors exit 2, --help exits 0
        return ex.code
    args = cli.args
    try:
        cfg = RunConfig.from_args(args)
        report, ok = args.handler(args, cfg)
    except InputError as ex:
        log.error(f'{type(ex).__name__}: {ex}')
        _write(ex.payload(), args.output, args.format)
        return 2
    except VerificationError as ex:
        log.error(f'{type(ex).__name__}: {ex}')
        _write(ex.payload(), args.output, args.format)
        return 1
    _write(report, args.output, args.format)
    log.info(f'{args.command}: exit {0 if ok else 1}')
    return 0 if ok else 1


_DATA = Path(__file__).resolve().parent.parent / 'testdata'
_FAST = ('--samples', '16', '--coord-bound', '100')


def _run(*argv) -> int:
    return run(['pforge.py', *(str(a) for a in argv)])


def _report(td: Path, *argv) -> Tuple[int, dict]:
    out = td / 'report.json'
    code = _run(*argv, *_FAST, '-o', out)
    return code, json.loads(out.read_text())


def _gl2():
    return ('-i', _DATA / 'gl2.json', '-N', _DATA / 'la.json')


def _sl2_borel():
    return ('-i', _DATA / 'sl2.json', '-N', _DATA / 'borel.json')


def test_kronecker_is_deterministic():
    with temp_dir() as td:
        outs = []
        for name in ['a.json', 'b.json']:
            code = _run('kronecker', *_gl2(), *_FAST, '-o', td / name)
            assert code == 0, code
            outs.append((td / name).read_bytes())
        assert outs[0] == outs[1]
        report = json.loads(outs[0])
        assert report['verdict'] == 'CERTIFIED_KRONECKER', report
        assert report['generic_rank'] == 2
        assert [m['member'] for m in report['per_exceptional']] == ['1', '2']

        args = ('kronecker', *_gl2(), *_FAST, '--format', 'text')
        assert _run(*args, '-o', td / 't') == 0
        text = (td / 't').read_text()
        assert 'verdict: CERTIFIED_KRONECKER\n' in text, text


def test_input_errors_exit_2():
    with temp_dir() as td:
        code, report = _report(td, 'validate', '-i', _DATA / 'bad.json')
        assert code == 2
        assert report['error'] == 'MalformedInput'
        assert report['witness']['pointer'] == '/brackets/1'

        code, report = _report(td, 'kronecker', '-i', _DATA / 'gl2.json')
        assert (code, report['error']) == (2, 'InvalidParams'), report
        code, report = _report(td, 'index', '-i', td / 'missing.json')
        assert (code, report['error']) == (2, 'MalformedInput'), report
        code, report = _report(td, 'kronecker', *_gl2(), '--budget', '0')
        assert (code, report['error']) == (2, 'InvalidParams'), report
        code, report = _report(td, 'integrals', 'manakov')
        assert (code, report['error']) == (2, 'InvalidParams'), report
        code, report = _report(td, 'catalog', 'emit', 'e8')
        assert (code, report['error']) == (2, 'UnknownCatalogEntry'), report
    assert _run('no-such-command') == 2
    assert _run('kronecker', '--samples', 'many') == 2


def test_bad_thread_count_exits_2(monkeypatch):
    index = ('index', '-i', _DATA / 'sl2.json')
    with temp_dir() as td:
        for bad in ['abc', '-1']:
            monkeypatch.setenv('PFORGE_THREADS', bad)
            code, report = _report(td, *index)
            assert (code, report['error']) == (2, 'InvalidParams'), report
            assert report['witness'] == {'PFORGE_THREADS': bad}
        monkeypatch.setenv('PFORGE_THREADS', '1')
        code, report = _report(td, *index)
        assert code == 0, report


def test_validate():
    with temp_dir() as td:
        code, report = _report(td, 'validate', *_sl2_borel())
        assert code == 0, report
        assert (report['jacobi'], report['torsion']) == ('OK', 'ZERO')
        assert [e['eigenvalue'] for e in report['spectrum']] == [-1, 1]

        bad_op = ('-i', _DATA / 'sl2.json', '-N', _DATA / 'nonnijenhuis.json')
        code, report = _report(td, 'validate', *bad_op)
        assert code == 1, report
        assert report['verdict'] == 'INVALID'
        witness = report['torsion_witness']
        assert witness == {'pair': [0, 2], 'value': [0, -1, 0]}, witness


def test_coisotropy_commands():
    with temp_dir() as td:
        code, report = _report(td, 'criterion', *_sl2_borel())
        assert code == 0, report
        assert report['verdict'] == 'FOUND_ALL'
        assert len(report['per_eigenvalue']) == 2
        assert all(e['covector'] is not None for e in report['per_eigenvalue'])

        # n- fails ind + codim = ind g although the pencil is Kronecker
        code, report = _report(td, 'corollary', *_sl2_borel())
        assert (code, report['verdict']) == (1, 'FAILS'), report
        code, report = _report(td, 'corollary', *_gl2())
        assert (code, report['verdict']) == (0, 'HOLDS'), report

        code, report = _report(td, 'cross-check', *_sl2_borel())
        assert (code, report['verdict']) == (0, 'AGREE'), report
        assert report['kronecker'] == 'CERTIFIED_KRONECKER'


def test_catalog_and_pencil_files():
    with temp_dir() as td:
        code, report = _report(td, 'catalog', 'list')
        assert code == 0 and 'left_mult' in report['entries']
        code, report = _report(td, 'catalog', 'show', 'borel_projector', 'n=2')
        assert code == 0 and report['dim'] == 3, report

        alg, op = td / 'alg.json', td / 'op.json'
        args = ('catalog', 'emit', 'left_mult', 'n=2', 'a=1,2', '-N', op)
        assert _run(*args, '-o', alg) == 0
        assert read_algebra(alg) == read_algebra(_DATA / 'gl2.json')
        assert read_operator(op, 4) == read_operator(_DATA / 'la.json', 4)

        pencil = td / 'pencil.json'
        code, report = _report(td, 'pencil', *_gl2(), '--save', pencil)
        assert (code, report['verdict']) == (0, 'COMPATIBLE'), report
        assert report['pencil']['exceptional'] == [1, 2]
        at = ('--s', '1,0', '--xi', '1,2,3,5')
        code, report = _report(td, 'rank-profile', '--pencil', pencil, *at)
        assert (code, report['rank']) == (0, 2), report
        code, report = _report(td, 'kronecker', '--pencil', pencil)
        assert (code, report['verdict']) == (0, 'CERTIFIED_KRONECKER')


def test_integral_families():
    with temp_dir() as td:
        h, f, b = td / 'h.json', td / 'f.json', td / 'b.json'
        assert _run('integrals', 'manakov', '--n', 2, '-o', h) == 0
        assert _run('integrals', 'resolvent', '--n', 2, '-o', f) == 0
        assert _run('integrals', 'borel', '--n', 2, '-o', b) == 0
        assert len(json.loads(h.read_text())['members']) == 3

        code, report = _report(td, 'involution', '--family', h, *_gl2())
        assert (code, report['verdict']) == (0, 'INVOLUTIVE'), report
        code, report = _report(td, 'completeness', '--family', h, *_gl2())
        assert (code, report['verdict']) == (0, 'COMPLETE'), report
        assert report['target'] == 3
        code, report = _report(td, 'equivalence', '--family', h, '--other', f)
        assert (code, report['verdict']) == (0, 'EQUIVALENT'), report

        code, report = _report(td, 'involution', '--family', b, *_sl2_borel())
        assert (code, report['verdict']) == (0, 'INVOLUTIVE'), report
        casimirs = ('--casimirs', _DATA / 'sl2_casimir.json', '--max-l', 2)
        args = ('integrals', 'casimir-expansion', *_sl2_borel(), *casimirs)
        code, report = _report(td, *args)
        assert code == 0, report
        assert report['provenance'] == 'casimir-expansion'
        assert report['members'], report


def test_lenard_index_rais():
    with temp_dir() as td:
        code, report = _report(td, 'lenard', '--n', 2)
        assert (code, report['verdict']) == (0, 'HOLDS'), report
        code, report = _report(td, 'index', '-i', _DATA / 'sl2.json')
        assert (code, report['index']['index']) == (0, 1), report

        action = ('--action', _DATA / 'scaling.json')
        code, report = _report(td, 'rais', '-i', _DATA / 'line.json', *action)
        assert (code, report['check']['verdict']) == (0, 'EQUAL'), report
        split = ('--b1', _DATA / 'b_plus.json', '--b2', _DATA / 'n_minus.json')
        code, report = _report(td, 'rais', '-i', _DATA / 'sl2.json', *split)
        assert (code, report['mode']) == (0, 'twilled-truncation'), report
