'''
Constructors for the standard algebras, operators and pencils. Every entry is
validated on construction: Jacobi for the algebra, zero torsion for the
operator, and Jacobi on three members for the pencil.

Matrix algebras keep their basis matrices (`CatalogEntry.matrices`) so that
trace-form functions can be written on their duals.

Bases:
  gl(n)   E_ij, row-major, labels "E11", "E12", ...
  sl(n)   upper E_ij (i < j), then H_i = E_ii - E_{i+1,i+1}, then lower E_ij;
          for n = 2 this is (e, h, f)
  so(n)   E_ij - E_ji for i < j
'''

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .common import Rational, get_logger, rat, rational_str
from .errors import (
    InvalidParams,
    JacobiFailure,
    NotASubalgebra,
    UnknownCatalogEntry,
)
from .exact import Matrix, SpanCoordinates, inverse, nullspace, to_array
from .lie import StructureConstants, check_jacobi
from .nijenhuis import BracketPencil, pencil_of, rational_spectrum

log = get_logger()

MatrixBasis = Tuple[Tuple[Tuple[Rational, ...], ...], ...]


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    params: Dict[str, object]
    algebra: StructureConstants
    operator: Optional[Matrix] = None
    pencil: Optional[BracketPencil] = None
    matrices: Optional[MatrixBasis] = None
    notes: Tuple[str, ...] = field(default=())

    def to_json(self):
        return {
            'name': self.name,
            'params': self.params,
            'dim': self.algebra.dim,
            'labels': list(self.algebra.labels),
            'has_operator': self.operator is not None,
            'pencil': self.pencil,
            'notes': list(self.notes),
        }


def _commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def from_matrix_basis(
    mats: Sequence,
    product: Callable[[np.ndarray, np.ndarray], np.ndarray] = _commutator,
    labels: Sequence[str] = (),
) -> StructureConstants:
    '''
    Structure constants of span(mats) under `product`. Closure is checked:
    `NotASubalgebra` carries the first pair whose product leaves the span,
    and `JacobiFailure` the violations of a non-Lie product.
    '''
    arrs = [to_array(m) for m in mats]
    m = len(arrs)
    size = arrs[0].shape[0] if m else 0
    flat = [[rat(x) for x in a.flat] for a in arrs]
    coords = SpanCoordinates(flat, size * size)
    c = np.zeros((m, m, m), dtype=object)
    for a in range(m):
        for b in range(a + 1, m):
            prod = [rat(x) for x in product(arrs[a], arrs[b]).flat]
            y = coords.coordinates(prod)
            if y is None:
                raise NotASubalgebra(
                    f'Product of basis matrices {a + 1}, {b + 1} leaves span',
                    pair=[a, b],
                    bracket=prod,
                )
            c[a, b] = y
            c[b, a] = [rat(-x) for x in y]
    out = StructureConstants.from_tensor(c, labels)
    violations = check_jacobi(out)
    if violations:
        raise JacobiFailure(
            'Product of basis matrices fails Jacobi', violations=violations
        )
    return out


def _unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=object)
    e[i, j] = 1
    return e


def _frozen(mats) -> MatrixBasis:
    return tuple(tuple(tuple(rat(x) for x in row) for row in m) for m in mats)


def _check_n(n: int, least: int = 1):
    if not isinstance(n, int) or n < least:
        raise InvalidParams(f'n must be an integer >= {least}, got {n!r}')


def gl_matrices(n: int) -> List[np.ndarray]:
    return [_unit(n, i, j) for i in range(n) for j in range(n)]


def sl_matrices(n: int) -> Tuple[List[np.ndarray], List[str]]:
    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    lower = [(i, j) for i in range(n) for j in range(i)]
    mats = [_unit(n, i, j) for i, j in upper]
    labels = [f'E{i + 1}{j + 1}' for i, j in upper]
    for i in range(n - 1):
        mats.append(_unit(n, i, i) - _unit(n, i + 1, i + 1))
        labels.append(f'H{i + 1}')
    mats += [_unit(n, i, j) for i, j in lower]
    labels += [f'E{i + 1}{j + 1}' for i, j in lower]
    return mats, labels


@lru_cache(maxsize=None)
def gl(n: int) -> CatalogEntry:
    _check_n(n)
    mats = gl_matrices(n)
    labels = [f'E{i + 1}{j + 1}' for i in range(n) for j in range(n)]
    return CatalogEntry(
        'gl',
        {'n': n},
        from_matrix_basis(mats, labels=labels),
        matrices=_frozen(mats),
    )


@lru_cache(maxsize=None)
def sl(n: int) -> CatalogEntry:
    _check_n(n, 2)
    mats, labels = sl_matrices(n)
    return CatalogEntry(
        'sl',
        {'n': n},
        from_matrix_basis(mats, labels=labels),
        matrices=_frozen(mats),
    )


@lru_cache(maxsize=None)
def so(n: int) -> CatalogEntry:
    _check_n(n, 2)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mats = [_unit(n, i, j) - _unit(n, j, i) for i, j in pairs]
    labels = [f'A{i + 1}{j + 1}' for i, j in pairs]
    return CatalogEntry(
        'so',
        {'n': n},
        from_matrix_basis(mats, labels=labels),
        matrices=_frozen(mats),
    )


def square_matrix(
    a, n: int, what: str
) -> Tuple[Tuple[Rational, ...], ...]:
    'A diagonal given as a flat list, or a full n x n matrix.'
    if a is None:
        a = list(range(1, n + 1))
    a = list(a)
    if a and not isinstance(a[0], (list, tuple, np.ndarray)):
        if len(a) != n:
            raise InvalidParams(f'{what} needs {n} diagonal entries')
        a = [[a[i] if i == j else 0 for j in range(n)] for i in range(n)]
    rows = tuple(tuple(rat(x) for x in row) for row in a)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidParams(f'{what} must be {n} x {n}')
    return rows


def is_diagonal(a) -> bool:
    return all(
        not x for i, row in enumerate(a) for j, x in enumerate(row) if i != j
    )


def _params_json(a) -> List[List[str]]:
    return [[rational_str(x) for x in row] for row in a]


def left_mult_operator(a) -> Matrix:
    'L_A on gl(n), basis E_ij row-major: L_A E_kc = Σ_i A_ik E_ic'
    n = len(a)
    N = [[0] * (n * n) for _ in range(n * n)]
    for i in range(n):
        for k in range(n):
            for col in range(n):
                N[i * n + col][k * n + col] = rat(a[i][k])
    return N


def left_mult(n: int, a=None, general: bool = False) -> CatalogEntry:
    '''
    gl(n) with N = L_A. A defaults to diag(1, ..., n); a non-diagonal A is
    rejected unless `general` is set.
    '''
    _check_n(n)
    return _left_mult(n, square_matrix(a, n, 'A'), general)


@lru_cache(maxsize=None)
def _left_mult(n: int, a, general: bool) -> CatalogEntry:
    if not general and not is_diagonal(a):
        raise InvalidParams(
            'left_mult expects a diagonal A (pass general=True otherwise)',
            a=_params_json(a),
        )
    base = gl(n)
    N = left_mult_operator(a)
    notes = ()
    diag = [a[i][i] for i in range(n)]
    if is_diagonal(a) and len(set(diag)) < n:
        notes = ('A has repeated eigenvalues',)
    return CatalogEntry(
        'left_mult',
        {'n': n, 'a': _params_json(a)},
        base.algebra,
        N,
        pencil_of(base.algebra, N),
        base.matrices,
        notes,
    )


def borel_operator(n: int, lam1: Rational, lam2: Rational) -> Matrix:
    'λ1 on n- (strictly lower), λ2 on b+ (upper and diagonal) in the sl basis'
    upper = n * (n - 1) // 2
    dim = n * n - 1
    diag = [lam2] * (dim - upper) + [lam1] * upper
    return [[diag[i] if i == j else 0 for j in range(dim)] for i in range(dim)]


def borel_projector(
    n: int, lam1: Rational = 1, lam2: Rational = -1
) -> CatalogEntry:
    _check_n(n, 2)
    return _borel_projector(n, rat(lam1), rat(lam2))


@lru_cache(maxsize=None)
def _borel_projector(n: int, lam1: Rational, lam2: Rational) -> CatalogEntry:
    if lam1 == lam2:
        raise InvalidParams('λ1 and λ2 must differ', lam=[lam1, lam2])
    base = sl(n)
    N = borel_operator(n, lam1, lam2)
    return CatalogEntry(
        'borel_projector',
        {'n': n, 'lam1': lam1, 'lam2': lam2},
        base.algebra,
        N,
        pencil_of(base.algebra, N),
        base.matrices,
    )


@lru_cache(maxsize=None)
def sl2_projector() -> CatalogEntry:
    'The projector onto n- along b+ in sl(2): eigenvalue 1 on f, 0 on e, h'
    base = sl(2)
    N = [[0, 0, 0], [0, 0, 0], [0, 0, 1]]
    return CatalogEntry(
        'sl2_projector',
        {},
        base.algebra,
        N,
        pencil_of(base.algebra, N),
        base.matrices,
    )


def outer_pencil(n: int, a=None, i_mat=None, j_mat=None) -> CatalogEntry:
    '''
    g_I = {B : BI + IB* = 0} with B* = J Bᵀ J^{-1}, and the pencil of the
    commutator with [B, C]_A = BAC - CAB restricted to g_I. Requires
    AI = IA*. I = J = Id gives so(n) with the rigid-body pencil.
    '''
    _check_n(n, 2)
    a = square_matrix(a, n, 'A')
    i_mat = square_matrix([1] * n if i_mat is None else i_mat, n, 'I')
    j_mat = square_matrix([1] * n if j_mat is None else j_mat, n, 'J')
    return _outer_pencil(n, a, i_mat, j_mat)


@lru_cache(maxsize=None)
def _outer_pencil(n: int, a, i_mat, j_mat) -> CatalogEntry:
    A, Im, J = to_array(a), to_array(i_mat), to_array(j_mat)
    j_inv = inverse([list(r) for r in j_mat])
    if j_inv is None:
        raise InvalidParams('J must be invertible')
    J_inv = to_array(j_inv)

    def star(b):
        return J @ b.T @ J_inv

    # (BC)* = C*B* holds for every invertible J
    if np.any(A @ Im - Im @ star(A) != 0):
        raise InvalidParams('A must satisfy AI = IA*', a=_params_json(a))
    # g_I as the kernel of B -> BI + IB* on the coordinates of gl(n)
    units = gl_matrices(n)
    images = [u @ Im + Im @ star(u) for u in units]
    rows = [
        [rat(img[r, s]) for img in images]
        for r in range(n)
        for s in range(n)
    ]
    basis = [
        sum((x * u for x, u in zip(v, units)), np.zeros((n, n), dtype=object))
        for v in nullspace(rows, n * n)
    ]
    if not basis:
        raise InvalidParams('g_I is zero', i=_params_json(i_mat))
    c1 = from_matrix_basis(basis)
    c2 = from_matrix_basis(basis, lambda b, c: b @ A @ c - c @ A @ b)
    if is_diagonal(a):
        exceptional = tuple(sorted({a[k][k] for k in range(n)}))
    else:
        exceptional = tuple(lam for lam, _ in rational_spectrum(a))
    pencil = BracketPencil(c1, c2, exceptional, 'outer')
    return CatalogEntry(
        'outer_pencil',
        {
            'n': n,
            'a': _params_json(a),
            'i': _params_json(i_mat),
            'j': _params_json(j_mat),
        },
        c1,
        None,
        pencil,
        _frozen(basis),
        ('no inner operator: the rank profile is empirical',),
    )


def trace_matrices(entry: CatalogEntry) -> MatrixBasis:
    if entry.matrices is None:
        raise InvalidParams(f'{entry.name} is not built from matrices')
    return entry.matrices


# name -> (constructor, parameter help)
NAMES: Dict[str, Tuple[Callable[..., CatalogEntry], str]] = {
    'gl': (gl, 'n'),
    'sl': (sl, 'n >= 2'),
    'so': (so, 'n >= 2'),
    'left_mult': (left_mult, 'n, a=diagonal or matrix, general=false'),
    'borel_projector': (borel_projector, 'n >= 2, lam1=1, lam2=-1'),
    'sl2_projector': (sl2_projector, 'no parameters'),
    'outer_pencil': (outer_pencil, 'n >= 2, a, i_mat=Id, j_mat=Id'),
}


def build(name: str, **params) -> CatalogEntry:
    if name not in NAMES:
        raise UnknownCatalogEntry(
            f'Unknown catalog entry {name!r}', known=sorted(NAMES)
        )
    fn, _ = NAMES[name]
    try:
        entry = fn(**params)
    except TypeError as ex:
        raise InvalidParams(f'Bad parameters for {name}: {ex}') from ex
    log.debug(f'Built catalog entry {name} {params}')
    return entry


def test_classical_algebras():
    from .common import PointSamplerConfig
    from .lie import algebra_index

    cfg = PointSamplerConfig(seed=5, samples=16, coord_bound=100)
    for n, index in [(2, 2), (3, 3)]:
        assert check_jacobi(gl(n).algebra) == []
        assert algebra_index(gl(n).algebra, cfg).index == index
    sl2 = sl(2).algebra
    assert sl2.dim == 3 and sl2.labels == ('E12', 'H1', 'E21')
    assert check_jacobi(sl2) == []
    assert algebra_index(sl2, cfg).index == 1
    assert algebra_index(sl(3).algebra, cfg).index == 2
    # [h, e] = 2e, [e, f] = h
    assert sl2.c[1, 0, 0] == 2 and sl2.c[0, 2, 1] == 1
    assert check_jacobi(so(4).algebra) == []
    assert algebra_index(so(3).algebra, cfg).index == 1


def test_frobenius_zero_row_subalgebras():
    from .common import PointSamplerConfig
    from .lie import algebra_index, subalgebra_restrict

    cfg = PointSamplerConfig(seed=1, samples=8, coord_bound=100)
    for n in range(2, 5):
        for i in range(n):
            rows = [
                [int(k == r * n + s) for k in range(n * n)]
                for r in range(n)
                for s in range(n)
                if r != i
            ]
            sub = subalgebra_restrict(gl(n).algebra, rows)
            assert algebra_index(sub, cfg).index == 0, (n, i)


def test_left_mult_eigenspaces_are_row_supported():
    from .nijenhuis import spectrum_and_eigenspaces

    e = left_mult(3, (1, 2, 3))
    for i, space in enumerate(spectrum_and_eigenspaces(e.operator)):
        assert space.eigenvalue == i + 1 and space.multiplicity == 3
        for v in space.basis:
            nonzero_rows = {k // 3 for k, x in enumerate(v) if x}
            assert nonzero_rows <= {i}
    assert e.pencil.exceptional == (1, 2, 3)
    assert left_mult(2, (1, 1)).notes == ('A has repeated eigenvalues',)
    assert left_mult(2) is left_mult(2, (1, 2))


def test_projectors():
    from .common import PointSamplerConfig
    from .lie import algebra_index, subalgebra_restrict
    from .nijenhuis import deformed_bracket, image_subalgebra

    cfg = PointSamplerConfig(seed=2, samples=16, coord_bound=100)
    b = borel_projector(3)
    assert b.pencil.exceptional == (-1, 1)
    assert len(b.operator) == 8
    p = sl2_projector()
    deformed = deformed_bracket(p.algebra, p.operator)
    assert not deformed.is_abelian()
    # Heisenberg: generic coadjoint orbits are 2-dimensional
    assert algebra_index(deformed, cfg).index == 1
    # ... while im N = n- only has point orbits
    im = image_subalgebra(p.algebra, p.operator, 0)
    assert len(im) == 1
    n_minus = subalgebra_restrict(p.algebra, im)
    assert n_minus.is_abelian()
    assert algebra_index(n_minus, cfg).index == n_minus.dim


def test_outer_pencil():
    from .common import PointSamplerConfig
    from .lie import algebra_index

    cfg = PointSamplerConfig(seed=4, samples=16, coord_bound=100)
    e = outer_pencil(3, (1, 2, 3))
    assert e.algebra.dim == 3
    assert check_jacobi(e.pencil.c1) == [] and check_jacobi(e.pencil.c2) == []
    assert e.pencil.exceptional == (1, 2, 3)
    assert algebra_index(e.pencil.c1, cfg).index == 1
    assert algebra_index(e.pencil.c2, cfg).index == 1
    assert outer_pencil(4, (1, 2, 3, 4)).algebra.dim == 6
    try:
        outer_pencil(2, ((1, 1), (0, 2)))
    except InvalidParams:
        pass
    else:
        raise AssertionError('A with AI != IA* accepted')


def test_build_errors():
    assert build('sl', n=2) is sl(2)
    for name, params, err in [
        ('e8', {}, UnknownCatalogEntry),
        ('left_mult', {'n': 2, 'a': ((1, 1), (0, 2))}, InvalidParams),
        ('gl', {'n': 0}, InvalidParams),
        ('gl', {'m': 2}, InvalidParams),
    ]:
        try:
            build(name, **params)
        except err:
            pass
        else:
            raise AssertionError(f'{name} {params} accepted')
    try:
        from_matrix_basis([_unit(2, 0, 1), _unit(2, 1, 0)])
    except NotASubalgebra as ex:
        assert ex.witness['pair'] == [0, 1]
    else:
        raise AssertionError('span(E12, E21) accepted')
    assert trace_matrices(gl(2))[1] == ((0, 1), (0, 0))


def test_matrix_basis_rejects_non_lie_products():
    # On diagonal matrices: [d1,d2] = d3, [d2,d3] = d2, [d3,d1] = d2
    def product(x, y):
        a, b = x.diagonal(), y.diagonal()
        out = np.zeros((3, 3), dtype=object)
        out[1, 1] = a[1] * b[2] - a[2] * b[1] + a[2] * b[0] - a[0] * b[2]
        out[2, 2] = a[0] * b[1] - a[1] * b[0]
        return out

    diag = [_unit(3, i, i) for i in range(3)]
    try:
        from_matrix_basis(diag, product)
    except JacobiFailure as ex:
        bad = ex.witness['violations']
        assert bad and all(v['kind'] == 'jacobi' for v in bad)
    else:
        raise AssertionError('non-Lie product accepted')
    assert from_matrix_basis(diag).is_abelian()
