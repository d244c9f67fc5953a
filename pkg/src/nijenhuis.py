'''
Nijenhuis operators on a Lie algebra and the bracket pencils they generate.

An operator N acts on coordinate columns: (Nx)_i = Σ_j N[i][j] x_j, so N e_j
is column j. Its torsion is

    T(x, y) = [Nx, Ny] - N([Nx, y] + [x, Ny]) + N²[x, y]

and when T = 0 the deformed bracket [x, y]_N = [Nx, y] + [x, Ny] - N[x, y] is
a Lie bracket compatible with [,]. The pencil member s = (s1, s2) is
s1·[,] + s2·[,]_N; for λ the "exceptional" member is s = (-λ, 1), i.e.
[,]_{N - λ}, and s = (1, 0) is the member "at infinity".
'''

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .common import Rational, get_logger, rat, rational_str
from .errors import (
    DimensionMismatch,
    DuplicateEigenvalue,
    IrrationalSpectrum,
    JacobiFailure,
    NotASubalgebra,
    NotDirectSum,
    PairwiseSumNotSubalgebra,
    SingularDenominator,
    SingularShift,
    TorsionNonzero,
    ZeroParameter,
)
from .exact import (
    Matrix,
    charpoly,
    identity,
    image_basis,
    inverse,
    nullspace,
    rank,
    to_array,
    to_rows,
)
from .lie import (
    StructureConstants,
    apply_to_output,
    check_jacobi,
    pair_brackets,
    subalgebra_restrict,
    twilled_truncate,
)

log = get_logger()


def operator(N, dim: int) -> np.ndarray:
    a = to_array(N)
    if a.shape != (dim, dim):
        raise DimensionMismatch(
            f'Operator of shape {a.shape} on an algebra of dimension {dim}'
        )
    return a


def shift(N, lam: Rational) -> Matrix:
    'N - λ·Id'
    a = to_array(N)
    return to_rows(a - lam * identity(a.shape[0]))


def _br_left(c: StructureConstants, N: np.ndarray) -> np.ndarray:
    'out[i][j] = [N e_i, e_j]'
    return np.tensordot(N, c.c, axes=([0], [0]))


def _br_right(c: StructureConstants, N: np.ndarray) -> np.ndarray:
    'out[i][j] = [e_i, N e_j]'
    return np.tensordot(c.c, N, axes=([1], [0])).transpose(0, 2, 1)


def _deformed_tensor(c: StructureConstants, N: np.ndarray) -> np.ndarray:
    return to_array(
        _br_left(c, N) + _br_right(c, N) - apply_to_output(c.c, N)
    )


def torsion(c: StructureConstants, N) -> np.ndarray:
    'T[i][j] = torsion evaluated on (e_i, e_j)'
    n = c.dim
    N = operator(N, n)
    if n == 0:
        return c.c
    cols = N.T.tolist()
    nn = pair_brackets(c, cols, cols)
    mixed = apply_to_output(_br_left(c, N) + _br_right(c, N), N)
    return to_array(nn - mixed + apply_to_output(c.c, N @ N))


def _first_nonzero_pair(t: np.ndarray) -> Optional[Tuple[int, int]]:
    n = t.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if np.any(t[i, j] != 0):
                return i, j
    return None


def is_nijenhuis(c: StructureConstants, N) -> bool:
    return _first_nonzero_pair(torsion(c, N)) is None


def require_nijenhuis(c: StructureConstants, N):
    t = torsion(c, N)
    pair = _first_nonzero_pair(t)
    if pair is not None:
        i, j = pair
        raise TorsionNonzero(
            f'T({c.label(i)}, {c.label(j)}) != 0',
            pair=[i, j],
            value=[rat(x) for x in t[i, j]],
        )


def deformed_bracket(
    c: StructureConstants, N, allow_torsion: bool = False
) -> StructureConstants:
    '''
    [x, y]_N. With `allow_torsion`, a nonzero torsion is tolerated and the
    result is checked for Jacobi instead ("weak Nijenhuis" experiments).
    '''
    N = operator(N, c.dim)
    if not allow_torsion:
        require_nijenhuis(c, N)
    out = StructureConstants.from_tensor(_deformed_tensor(c, N), c.labels)
    if allow_torsion:
        violations = check_jacobi(out)
        if violations:
            raise JacobiFailure(
                'Deformed bracket of a non-Nijenhuis operator fails Jacobi',
                violations=violations,
            )
        log.warning('Experimental: deformed bracket built past nonzero torsion')
    return out


@dataclass(frozen=True)
class Eigenspace:
    eigenvalue: Rational
    basis: Tuple[Tuple[Rational, ...], ...]
    riesz_index: int

    @property
    def multiplicity(self) -> int:
        return len(self.basis)

    def to_json(self):
        return {
            'eigenvalue': self.eigenvalue,
            'basis': [list(v) for v in self.basis],
            'riesz_index': self.riesz_index,
        }


def _from_sympy(r) -> Rational:
    return rat(Fraction(int(r.p), int(r.q)))


def rational_spectrum(N) -> List[Tuple[Rational, int]]:
    '''
    Eigenvalues with algebraic multiplicities, ascending. Raises
    `IrrationalSpectrum` listing the irreducible factors of degree > 1.
    '''
    coeffs = charpoly(to_rows(N))
    t = sympy.Symbol('t')
    fracs = [Fraction(x) for x in coeffs]
    poly = sympy.Poly(
        [sympy.Rational(f.numerator, f.denominator) for f in fracs],
        t,
        domain='QQ',
    )
    roots, bad = [], []
    for factor, mult in poly.factor_list()[1]:
        if factor.degree() == 1:
            a, b = factor.all_coeffs()
            roots.append((_from_sympy(-b / a), mult))
        else:
            bad.append(str(factor.as_expr()))
    if bad:
        raise IrrationalSpectrum(
            'Characteristic polynomial does not split over QQ', factors=bad
        )
    return sorted(roots)


def _matrix_power(a: np.ndarray, r: int) -> np.ndarray:
    out = identity(a.shape[0])
    for _ in range(r):
        out = out @ a
    return out


def spectrum_and_eigenspaces(N) -> List[Eigenspace]:
    a = to_array(N)
    n = a.shape[0] if a.size else 0
    spaces = []
    for lam, mult in rational_spectrum(a):
        m = a - lam * identity(n)
        for r in range(1, mult + 1):
            ker = nullspace(to_rows(_matrix_power(m, r)), n)
            if len(ker) == mult:
                break
        assert len(ker) == mult, f'generalized eigenspace of {lam} too small'
        spaces.append(Eigenspace(lam, tuple(tuple(v) for v in ker), r))
    return spaces


def is_diagonalizable(N) -> bool:
    return all(e.riesz_index == 1 for e in spectrum_and_eigenspaces(N))


@dataclass(frozen=True, eq=False)
class BracketPencil:
    '''
    s1·c1 + s2·c2. Jacobi is quadratic in s, so checking the members
    (1,0), (0,1) and (1,1) validates every member.
    '''

    c1: StructureConstants
    c2: StructureConstants
    exceptional: Tuple[Rational, ...]
    origin: str  # from-operator | outer | restricted | manual
    operator: Optional[Tuple[Tuple[Rational, ...], ...]] = None

    def __post_init__(self):
        if self.c1.dim != self.c2.dim:
            raise DimensionMismatch(
                f'Pencil of dimensions {self.c1.dim} and {self.c2.dim}'
            )
        for s in [(1, 0), (0, 1), (1, 1)]:
            violations = check_jacobi(self.member(s))
            if violations:
                raise JacobiFailure(
                    f'Pencil member s={s} is not a Lie bracket',
                    member=list(s),
                    violations=violations,
                )

    @property
    def dim(self) -> int:
        return self.c1.dim

    def member(self, s: Sequence[Rational]) -> StructureConstants:
        s1, s2 = (rat(x) for x in s)
        if not s1 and not s2:
            raise ZeroParameter('Pencil parameter s = (0, 0)')
        return StructureConstants.from_tensor(
            self.c1.c * s1 + self.c2.c * s2, self.c1.labels
        )

    @property
    def degenerate(self) -> bool:
        'c1 and c2 are proportional, so every member has the same orbits'
        flat = [list(self.c1.c.flat), list(self.c2.c.flat)]
        return rank(flat) < 2

    def to_json(self):
        return {
            'dim': self.dim,
            'origin': self.origin,
            'exceptional': list(self.exceptional),
            'degenerate': self.degenerate,
        }


def pencil_of(c: StructureConstants, N) -> BracketPencil:
    N = operator(N, c.dim)
    c2 = deformed_bracket(c, N)
    spectrum = tuple(lam for lam, _ in rational_spectrum(N))
    p = BracketPencil(
        c, c2, spectrum, 'from-operator', tuple(map(tuple, to_rows(N)))
    )
    log.info(
        f'Pencil of dim {c.dim} with exceptional values '
        f'{[rational_str(x) for x in spectrum]}'
        + (' (degenerate)' if p.degenerate else '')
    )
    return p


def resolvent_identity_check(c: StructureConstants, N, lam: Rational) -> bool:
    '(N - λ)^{-1}[(N - λ)x, (N - λ)y] = [x, y]_N - λ[x, y] on basis pairs'
    N = operator(N, c.dim)
    s = to_array(shift(N, lam))
    s_inv = inverse(to_rows(s))
    if s_inv is None:
        raise SingularShift(f'{rational_str(lam)} is an eigenvalue', lam=lam)
    cols = s.T.tolist()
    lhs = apply_to_output(pair_brackets(c, cols, cols), s_inv)
    rhs = to_array(_deformed_tensor(c, N) - lam * c.c)
    return bool(np.all(lhs == rhs))


def operator_from_decomposition(
    c: StructureConstants, parts: Sequence, eigenvalues: Sequence[Rational]
) -> Matrix:
    '''
    The operator acting as λ_i·Id on part i. Every part and every pairwise
    sum of parts must be a subalgebra.
    '''
    n = c.dim
    eigenvalues = [rat(x) for x in eigenvalues]
    if len(parts) != len(eigenvalues):
        raise DimensionMismatch(
            f'{len(parts)} parts for {len(eigenvalues)} eigenvalues'
        )
    if len(set(eigenvalues)) != len(eigenvalues):
        raise DuplicateEigenvalue(
            'Eigenvalues must be pairwise distinct',
            eigenvalues=eigenvalues,
        )
    vecs = [[rat(x) for x in v] for part in parts for v in part]
    if len(vecs) != n or rank(vecs) != n:
        raise NotDirectSum(
            f'Parts of dims {[len(p) for p in parts]} do not split dim {n}',
            dims=[len(p) for p in parts],
        )
    for i in range(len(parts)):
        for j in range(i, len(parts)):
            span = list(parts[i]) + (list(parts[j]) if j != i else [])
            try:
                subalgebra_restrict(c, span)
            except NotASubalgebra as ex:
                raise PairwiseSumNotSubalgebra(
                    f'g_{i + 1} + g_{j + 1} is not a subalgebra',
                    parts=[i, j],
                    bracket=ex.witness['bracket'],
                ) from ex
    P = to_array(vecs).T  # columns are the part bases
    diag = [lam for lam, part in zip(eigenvalues, parts) for _ in part]
    D = to_array(
        [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
    )
    N = to_rows(P @ D @ to_array(inverse(to_rows(P))))
    assert is_nijenhuis(c, N), 'operator of a decomposition has zero torsion'
    return N


def image_subalgebra(c: StructureConstants, N, lam: Rational) -> Matrix:
    'Basis of im(N - λ), checked to be a subalgebra'
    n = c.dim
    m = shift(operator(N, n), lam)
    basis = image_basis(m, n)
    subalgebra_restrict(c, basis)
    return basis


def linear_fractional(
    N, s1, s2, s3, s4, c: Optional[StructureConstants] = None
) -> Matrix:
    '(s1·N + s2)(s3·N + s4)^{-1}, torsion re-tested against `c` when given'
    a = to_array(N)
    ident = identity(a.shape[0])
    den = inverse(to_rows(s3 * a + s4 * ident))
    if den is None:
        raise SingularDenominator(
            f'{s3}·N + {s4} is singular', s=[s1, s2, s3, s4]
        )
    out = to_rows((s1 * a + s2 * ident) @ to_array(den))
    if c is not None:
        require_nijenhuis(c, out)
    return out


def exceptional_member_matches_truncation(
    c: StructureConstants, N, lam: Rational
) -> bool:
    '''
    For a semisimple eigenvalue λ, with M = N - λ, E1 = im M, E2 = ker M and
    P1, P2 the projections of g = E1 ⊕ E2, the operator L = M∘P1 + P2 maps
    [,]_M onto the truncated bracket of the twilled algebra E1 ⋈ E2:
    L[x, y]_M = [Lx, Ly]_trunc for all x, y.
    '''
    n = c.dim
    N = operator(N, n)
    require_nijenhuis(c, N)
    m = shift(N, lam)
    e1, e2 = image_basis(m, n), nullspace(m, n)
    tw = twilled_truncate(c, e1, e2)  # NotDirectSum unless λ is semisimple
    P = to_array(e1 + e2).T
    P_inv = to_array(inverse(to_rows(P)))
    k1 = len(e1)
    proj1 = to_array(
        [[int(i == j and i < k1) for j in range(n)] for i in range(n)]
    )
    P1 = P @ proj1 @ P_inv
    L = to_array(m) @ P1 + (identity(n) - P1)
    lhs = apply_to_output(_deformed_tensor(c, to_array(m)), L)
    images = (P_inv @ L).T.tolist()  # P-coordinates of L e_i
    rhs = apply_to_output(pair_brackets(tw.c, images, images), P)
    return bool(np.all(lhs == rhs))


def restricted_pencil(c: StructureConstants, N, k_basis) -> BracketPencil:
    '''
    The pencil [,]_N|_k - λ[,]|_k on a subspace k closed under both
    brackets, e.g. a fixed-point subalgebra of an involution commuting
    with N.
    '''
    c1 = subalgebra_restrict(c, k_basis)
    c2 = subalgebra_restrict(deformed_bracket(c, N), k_basis)
    spectrum = tuple(lam for lam, _ in rational_spectrum(N))
    return BracketPencil(c1, c2, spectrum, 'restricted')


def _sl2() -> StructureConstants:
    from .catalog import sl

    return sl(2).algebra


def _gl2_la():
    from .catalog import left_mult

    return left_mult(2, (1, 2))


def test_torsion_examples():
    from .catalog import gl, left_mult

    assert not np.any(torsion(StructureConstants.abelian(3), [[1, 2, 0]] * 3))
    for n in range(2, 4):
        e = left_mult(n, tuple(range(1, n + 1)))
        assert is_nijenhuis(e.algebra, e.operator)
    # N(e) = f, N(h) = N(f) = 0 is Nijenhuis
    assert is_nijenhuis(_sl2(), [[0, 0, 0], [0, 0, 0], [1, 0, 0]])
    # diag(1, 2, 3) on (e, h, f): span(e, f) is not a subalgebra
    t = torsion(_sl2(), [[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    assert [rat(x) for x in t[0, 2]] == [0, -1, 0]
    assert _first_nonzero_pair(t) == (0, 2)
    try:
        deformed_bracket(_sl2(), [[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    except TorsionNonzero as ex:
        assert ex.witness['pair'] == [0, 2]
    else:
        raise AssertionError('deformed a non-Nijenhuis operator')
    assert torsion(gl(2).algebra, identity(4)).shape == (4, 4, 4)


def test_deformed_bracket():
    sl2 = _sl2()
    assert deformed_bracket(sl2, identity(3)) == sl2
    assert deformed_bracket(sl2, [[0] * 3] * 3).is_abelian()
    e = _gl2_la()
    dn = deformed_bracket(e.algebra, e.operator)
    # [x, y]_{L_A} = xAy - yAx on the matrix basis
    A = to_array([[1, 0], [0, 2]])
    mats = [to_array(m) for m in e.matrices]
    for i, x in enumerate(mats):
        for j, y in enumerate(mats):
            expected = x @ A @ y - y @ A @ x
            got = sum(
                (dn.c[i, j, k] * mats[k] for k in range(4)),
                to_array([[0, 0], [0, 0]]),
            )
            assert np.all(got == expected), (i, j)
    # Linear in the shift
    lam = Fraction(5, 3)
    shifted = deformed_bracket(e.algebra, shift(e.operator, lam))
    assert shifted == dn - e.algebra.scale(lam)


def test_weak_nijenhuis_override():
    # On an abelian algebra every bracket vanishes, so override succeeds
    out = deformed_bracket(
        StructureConstants.abelian(2), [[1, 1], [0, 1]], allow_torsion=True
    )
    assert out.is_abelian()


def test_spectrum():
    s = spectrum_and_eigenspaces([[1, 0, 0], [0, 1, 0], [0, 0, 2]])
    assert [(e.eigenvalue, e.multiplicity, e.riesz_index) for e in s] == [
        (1, 2, 1),
        (2, 1, 1),
    ]
    (jordan,) = spectrum_and_eigenspaces([[0, 1], [0, 0]])
    assert (jordan.eigenvalue, jordan.multiplicity, jordan.riesz_index) == (
        0,
        2,
        2,
    )
    assert not is_diagonalizable([[0, 1], [0, 0]])
    e = _gl2_la()
    one, two = spectrum_and_eigenspaces(e.operator)
    # Row-supported matrices: E11, E12 for 1 and E21, E22 for 2
    assert rank(list(one.basis) + [[1, 0, 0, 0], [0, 1, 0, 0]]) == 2
    assert rank(list(two.basis) + [[0, 0, 1, 0], [0, 0, 0, 1]]) == 2
    assert (one.riesz_index, two.riesz_index) == (1, 1)
    try:
        rational_spectrum([[0, -2], [1, 0]])
    except IrrationalSpectrum as ex:
        assert ex.witness['factors'] == ['t**2 + 2']
    else:
        raise AssertionError('t^2 + 2 has no rational roots')


def test_pencil_of():
    e = _gl2_la()
    p = pencil_of(e.algebra, e.operator)
    assert p.exceptional == (1, 2) and not p.degenerate
    idp = pencil_of(e.algebra, identity(4))
    assert idp.exceptional == (1,) and idp.degenerate
    for s in [(2, -3), (Fraction(1, 2), 7), (-1, 1)]:
        assert check_jacobi(p.member(s)) == []
    try:
        p.member((0, 0))
    except ZeroParameter:
        pass
    else:
        raise AssertionError('s = (0, 0) accepted')


def test_resolvent_identity():
    from .catalog import borel_projector

    e = _gl2_la()
    assert resolvent_identity_check(e.algebra, e.operator, 3)
    assert resolvent_identity_check(e.algebra, e.operator, Fraction(-2, 7))
    b = borel_projector(2)
    assert resolvent_identity_check(b.algebra, b.operator, 0)
    try:
        resolvent_identity_check(e.algebra, e.operator, 2)
    except SingularShift:
        pass
    else:
        raise AssertionError('eigenvalue accepted as a resolvent point')


def test_operator_from_decomposition():
    sl2 = _sl2()
    assert operator_from_decomposition(sl2, [to_rows(identity(3))], [4]) == [
        [4, 0, 0],
        [0, 4, 0],
        [0, 0, 4],
    ]
    n_minus, b_plus = [[0, 0, 1]], [[1, 0, 0], [0, 1, 0]]
    N = operator_from_decomposition(sl2, [n_minus, b_plus], [1, -1])
    assert N == [[-1, 0, 0], [0, -1, 0], [0, 0, 1]]
    one, minus_one = spectrum_and_eigenspaces(N)[::-1]
    assert rank(list(one.basis) + n_minus) == 1
    assert rank(list(minus_one.basis) + b_plus) == 2
    try:
        operator_from_decomposition(
            sl2, [[[1, 0, 0]], [[0, 0, 1]], [[0, 1, 0]]], [1, 2, 3]
        )
    except PairwiseSumNotSubalgebra as ex:
        assert ex.witness['parts'] == [0, 1]
    else:
        raise AssertionError('span(e, f) accepted')
    try:
        operator_from_decomposition(sl2, [n_minus, b_plus], [1, 1])
    except DuplicateEigenvalue:
        pass
    else:
        raise AssertionError('repeated eigenvalue accepted')


def test_image_subalgebra_and_shifts():
    from .catalog import borel_projector

    e = _gl2_la()
    assert rank(image_subalgebra(e.algebra, e.operator, 1)) == 2
    for v in image_subalgebra(e.algebra, e.operator, 1):
        assert v[0] == v[1] == 0  # zero first row
    assert len(image_subalgebra(e.algebra, e.operator, 5)) == 4
    b = borel_projector(2)
    # Eigenvalue 1 lives on n-, so im(N - 1) = b+
    im = image_subalgebra(b.algebra, b.operator, 1)
    assert rank(im + [[1, 0, 0], [0, 1, 0]]) == 2
    for lam in [Fraction(1, 3), -4, 9]:
        assert is_nijenhuis(e.algebra, shift(e.operator, lam))


def test_linear_fractional():
    e = _gl2_la()
    assert linear_fractional(e.operator, 1, 0, 0, 1) == e.operator
    assert linear_fractional(e.operator, 0, 1, 0, 1) == to_rows(identity(4))
    f = linear_fractional(e.operator, 1, 1, 1, -3, e.algebra)
    assert is_nijenhuis(e.algebra, f)
    diag = [[1, 0, 0], [0, 2, 0], [0, 0, 3]]
    assert linear_fractional(diag, 1, 0, 0, 1) == diag
    try:
        linear_fractional(diag, 1, 0, 0, 1, _sl2())
    except TorsionNonzero as ex:
        assert ex.witness['pair'] == [0, 2]
    else:
        raise AssertionError('non-Nijenhuis result accepted')
    try:
        linear_fractional(e.operator, 1, 0, 1, -1)
    except SingularDenominator:
        pass
    else:
        raise AssertionError('N - 1 is singular')


def test_exceptional_member_matches_truncation():
    from .catalog import borel_projector, left_mult

    e = _gl2_la()
    for lam in (1, 2):
        assert exceptional_member_matches_truncation(e.algebra, e.operator, lam)
    e3 = left_mult(3, (1, 2, 3))
    assert exceptional_member_matches_truncation(e3.algebra, e3.operator, 2)
    b = borel_projector(2)
    for lam in (1, -1):
        assert exceptional_member_matches_truncation(b.algebra, b.operator, lam)


def test_restricted_pencil():
    from .catalog import gl

    gl2 = gl(2).algebra
    # Diagonal matrices are closed under both brackets of L_A, A diagonal
    e = _gl2_la()
    p = restricted_pencil(gl2, e.operator, [[1, 0, 0, 0], [0, 0, 0, 1]])
    assert p.dim == 2 and p.c1.is_abelian() and p.c2.is_abelian()
