'''
Exact linear algebra over QQ. Nothing here ever touches a float: ranks decide
verdicts, and a float rank is a coin flip on anything ill-conditioned.

Ranks use fraction-free (Bareiss) elimination on rows scaled to integers.
Everything that needs actual solutions (rref, kernels, inverses, coordinates)
does Gauss-Jordan on `Fraction`s; those matrices are small.
'''

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .common import Rational, rat
from .errors import RankDeficientBasis

Matrix = List[List[Rational]]

_rat_array = np.frompyfunc(rat, 1, 1)


def to_array(rows) -> np.ndarray:
    'Object-dtype numpy array with canonical exact entries.'
    a = np.array(rows, dtype=object)
    if a.size == 0:
        return a
    return _rat_array(a).astype(object)


def identity(n: int) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = 1
    return a


def zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=object)


def to_rows(a) -> Matrix:
    return [[rat(x) for x in row] for row in a]


def _integer_rows(rows) -> List[List[int]]:
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        den = math.lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * den) for x in row])
    return out


def rank(rows) -> int:
    'Bareiss elimination; every intermediate entry is a minor, so `//` is exact'
    m = _integer_rows(rows)
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    r = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        row_r = m[r]
        p = row_r[col]
        for i in range(r + 1, nrows):
            mi = m[i]
            f = mi[col]
            for j in range(col + 1, ncols):
                mi[j] = (mi[j] * p - f * row_r[j]) // prev
            mi[col] = 0
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def rref(rows, ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    nrows = len(m)
    pivots = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return [[rat(x) for x in row] for row in m], pivots


def nullspace(rows, ncols: int) -> Matrix:
    'Basis of {v : M v = 0}, one vector per free column, in column order.'
    if not rows:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    r, pivots = rref(rows, ncols)
    free = [j for j in range(ncols) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for k, pc in enumerate(pivots):
            v[pc] = rat(-r[k][f])
        basis.append(v)
    return basis


def columns(rows, ncols: int) -> Matrix:
    return [[row[j] for row in rows] for j in range(ncols)]


def image_basis(rows, ncols: int) -> Matrix:
    'Pivot columns of M: a deterministic basis of the column space.'
    _, pivots = rref(rows, ncols)
    return [[rat(row[j]) for row in rows] for j in pivots]


def inverse(rows) -> Optional[Matrix]:
    'None when singular.'
    n = len(rows)
    aug = [
        list(row) + [int(i == j) for j in range(n)]
        for i, row in enumerate(rows)
    ]
    r, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        return None
    return [row[n:] for row in r[:n]]


def trace(a) -> Rational:
    return rat(sum((a[i][i] for i in range(len(a))), 0))


def charpoly(a) -> List[Rational]:
    '''
    Faddeev-LeVerrier: coefficients of det(t*Id - A), leading 1 first.
    '''
    n = len(a)
    A = to_array(a)
    ident = identity(n)
    coeffs: List[Rational] = [1]
    M = zeros(n, n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * ident
        coeffs.append(rat(-Fraction(trace(A @ M)) / k))
    return coeffs


def complement(basis: Sequence[Sequence[Rational]], n: int) -> Matrix:
    'Standard basis vectors completing `basis`, chosen greedily by index.'
    current = [list(v) for v in basis]
    r = rank(current) if current else 0
    added = []
    for k in range(n):
        if r == n:
            break
        e = [int(i == k) for i in range(n)]
        if rank(current + [e]) > r:
            current.append(e)
            added.append(e)
            r += 1
    return added


class SpanCoordinates:
    '''
    Coordinates with respect to a fixed linearly independent set of vectors.
    Solves through an invertible square minor picked once at construction.
    '''

    def __init__(self, basis: Sequence[Sequence[Rational]], n: int):
        self.basis = [[rat(x) for x in v] for v in basis]
        self.n = n
        self.m = len(self.basis)
        for v in self.basis:
            if len(v) != n:
                raise RankDeficientBasis(
                    f'basis vector of length {len(v)}, expected {n}'
                )
        if self.m == 0:
            self._rows, self._inv = [], []
            return
        if rank(self.basis) != self.m:
            raise RankDeficientBasis(
                f'{self.m} vectors span a space of dimension '
                f'{rank(self.basis)}',
                basis=self.basis,
            )
        # Independent rows of the n x m matrix with columns = basis
        _, self._rows = rref(self.basis, n)
        square = [[v[i] for v in self.basis] for i in self._rows]
        self._inv = inverse(square)
        assert self._inv is not None, 'pivot minor must be invertible'

    def coordinates(self, v: Sequence[Rational]) -> Optional[List[Rational]]:
        'None when v is not in the span.'
        if self.m == 0:
            return [] if not any(v) else None
        w = [v[i] for i in self._rows]
        y = [rat(sum((a * b for a, b in zip(row, w)), 0)) for row in self._inv]
        back = self.combine(y)
        if any(a != b for a, b in zip(back, v)):
            return None
        return y

    def combine(self, y: Sequence[Rational]) -> List[Rational]:
        out = [0] * self.n
        for coeff, vec in zip(y, self.basis):
            if coeff:
                for i, x in enumerate(vec):
                    if x:
                        out[i] += coeff * x
        return [rat(x) for x in out]


def test_rank_matches_known_values():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[0, 0], [0, 0]]) == 0
    assert rank([[0, 1, 0], [0, 0, 1], [0, 1, 1]]) == 2
    assert rank([[Fraction(1, 2), 1], [1, Fraction(1, 3)]]) == 2
    # Skipped columns in the middle of the elimination
    assert rank([[0, 2, 0, 4], [0, 1, 1, 2], [0, 3, 1, 6]]) == 2
    hilbert = [[Fraction(1, i + j + 1) for j in range(5)] for i in range(5)]
    assert rank(hilbert) == 5
    assert rank([]) == 0


def test_rref_nullspace_inverse():
    rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    r, pivots = rref(rows)
    assert pivots == [0, 1]
    ker = nullspace(rows, 3)
    assert ker == [[-1, -1, 1]]
    for v in ker:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    assert inverse([[2, 0], [0, 4]]) == [[half, 0], [0, quarter]]
    assert inverse(rows) is None
    assert nullspace([], 2) == [[1, 0], [0, 1]]
    assert image_basis(rows, 3) == [[1, 2, 1], [2, 4, 0]]


def test_charpoly():
    assert charpoly([[2, 1], [0, 3]]) == [1, -5, 6]
    assert charpoly([[0, 1], [0, 0]]) == [1, 0, 0]
    assert charpoly([]) == [1]
    # Companion matrix of t^3 - 2t + 5
    assert charpoly([[0, 0, -5], [1, 0, 2], [0, 1, 0]]) == [1, 0, -2, 5]


def test_span_coordinates_and_complement():
    sc = SpanCoordinates([[1, 1, 0], [0, 1, 1]], 3)
    assert sc.coordinates([1, 2, 1]) == [1, 1]
    assert sc.coordinates([1, 0, 0]) is None
    assert complement([[1, 1, 0], [0, 1, 1]], 3) == [[1, 0, 0]]
    assert complement([], 2) == [[1, 0], [0, 1]]
    try:
        SpanCoordinates([[1, 2], [2, 4]], 2)
    except RankDeficientBasis:
        pass
    else:
        raise AssertionError('rank-deficient basis accepted')
