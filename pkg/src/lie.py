'''
Finite-dimensional Lie algebras as exact structure constants.

Conventions used everywhere in `pforge`:
  - `c[i][j][k]` is the coefficient of e_k in [e_i, e_j].
  - Subspaces are lists of coordinate vectors ("rows"), never columns.
  - The Lie-Poisson matrix at ξ is Π_ij(ξ) = Σ_k c[i][j][k] ξ_k.
  - A covector on a quotient g/h is written in the dual of the greedy
    complement basis `exact.complement(h, n)`.

"Generic" ranks are maxima over sampled integer points. A sampled rank is a
certified lower bound on the generic rank, so indices computed from it are
certified upper bounds; see `PointSamplerConfig`.
'''

from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .common import (
    PointSamplerConfig,
    Rational,
    as_vector,
    get_logger,
    rat,
    rational_str,
)
from .errors import (
    DimensionMismatch,
    InvalidParams,
    NotARepresentation,
    NotASubalgebra,
    NotDirectSum,
    RankDeficientBasis,
    StabilizerNotClosed,
)
from .exact import (
    SpanCoordinates,
    complement,
    inverse,
    nullspace,
    rank,
    to_array,
    to_rows,
    zeros,
)
from .poly import MultiPoly

log = get_logger()


@dataclass(frozen=True, eq=False)
class StructureConstants:
    c: np.ndarray  # (n, n, n) object array of exact rationals
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        shape = self.c.shape
        if len(shape) != 3 or len(set(shape)) != 1:
            raise DimensionMismatch(
                f'Structure constants must be n x n x n, got {shape}'
            )
        if self.labels and len(self.labels) != shape[0]:
            raise DimensionMismatch(
                f'{len(self.labels)} labels for dimension {shape[0]}'
            )

    @classmethod
    def from_tensor(cls, c, labels: Sequence[str] = ()):
        a = to_array(c)
        if a.size == 0:
            a = zeros(0, 0, 0)
        return cls(a, tuple(labels))

    @classmethod
    def abelian(cls, n: int, labels: Sequence[str] = ()):
        return cls(zeros(n, n, n), tuple(labels))

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f'e{i + 1}'

    def __eq__(self, other):
        if not isinstance(other, StructureConstants):
            return NotImplemented
        return self.c.shape == other.c.shape and bool(
            np.all(self.c == other.c)
        )

    def __add__(self, other: 'StructureConstants') -> 'StructureConstants':
        return StructureConstants.from_tensor(self.c + other.c, self.labels)

    def __sub__(self, other: 'StructureConstants') -> 'StructureConstants':
        return StructureConstants.from_tensor(self.c - other.c, self.labels)

    def scale(self, s: Rational) -> 'StructureConstants':
        return StructureConstants.from_tensor(self.c * s, self.labels)

    def is_abelian(self) -> bool:
        return not np.any(self.c != 0)

    def nonzero_brackets(self) -> List[Tuple[int, int, int, Rational]]:
        'The (i, j, k, value) entries with i < j, in index order.'
        n = self.dim
        return [
            (i, j, k, rat(self.c[i, j, k]))
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(n)
            if self.c[i, j, k] != 0
        ]

    def __repr__(self):
        parts = [
            f'[{self.label(i)},{self.label(j)}]_{self.label(k)}='
            f'{rational_str(v)}'
            for i, j, k, v in self.nonzero_brackets()
        ]
        return f'StructureConstants(dim={self.dim}, {", ".join(parts)})'


def _normalized(a: np.ndarray) -> np.ndarray:
    return to_array(a) if a.size else a


def pair_brackets(c: StructureConstants, xs, ys) -> np.ndarray:
    'out[a][b] = [xs[a], ys[b]]; xs and ys are lists of coordinate rows'
    X, Y = to_array(xs), to_array(ys)
    if X.size == 0 or Y.size == 0:
        return zeros(len(xs), len(ys), c.dim)
    t = np.tensordot(X, c.c, axes=([1], [0]))  # (a, j, k)
    return _normalized(
        np.tensordot(Y, t, axes=([1], [1])).transpose(1, 0, 2)
    )


def apply_to_output(r: np.ndarray, m) -> np.ndarray:
    'out[i][j] = M applied to r[i][j]'
    if r.size == 0:
        return r
    return _normalized(np.tensordot(r, to_array(m), axes=([2], [1])))


def check_jacobi(c: StructureConstants, limit: int = 10) -> List[dict]:
    '''
    Empty iff `c` is antisymmetric and satisfies Jacobi. Lists at most
    `limit` violations; Jacobi is only evaluated on antisymmetric input.
    '''
    n = c.dim
    violations = []
    sym = c.c + c.c.transpose(1, 0, 2)
    for i, j, k in zip(*np.nonzero(sym != 0)):
        if len(violations) >= limit:
            return violations
        if i <= j:
            violations.append(
                {
                    'kind': 'antisymmetry',
                    'indices': [int(i), int(j), int(k)],
                    'residual': rat(sym[i, j, k]),
                }
            )
    if violations or n == 0:
        return violations
    t = np.tensordot(c.c, c.c, axes=([2], [0]))  # Σ_m c[i,j,m] c[m,k,l]
    jac = t + t.transpose(2, 0, 1, 3) + t.transpose(1, 2, 0, 3)
    for i, j, k, m in zip(*np.nonzero(jac != 0)):
        if len(violations) >= limit:
            break
        violations.append(
            {
                'kind': 'jacobi',
                'indices': [int(i), int(j), int(k), int(m)],
                'residual': rat(jac[i, j, k, m]),
            }
        )
    return violations


def bracket_apply(c: StructureConstants, x, y) -> List[Rational]:
    n = c.dim
    x = as_vector(x, n, 'x')
    y = as_vector(y, n, 'y')
    return [rat(v) for v in pair_brackets(c, [x], [y])[0, 0]]


def lie_poisson_matrix(c: StructureConstants, xi) -> np.ndarray:
    xi = as_vector(xi, c.dim, 'ξ')
    if c.dim == 0:
        return zeros(0, 0)
    return _normalized(np.tensordot(c.c, to_array(xi), axes=([2], [0])))


def lie_poisson_rank(c: StructureConstants, xi) -> int:
    return rank(lie_poisson_matrix(c, xi))


@dataclass(frozen=True)
class IndexResult:
    'The index is a certified upper bound: `dim - rank` at `witness`.'
    index: int
    rank: int
    witness: Tuple[Rational, ...]
    sampler: PointSamplerConfig

    def to_json(self):
        return {
            'index': self.index,
            'certified': 'upper-bound',
            'rank': self.rank,
            'witness': list(self.witness),
            'sampler': self.sampler.to_json(),
        }


def max_rank_point(
    c: StructureConstants, cfg: PointSamplerConfig, salt: int = 0
) -> Tuple[int, Tuple[Rational, ...]]:
    'Sampled maximum of rank Π(ξ), stopping early at the largest even rank'
    n = c.dim
    ceiling = n - n % 2
    best, witness = -1, (0,) * n
    for xi in cfg.points(n, salt):
        r = lie_poisson_rank(c, xi)
        if r > best:
            best, witness = r, tuple(xi)
            if best == ceiling:
                break
    return max(best, 0), witness


def algebra_index(
    c: StructureConstants, cfg: PointSamplerConfig
) -> IndexResult:
    if c.dim == 0:
        return IndexResult(0, 0, (), cfg)
    r, witness = max_rank_point(c, cfg)
    log.debug(f'Sampled Lie-Poisson rank {r} of dim {c.dim} at {witness}')
    return IndexResult(c.dim - r, r, witness, cfg)


def stable_index(
    c: StructureConstants, cfg: PointSamplerConfig, max_rounds: int = 8
) -> Tuple[IndexResult, int]:
    '''
    Repeats `algebra_index`, doubling `coord_bound`, until two consecutive
    rounds agree. Returns the last result and the number of rounds.
    '''
    prev = algebra_index(c, cfg)
    for rounds in range(2, max_rounds + 1):
        cfg = cfg.doubled()
        cur = algebra_index(c, cfg)
        if cur.index == prev.index:
            return cur, rounds
        log.info(f'Index moved {prev.index} -> {cur.index}, doubling again')
        prev = cur
    return prev, max_rounds


def _check_basis(B, n: int) -> List[List[Rational]]:
    rows = [as_vector(v, n, 'basis vector') for v in B]
    if rows and rank(rows) != len(rows):
        raise RankDeficientBasis(
            f'{len(rows)} vectors span dimension {rank(rows)}', basis=rows
        )
    return rows


def subalgebra_restrict(
    c: StructureConstants, B, labels: Sequence[str] = ()
) -> StructureConstants:
    '''
    Constants of the bracket restricted to span(B), in the basis B. Raises
    `NotASubalgebra` with the first pair whose bracket leaves the span.
    '''
    n = c.dim
    rows = _check_basis(B, n)
    m = len(rows)
    coords = SpanCoordinates(rows, n)
    brackets = pair_brackets(c, rows, rows)
    out = zeros(m, m, m)
    for a, b in combinations(range(m), 2):
        v = [rat(x) for x in brackets[a, b]]
        y = coords.coordinates(v)
        if y is None:
            raise NotASubalgebra(
                f'[b{a + 1}, b{b + 1}] leaves the span',
                pair=[a, b],
                bracket=v,
            )
        out[a, b] = y
        out[b, a] = [rat(-x) for x in y]
    return StructureConstants(out, tuple(labels))


def change_basis(c: StructureConstants, P) -> StructureConstants:
    'Constants in the basis formed by the columns of the invertible P.'
    n = c.dim
    cols = [[rat(P[i][j]) for i in range(n)] for j in range(n)]
    return subalgebra_restrict(c, cols)


@dataclass(frozen=True)
class CoisotropyNumbers:
    ind: int
    codim: int
    stabilizer: Tuple[Tuple[Rational, ...], ...]
    complement: Tuple[Tuple[Rational, ...], ...]
    covector: Tuple[Rational, ...]
    index_witness: Optional[IndexResult] = None

    def to_json(self):
        return {
            'ind': self.ind,
            'codim': self.codim,
            'stabilizer': [list(v) for v in self.stabilizer],
            'complement': [list(v) for v in self.complement],
            'covector': list(self.covector),
            'index_witness': self.index_witness,
        }


def _restrict_stabilizer(c, stab_rows, what: str) -> StructureConstants:
    try:
        return subalgebra_restrict(c, stab_rows)
    except NotASubalgebra as ex:
        raise StabilizerNotClosed(
            f'Stabilizer of {what} is not a subalgebra', **ex.witness
        ) from ex


def coisotropy_numbers(
    c: StructureConstants, B, a, cfg: PointSamplerConfig
) -> CoisotropyNumbers:
    '''
    For the subalgebra h = span(B) and a ∈ (g/h)*, the linear map
    T: h -> (g/h)*, ξ ↦ ρ_*(ξ)a, where
    (ρ_*(ξ)a)(v + h) = -a([ξ, v] mod h).
    codim = dim (g/h) - rank T, and `ind` is the index of ker T.
    '''
    n = c.dim
    subalgebra_restrict(c, B)  # closure check
    rows = _check_basis(B, n)
    m = len(rows)
    comp = complement(rows, n)
    q = len(comp)
    a = as_vector(a, q, 'covector on the quotient')
    coords = SpanCoordinates(rows + comp, n)
    brackets = pair_brackets(c, rows, comp)
    # T[t][s]: value of ρ_*(B_s)a on the complement vector Q_t
    T = [[0] * m for _ in range(q)]
    for s in range(m):
        for t in range(q):
            y = coords.coordinates([rat(x) for x in brackets[s, t]])
            assert y is not None, 'complement completes the basis'
            T[t][s] = rat(-sum(a[u] * y[m + u] for u in range(q)))
    r = rank(T) if q and m else 0
    ker = nullspace(T, m)
    stab = [
        [rat(sum(y[s] * rows[s][i] for s in range(m))) for i in range(n)]
        for y in ker
    ]
    stab_c = _restrict_stabilizer(c, stab, f'covector {a}')
    idx = algebra_index(stab_c, cfg)
    log.debug(
        f'Coisotropy at {a}: rank T = {r}, stabilizer dim {len(stab)}, '
        f'ind {idx.index}'
    )
    return CoisotropyNumbers(
        ind=idx.index,
        codim=q - r,
        stabilizer=tuple(tuple(v) for v in stab),
        complement=tuple(tuple(v) for v in comp),
        covector=tuple(a),
        index_witness=idx,
    )


def _matrix(m, dim: int, what: str) -> List[List[Rational]]:
    rows = to_rows(m)
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise DimensionMismatch(f'{what} must be {dim} x {dim}')
    return rows


def _matmul(x, y):
    return to_rows(to_array(x) @ to_array(y)) if len(x) else []


def semidirect_product(
    c_h: StructureConstants, action: Sequence, dim_v: int
) -> StructureConstants:
    '''
    h ⋉ V with [(x1, v1), (y1, w1)] = ([x1, y1], A(x1)w1 - A(y1)v1), where
    `action[i]` is the matrix of A(e_i) on V (acting on columns).
    '''
    p = c_h.dim
    if len(action) != p:
        raise DimensionMismatch(f'{len(action)} action matrices for dim {p}')
    mats = [_matrix(m, dim_v, f'action[{i}]') for i, m in enumerate(action)]
    for i, j in combinations(range(p), 2):
        lhs = [
            [
                rat(sum(c_h.c[i, j, k] * mats[k][a][b] for k in range(p)))
                for b in range(dim_v)
            ]
            for a in range(dim_v)
        ]
        ab, ba = _matmul(mats[i], mats[j]), _matmul(mats[j], mats[i])
        rhs = [
            [rat(ab[a][b] - ba[a][b]) for b in range(dim_v)]
            for a in range(dim_v)
        ]
        if lhs != rhs:
            raise NotARepresentation(
                f'A([e{i + 1}, e{j + 1}]) != [A(e{i + 1}), A(e{j + 1})]',
                pair=[i, j],
                expected=rhs,
                got=lhs,
            )
    n = p + dim_v
    out = zeros(n, n, n)
    out[:p, :p, :p] = c_h.c
    for i in range(p):
        for a in range(dim_v):
            for b in range(dim_v):
                v = mats[i][a][b]
                if v:
                    out[i, p + b, p + a] = v
                    out[p + b, i, p + a] = -v
    labels = ()
    if c_h.labels:
        labels = c_h.labels + tuple(f'v{b + 1}' for b in range(dim_v))
    return StructureConstants(out, labels)


@dataclass(frozen=True, eq=False)
class TwilledTruncation:
    c: StructureConstants
    # a1[a] is the matrix of x ↦ [B1_a, x] projected to span(B2), on B2
    a1: Tuple[Tuple[Tuple[Rational, ...], ...], ...]
    # a2[b] is the matrix of x ↦ [B2_b, x] projected to span(B1), on B1
    a2: Tuple[Tuple[Tuple[Rational, ...], ...], ...]
    basis: Tuple[Tuple[Rational, ...], ...]


def twilled_truncate(c: StructureConstants, B1, B2) -> TwilledTruncation:
    '''
    Truncation of the twilled algebra span(B1) ⋈ span(B2): keep [B1, B1],
    keep the span(B2) component of [B1, B2], and set [B2, B2] to zero. The
    result is span(B1) ⋉ span(B2) with the first cross action.
    '''
    n = c.dim
    rows1, rows2 = _check_basis(B1, n), _check_basis(B2, n)
    m1, m2 = len(rows1), len(rows2)
    if m1 + m2 != n or rank(rows1 + rows2) != n:
        raise NotDirectSum(
            f'Subspaces of dims {m1}, {m2} do not split dim {n}',
            dims=[m1, m2],
        )
    c1 = subalgebra_restrict(c, rows1)
    subalgebra_restrict(c, rows2)
    full = subalgebra_restrict(c, rows1 + rows2)  # c in the basis (B1, B2)
    a1 = tuple(
        tuple(
            tuple(rat(full.c[a, m1 + b, m1 + t]) for b in range(m2))
            for t in range(m2)
        )
        for a in range(m1)
    )
    a2 = tuple(
        tuple(
            tuple(rat(full.c[m1 + b, a, s]) for a in range(m1))
            for s in range(m1)
        )
        for b in range(m2)
    )
    trunc = semidirect_product(c1, a1, m2)
    return TwilledTruncation(
        trunc, a1, a2, tuple(tuple(v) for v in rows1 + rows2)
    )


@dataclass(frozen=True)
class RaisReport:
    lhs: int
    rhs: int
    orbit_codim: int
    stabilizer_index: int
    witness: Tuple[Rational, ...]
    sampler: PointSamplerConfig

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self):
        return {
            'verdict': 'EQUAL' if self.holds else 'DIFFERENT',
            'lhs_index_of_semidirect_product': self.lhs,
            'rhs': self.rhs,
            'orbit_codim': self.orbit_codim,
            'stabilizer_index': self.stabilizer_index,
            'witness': list(self.witness),
            'sampler': self.sampler.to_json(),
        }


def _orbit_map(mats, dim_v: int, a) -> List[List[Rational]]:
    'M[b][s] = (ρ*(e_s)a)(v_b) = -a(A_s v_b)'
    return [
        [
            rat(-sum(a[r] * mats[s][r][b] for r in range(dim_v)))
            for s in range(len(mats))
        ]
        for b in range(dim_v)
    ]


def rais_check(
    c_h: StructureConstants,
    action: Sequence,
    dim_v: int,
    cfg: PointSamplerConfig,
    max_stabilizers: int = 8,
) -> RaisReport:
    '''
    ind(h ⋉ V) against codim O_a + ind h^a at sampled a ∈ V*. Among samples
    with the largest orbit, the first `max_stabilizers` are tried and the
    smallest right-hand side is reported.
    '''
    semi = semidirect_product(c_h, action, dim_v)
    lhs = algebra_index(semi, cfg).index
    p = c_h.dim
    mats = [_matrix(m, dim_v, 'action') for m in action]
    scored = []
    for a in cfg.points(dim_v, salt=1) if dim_v else [[]]:
        M = _orbit_map(mats, dim_v, a)
        scored.append((rank(M) if dim_v and p else 0, a, M))
    best_rank = max(r for r, _, _ in scored)
    best = None
    for r, a, M in [s for s in scored if s[0] == best_rank][:max_stabilizers]:
        stab_c = _restrict_stabilizer(c_h, nullspace(M, p), f'{a}')
        ind = algebra_index(stab_c, cfg).index
        codim = dim_v - r
        if best is None or codim + ind < best[0] + best[1]:
            best = (codim, ind, tuple(a))
    codim, ind, witness = best
    log.info(f'Rais check: ind = {lhs}, codim O_a + ind h^a = {codim} + {ind}')
    return RaisReport(lhs, codim + ind, codim, ind, witness, cfg)


def trace_dual_matrix(mats: Sequence) -> List[List[MultiPoly]]:
    '''
    For a matrix Lie algebra with basis `mats` and nondegenerate trace form
    G_ab = Tr(B_a B_b), the matrix x(ξ) = Σ_a (G^{-1}ξ)_a B_a, so that
    Tr(x(ξ) B_a) = ξ_a. Entries are linear polynomials in ξ.
    '''
    m = len(mats)
    if not m:
        raise InvalidParams('Empty matrix basis')
    arrs = [to_array(b) for b in mats]
    size = arrs[0].shape[0]
    gram = [[rat(np.trace(x @ y)) for y in arrs] for x in arrs]
    ginv = inverse(gram)
    if ginv is None:
        raise InvalidParams('Trace form is degenerate on this basis')
    out = []
    for i in range(size):
        row = []
        for j in range(size):
            coeffs = [
                rat(sum(ginv[a][b] * arrs[a][i, j] for a in range(m)))
                for b in range(m)
            ]
            row.append(MultiPoly.linear(coeffs))
        out.append(row)
    return out


def _gl2() -> StructureConstants:
    # Basis E11, E12, E21, E22
    units = [(0, 0), (0, 1), (1, 0), (1, 1)]
    c = zeros(4, 4, 4)
    for a, (i, j) in enumerate(units):
        for b, (k, q) in enumerate(units):
            if j == k:
                c[a, b, units.index((i, q))] += 1
            if q == i:
                c[a, b, units.index((k, j))] -= 1
    return StructureConstants.from_tensor(c, ('E11', 'E12', 'E21', 'E22'))


def _sl2() -> StructureConstants:
    # Basis e, h, f: [e,f] = h, [h,e] = 2e, [h,f] = -2f
    c = zeros(3, 3, 3)
    for i, j, k, v in [(0, 2, 1, 1), (1, 0, 0, 2), (1, 2, 2, -2)]:
        c[i, j, k] = v
        c[j, i, k] = -v
    return StructureConstants.from_tensor(c, ('e', 'h', 'f'))


_CFG = PointSamplerConfig(seed=3, samples=16, coord_bound=100)


def test_jacobi_checks():
    assert check_jacobi(_gl2()) == []
    assert check_jacobi(_sl2()) == []
    assert check_jacobi(StructureConstants.abelian(5)) == []
    c = zeros(2, 2, 2)
    c[0, 1, 0] = 1
    assert check_jacobi(StructureConstants(c)) == [
        {'kind': 'antisymmetry', 'indices': [0, 1, 0], 'residual': 1}
    ]
    # Antisymmetric but not Jacobi: [e1,e2] = e3, [e2,e3] = e2, [e3,e1] = e2
    c = zeros(3, 3, 3)
    for i, j, k in [(0, 1, 2), (1, 2, 1), (2, 0, 1)]:
        c[i, j, k], c[j, i, k] = 1, -1
    bad = check_jacobi(StructureConstants(c))
    assert bad and all(v['kind'] == 'jacobi' for v in bad)


def test_bracket_and_lie_poisson():
    sl2 = _sl2()
    assert bracket_apply(sl2, [0, 1, 0], [1, 0, 0]) == [2, 0, 0]
    assert bracket_apply(sl2, [1, 2, 3], [1, 2, 3]) == [0, 0, 0]
    assert not np.any(lie_poisson_matrix(sl2, [0, 0, 0]) != 0)
    assert lie_poisson_rank(sl2, [0, 1, 0]) == 2
    try:
        bracket_apply(sl2, [1, 0], [0, 1, 0])
    except DimensionMismatch:
        pass
    else:
        raise AssertionError('length mismatch accepted')


def test_index_values():
    assert algebra_index(StructureConstants.abelian(3), _CFG).index == 3
    assert algebra_index(_gl2(), _CFG).index == 2
    assert algebra_index(_sl2(), _CFG).index == 1
    assert algebra_index(StructureConstants.abelian(0), _CFG).index == 0
    res, rounds = stable_index(_sl2(), _CFG)
    assert res.index == 1 and rounds == 2
    # Invariant under a change of basis
    P = [[1, 2, 0], [0, 1, 3], [1, 0, 1]]
    assert algebra_index(change_basis(_sl2(), P), _CFG).index == 1


def test_subalgebra_restrict():
    gl2 = _gl2()
    full = subalgebra_restrict(gl2, np.eye(4, dtype=int).tolist())
    assert full == gl2
    # {E11, E12}: [E11, E12] = E12
    r = subalgebra_restrict(gl2, [[1, 0, 0, 0], [0, 1, 0, 0]])
    assert r.nonzero_brackets() == [(0, 1, 1, 1)]
    try:
        subalgebra_restrict(_sl2(), [[1, 0, 0], [0, 0, 1]])
    except NotASubalgebra as ex:
        assert ex.witness['pair'] == [0, 1]
        assert ex.witness['bracket'] == [0, 1, 0]
    else:
        raise AssertionError('{e, f} accepted as a subalgebra')


def test_coisotropy_numbers():
    sl2 = _sl2()
    b_plus = [[1, 0, 0], [0, 1, 0]]
    n_minus = [[0, 0, 1]]
    # Zero covector recovers (ind h, codim h, h)
    zero = coisotropy_numbers(sl2, b_plus, [0], _CFG)
    assert (zero.ind, zero.codim) == (0, 1)
    assert zero.stabilizer == ((1, 0, 0), (0, 1, 0))
    # Principal nilpotent direction on b+: complement is {f}
    nil = coisotropy_numbers(sl2, b_plus, [1], _CFG)
    assert (nil.ind, nil.codim) == (1, 0)
    assert nil.complement == ((0, 0, 1),)
    # Regular semisimple direction on n-: complement is {e, h}
    ss = coisotropy_numbers(sl2, n_minus, [0, 1], _CFG)
    assert (ss.ind, ss.codim) == (0, 1)
    assert ss.stabilizer == ()


def test_semidirect_products():
    aff1 = semidirect_product(StructureConstants.abelian(1), [[[1]]], 1)
    assert aff1.nonzero_brackets() == [(0, 1, 1, 1)]
    assert check_jacobi(aff1) == []
    triv = semidirect_product(_sl2(), [[[0]]] * 3, 1)
    assert algebra_index(triv, _CFG).index == 2
    try:
        semidirect_product(_sl2(), [[[1]], [[0]], [[0]]], 1)
    except NotARepresentation as ex:
        assert ex.witness['pair'] == [0, 1]
    else:
        raise AssertionError('non-representation accepted')


def test_twilled_truncate():
    sl2 = _sl2()
    tw = twilled_truncate(sl2, [[1, 0, 0], [0, 1, 0]], [[0, 0, 1]])
    assert check_jacobi(tw.c) == []
    assert not tw.c.is_abelian()
    # h acts on f by -2, e by 0; the h-part of [f, e] = -h is dropped
    assert tw.a1 == (((0,),), ((-2,),))
    assert tw.a2 == (((0, 0), (-1, 0)),)
    assert algebra_index(tw.c, _CFG).index == 1
    # An ideal with abelian complement action: truncation changes nothing
    aff1 = semidirect_product(StructureConstants.abelian(1), [[[1]]], 1)
    assert twilled_truncate(aff1, [[1, 0]], [[0, 1]]).c == aff1
    try:
        twilled_truncate(sl2, [[1, 0, 0]], [[2, 0, 0]])
    except NotDirectSum:
        pass
    else:
        raise AssertionError('overlapping subspaces accepted')


def test_rais_check():
    from .catalog import left_mult
    from .nijenhuis import image_subalgebra, operator, shift

    aff1 = rais_check(StructureConstants.abelian(1), [[[1]]], 1, _CFG)
    assert (aff1.lhs, aff1.rhs) == (0, 0) and aff1.holds
    triv = rais_check(_sl2(), [[[0, 0], [0, 0]]] * 3, 2, _CFG)
    assert (triv.lhs, triv.orbit_codim, triv.stabilizer_index) == (3, 2, 1)
    tw = twilled_truncate(_sl2(), [[1, 0, 0], [0, 1, 0]], [[0, 0, 1]])
    b_plus = subalgebra_restrict(_sl2(), [[1, 0, 0], [0, 1, 0]])
    assert rais_check(b_plus, tw.a1, 1, _CFG).holds
    # h = im(N - λ) acting on ker(N - λ) for N = L_A on gl_2, gl_3
    for n in (2, 3):
        e = left_mult(n)
        c, dim = e.algebra, e.algebra.dim
        for lam in e.pencil.exceptional:
            B1 = image_subalgebra(c, e.operator, lam)
            B2 = nullspace(shift(operator(e.operator, dim), lam), dim)
            tw = twilled_truncate(c, B1, B2)
            h = subalgebra_restrict(c, B1)
            res = rais_check(h, tw.a1, len(B2), _CFG)
            assert res.holds and res.lhs == n, (n, lam, res)


def test_trace_dual_matrix():
    # gl_2 in the basis E11, E12, E21, E22: x_ij is the coordinate of E_ji
    mats = [
        [[1, 0], [0, 0]],
        [[0, 1], [0, 0]],
        [[0, 0], [1, 0]],
        [[0, 0], [0, 1]],
    ]
    x = trace_dual_matrix(mats)
    assert x[0][1] == MultiPoly.var(4, 2)
    assert x[1][0] == MultiPoly.var(4, 1)
    assert x[1][1] == MultiPoly.var(4, 3)
    try:
        trace_dual_matrix(mats[:2])
    except InvalidParams:
        pass
    else:
        raise AssertionError('degenerate trace form accepted')
