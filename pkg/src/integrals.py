'''
First integrals of Lie-Poisson pencils as exact polynomials on g*.

Functions of a matrix "x" are written on g* through the trace form:
x(ξ) = trace_dual_matrix(basis)(ξ), so that Tr(x(ξ) B_a) = ξ_a. For gl(n)
in the E_ij basis this makes x_ij the coordinate of E_ji.

The Lie-Poisson bracket is {f, g}(ξ) = Σ c[i][j][k] ξ_k ∂_i f ∂_j g, and
the hamiltonian field of f has components X_i = Σ_j Π_ij ∂_j f, so that
the derivative of g along X_f is {g, f}.
'''

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from .catalog import (
    borel_operator,
    gl_matrices,
    is_diagonal,
    left_mult,
    sl,
    square_matrix,
)
from .common import (
    PointSamplerConfig,
    Rational,
    get_logger,
    parallel_map,
    rat,
)
from .errors import DimensionMismatch, InvalidParams, NotACasimir
from .exact import rank, to_array
from .lie import (
    IndexResult,
    StructureConstants,
    algebra_index,
    trace_dual_matrix,
)
from .nijenhuis import BracketPencil, operator, require_nijenhuis
from .poly import MultiPoly, PolyMatrix

log = get_logger()

PROVENANCES = ('manakov', 'resolvent', 'borel', 'casimir-expansion', 'manual')


@dataclass(frozen=True)
class FamilyMember:
    name: str
    poly: MultiPoly
    k: int
    order: int  # the power l of λ, or of 1/λ

    def to_json(self):
        return {
            'name': self.name,
            'k': self.k,
            'l': self.order,
            **self.poly.to_json(),
        }


@dataclass(frozen=True)
class IntegralFamily:
    provenance: str
    nvars: int
    members: Tuple[FamilyMember, ...]
    notes: Tuple[str, ...] = ()
    # Orders beyond k - 1 were requested explicitly
    extended: bool = False

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise InvalidParams(
                f'Unknown provenance {self.provenance!r}', known=PROVENANCES
            )
        names = [m.name for m in self.members]
        dups = sorted({x for x in names if names.count(x) > 1})
        if dups:
            raise InvalidParams('Duplicate member names', names=dups)
        for m in self.members:
            if m.poly.nvars != self.nvars:
                raise DimensionMismatch(
                    f'{m.name} has {m.poly.nvars} variables, '
                    f'family has {self.nvars}'
                )
        if self.provenance in ('manakov', 'resolvent') and not self.extended:
            bad = [m.name for m in self.members if m.order > m.k - 1]
            if bad:
                raise InvalidParams(
                    f'Orders beyond k - 1 in a {self.provenance} family',
                    names=bad,
                )

    def __len__(self):
        return len(self.members)

    @property
    def polys(self) -> List[MultiPoly]:
        return [m.poly for m in self.members]

    @property
    def names(self) -> List[str]:
        return [m.name for m in self.members]

    def member(self, name: str) -> FamilyMember:
        for m in self.members:
            if m.name == name:
                return m
        raise KeyError(name)

    def replacing(self, name: str, poly: MultiPoly) -> 'IntegralFamily':
        old = self.member(name)
        members = tuple(
            FamilyMember(name, poly, old.k, old.order) if m is old else m
            for m in self.members
        )
        return IntegralFamily(
            'manual', self.nvars, members, self.notes, self.extended
        )

    def with_members(self, extra: Iterable[FamilyMember]) -> 'IntegralFamily':
        return IntegralFamily(
            'manual',
            self.nvars,
            self.members + tuple(extra),
            self.notes,
            self.extended,
        )

    def to_json(self):
        return {
            'provenance': self.provenance,
            'nvars': self.nvars,
            'extended': self.extended,
            'notes': list(self.notes),
            'members': list(self.members),
        }


def _check_nvars(f: MultiPoly, n: int, what: str):
    if f.nvars != n:
        raise DimensionMismatch(
            f'{what} has {f.nvars} variables, the algebra has dimension {n}'
        )


def lie_poisson_bracket(
    c: StructureConstants, f: MultiPoly, g: MultiPoly
) -> MultiPoly:
    n = c.dim
    _check_nvars(f, n, 'f')
    _check_nvars(g, n, 'g')
    df, dg = f.gradient(), g.gradient()
    out = MultiPoly.zero(n)
    for i, j, k, v in c.nonzero_brackets():
        cross = df[i] * dg[j] - df[j] * dg[i]
        if cross:
            out = out + cross * MultiPoly.var(n, k) * v
    return out


def poisson_bracket_poly(
    p: BracketPencil, s: Sequence[Rational], f: MultiPoly, g: MultiPoly
) -> MultiPoly:
    'Bracket of the pencil member s1·c1 + s2·c2'
    return lie_poisson_bracket(p.member(s), f, g)


def lie_poisson_field(c: StructureConstants, f: MultiPoly) -> List[MultiPoly]:
    n = c.dim
    _check_nvars(f, n, 'f')
    df = f.gradient()
    out = [MultiPoly.zero(n) for _ in range(n)]
    for i, j, k, v in c.nonzero_brackets():
        xk = MultiPoly.var(n, k) * v
        if df[j]:
            out[i] = out[i] + xk * df[j]
        if df[i]:
            out[j] = out[j] - xk * df[i]
    return out


def hamiltonian_field(
    p: BracketPencil, s: Sequence[Rational], f: MultiPoly
) -> List[MultiPoly]:
    return lie_poisson_field(p.member(s), f)


def apply_field(X: Sequence[MultiPoly], g: MultiPoly) -> MultiPoly:
    'Σ X_i ∂_i g; for X = X_f this is {g, f}'
    if len(X) != g.nvars:
        raise DimensionMismatch(
            f'Field with {len(X)} components, function of {g.nvars} variables'
        )
    out = MultiPoly.zero(g.nvars)
    for xi, dg in zip(X, g.gradient()):
        if xi and dg:
            out = out + xi * dg
    return out


def matrix_coordinates(mats) -> PolyMatrix:
    'x(ξ) for a matrix basis, see the module docstring'
    return PolyMatrix(trace_dual_matrix(mats))


def _diagonal(a, n: int) -> Tuple[Tuple[Rational, ...], Tuple[str, ...]]:
    a = square_matrix(a, n, 'A')
    if not is_diagonal(a):
        raise InvalidParams('A must be diagonal', a=[list(r) for r in a])
    diag = tuple(a[i][i] for i in range(n))
    if len(set(diag)) < n:
        log.warning(f'A = diag{diag} has repeated entries')
        return diag, ('A has repeated eigenvalues',)
    return diag, ()


def _with_series(x: PolyMatrix, weights) -> PolyMatrix:
    '''
    Appends one variable t and returns the matrix with entries
    x_ij·w_i(t), where `weights[i]` is the polynomial w_i in t alone.
    '''
    return PolyMatrix(
        [
            [e.with_extra_vars(1) * weights[i] for e in row]
            for i, row in enumerate(x.rows)
        ]
    )


def manakov_family(n: int, a=None) -> IntegralFamily:
    '''
    h_{k,l}: the coefficient of λ^l in (1/k)·Tr(x + λA)^k, for
    k = 1..n and l = 0..k-1.
    '''
    diag, notes = _diagonal(a, n)
    m = n * n
    x = matrix_coordinates(gl_matrices(n))
    lam = MultiPoly.var(m + 1, m)
    y = PolyMatrix(
        [
            [
                e.with_extra_vars(1) + (lam * diag[i] if i == j else 0)
                for j, e in enumerate(row)
            ]
            for i, row in enumerate(x.rows)
        ]
    )
    traces = y.trace_powers(n)
    members = []
    for k in range(1, n + 1):
        for order in range(k):
            poly = traces[k - 1].coefficient(m, order) * Fraction(1, k)
            members.append(FamilyMember(f'h_{{{k},{order}}}', poly, k, order))
    log.info(f'Manakov family of gl({n}): {len(members)} members')
    return IntegralFamily('manakov', m, tuple(members), notes)


def resolvent_family(
    n: int, a=None, max_l: Optional[int] = None, extended: bool = False
) -> IntegralFamily:
    '''
    f_{k,l}: the coefficient of 1/λ^l in Tr(Σ_j λ^{-j} A^j x)^k, i.e. the
    sum of Tr(A^{j_1}x ⋯ A^{j_k}x) over compositions j_1 + ... + j_k = l.
    Orders stop at min(k - 1, max_l) unless `extended`.
    '''
    diag, notes = _diagonal(a, n)
    if max_l is None:
        max_l = n - 1
    if max_l < 0:
        raise InvalidParams(f'max_l must be >= 0, got {max_l}')
    top = max_l if extended else min(max_l, n - 1)
    m = n * n
    mu = MultiPoly.var(m + 1, m)
    # (A^j x)_ik = a_i^j x_ik, so the truncated series is a row scaling
    weights = [
        sum(((mu * d) ** j for j in range(top + 1)), MultiPoly.zero(m + 1))
        for d in diag
    ]
    y = _with_series(matrix_coordinates(gl_matrices(n)), weights)
    traces = y.trace_powers(n)
    members = []
    for k in range(1, n + 1):
        last = max_l if extended else min(k - 1, max_l)
        for order in range(last + 1):
            poly = traces[k - 1].coefficient(m, order)
            members.append(FamilyMember(f'f_{{{k},{order}}}', poly, k, order))
    if extended:
        notes += ('orders beyond k - 1 included; they add nothing new',)
    log.info(f'Resolvent family of gl({n}): {len(members)} members')
    return IntegralFamily('resolvent', m, tuple(members), notes, extended)


def _transported_coordinates(N, n: int, series: int) -> List[MultiPoly]:
    '''
    η_a = Σ_{j <= series} t^j ((Nᵀ)^j ξ)_a as polynomials in ξ and one
    extra variable t
    '''
    nt = to_array(N).T
    power = to_array([[int(i == j) for j in range(n)] for i in range(n)])
    eta = [MultiPoly.zero(n + 1) for _ in range(n)]
    t = MultiPoly.var(n + 1, n)
    for j in range(series + 1):
        tj = t**j
        for a in range(n):
            row = [rat(x) for x in power[a]]
            if any(row):
                eta[a] = eta[a] + MultiPoly.linear(row).with_extra_vars(1) * tj
        power = nt @ power
    return eta


def borel_family(n: int) -> IntegralFamily:
    '''
    Coefficients in λ of Tr(x(η)^k), η = Nᵀξ + λξ, k = 2..n, for the
    ±1 Borel projector N on sl(n). These generate the Casimirs of every
    member, since (N - λ)^{-1} = (1 - λ²)^{-1}(N + λ).
    '''
    base = sl(n)
    dim = base.algebra.dim
    N = borel_operator(n, 1, -1)
    nt = to_array(N).T
    lam = MultiPoly.var(dim + 1, dim)
    eta = []
    for a in range(dim):
        row = [rat(v) for v in nt[a]]
        eta.append(
            MultiPoly.linear(row).with_extra_vars(1)
            + lam * MultiPoly.var(dim + 1, a)
        )
    x = matrix_coordinates(base.matrices)
    moved = PolyMatrix([[e.substitute(eta) for e in row] for row in x.rows])
    traces = moved.trace_powers(n)
    members = []
    for k in range(2, n + 1):
        for order in range(k + 1):
            poly = traces[k - 1].coefficient(dim, order)
            if poly:
                members.append(
                    FamilyMember(f'b_{{{k},{order}}}', poly, k, order)
                )
    log.info(f'Borel family of sl({n}): {len(members)} members')
    return IntegralFamily('borel', dim, tuple(members))


def _check_casimir(c: StructureConstants, poly: MultiPoly, idx: int):
    n = c.dim
    _check_nvars(poly, n, f'Casimir {idx + 1}')
    for i in range(n):
        b = lie_poisson_bracket(c, poly, MultiPoly.var(n, i))
        if b:
            raise NotACasimir(
                f'Casimir {idx + 1} does not commute with ξ_{i + 1}',
                casimir=idx,
                coordinate=i,
                bracket=b.to_json(),
            )


def casimir_resolvent_family(
    c: StructureConstants,
    N,
    casimirs: Sequence[MultiPoly],
    max_l: int,
) -> IntegralFamily:
    '''
    Orders 0..max_l of the Neumann expansion of C_j((N - λ)^{-T}ξ) in
    t = 1/λ. The overall factor (-t)^deg is dropped, so each homogeneous
    component of C_j is expanded on its own.
    '''
    n = c.dim
    N = operator(N, n)
    require_nijenhuis(c, N)
    for idx, poly in enumerate(casimirs):
        _check_casimir(c, poly, idx)
    eta = _transported_coordinates(N, n, max_l)
    members = []
    for idx, poly in enumerate(casimirs):
        parts = {d: p for d, p in poly.homogeneous_components().items() if d}
        for d, part in parts.items():
            moved = part.substitute(eta)
            tag = f'{idx + 1}' if len(parts) == 1 else f'{idx + 1}.{d}'
            for order in range(max_l + 1):
                coeff = moved.coefficient(n, order)
                if coeff:
                    members.append(
                        FamilyMember(f'c_{{{tag},{order}}}', coeff, d, order)
                    )
    log.info(
        f'Casimir expansion: {len(casimirs)} Casimirs, orders <= {max_l}, '
        f'{len(members)} nonzero members'
    )
    return IntegralFamily('casimir-expansion', n, tuple(members))


def _pack(p: MultiPoly):
    return p.nvars, dict(p.terms)


def _pair_brackets(args) -> Tuple[bool, bool]:
    'Top-level for `parallel_map`; MultiPoly travels as (nvars, terms)'
    c1, c2, f, g = args
    f, g = MultiPoly(*f), MultiPoly(*g)
    return (
        _pack(lie_poisson_bracket(c1, f, g)),
        _pack(lie_poisson_bracket(c2, f, g)),
    )


@dataclass(frozen=True)
class InvolutivityReport:
    pairs: Tuple[Tuple[str, str, bool, bool], ...]  # (f, g, c1 zero, c2 zero)
    violations: Tuple[dict, ...]

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_json(self):
        return {
            'verdict': 'INVOLUTIVE' if self.holds else 'NOT_INVOLUTIVE',
            'pairs_checked': len(self.pairs),
            'pairs': [
                {
                    'pair': [f, g],
                    'c1': 'zero' if z1 else 'nonzero',
                    'c2': 'zero' if z2 else 'nonzero',
                }
                for f, g, z1, z2 in self.pairs
            ],
            'violations': list(self.violations),
        }


def involutivity_check(
    F: IntegralFamily, p: BracketPencil, threads: Optional[int] = None
) -> InvolutivityReport:
    '''
    Brackets of all pairs under c1 and c2; by bilinearity this covers every
    member of the pencil.
    '''
    if F.nvars != p.dim:
        raise DimensionMismatch(
            f'Family in {F.nvars} variables, pencil of dimension {p.dim}'
        )
    pairs = list(combinations(range(len(F)), 2))
    jobs = [
        (p.c1, p.c2, _pack(F.polys[i]), _pack(F.polys[j])) for i, j in pairs
    ]
    results = parallel_map(_pair_brackets, jobs, threads)
    rows, violations = [], []
    for (i, j), (b1, b2) in zip(pairs, results):
        b1, b2 = MultiPoly(*b1), MultiPoly(*b2)
        f, g = F.names[i], F.names[j]
        rows.append((f, g, not b1, not b2))
        for which, b in (('c1', b1), ('c2', b2)):
            if b:
                violations.append(
                    {'pair': [f, g], 'bracket': which, 'value': b}
                )
    log.info(
        f'Involutivity: {len(pairs)} pairs, {len(violations)} nonzero brackets'
    )
    return InvolutivityReport(tuple(rows), tuple(violations))


@dataclass(frozen=True)
class LenardRelation:
    relation: int  # 1: h-family, 2: f-family
    k: int
    order: int
    lhs: str
    rhs: str
    # (component, lhs value, rhs value) of the first mismatch
    difference: Optional[Tuple[int, MultiPoly, MultiPoly]] = None

    @property
    def holds(self) -> bool:
        return self.difference is None

    def to_json(self):
        d = {
            'relation': self.relation,
            'k': self.k,
            'l': self.order,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'holds': self.holds,
        }
        if self.difference is not None:
            comp, lhs, rhs = self.difference
            d['first_difference'] = {
                'component': comp,
                'lhs': lhs,
                'rhs': rhs,
            }
        return d


@dataclass(frozen=True)
class LenardReport:
    relations: Tuple[LenardRelation, ...]
    notes: Tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.relations)

    def to_json(self):
        return {
            'verdict': 'HOLDS' if self.holds else 'FAILS',
            'relations': list(self.relations),
            'notes': list(self.notes),
        }


def _compare_fields(
    relation: int,
    k: int,
    order: int,
    p: BracketPencil,
    lhs: FamilyMember,
    rhs: FamilyMember,
) -> LenardRelation:
    x1 = hamiltonian_field(p, (1, 0), lhs.poly)
    x2 = hamiltonian_field(p, (0, 1), rhs.poly)
    diff = next(
        ((i, a, b) for i, (a, b) in enumerate(zip(x1, x2)) if a != b), None
    )
    if diff is not None:
        log.warning(
            f'θ1({lhs.name}) != θ2({rhs.name}) in component {diff[0]}'
        )
    return LenardRelation(relation, k, order, lhs.name, rhs.name, diff)


def lenard_check(
    n: int, a=None, p: Optional[BracketPencil] = None
) -> LenardReport:
    '''
    θ1(h_{k+1,l+1}) = θ2(h_{k,l}) and θ1(f_{k,l+1}) = θ2(f_{k,l}) as exact
    identities of polynomial vector fields, on the gl(n) pencil of L_A.
    '''
    if p is None:
        p = left_mult(n, a).pencil
    h = manakov_family(n, a)
    f = resolvent_family(n, a)
    if p.dim != h.nvars:
        raise DimensionMismatch(f'Pencil of dim {p.dim} is not on gl({n})')
    out = []
    for k in range(1, n):
        for order in range(k):
            out.append(
                _compare_fields(
                    1,
                    k,
                    order,
                    p,
                    h.member(f'h_{{{k + 1},{order + 1}}}'),
                    h.member(f'h_{{{k},{order}}}'),
                )
            )
    for k in range(2, n + 1):
        for order in range(k - 1):
            out.append(
                _compare_fields(
                    2,
                    k,
                    order,
                    p,
                    f.member(f'f_{{{k},{order + 1}}}'),
                    f.member(f'f_{{{k},{order}}}'),
                )
            )
    report = LenardReport(tuple(out), h.notes)
    log.info(
        f'Lenard relations on gl({n}): {len(out)} checked, '
        f'{"all hold" if report.holds else "FAILURES"}'
    )
    return report


def _jacobian(grads: List[List[MultiPoly]], point) -> List[List[Rational]]:
    return [[g.evaluate(point) for g in row] for row in grads]


def _gradients(F: IntegralFamily) -> List[List[MultiPoly]]:
    return [poly.gradient() for poly in F.polys]


@dataclass(frozen=True)
class CompletenessReport:
    max_rank: int
    target: int
    index: IndexResult
    witness: Tuple[Rational, ...]
    members: int

    @property
    def complete(self) -> bool:
        return self.max_rank == self.target

    def to_json(self):
        return {
            'verdict': 'COMPLETE' if self.complete else 'INCOMPLETE',
            'max_rank': self.max_rank,
            'target': self.target,
            'members': self.members,
            'index': self.index,
            'witness': list(self.witness),
        }


def completeness_rank(
    F: IntegralFamily, p: BracketPencil, cfg: PointSamplerConfig
) -> CompletenessReport:
    'Generic rank of the differentials against (dim + ind g) / 2'
    n = p.dim
    if F.nvars != n:
        raise DimensionMismatch(
            f'Family in {F.nvars} variables, pencil of dimension {n}'
        )
    idx = algebra_index(p.c1, cfg)
    target = (n + idx.index) // 2
    ceiling = min(len(F), n)
    grads = _gradients(F)
    best, witness = 0, (0,) * n
    for pt in cfg.points(n, salt=21):
        r = rank(_jacobian(grads, pt)) if grads else 0
        if r > best:
            best, witness = r, tuple(pt)
            if best == ceiling:
                break
    if best > target:
        log.warning(f'Rank {best} > {target}: the family is not involutive')
    log.info(f'Completeness: rank {best}, target {target}')
    return CompletenessReport(best, target, idx, witness, len(F))


@dataclass(frozen=True)
class EquivalenceReport:
    points_checked: int
    # (point, rank J1, rank J2, rank J1 ∪ J2) where they first disagree
    mismatch: Optional[Tuple[Tuple[Rational, ...], int, int, int]]
    ranks: Tuple[int, int, int]  # at the first sampled point

    @property
    def equivalent(self) -> bool:
        return self.mismatch is None

    def to_json(self):
        d = {
            'verdict': 'EQUIVALENT' if self.equivalent else 'NOT_EQUIVALENT',
            'points_checked': self.points_checked,
            'ranks': list(self.ranks),
        }
        if self.mismatch is not None:
            pt, r1, r2, r12 = self.mismatch
            d['mismatch'] = {
                'point': list(pt),
                'rank_1': r1,
                'rank_2': r2,
                'rank_union': r12,
            }
        return d


def family_span_equivalence(
    F1: IntegralFamily, F2: IntegralFamily, cfg: PointSamplerConfig
) -> EquivalenceReport:
    'rank J1 = rank J2 = rank (J1 ∪ J2) at every sampled point'
    if F1.nvars != F2.nvars:
        raise DimensionMismatch(
            f'Families in {F1.nvars} and {F2.nvars} variables'
        )
    g1, g2 = _gradients(F1), _gradients(F2)
    first, checked = None, 0
    for pt in cfg.points(F1.nvars, salt=22):
        j1, j2 = _jacobian(g1, pt), _jacobian(g2, pt)
        ranks = (rank(j1), rank(j2), rank(j1 + j2))
        checked += 1
        if first is None:
            first = ranks
        if len(set(ranks)) > 1:
            log.info(f'Spans differ at {pt}: ranks {ranks}')
            return EquivalenceReport(checked, (tuple(pt),) + ranks, first)
    return EquivalenceReport(checked, None, first)


def family_contains(F: IntegralFamily, f: MultiPoly) -> bool:
    'f lies in the linear span of the members'
    _check_nvars(f, F.nvars, 'f')
    monomials = sorted({e for p in F.polys + [f] for e in p.terms})
    if not monomials:
        return True
    rows = [[p.terms.get(e, 0) for e in monomials] for p in F.polys]
    target = [f.terms.get(e, 0) for e in monomials]
    return rank(rows + [target]) == rank(rows) if rows else not f


@dataclass(frozen=True)
class SaturationReport:
    order: int
    ranks: Tuple[int, ...]  # generic differential rank using orders <= l
    max_l: int

    def to_json(self):
        return {
            'saturation_order': self.order,
            'ranks_by_order': list(self.ranks),
            'max_l': self.max_l,
        }


def saturation_order(
    c: StructureConstants,
    N,
    casimirs: Sequence[MultiPoly],
    max_l: int,
    cfg: PointSamplerConfig,
) -> SaturationReport:
    '''
    Smallest expansion order after which the span of differentials of the
    Casimir expansion stops growing, up to `max_l`.
    '''
    family = casimir_resolvent_family(c, N, casimirs, max_l)
    points = cfg.points(c.dim, salt=23)
    grads = _gradients(family)
    ranks = []
    for top in range(max_l + 1):
        rows = [g for g, m in zip(grads, family.members) if m.order <= top]
        ranks.append(
            max((rank(_jacobian(rows, pt)) for pt in points), default=0)
            if rows
            else 0
        )
    order = min(i for i, r in enumerate(ranks) if r == ranks[-1])
    log.info(f'Expansion ranks by order {ranks}: saturated at {order}')
    return SaturationReport(order, tuple(ranks), max_l)


_CFG = PointSamplerConfig(seed=5, samples=8, coord_bound=50)


def _gl_x(n: int) -> PolyMatrix:
    return matrix_coordinates(gl_matrices(n))


def test_bracket_examples():
    s = sl(2)
    p = BracketPencil(s.algebra, s.algebra, (), 'manual')
    e, h, f = (MultiPoly.var(3, i) for i in range(3))
    # Basis (e, h, f): [e, f] = h
    assert poisson_bracket_poly(p, (1, 0), e, f) == h
    assert poisson_bracket_poly(p, (1, 0), f, e) == -h
    assert not poisson_bracket_poly(p, (1, 0), e * f + h, e * f + h)
    gl2 = left_mult(2, (1, 2))
    tr = _gl_x(2).trace()
    assert tr == MultiPoly.linear([1, 0, 0, 1])
    g = MultiPoly.var(4, 1) ** 2 * MultiPoly.var(4, 2) + MultiPoly.var(4, 0)
    assert not poisson_bracket_poly(gl2.pencil, (1, 0), tr, g)


def test_hamiltonian_fields():
    e = left_mult(2, (1, 2))
    x = _gl_x(2)
    zero = [MultiPoly.zero(4)] * 4
    assert hamiltonian_field(e.pencil, (1, 0), MultiPoly.constant(4, 7)) == zero
    half_tr_sq = x.trace_powers(2)[1] * Fraction(1, 2)
    assert hamiltonian_field(e.pencil, (1, 0), half_tr_sq) == zero
    # θ2 dTr at x is xA - Ax up to the sign of X_f; coordinate of E_ij
    # is Tr(M E_ij) = M_ji
    a = PolyMatrix.from_scalars([[1, 0], [0, 2]], 4)
    m = x @ a + (a @ x).scale(-1)
    expected = [-m.rows[j][i] for i in range(2) for j in range(2)]
    field = hamiltonian_field(e.pencil, (0, 1), x.trace())
    assert field == expected and any(field)
    g = MultiPoly.var(4, 1) * MultiPoly.var(4, 3)
    assert apply_field(field, g) == poisson_bracket_poly(
        e.pencil, (0, 1), g, x.trace()
    )


def test_manakov_and_resolvent_families():
    h = manakov_family(2, (1, 2))
    x = _gl_x(2)
    assert h.names == ['h_{1,0}', 'h_{2,0}', 'h_{2,1}']
    assert h.member('h_{1,0}').poly == x.trace()
    assert h.member('h_{2,0}').poly == x.trace_powers(2)[1] * Fraction(1, 2)
    assert h.member('h_{2,1}').poly == MultiPoly.linear([1, 0, 0, 2])
    f = resolvent_family(2, (1, 2))
    assert f.names == ['f_{1,0}', 'f_{2,0}', 'f_{2,1}']
    a = PolyMatrix.from_scalars([[1, 0], [0, 2]], 4)
    assert f.member('f_{2,1}').poly == (a @ x @ x).trace() * 2
    h3, f3 = manakov_family(3), resolvent_family(3)
    for k in range(1, 4):
        assert f3.member(f'f_{{{k},0}}').poly == h3.member(
            f'h_{{{k},0}}'
        ).poly * k
    assert len(h3) == 6 and len(f3) == 6
    wide = resolvent_family(2, (1, 2), max_l=3, extended=True)
    assert wide.extended and len(wide) == 8
    repeated = manakov_family(2, (1, 1))
    assert repeated.notes == ('A has repeated eigenvalues',)


def test_borel_family():
    b2 = borel_family(2)
    assert len(b2) == 3 and {m.k for m in b2.members} == {2}
    for n in (2, 3):
        fam = borel_family(n)
        x = matrix_coordinates(sl(n).matrices)
        diag_sq = sum(
            (x.rows[i][i] ** 2 for i in range(n)), MultiPoly.zero(fam.nvars)
        )
        cross = sum(
            (
                x.rows[i][j] * x.rows[j][i]
                for i in range(n)
                for j in range(i + 1, n)
            ),
            MultiPoly.zero(fam.nvars),
        )
        assert family_contains(fam, diag_sq)
        assert family_contains(fam, cross)
    b3 = borel_family(3)
    assert sorted({m.k for m in b3.members}) == [2, 3]
    assert not family_contains(b3, MultiPoly.var(8, 0))


def test_borel_family_involutivity():
    from .catalog import borel_projector

    for n, members in [(2, 3), (3, 7)]:
        fam = borel_family(n)
        assert len(fam) == members
        rep = involutivity_check(fam, borel_projector(n).pencil, threads=1)
        assert rep.holds, rep.to_json()
        assert len(rep.pairs) == members * (members - 1) // 2


def test_casimir_resolvent_family():
    e = left_mult(2, (1, 2))
    x = _gl_x(2)
    tr, tr2 = x.trace_powers(2)
    fam = casimir_resolvent_family(e.algebra, e.operator, [tr], 2)
    assert fam.member('c_{1,1}').poly == MultiPoly.linear([1, 0, 0, 2])
    assert fam.member('c_{1,2}').poly == MultiPoly.linear([1, 0, 0, 4])
    zero_op = [[0] * 4 for _ in range(4)]
    fam0 = casimir_resolvent_family(e.algebra, zero_op, [tr, tr2], 2)
    assert fam0.polys == [tr, tr2]
    fam2 = casimir_resolvent_family(e.algebra, e.operator, [tr, tr2], 1)
    assert family_span_equivalence(
        fam2, resolvent_family(2, (1, 2)), _CFG
    ).equivalent
    try:
        casimir_resolvent_family(e.algebra, e.operator, [x.rows[0][1]], 1)
    except NotACasimir as ex:
        assert ex.witness['casimir'] == 0
    else:
        raise AssertionError('x_12 is not a Casimir')


def test_involutivity():
    e = left_mult(3, (1, 2, 3))
    h = manakov_family(3, (1, 2, 3))
    rep = involutivity_check(h, e.pencil, threads=1)
    assert rep.holds and len(rep.pairs) == 15
    f = resolvent_family(3, (1, 2, 3))
    assert involutivity_check(f, e.pencil, threads=1).holds
    e2 = left_mult(2, (1, 2))
    h2 = manakov_family(2, (1, 2))
    bad = h2.replacing(
        'h_{2,1}', h2.member('h_{2,1}').poly + MultiPoly.var(4, 1)
    )
    rep = involutivity_check(bad, e2.pencil, threads=1)
    assert not rep.holds
    assert {tuple(v['pair']) for v in rep.violations} >= {
        ('h_{2,0}', 'h_{2,1}')
    }
    assert rep.to_json()['verdict'] == 'NOT_INVOLUTIVE'


def test_lenard_relations():
    for n in (2, 3):
        rep = lenard_check(n, tuple(range(1, n + 1)))
        assert rep.holds, rep.to_json()
    rep = lenard_check(2, (1, 2))
    assert [(r.relation, r.k, r.order) for r in rep.relations] == [
        (1, 1, 0),
        (2, 2, 0),
    ]
    flat = lenard_check(2, (1, 1))
    assert flat.holds and flat.notes == ('A has repeated eigenvalues',)


def test_completeness_and_equivalence():
    from .catalog import borel_projector

    e3 = left_mult(3, (1, 2, 3))
    rep = completeness_rank(manakov_family(3, (1, 2, 3)), e3.pencil, _CFG)
    assert (rep.max_rank, rep.target) == (6, 6) and rep.complete
    b3 = borel_family(3)
    rep = completeness_rank(b3, borel_projector(3).pencil, _CFG)
    assert (rep.max_rank, rep.target) == (5, 5)
    rep = completeness_rank(borel_family(2), borel_projector(2).pencil, _CFG)
    assert (rep.max_rank, rep.target) == (2, 2)
    e2 = left_mult(2, (1, 2))
    just_tr = IntegralFamily(
        'manual', 4, (FamilyMember('tr', _gl_x(2).trace(), 1, 0),)
    )
    rep = completeness_rank(just_tr, e2.pencil, _CFG)
    assert (rep.max_rank, rep.target) == (1, 3) and not rep.complete
    for n in (2, 3):
        a = tuple(range(1, n + 1))
        h, f = manakov_family(n, a), resolvent_family(n, a)
        assert family_span_equivalence(h, h, _CFG).equivalent
        assert family_span_equivalence(h, f, _CFG).equivalent
    h2 = manakov_family(2, (1, 2))
    grown = h2.with_members([FamilyMember('x12', MultiPoly.var(4, 2), 1, 0)])
    assert not family_span_equivalence(h2, grown, _CFG).equivalent


def test_saturation_order():
    e = left_mult(2, (1, 2))
    tr, tr2 = _gl_x(2).trace_powers(2)
    rep = saturation_order(e.algebra, e.operator, [tr, tr2], 3, _CFG)
    assert rep.ranks[0] == 2 and rep.ranks[-1] == 3
    assert rep.order == 1
