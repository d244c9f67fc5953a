'''
`MultiPoly`: sparse multivariate polynomials with exact coefficients, in the
coordinates ξ_0..ξ_{n-1} of a dual space.

The terms live in a read-only `MappingProxyType` from exponent tuples to
nonzero rationals, and the hash is that of the frozen item set, so polynomials
can be dict keys and cache keys.
'''

from fractions import Fraction
from functools import reduce
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .common import Rational, parse_rational, rat, rational_str
from .errors import DimensionMismatch, MalformedInput

Exps = Tuple[int, ...]

_SCALARS = (int, Fraction)


class MultiPoly:
    __slots__ = ('nvars', '_terms', '_hash')

    def __init__(
        self, nvars: int, terms: Optional[Mapping[Exps, Rational]] = None
    ):
        d = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            assert len(exps) == nvars, f'{exps} has != {nvars} variables'
            coeff = rat(coeff)
            if coeff:
                d[exps] = coeff
        self.nvars = nvars
        self._terms = MappingProxyType(d)
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, d: Dict[Exps, Rational]) -> 'MultiPoly':
        'Trusts `d`: canonical coefficients, no zeros.'
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = MappingProxyType(d)
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> 'MultiPoly':
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: Rational) -> 'MultiPoly':
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> 'MultiPoly':
        assert 0 <= i < nvars, f'variable {i} out of range({nvars})'
        return cls._raw(nvars, {tuple(int(j == i) for j in range(nvars)): 1})

    @classmethod
    def linear(
        cls, coeffs: Sequence[Rational], const: Rational = 0
    ) -> 'MultiPoly':
        n = len(coeffs)
        terms = {
            tuple(int(j == i) for j in range(n)): c
            for i, c in enumerate(coeffs)
        }
        terms[(0,) * n] = const
        return cls(n, terms)

    @property
    def terms(self) -> Mapping[Exps, Rational]:
        return self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, _SCALARS):
            other = MultiPoly.constant(self.nvars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other) -> 'MultiPoly':
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise DimensionMismatch(
                    f'Polynomials in {self.nvars} and {other.nvars} variables'
                )
            return other
        if isinstance(other, _SCALARS):
            return MultiPoly.constant(self.nvars, other)
        raise TypeError(f'Cannot combine MultiPoly with {type(other)}')

    def __add__(self, other) -> 'MultiPoly':
        other = self._coerce(other)
        d = dict(self._terms)
        for exps, c in other._terms.items():
            s = rat(d.get(exps, 0) + c)
            if s:
                d[exps] = s
            else:
                d.pop(exps, None)
        return MultiPoly._raw(self.nvars, d)

    __radd__ = __add__

    def __neg__(self) -> 'MultiPoly':
        return MultiPoly._raw(
            self.nvars, {e: -c for e, c in self._terms.items()}
        )

    def __sub__(self, other) -> 'MultiPoly':
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> 'MultiPoly':
        return self._coerce(other) - self

    def __mul__(self, other) -> 'MultiPoly':
        if isinstance(other, _SCALARS):
            other = rat(other)
            if not other:
                return MultiPoly.zero(self.nvars)
            return MultiPoly._raw(
                self.nvars,
                {e: rat(c * other) for e, c in self._terms.items()},
            )
        other = self._coerce(other)
        d: Dict[Exps, Rational] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'MultiPoly':
        assert k >= 0, f'negative power {k}'
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def degree(self) -> int:
        'Total degree; -1 for the zero polynomial.'
        return max((sum(e) for e in self._terms), default=-1)

    def derivative(self, i: int) -> 'MultiPoly':
        d = {}
        for exps, c in self._terms.items():
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                d[tuple(e)] = rat(c * exps[i])
        return MultiPoly._raw(self.nvars, d)

    def gradient(self) -> List['MultiPoly']:
        return [self.derivative(i) for i in range(self.nvars)]

    def evaluate(self, point: Sequence[Rational]) -> Rational:
        if len(point) != self.nvars:
            raise DimensionMismatch(
                f'Point of length {len(point)} for {self.nvars} variables'
            )
        total = 0
        for exps, c in self._terms.items():
            term = c
            for x, k in zip(point, exps):
                if k:
                    term *= x**k
            total += term
        return rat(total)

    def substitute(self, values: Sequence['MultiPoly']) -> 'MultiPoly':
        'Composition: variable i becomes `values[i]`.'
        assert len(values) == self.nvars, (len(values), self.nvars)
        assert values, 'cannot substitute into a 0-variable polynomial'
        m = values[0].nvars
        powers: Dict[Tuple[int, int], MultiPoly] = {}

        def power(i, k):
            if (i, k) not in powers:
                powers[i, k] = values[i] ** k
            return powers[i, k]

        total = MultiPoly.zero(m)
        for exps, c in self._terms.items():
            term = MultiPoly.constant(m, c)
            for i, k in enumerate(exps):
                if k:
                    term = term * power(i, k)
            total = total + term
        return total

    def with_extra_vars(self, k: int) -> 'MultiPoly':
        'Same polynomial with `k` unused variables appended.'
        return MultiPoly._raw(
            self.nvars + k,
            {e + (0,) * k: c for e, c in self._terms.items()},
        )

    def coefficient(self, var: int, power: int) -> 'MultiPoly':
        'Coefficient of ξ_var^power, as a polynomial in the other variables.'
        d = {}
        for exps, c in self._terms.items():
            if exps[var] == power:
                d[exps[:var] + exps[var + 1 :]] = c
        return MultiPoly._raw(self.nvars - 1, d)

    def homogeneous_components(self) -> Dict[int, 'MultiPoly']:
        parts: Dict[int, Dict[Exps, Rational]] = {}
        for exps, c in self._terms.items():
            parts.setdefault(sum(exps), {})[exps] = c
        return {
            deg: MultiPoly._raw(self.nvars, d)
            for deg, d in sorted(parts.items())
        }

    def sorted_terms(self) -> List[Tuple[Exps, Rational]]:
        'Graded-lex: higher total degree first, then lexicographically larger'
        return sorted(
            self._terms.items(), key=lambda t: (-sum(t[0]), [-x for x in t[0]])
        )

    def to_json(self):
        return {
            'nvars': self.nvars,
            'terms': [
                {'exps': list(e), 'coeff': rational_str(c)}
                for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, d, pointer: str = '') -> 'MultiPoly':
        try:
            nvars = int(d['nvars'])
            terms: Dict[Exps, Rational] = {}
            for idx, t in enumerate(d['terms']):
                exps = tuple(int(x) for x in t['exps'])
                if len(exps) != nvars or any(x < 0 for x in exps):
                    raise MalformedInput(
                        f'Bad exponent vector {list(exps)}',
                        pointer=f'{pointer}/terms/{idx}/exps',
                    )
                coeff = parse_rational(t['coeff'])
                terms[exps] = rat(terms.get(exps, 0) + coeff)
        except (KeyError, TypeError, ValueError) as ex:
            raise MalformedInput(
                f'Bad polynomial: {ex}', pointer=pointer or '/'
            ) from ex
        return cls(nvars, terms)

    def format(self, names: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return '0'
        names = names or [f'x{i}' for i in range(self.nvars)]
        out = []
        for exps, c in self.sorted_terms():
            mono = '*'.join(
                n if k == 1 else f'{n}^{k}'
                for n, k in zip(names, exps)
                if k
            )
            if not mono:
                out.append(rational_str(c))
            elif c == 1:
                out.append(mono)
            elif c == -1:
                out.append(f'-{mono}')
            else:
                out.append(f'{rational_str(c)}*{mono}')
        return ' + '.join(out).replace('+ -', '- ')

    def __repr__(self):
        return f'MultiPoly({self.nvars}, {self.format()})'


def poly_sum(polys: Iterable[MultiPoly], nvars: int) -> MultiPoly:
    return reduce(lambda a, b: a + b, polys, MultiPoly.zero(nvars))


class PolyMatrix:
    'Square matrix of `MultiPoly`, just enough for traces of powers.'

    def __init__(self, rows: Sequence[Sequence[MultiPoly]]):
        self.rows = [list(r) for r in rows]
        self.n = len(self.rows)
        assert all(len(r) == self.n for r in self.rows), 'not square'
        self.nvars = self.rows[0][0].nvars if self.n else 0

    @classmethod
    def from_scalars(cls, a, nvars: int) -> 'PolyMatrix':
        return cls([[MultiPoly.constant(nvars, x) for x in row] for row in a])

    def __add__(self, other: 'PolyMatrix') -> 'PolyMatrix':
        return PolyMatrix(
            [
                [x + y for x, y in zip(r1, r2)]
                for r1, r2 in zip(self.rows, other.rows)
            ]
        )

    def __matmul__(self, other: 'PolyMatrix') -> 'PolyMatrix':
        n = self.n
        zero = MultiPoly.zero(self.nvars)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def scale(self, s) -> 'PolyMatrix':
        return PolyMatrix([[x * s for x in row] for row in self.rows])

    def trace(self) -> MultiPoly:
        return poly_sum((self.rows[i][i] for i in range(self.n)), self.nvars)

    def trace_powers(self, kmax: int) -> List[MultiPoly]:
        'Tr(M^k) for k = 1..kmax'
        out = []
        power = self
        for k in range(1, kmax + 1):
            if k > 1:
                power = power @ self
            out.append(power.trace())
        return out


def test_arithmetic_and_identities():
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert p - p == MultiPoly.zero(2) and not (p - p)
    assert (x + 1) * (x - 1) == x**2 - 1
    assert p.degree() == 2 and MultiPoly.zero(2).degree() == -1
    assert hash(x + y) == hash(y + x)
    assert {x + y: 1}[y + x] == 1
    assert Fraction(1, 2) * x == x * Fraction(1, 2)
    assert (3 * x).terms == {(1, 0): 3}


def test_calculus_and_evaluation():
    x, y, z = (MultiPoly.var(3, i) for i in range(3))
    f = x**2 * y + 3 * z - 5
    assert f.derivative(0) == 2 * x * y
    assert f.derivative(2) == MultiPoly.constant(3, 3)
    assert f.gradient()[1] == x**2
    assert f.evaluate([2, 3, Fraction(1, 3)]) == 12 + 1 - 5
    # Exact central differences recover the derivative of a quadratic
    g = x**2 + x * y
    h = Fraction(1, 7)
    pt = [Fraction(2, 3), 5, 0]
    plus, minus = list(pt), list(pt)
    plus[0] += h
    minus[0] -= h
    diff = (g.evaluate(plus) - g.evaluate(minus)) / (2 * h)
    assert diff == g.derivative(0).evaluate(pt)
    # ... and of a cubic up to h^2 f_xxx / 6, which is zero here
    k = x**2 * y + x * z
    diff = (k.evaluate(plus) - k.evaluate(minus)) / (2 * h)
    assert diff == k.derivative(0).evaluate(pt)
    k = x**3 * y  # h^2 f_xxx / 6 = h^2 y
    diff = (k.evaluate(plus) - k.evaluate(minus)) / (2 * h)
    assert diff == k.derivative(0).evaluate(pt) + h**2 * 5


def test_substitute_coefficient_components():
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    f = x * y + y**2
    # x -> y, y -> x + y
    assert f.substitute([y, x + y]) == y * (x + y) + (x + y) ** 2
    lam = MultiPoly.var(3, 2)
    g = f.with_extra_vars(1) * (1 + lam) ** 2
    assert g.coefficient(2, 1) == 2 * f
    assert g.coefficient(2, 3) == MultiPoly.zero(2)
    parts = (f + x + 7).homogeneous_components()
    assert sorted(parts) == [0, 1, 2] and parts[2] == f


def test_serialization_and_format():
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    f = Fraction(-1, 2) * x * y + y**3 + 4
    assert [e for e, _ in f.sorted_terms()] == [(0, 3), (1, 1), (0, 0)]
    assert MultiPoly.from_json(f.to_json()) == f
    assert f.format(['a', 'b']) == 'b^3 - 1/2*a*b + 4'
    try:
        short = {'exps': [1], 'coeff': '1'}
        MultiPoly.from_json({'nvars': 2, 'terms': [short]})
    except MalformedInput as ex:
        assert ex.witness['pointer'] == '/terms/0/exps'
    else:
        raise AssertionError('accepted a short exponent vector')


def test_trace_powers():
    x = [MultiPoly.var(4, i) for i in range(4)]
    m = PolyMatrix([[x[0], x[1]], [x[2], x[3]]])
    tr1, tr2 = m.trace_powers(2)
    assert tr1 == x[0] + x[3]
    assert tr2 == x[0] ** 2 + 2 * x[1] * x[2] + x[3] ** 2
