'''
Property tests over random brackets, operators, bases and polynomials.
They live apart from the modules they exercise so that hypothesis stays a
test-only dependency.
'''

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from .catalog import (
    borel_projector,
    gl,
    left_mult,
    outer_pencil,
    sl,
    sl2_projector,
    so,
)
from .common import PointSamplerConfig
from .exact import to_array
from .integrals import apply_field, hamiltonian_field, poisson_bracket_poly
from .lie import algebra_index, bracket_apply, change_basis, check_jacobi
from .nijenhuis import (
    deformed_bracket,
    is_nijenhuis,
    resolvent_identity_check,
    shift,
)
from .poly import MultiPoly

# sl(2) with the projector onto n-: a pencil whose members are all brackets
_PENCIL = sl2_projector().pencil

# Every catalog entry that carries an operator
_OPERATORS = [
    left_mult(2),
    left_mult(3),
    borel_projector(2),
    borel_projector(3),
    sl2_projector(),
]
_PENCILS = [e.pencil for e in _OPERATORS]
_PENCILS.append(outer_pencil(3, (1, 2, 3)).pencil)
_ALGEBRAS = [gl(2).algebra, sl(2).algebra, so(3).algebra, sl(3).algebra]
_SPECTRA = {lam for e in _OPERATORS for lam in e.pencil.exceptional}
_CFG = PointSamplerConfig(seed=11, samples=16, coord_bound=100)

_EXPS = st.tuples(*[st.integers(0, 2)] * 3).filter(lambda e: sum(e) <= 3)
_MEMBERS = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(any)
_RATIONALS = st.fractions(-10, 10, max_denominator=12)
_RATIONAL_MEMBERS = st.tuples(_RATIONALS, _RATIONALS).filter(any)
_REGULAR = _RATIONALS.filter(lambda x: x not in _SPECTRA)


def _vectors(n: int):
    return st.lists(_RATIONALS, min_size=n, max_size=n)


@st.composite
def invertible(draw, n: int):
    'L·U with unit lower L and upper U with nonzero diagonal'
    ints = st.integers(-3, 3)
    low = [[0] * n for _ in range(n)]
    up = [[0] * n for _ in range(n)]
    for i in range(n):
        low[i][i] = 1
        up[i][i] = draw(st.sampled_from([-2, -1, 1, 2]))
        for j in range(n):
            if j < i:
                low[i][j] = draw(ints)
            elif j > i:
                up[i][j] = draw(ints)
    return (to_array(low) @ to_array(up)).tolist()


@st.composite
def polys(draw):
    terms = draw(st.dictionaries(_EXPS, st.integers(-5, 5), max_size=4))
    return MultiPoly(3, terms)


@st.composite
def linear_polys(draw):
    coeffs = draw(st.lists(st.integers(-5, 5), min_size=3, max_size=3))
    return MultiPoly.linear(coeffs)


@settings(max_examples=20, deadline=None)
@given(_MEMBERS)
def test_pencil_members_are_lie_brackets(s):
    assert not check_jacobi(_PENCIL.member(s))


@settings(max_examples=20, deadline=None)
@given(polys(), polys(), polys(), _MEMBERS)
def test_bracket_is_a_biderivation(f, g, h, s):
    def br(a, b):
        return poisson_bracket_poly(_PENCIL, s, a, b)

    assert br(f, g) == -br(g, f)
    assert br(f, g + h) == br(f, g) + br(f, h)
    assert br(f, g * h) == br(f, g) * h + g * br(f, h)


@settings(max_examples=20, deadline=None)
@given(linear_polys(), linear_polys(), linear_polys(), _MEMBERS)
def test_bracket_jacobi_on_linear_functions(f, g, h, s):
    def br(a, b):
        return poisson_bracket_poly(_PENCIL, s, a, b)

    assert br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g)) == 0


@settings(max_examples=10, deadline=None)
@given(polys(), polys(), _MEMBERS)
def test_field_contracts_to_bracket(f, g, s):
    X = hamiltonian_field(_PENCIL, s, f)
    assert apply_field(X, g) == poisson_bracket_poly(_PENCIL, s, g, f)


@settings(max_examples=20, deadline=None)
@given(_RATIONAL_MEMBERS)
def test_catalog_pencil_members_are_lie_brackets(s):
    for p in _PENCILS:
        assert not check_jacobi(p.member(s)), (p.origin, s)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_bracket_is_antisymmetric(data):
    c = data.draw(st.sampled_from(_ALGEBRAS))
    x, y = data.draw(_vectors(c.dim)), data.draw(_vectors(c.dim))
    assert bracket_apply(c, x, y) == [-v for v in bracket_apply(c, y, x)]


@settings(max_examples=10, deadline=None)
@given(invertible(3), invertible(4))
def test_index_survives_change_of_basis(p3, p4):
    for c, P, index in [
        (sl(2).algebra, p3, 1),
        (gl(2).algebra, p4, 2),
    ]:
        assert algebra_index(change_basis(c, P), _CFG).index == index, P


@settings(max_examples=10, deadline=None)
@given(_RATIONALS)
def test_shifts_stay_nijenhuis(lam):
    for e in _OPERATORS:
        shifted = shift(e.operator, lam)
        assert is_nijenhuis(e.algebra, shifted), (e.name, lam)
        moved = deformed_bracket(e.algebra, shifted).c
        base = deformed_bracket(e.algebra, e.operator).c
        residual = moved - (base - lam * e.algebra.c)
        assert not np.any(residual != 0), (e.name, lam)


@settings(max_examples=10, deadline=None)
@given(_REGULAR)
def test_resolvent_identity_on_catalog(lam):
    for e in _OPERATORS:
        assert resolvent_identity_check(e.algebra, e.operator, lam), e.name


@settings(max_examples=10, deadline=None)
@given(_vectors(3), st.integers(0, 2), _RATIONALS.filter(bool))
def test_central_differences(pt, i, h):
    x, y, z = (MultiPoly.var(3, k) for k in range(3))
    # (f(p + h e_i) - f(p - h e_i)) / 2h = f_i + h^2 f_iii / 6 for cubic f
    for f in [3 * x - y + 2, x * y + z**2 - x, x**3 + 2 * x * y * z - y**2]:
        plus, minus = list(pt), list(pt)
        plus[i] += h
        minus[i] -= h
        diff = (f.evaluate(plus) - f.evaluate(minus)) / (2 * h)
        d1 = f.derivative(i)
        d3 = d1.derivative(i).derivative(i)
        assert diff == d1.evaluate(pt) + h**2 * d3.evaluate(pt) / 6
