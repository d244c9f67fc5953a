import inspect
import json
import logging
import os
import random
import re
import tempfile
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Union

from .errors import DimensionMismatch, InvalidParams

Rational = Union[int, Fraction]


def strip_suffix(s: str, suffix: str) -> str:
    if not suffix:
        return s  # Below, `s[:-0] != s`
    assert s.endswith(suffix)
    return s[: -len(suffix)]


def get_logger():
    return logging.getLogger(
        strip_suffix(os.path.basename(inspect.stack()[1].filename), '.py')
    )


def init_logging(level: int = logging.INFO):
    logging.basicConfig(
        level=level,
        format='\x1b[1m%(asctime)s %(levelname)s:\x1b[0m %(message)s',
    )


def rat(x) -> Rational:
    '''
    Canonical exact scalar: `int` when integral, else a reduced `Fraction`.
    Integral values stay `int` because Python ints are an order of magnitude
    faster than `Fraction` in the elimination loops.
    '''
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        raise TypeError(f'Refusing to convert float {x!r} to a rational')
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f


# Accepts "p/q", integers and finite decimals; no exponents, no NaN.
_RATIONAL_RE = re.compile(r'\s*-?[0-9]+(/[0-9]+|\.[0-9]*)?\s*')


def parse_rational(s: Union[str, int]) -> Rational:
    "Parse '3/4', '-2' or '0.125' exactly. Floats are never involved."
    if isinstance(s, bool):
        raise ValueError(f'Not a rational: {s!r}')
    if isinstance(s, int):
        return s
    if not isinstance(s, str) or not _RATIONAL_RE.fullmatch(s):
        raise ValueError(f'Not a rational: {s!r}')
    f = Fraction(s.strip())  # Decimal strings are parsed exactly
    return rat(f)


def rational_str(x: Rational) -> str:
    "Canonical text: '3', '-1/2'. Used in every serialized report."
    return str(rat(x))


def to_jsonable(obj):
    '''
    Non-integral rationals become canonical 'p/q' strings and integers stay
    JSON integers (`rat` keeps integral values as int). Tuples become lists.
    '''
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, 'to_json'):
        return to_jsonable(obj.to_json())
    raise TypeError(f'Cannot serialize {type(obj).__name__}: {obj!r}')


def dump_canonical(obj) -> str:
    'Byte-stable JSON: sorted keys, canonical rationals, trailing newline.'
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + '\n'


@dataclass(frozen=True)
class PointSamplerConfig:
    '''
    Randomized genericity: points have integer coordinates drawn uniformly
    from [-coord_bound, coord_bound], `samples` of them, from `seed`.
    '''

    seed: int = 42
    samples: int = 64
    coord_bound: int = 1000

    def __post_init__(self):
        assert self.samples >= 1, f'samples must be >= 1: {self.samples}'
        assert self.coord_bound >= 1, f'bad coord_bound: {self.coord_bound}'

    def rng(self, salt: int = 0) -> random.Random:
        return random.Random(self.seed * 1000003 + salt)

    def doubled(self) -> 'PointSamplerConfig':
        return replace(self, coord_bound=2 * self.coord_bound)

    def points(self, dim: int, salt: int = 0) -> List[List[int]]:
        rng = self.rng(salt)
        b = self.coord_bound
        return [
            [rng.randint(-b, b) for _ in range(dim)]
            for _ in range(self.samples)
        ]

    def to_json(self):
        return {
            'seed': self.seed,
            'samples': self.samples,
            'coord_bound': self.coord_bound,
        }


def coord_bound_schedule(coord_bound: int) -> List[int]:
    'Witness searches try small coordinates first: 10, 100, ..., coord_bound'
    schedule = []
    b = 10
    while b < coord_bound:
        schedule.append(b)
        b *= 10
    schedule.append(coord_bound)
    return schedule


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get('PFORGE_THREADS')
    if raw is None or raw.strip() == '':
        return default
    try:
        n = int(raw)
    except ValueError:
        n = -1
    if n < 0:
        raise InvalidParams(
            'PFORGE_THREADS must be an integer >= 0', PFORGE_THREADS=raw
        )
    return n or (os.cpu_count() or 1)


def parallel_map(
    fn: Callable, items: Iterable, threads: Optional[int] = None
) -> list:
    '''
    Order-preserving map. `fn` must be a picklable module-level function
    when more than one worker is used.
    '''
    items = list(items)
    if threads is None:
        threads = threads_from_env()
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // 16)))


def as_vector(v: Sequence, n: int, what: str = 'vector') -> List[Rational]:
    v = [rat(x) for x in v]
    if len(v) != n:
        raise DimensionMismatch(f'{what} has length {len(v)}, expected {n}')
    return v


@contextmanager
def temp_dir(**kwargs) -> Path:
    with tempfile.TemporaryDirectory(**kwargs) as td:
        yield Path(td)


def test_parse_rational():
    assert parse_rational('3/4') == Fraction(3, 4)
    assert parse_rational('-2') == -2
    assert isinstance(parse_rational('6/3'), int)
    assert parse_rational('0.125') == Fraction(1, 8)
    assert parse_rational(7) == 7
    # Exact where float would not be
    assert parse_rational('0.1') == Fraction(1, 10)
    for bad in ['1e3', 'nan', '1/0x', '', True, 1.5]:
        try:
            parse_rational(bad)
        except (ValueError, ZeroDivisionError):
            pass
        else:
            raise AssertionError(f'accepted {bad!r}')


def test_rational_str_and_canonical_json():
    assert rational_str(Fraction(4, 2)) == '2'
    assert rational_str(Fraction(-1, 2)) == '-1/2'
    assert dump_canonical({'b': Fraction(1, 3), 'a': [1, (2, True)]}) == (
        '{\n  "a": [\n    1,\n    [\n      2,\n      true\n    ]\n  ],\n'
        '  "b": "1/3"\n}\n'
    )


def test_point_sampler_is_deterministic():
    cfg = PointSamplerConfig(seed=7, samples=3, coord_bound=5)
    assert cfg.points(4) == cfg.points(4)
    assert cfg.points(4) != cfg.points(4, salt=1)
    assert all(-5 <= x <= 5 for p in cfg.points(4) for x in p)
    assert cfg.doubled().coord_bound == 10
    assert coord_bound_schedule(1000) == [10, 100, 1000]
    assert coord_bound_schedule(5) == [5]
    assert coord_bound_schedule(250) == [10, 100, 250]


def test_parallel_map_keeps_order():
    assert parallel_map(abs, [-3, 2, -1], threads=1) == [3, 2, 1]


def test_threads_from_env(monkeypatch):
    monkeypatch.delenv('PFORGE_THREADS', raising=False)
    assert threads_from_env() == 1
    monkeypatch.setenv('PFORGE_THREADS', '3')
    assert threads_from_env() == 3
    monkeypatch.setenv('PFORGE_THREADS', '0')
    assert threads_from_env() == (os.cpu_count() or 1)
    for bad in ['abc', '-1', '2.5']:
        monkeypatch.setenv('PFORGE_THREADS', bad)
        try:
            threads_from_env()
        except InvalidParams as ex:
            assert ex.witness == {'PFORGE_THREADS': bad}
        else:
            raise AssertionError(f'accepted {bad!r}')
