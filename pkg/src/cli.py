import argparse
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from .common import (
    PointSamplerConfig,
    get_logger,
    init_logging,
    threads_from_env,
)
from .errors import InvalidParams

log = get_logger()


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    samples: int = 64
    coord_bound: int = 1000
    search_budget: int = 64
    output: Optional[Path] = None
    fmt: str = 'json'
    # Not part of any report: results never depend on it
    threads: int = 1

    def __post_init__(self):
        for name in ('samples', 'coord_bound', 'search_budget'):
            if getattr(self, name) < 1:
                raise InvalidParams(
                    f'{name} must be positive', **{name: getattr(self, name)}
                )
        if self.fmt not in ('json', 'text'):
            raise InvalidParams(f'Unknown format {self.fmt!r}')

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        return cls(
            seed=args.seed,
            samples=args.samples,
            coord_bound=args.coord_bound,
            search_budget=args.budget,
            output=args.output,
            fmt=args.format,
            threads=threads_from_env(),
        )

    @property
    def sampler(self) -> PointSamplerConfig:
        return PointSamplerConfig(self.seed, self.samples, self.coord_bound)

    def to_json(self):
        return {
            'seed': self.seed,
            'samples': self.samples,
            'coord_bound': self.coord_bound,
            'search_budget': self.search_budget,
        }


class CLI:
    parser: argparse.ArgumentParser
    # Parent parser with the flags every subcommand shares
    common: argparse.ArgumentParser
    args: argparse.Namespace


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument('--seed', type=int, default=RunConfig.seed)
    p.add_argument('--samples', type=int, default=RunConfig.samples)
    p.add_argument('--coord-bound', type=int, default=RunConfig.coord_bound)
    p.add_argument(
        '--budget',
        type=int,
        default=RunConfig.search_budget,
        help='Covectors tried per eigenvalue by the criterion search',
    )
    p.add_argument('-o', '--output', type=Path, help='Default: stdout')
    p.add_argument('--format', choices=['json', 'text'], default='json')
    verbosity = p.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    return p


@contextmanager
def init_cli(description: str, argv: Optional[List[str]] = None):
    if argv is None:
        argv = sys.argv

    init_logging()

    cli = CLI()

    p = argparse.ArgumentParser(
        prog=Path(argv[0]).name,
        description=description,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    cli.parser = p
    cli.common = _common_parser()
    yield cli  # Allow calling CLI to add its own args to the parser.

    cli.args = p.parse_args(argv[1:])
    if getattr(cli.args, 'verbose', False):
        logging.getLogger().setLevel(logging.DEBUG)
    elif getattr(cli.args, 'quiet', False):
        logging.getLogger().setLevel(logging.WARNING)


def test_run_config():
    with init_cli('test', ['pforge', 'x', '--seed', '7']) as cli:
        sub = cli.parser.add_subparsers(dest='command', required=True)
        sub.add_parser('x', parents=[cli.common])
    cfg = RunConfig.from_args(cli.args)
    assert cfg.seed == 7 and cfg.samples == 64 and cfg.search_budget == 64
    assert cfg.sampler == PointSamplerConfig(7, 64, 1000)
    try:
        RunConfig(samples=0)
    except InvalidParams as ex:
        assert ex.witness == {'samples': 0}
    else:
        raise AssertionError('samples=0 accepted')
