#!/usr/bin/env python3
'''
Exact checks for Lie-Poisson pencils built from Nijenhuis operators: rank
profiles and Kronecker certificates, the coisotropy criteria, first integrals
and their involutivity, completeness and recursion relations.

Algebras and operators are JSON files (see `src/serialize.py`); `catalog
emit` writes the standard ones. Reports go to stdout or `-o` as canonical
JSON. Exit codes: 0 positive verdict, 1 negative or undecided, 2 bad input.

    ./pforge.py catalog emit left_mult n=3 -o gl3.json -N la.json
    ./pforge.py kronecker -i gl3.json -N la.json

PFORGE_THREADS caps the worker processes (0 = one per CPU, default 1).
'''

import sys

from src.commands import run

if __name__ == '__main__':
    sys.exit(run(sys.argv, __doc__))
