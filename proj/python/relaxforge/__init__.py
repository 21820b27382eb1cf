"""Exact verifiers for pigeonhole refutations and protocol vector families.

Artifacts are exchanged as JSON in the command-line schemas. The helpers
below wrap the string-level functions of the compiled core with dicts.
"""

import json
from fractions import Fraction

from . import _core
from ._core import RelaxforgeError, SCHEMA

__all__ = [
    "RelaxforgeError",
    "SCHEMA",
    "run",
    "qphp_problem",
    "qphp_dual",
    "verify_dual",
    "verify_primal",
    "protocol_hqfp",
    "equality_protocol",
    "equality_relation",
    "verify_gamma2",
    "one_leaves",
    "disc_uniform",
    "fraction",
]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def fraction(text):
    """Parse a rational scalar string such as "-1/2"."""
    return Fraction(text)


def run(*args):
    """Run a command line; returns (exit code, stdout, stderr)."""
    return _core.run([str(a) for a in args])


def qphp_problem(p, h, relaxed=True):
    return json.loads(_core.qphp_problem(p, h, relaxed))


def qphp_dual(p, h):
    return json.loads(_core.qphp_dual(p, h))


def verify_dual(problem, dual):
    return json.loads(_core.verify_dual(_dump(problem), _dump(dual)))


def verify_primal(problem, solution):
    return json.loads(_core.verify_primal(_dump(problem), _dump(solution)))


def protocol_hqfp(relation, structure):
    return json.loads(_core.protocol_hqfp(_dump(relation), _dump(structure)))


def equality_protocol(l, d):
    return json.loads(_core.equality_protocol(l, d))


def equality_relation(d):
    return json.loads(_core.equality_relation(d))


def verify_gamma2(protocol, relation):
    return json.loads(_core.verify_gamma2(_dump(protocol), _dump(relation)))


def one_leaves(protocol, relation):
    return _core.one_leaves(_dump(protocol), _dump(relation))


def disc_uniform(f):
    return Fraction(_core.disc_uniform([[int(v) for v in row] for row in f]))
