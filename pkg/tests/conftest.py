import os

import pytest

from kobon import sat
from kobon.cnf import SearchConfig

HAVE_SOLVER = sat.backend_available()
SLOW = os.environ.get("KOBON_SLOW") == "1"

needs_solver = pytest.mark.skipif(not HAVE_SOLVER, reason="no external SAT solver")
slow = pytest.mark.skipif(not SLOW, reason="set KOBON_SLOW=1 for long searches")

_cache = {}


def optimal_tables(n, missing=(), rot=None):
    """Enumerated tables, shared across test modules (external solver if present)."""
    key = (n, tuple(missing), rot)
    if key not in _cache:
        backend = "external" if HAVE_SOLVER else "embedded"
        _cache[key] = sat.enumerate_tables(SearchConfig(n, rot=rot, missing=missing), backend)
    return _cache[key]


@pytest.fixture(scope="session")
def tables5():
    return optimal_tables(5).tables
