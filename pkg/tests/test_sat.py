import itertools
import os
import stat

import pytest
from hypothesis import given, settings, strategies as st

from kobon import sat
from kobon.cnf import CnfFormula, SearchConfig, build_catalog, encode, exclusion_clause, table_assignment
from kobon.sat import SAT, UNKNOWN, UNSAT, BackendError, check_model, enumerate_tables, solve, solve_embedded

from conftest import needs_solver, optimal_tables


def formula(clauses, nv=None):
    f = CnfFormula(nv or max((abs(x) for c in clauses for x in c), default=0))
    f.add_family("t", clauses)
    return f


def brute_force(f):
    for bits in itertools.product([False, True], repeat=f.var_count):
        val = (False,) + bits
        if check_model(f.clauses, val) is None:
            return True
    return False


def test_trivial_embedded():
    out = solve_embedded(formula([(1,)]))
    assert out.status == SAT and out.value(1)
    assert solve_embedded(formula([(1,), (-1,)])).status == UNSAT
    assert solve_embedded(formula([()], 1)).status == UNSAT
    assert solve_embedded(formula([], 3)).status == SAT


def test_embedded_stats():
    out = solve_embedded(encode(SearchConfig(5)))
    assert out.status == SAT
    assert set(out.stats) >= {"decisions", "propagations", "wall_time"}


@st.composite
def random_cnf(draw):
    nv = draw(st.integers(1, 9))
    lit = st.integers(1, nv).flatmap(lambda v: st.sampled_from([v, -v]))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=4), max_size=40))
    return formula([tuple(c) for c in clauses], nv)


@settings(max_examples=300, deadline=None)
@given(random_cnf())
def test_embedded_matches_brute_force(f):
    out = solve_embedded(f)
    assert (out.status == SAT) == brute_force(f)
    if out.status == SAT:
        assert check_model(f.clauses, out.assignment) is None


def test_embedded_n5_exclusion_unsat():
    cfg = SearchConfig(5)
    cat = build_catalog(cfg)
    f = encode(cfg)
    seen = set()
    while True:
        out = solve_embedded(f)
        if out.status == UNSAT:
            break
        key = tuple(out.assignment[1:cat.counts["A"] + 1])
        assert key not in seen
        seen.add(key)
        from kobon.cnf import decode_model
        f.add_family("15", [exclusion_clause(decode_model(out.assignment, cat), cat)])
    # all labelings of the single 5-line solution that satisfy the formula
    assert len(seen) == 2


def test_check_model_finds_violation():
    assert check_model([(1, 2), (-1,)], (False, True, False)) == 1
    assert check_model([(1, 2), (-1,)], (False, False, True)) is None


def write_solver(tmp_path, body):
    p = tmp_path / "fake_solver"
    p.write_text("#!/bin/sh\n" + body)
    p.chmod(p.stat().st_mode | stat.S_IEXEC)
    return str(p)


def test_fake_solver_sat(tmp_path):
    exe = write_solver(tmp_path, 'echo "s SATISFIABLE"\necho "v 1 -2 0"\nexit 10\n')
    out = solve(formula([(1,), (-2,)]), "external", solver=exe)
    assert out.status == SAT and out.assignment == (False, True, False)


def test_fake_solver_unsat_and_unknown(tmp_path):
    exe = write_solver(tmp_path, 'echo "s UNSATISFIABLE"\nexit 20\n')
    assert solve(formula([(1,)]), "external", solver=exe).status == UNSAT
    exe = write_solver(tmp_path, 'echo "s UNKNOWN"\nexit 0\n')
    assert solve(formula([(1,)]), "external", solver=exe).status == UNKNOWN


def test_fake_solver_wrong_model_rejected(tmp_path):
    exe = write_solver(tmp_path, 'echo "s SATISFIABLE"\necho "v -1 0"\nexit 10\n')
    with pytest.raises(BackendError):
        solve(formula([(1,)]), "external", solver=exe)


def test_fake_solver_garbage(tmp_path):
    exe = write_solver(tmp_path, 'echo "segfault" >&2\nexit 139\n')
    with pytest.raises(BackendError):
        solve(formula([(1,)]), "external", solver=exe)
    exe = write_solver(tmp_path, 'echo "s SATISFIABLE"\nexit 10\n')
    with pytest.raises(BackendError):
        solve(formula([(1,)]), "external", solver=exe)


def test_missing_solver_path():
    with pytest.raises(BackendError):
        solve(formula([(1,)]), "external", solver="/nonexistent/solver")


def test_solver_env_var(tmp_path, monkeypatch):
    exe = write_solver(tmp_path, 'echo "s UNSATISFIABLE"\nexit 20\n')
    monkeypatch.setenv(sat.SOLVER_ENV, exe)
    assert sat.find_solver() == exe


def test_enumeration_error_keeps_partial_results(tmp_path):
    exe = write_solver(tmp_path, 'exit 3\n')
    res = enumerate_tables(SearchConfig(5), "external", solver=exe)
    assert res.tables == [] and not res.exhaustive and res.error


def test_enumeration_limit():
    res = enumerate_tables(SearchConfig(5), "embedded", limit=1)
    assert len(res.tables) == 1 and not res.exhaustive


@needs_solver
@pytest.mark.parametrize("n", [3, 5])
def test_backends_agree(n):
    f = encode(SearchConfig(n))
    assert solve(f, "embedded").status == solve(f, "external").status == SAT
    e = enumerate_tables(SearchConfig(n), "embedded", block="single")
    x = enumerate_tables(SearchConfig(n), "external", block="single")
    assert e.exhaustive and x.exhaustive and len(e.tables) == len(x.tables)


@needs_solver
def test_external_unsat_n11():
    assert solve(encode(SearchConfig(11)), "external").status == UNSAT


@needs_solver
def test_enumeration_n9():
    res = optimal_tables(9)
    assert res.exhaustive and len(res.tables) == 1
    assert res.clause_count == 30102


@needs_solver
def test_blocking_soundness_single_mode():
    # every solution is a distinct A-assignment; n=7 with L={3,6}
    cfg = SearchConfig(7, missing=(3, 6))
    res = enumerate_tables(cfg, "external", block="single")
    rows = [t.rows for t in res.tables]
    assert res.exhaustive and len(rows) == len(set(rows))
    from kobon.table import canonicalize
    assert len({canonicalize(t).rows for t in res.tables}) == 1
